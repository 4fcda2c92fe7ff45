import logging
from pathlib import Path

import typer

from src.utils.cli_utils import command_errors
from src.utils.pipeline import BuildManifest, build
from src.utils.report_formatter import build_report

logger = logging.getLogger(__name__)


def build_command(
    ctx: typer.Context,
    corpus: Path = typer.Option(..., "--corpus", envvar="LANET_CORPUS", help="アノテーション済みレビューコーパス (JSONL)"),
    snapshot: Path = typer.Option(..., "--snapshot", envvar="LANET_SNAPSHOT", help="概念関係スナップショット (TSV)"),
    lexicon: Path = typer.Option(..., "--lexicon", envvar="LANET_LEXICON", help="レンマ辞書 (TSV)"),
    output: Path = typer.Option(..., "--output", "-o", envvar="LANET_GRAPH", help="出力するグラフファイル"),
    skip_filter: bool = typer.Option(False, "--skip-filter", help="CCH による関連性フィルタを省略します"),
    skip_merge: bool = typer.Option(False, "--skip-merge", help="冗長アクティビティのマージを省略します"),
    extractor: str = typer.Option("dependency", "--extractor", help="抽出方式: dependency | baseline"),
):
    """レビューコーパスから LANet を構築し、グラフファイルとビルドレポートを出力します"""
    with command_errors("build"):
        manifest = BuildManifest(
            corpus=str(corpus),
            snapshot=str(snapshot),
            lexicon=str(lexicon),
            output=str(output),
            skip_filter=skip_filter,
            skip_merge=skip_merge,
            extractor=extractor,
            log_level=(ctx.obj or {}).get("log_level", "INFO"),
        )
        result = build(manifest)
        typer.echo(build_report(result.timings, result.graph.stats()))


def setup(app: typer.Typer):
    app.command("build")(build_command)
