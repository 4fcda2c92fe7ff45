import logging
from pathlib import Path
from typing import Optional

import typer

from src.corpus import LemmaLexicon, load_corpus, load_ground_truth, load_lexicon, load_relation_snapshot
from src.utils import evaluation
from src.utils.cli_utils import command_errors, emit_frame, format_option, graph_option, load_graph
from src.utils.merger import SenseIndex

logger = logging.getLogger(__name__)

eval_app = typer.Typer(help="評価実験 (accuracy | redundancy | rankshift | winloss)", no_args_is_help=True)


def _baseline_option(help_text: str):
    return typer.Option(..., "--baseline", exists=True, dir_okay=False, readable=True, help=help_text)


def _output_option():
    return typer.Option(None, "--output", "-o", help="CSV の出力先 (省略時は標準出力)")


@eval_app.command("accuracy")
def accuracy(
    graph: Path = graph_option(),
    ground_truth: Path = typer.Option(..., "--ground-truth", exists=True, dir_okay=False, help="正解アクティビティ (TSV)"),
    lexicon: Optional[Path] = typer.Option(None, "--lexicon", envvar="LANET_LEXICON", help="正解の原形化に使うレンマ辞書"),
    corpus: Optional[Path] = typer.Option(None, "--corpus", help="ロケーション ID の検証に使うコーパス (省略時はグラフ)"),
    output: Optional[Path] = _output_option(),
    fmt: str = format_option(),
):
    """ロケーションごとの抽出精度 |Aset ∩ GT| / |Aset| を計算します"""
    with command_errors("eval accuracy"):
        lanet = load_graph(graph)
        lex = load_lexicon(str(lexicon)) if lexicon else LemmaLexicon()
        ids = [l.location_id for l in load_corpus(str(corpus))] if corpus else lanet.location_ids()
        gt = load_ground_truth(str(ground_truth), lex, ids)
        emit_frame(evaluation.accuracy_frame(lanet.activity_sets(), gt), fmt, output)


@eval_app.command("redundancy")
def redundancy(
    graph: Path = graph_option("マージ済みのグラフ"),
    baseline: Path = _baseline_option("--skip-merge で構築したグラフ"),
    snapshot: Optional[Path] = typer.Option(None, "--snapshot", envvar="LANET_SNAPSHOT", help="マージ後の残存冗長数の計算に使うスナップショット"),
    output: Optional[Path] = _output_option(),
    fmt: str = format_option(),
):
    """マージ前後の冗長アクティビティ数を数えます"""
    with command_errors("eval redundancy"):
        sense_index = SenseIndex(load_relation_snapshot(str(snapshot))) if snapshot else None
        frame = evaluation.redundancy_frame(
            load_graph(baseline).activity_sets(), load_graph(graph).activity_sets(), sense_index,
        )
        emit_frame(frame, fmt, output)


@eval_app.command("rankshift")
def rankshift(
    graph: Path = graph_option(),
    baseline: Path = _baseline_option("--extractor baseline で構築したグラフ"),
    k: int = typer.Option(20, "--k", help="比較する上位件数"),
    output: Optional[Path] = _output_option(),
    fmt: str = format_option(),
):
    """上位 k 件のアクティビティについてベースラインとの順位の変化を計算します"""
    with command_errors("eval rankshift"):
        if k < 1:
            raise ValueError("--k must be at least 1")
        frame = evaluation.rank_shift_frame(load_graph(graph).activity_sets(), load_graph(baseline).activity_sets(), k)
        if output is not None:
            frame.to_csv(output)
            logger.info(f"Wrote {output}")
        else:
            emit_frame(frame.reset_index(), fmt)


@eval_app.command("winloss")
def winloss(
    graph: Path = graph_option(),
    baseline: Path = _baseline_option("比較対象のグラフ"),
    output: Optional[Path] = _output_option(),
    fmt: str = format_option(),
):
    """同じクエリに対する推薦を 2 つの知識ベースで比較し、勝ち/負け/引き分けを集計します"""
    with command_errors("eval winloss"):
        system_a, system_b = load_graph(graph), load_graph(baseline)
        candidates = sorted(set(system_a.location_ids()) | set(system_b.location_ids()))
        tally = evaluation.win_loss(evaluation.query_activities(system_a, system_b), candidates, system_a, system_b)
        emit_frame(tally.to_frame(), fmt, output)


def setup(app: typer.Typer):
    app.add_typer(eval_app, name="eval")
