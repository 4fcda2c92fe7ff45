import logging
import os
from pathlib import Path

import pandas as pd
import typer

from src.utils.cli_utils import command_errors, emit_frame, graph_option, load_graph
from src.utils.report_formatter import stats_line

logger = logging.getLogger(__name__)

export_app = typer.Typer(help="グラフを他の形式で書き出します", no_args_is_help=True)


@export_app.command("graphml")
def graphml(
    graph: Path = graph_option(),
    output: Path = typer.Option(..., "--output", "-o", help="出力する GraphML ファイル"),
):
    """型付きのノード/リンク属性を持つ GraphML として書き出します"""
    with command_errors("export graphml"):
        load_graph(graph).write_graphml(str(output))
        logger.info(f"Wrote {output}")


@export_app.command("records")
def records(
    graph: Path = graph_option(),
    output: Path = typer.Option(..., "--output", "-o", help="出力する records ファイル"),
):
    """ノード/リンクのレコード形式 (1 行 1 JSON) で書き出します"""
    with command_errors("export records"):
        size = load_graph(graph).write_records(str(output))
        logger.info(f"Wrote {output} ({size} bytes)")


@export_app.command("si-csv")
def si_csv(
    graph: Path = graph_option(),
    output: Path = typer.Option(..., "--output", "-o", help="出力する CSV ファイル"),
):
    """ロケーション間の類似度 (SI) 行列を CSV で書き出します"""
    with command_errors("export si-csv"):
        frame = load_graph(graph).similarity_frame()
        frame.index.name = "location_id"
        frame.to_csv(output)
        logger.info(f"Wrote {output} ({len(frame)}x{len(frame.columns)})")


def stats(
    graph: Path = graph_option(),
    fmt: str = typer.Option("table", "--format", "-f", help="出力形式: table | csv"),
):
    """ノード数・リンク数とロケーションごとの件数を表示します"""
    with command_errors("stats"):
        lanet = load_graph(graph)
        typer.echo(f"{stats_line(lanet.stats())} ({os.path.getsize(graph)} bytes)")
        rows = []
        for location_id in lanet.location_ids():
            node = lanet.location(location_id)
            rows.append({
                "location_id": location_id,
                "name": node["Name_of_Location"],
                "reviews": node["No_of_Reviews"],
                "activities": len(lanet.activities_at(location_id)),
                "similar_locations": len(lanet.similar_to(location_id)),
            })
        emit_frame(pd.DataFrame(rows, columns=["location_id", "name", "reviews", "activities", "similar_locations"]), fmt)


def setup(app: typer.Typer):
    app.add_typer(export_app, name="export")
    app.command("stats")(stats)
