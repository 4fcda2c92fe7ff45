import logging
import sys
from pathlib import Path
from typing import Optional

import typer

from src.errors import EXIT_NO_RESULT
from src.utils import recommender
from src.utils.broadcast_scheduler import BroadcastScheduler
from src.utils.cli_utils import command_errors, emit_frame, format_option, graph_option, load_graph
from src.utils.report_formatter import (
    activities_frame, alternates_frame, digest_frame, digest_lines, locations_frame, render_table, uniqueness_frame,
)

logger = logging.getLogger(__name__)

query_app = typer.Typer(help="LANet に対する推薦クエリ", no_args_is_help=True)


@query_app.command("activities")
def activities(
    loc: str = typer.Option(..., "--loc", help="ロケーション ID"),
    k: int = typer.Option(5, "--k", help="上位件数"),
    concept_filter: str = typer.Option("none", "--filter", help="none | generalized | specialized"),
    m: int = typer.Option(1, "--m", help="概念スコアで選ぶ上位概念数"),
    graph: Path = graph_option(),
    fmt: str = format_option(),
):
    """ロケーションで行われている上位 k 件のアクティビティを表示します"""
    with command_errors("query activities"):
        selected = None if concept_filter == "none" else recommender.ConceptFilter(concept_filter, m)
        ranked = recommender.top_k_activities(load_graph(graph), loc, k, selected)
        emit_frame(activities_frame(ranked), fmt)


@query_app.command("locations")
def locations(
    activity: str = typer.Option(..., "--activity", help="例: 'have chicken' または '(have, chicken)'"),
    k: int = typer.Option(5, "--k", help="上位件数"),
    rank_by: str = typer.Option("AF", "--rank-by", help="AF | API"),
    graph: Path = graph_option(),
    fmt: str = format_option(),
):
    """アクティビティを行える上位 k 件のロケーションを表示します"""
    with command_errors("query locations"):
        ranked = recommender.top_k_locations(load_graph(graph), activity, k, rank_by.upper())
        emit_frame(locations_frame(ranked, rank_by.upper()), fmt)


@query_app.command("alternates")
def alternates(
    loc: str = typer.Option(..., "--loc", help="ロケーション ID"),
    k: Optional[int] = typer.Option(None, "--k", help="上位件数 (省略時は全件)"),
    graph: Path = graph_option(),
    fmt: str = format_option(),
):
    """類似度 (SI) の高い代替ロケーションと共通アクティビティを表示します"""
    with command_errors("query alternates"):
        ranked = recommender.alternate_locations(load_graph(graph), loc, k)
        emit_frame(alternates_frame(ranked), fmt)


@query_app.command("unique")
def unique(
    loc: str = typer.Option(..., "--loc", help="ロケーション ID"),
    activity: Optional[str] = typer.Option(None, "--activity", help="省略時はロケーションの全アクティビティ"),
    graph: Path = graph_option(),
    fmt: str = format_option(),
):
    """アクティビティの一意性の境界 (BoU) と距離順の代替ロケーションを表示します"""
    with command_errors("query unique"):
        lanet = load_graph(graph)
        if activity:
            reports = [recommender.uniqueness_report(lanet, loc, activity)]
        else:
            reports = [recommender.uniqueness_report(lanet, loc, name) for name, _ in lanet.activities_at(loc)]
        emit_frame(uniqueness_frame(reports), fmt)


@query_app.command("broadcast")
def broadcast(
    lat: Optional[float] = typer.Option(None, "--lat", help="中心の緯度"),
    lon: Optional[float] = typer.Option(None, "--lon", help="中心の経度"),
    loc: Optional[str] = typer.Option(None, "--loc", help="中心に使うロケーション ID (--lat/--lon の代わり)"),
    radius: float = typer.Option(..., "--radius", help="半径 (m)"),
    k: int = typer.Option(3, "--k", help="ロケーションごとの上位件数"),
    interval: Optional[float] = typer.Option(None, "--interval", help="再配信の間隔 (秒)"),
    count: Optional[int] = typer.Option(None, "--count", help="配信回数"),
    graph: Path = graph_option(),
    fmt: str = typer.Option("records", "--format", "-f", help="records | table"),
):
    """中心から半径内のロケーションの人気アクティビティをダイジェストとして配信します"""
    with command_errors("query broadcast"):
        lanet = load_graph(graph)
        if loc is not None:
            node = lanet.location(loc)
            center = (node["Latitude"], node["Longitude"])
        elif lat is not None and lon is not None:
            center = (lat, lon)
        else:
            raise ValueError("either --loc or both --lat and --lon are required")

        def sink(digest):
            if fmt == "table":
                typer.echo(render_table(digest_frame(digest)))
            else:
                for line in digest_lines(digest):
                    typer.echo(line)
            sys.stdout.flush()

        scheduler = BroadcastScheduler(lanet, center, radius, k, sink, count)
        if interval is None:
            scheduler.emit()
        else:
            if interval <= 0:
                raise ValueError("--interval must be positive")
            scheduler.run(interval)
        if not any(scheduler.emitted):
            raise typer.Exit(code=EXIT_NO_RESULT)


@query_app.command("recommend")
def recommend(
    activity: str = typer.Option(..., "--activity", help="例: 'have dinner'"),
    candidates: Optional[str] = typer.Option(None, "--candidates", help="候補ロケーション ID (カンマ区切り、省略時は全件)"),
    graph: Path = graph_option(),
):
    """候補の中で AF が最も高いロケーションを 1 件推薦します"""
    with command_errors("query recommend"):
        lanet = load_graph(graph)
        pool = [c.strip() for c in candidates.split(",") if c.strip()] if candidates else lanet.location_ids()
        if not pool:
            raise ValueError("--candidates must not be empty")
        chosen = recommender.recommend_location(lanet, activity, pool)
        if chosen is None:
            typer.echo(f"no candidate supports {activity}", err=True)
            raise typer.Exit(code=EXIT_NO_RESULT)
        typer.echo(chosen)


def setup(app: typer.Typer):
    app.add_typer(query_app, name="query")
