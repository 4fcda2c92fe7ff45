import json
from typing import Iterable, List

import pandas as pd
from tabulate import tabulate

from src.utils.geo_utils import format_distance
from src.utils.recommender import BroadcastDigest, RankedList, UniquenessReport

TABLE_FORMAT = "simple"


def _score(value) -> str:
    return f"{value:.4f}" if isinstance(value, float) else str(value)


def activities_frame(ranked: RankedList) -> pd.DataFrame:
    rows = [
        {
            "rank": i,
            "activity": e.item,
            "AF": int(e.score),
            "API": e.details["API"],
            "GC": e.details["GC"],
            "SC": e.details["SC"],
            "BoU": format_distance(e.details["BoU"]),
        }
        for i, e in enumerate(ranked, 1)
    ]
    return pd.DataFrame(rows, columns=["rank", "activity", "AF", "API", "GC", "SC", "BoU"])


def locations_frame(ranked: RankedList, rank_by: str) -> pd.DataFrame:
    rows = [
        {
            "rank": i,
            "location_id": e.item,
            "name": e.details["Name"],
            "activity": e.details["Activity"],
            "AF": e.details["AF"],
            "API": e.details["API"],
        }
        for i, e in enumerate(ranked, 1)
    ]
    return pd.DataFrame(rows, columns=["rank", "location_id", "name", "activity", "AF", "API"])


def alternates_frame(ranked: RankedList) -> pd.DataFrame:
    rows = [
        {
            "rank": i,
            "location_id": e.item,
            "SI": e.score,
            "distance": format_distance(e.details["Distance"]),
            "common_activities": ", ".join(e.details["CAL"]),
        }
        for i, e in enumerate(ranked, 1)
    ]
    return pd.DataFrame(rows, columns=["rank", "location_id", "SI", "distance", "common_activities"])


def uniqueness_frame(reports: Iterable[UniquenessReport]) -> pd.DataFrame:
    """One row per activity: alternatives by distance, BoU, nearest alternative."""
    rows = [
        {
            "activity": r.activity_name,
            "alternatives": ", ".join(loc for loc, _ in r.alternatives) or "-",
            "BoU": format_distance(r.bou),
            "nearest": r.nearest_alternative or "-",
        }
        for r in reports
    ]
    return pd.DataFrame(rows, columns=["activity", "alternatives", "BoU", "nearest"])


def digest_frame(digest: BroadcastDigest) -> pd.DataFrame:
    rows = []
    for entry in digest.entries:
        for i, a in enumerate(entry.activities, 1):
            rows.append({
                "location_id": entry.location_id,
                "name": entry.name,
                "distance": format_distance(entry.distance),
                "rank": i,
                "activity": a["activity"],
                "AF": int(a["AF"]),
                "BoU": format_distance(a["BoU"]),
            })
    return pd.DataFrame(rows, columns=["location_id", "name", "distance", "rank", "activity", "AF", "BoU"])


def digest_lines(digest: BroadcastDigest) -> List[str]:
    return [json.dumps(r, sort_keys=True, ensure_ascii=False) for r in digest.to_records()]


def render_table(frame: pd.DataFrame) -> str:
    if frame.empty:
        return "(no rows)"
    return tabulate(
        [[_score(v) for v in row] for row in frame.itertuples(index=False)],
        headers=list(frame.columns),
        tablefmt=TABLE_FORMAT,
    )


def stats_line(stats: dict) -> str:
    return (
        f"{stats['location_nodes']} location nodes, {stats['activity_nodes']} activity nodes "
        f"and total {stats['links']} links"
    )


def build_report(timings, stats: dict) -> str:
    rows = [[t.stage, f"{t.seconds:.3f}", t.summary] for t in timings]
    table = tabulate(rows, headers=["stage", "seconds", "result"], tablefmt=TABLE_FORMAT)
    return f"{table}\n\n{stats_line(stats)} ({stats['al_links']} Is_Performed_At, {stats['il_links']} Is_Similar_To)"
