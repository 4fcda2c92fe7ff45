import logging
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Tuple

from src.errors import NotFoundError
from src.utils.geo_utils import alternatives_by_distance, haversine
from src.utils.lanet_graph import LANetGraph
from src.utils.text_utils import natural_key, parse_activity_name

logger = logging.getLogger(__name__)

RANK_BY = ("AF", "API")
FILTER_KINDS = ("generalized", "specialized")


@dataclass(frozen=True)
class RankedEntry:
    item: str
    score: float
    details: dict = field(default_factory=dict)


@dataclass(frozen=True)
class RankedList:
    entries: Tuple[RankedEntry, ...] = ()

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def items(self) -> List[str]:
        return [e.item for e in self.entries]


@dataclass(frozen=True)
class ConceptFilter:
    kind: str
    m: int

    def __post_init__(self):
        if self.kind not in FILTER_KINDS:
            raise ValueError(f"unknown concept filter '{self.kind}'")
        if self.m < 1:
            raise ValueError("concept filter needs m >= 1")

    @property
    def score_key(self) -> str:
        return "Generalized_Concept_Score" if self.kind == "generalized" else "Specialized_Concept_Score"


@dataclass(frozen=True)
class UniquenessReport:
    location_id: str
    activity_name: str
    bou: Optional[float]
    nearest_alternative: Optional[str]
    alternatives: Tuple[Tuple[str, float], ...] = ()


@dataclass(frozen=True)
class DigestEntry:
    location_id: str
    name: str
    distance: float
    activities: Tuple[dict, ...] = ()


@dataclass(frozen=True)
class BroadcastDigest:
    center: Tuple[float, float]
    radius: float
    entries: Tuple[DigestEntry, ...] = ()

    def location_ids(self) -> List[str]:
        return [e.location_id for e in self.entries]

    def to_records(self) -> List[dict]:
        return [
            {
                "center": list(self.center),
                "radius": self.radius,
                "location_id": e.location_id,
                "name": e.name,
                "distance": e.distance,
                "activities": list(e.activities),
            }
            for e in self.entries
        ]


def _check_k(k: int):
    if k < 0:
        raise ValueError("k must not be negative")


def top_k_activities(graph: LANetGraph, location_id: str, k: int, concept_filter: Optional[ConceptFilter] = None) -> RankedList:
    _check_k(k)
    links = graph.activities_at(location_id)

    if concept_filter is not None:
        concepts = {}
        for name, data in links:
            concept = parse_activity_name(name)[1]
            concepts[concept] = (data[concept_filter.score_key], data.get("Concept_Frequency", 0))
        top = sorted(concepts, key=lambda c: (-concepts[c][0], -concepts[c][1], c))[:concept_filter.m]
        logger.debug(f"Location {location_id}: top-{concept_filter.m} {concept_filter.kind} concepts {top}")
        links = [(name, data) for name, data in links if parse_activity_name(name)[1] in top]

    ranked = sorted(links, key=lambda x: (-x[1]["Activity_Frequency"], x[0]))[:k]
    return RankedList(tuple(
        RankedEntry(name, data["Activity_Frequency"], {
            "API": data["Activity_Popularity_Index"],
            "BoU": data["Boundary_of_Uniqueness"],
            "GC": data["Generalized_Concept_Score"],
            "SC": data["Specialized_Concept_Score"],
        })
        for name, data in ranked
    ))


def supporting_links(graph: LANetGraph, activity: str) -> List[Tuple[str, str, dict]]:
    """(location_id, activity_name, link) for every location performing `activity`, one link per location."""
    best = {}
    for name in graph.covering_names(activity):
        for location_id, data in graph.locations_for(name):
            current = best.get(location_id)
            if current is None or data["Activity_Frequency"] > current[1]["Activity_Frequency"]:
                best[location_id] = (name, data)
    return [(loc, name, data) for loc, (name, data) in sorted(best.items(), key=lambda x: natural_key(x[0]))]


def top_k_locations(graph: LANetGraph, activity: str, k: int, rank_by: str = "AF") -> RankedList:
    _check_k(k)
    if rank_by not in RANK_BY:
        raise ValueError(f"rank_by must be one of {', '.join(RANK_BY)}")
    key = "Activity_Frequency" if rank_by == "AF" else "Activity_Popularity_Index"

    links = supporting_links(graph, activity)
    ranked = sorted(links, key=lambda x: (-x[2][key], natural_key(x[0])))[:k]
    return RankedList(tuple(
        RankedEntry(loc, data[key], {
            "Activity": name,
            "Name": graph.location(loc)["Name_of_Location"],
            "AF": data["Activity_Frequency"],
            "API": data["Activity_Popularity_Index"],
        })
        for loc, name, data in ranked
    ))


def alternate_locations(graph: LANetGraph, location_id: str, k: Optional[int] = None) -> RankedList:
    neighbours = graph.similar_to(location_id)
    ranked = sorted(neighbours, key=lambda x: (-x[1]["Similarity_Index"], x[1]["Distance"], natural_key(x[0])))
    if k is not None:
        _check_k(k)
        ranked = ranked[:k]
    return RankedList(tuple(
        RankedEntry(other, data["Similarity_Index"], {
            "CAL": list(data["Common_Activity_List"]),
            "Distance": data["Distance"],
        })
        for other, data in ranked
    ))


def _distance(graph: LANetGraph, a: str, b: str) -> float:
    p, q = graph.location(a), graph.location(b)
    return haversine(p["Latitude"], p["Longitude"], q["Latitude"], q["Longitude"])


def uniqueness_report(graph: LANetGraph, location_id: str, activity: str) -> UniquenessReport:
    performed = dict(graph.activities_at(location_id))
    name = next((n for n in graph.covering_names(activity) if n in performed), None)
    if name is None:
        raise NotFoundError(f"activity '{activity}' is not performed at location {location_id}")
    link = performed[name]

    offering = {loc: frozenset({name}) for loc, _ in graph.locations_for(name)}
    distances = {loc: _distance(graph, location_id, loc) for loc in offering if loc != location_id}
    alternatives = alternatives_by_distance(location_id, name, offering, distances)
    return UniquenessReport(
        location_id, name,
        link["Boundary_of_Uniqueness"],
        link.get("Nearest_Alternative"),
        tuple(alternatives),
    )


def broadcast_digest(graph: LANetGraph, center: Tuple[float, float], radius: float, k: int) -> BroadcastDigest:
    if radius <= 0:
        raise ValueError("radius must be positive")
    _check_k(k)
    lat, lon = center
    entries = []
    for location_id in graph.location_ids():
        node = graph.location(location_id)
        distance = haversine(lat, lon, node["Latitude"], node["Longitude"])
        if distance > radius:
            continue
        top = top_k_activities(graph, location_id, k)
        entries.append(DigestEntry(
            location_id, node["Name_of_Location"], distance,
            tuple({"activity": e.item, "AF": e.score, "BoU": e.details["BoU"]} for e in top),
        ))
    entries.sort(key=lambda e: (e.distance, natural_key(e.location_id)))
    logger.debug(f"Broadcast digest at {center} r={radius}: {len(entries)} locations")
    return BroadcastDigest((lat, lon), radius, tuple(entries))


def activity_frequency(graph: LANetGraph, activity: str, location_id: str) -> int:
    for loc, _, data in supporting_links(graph, activity):
        if loc == location_id:
            return data["Activity_Frequency"]
    return 0


def recommend_location(graph: LANetGraph, activity: str, candidates: Iterable[str]) -> Optional[str]:
    """Candidate with the highest AF for `activity`, ties to the smaller location_id; None if no candidate supports it."""
    candidates = set(candidates)
    try:
        links = supporting_links(graph, activity)
    except NotFoundError:
        return None
    supported = [(loc, data["Activity_Frequency"]) for loc, _, data in links if loc in candidates]
    if not supported:
        return None
    return min(supported, key=lambda x: (-x[1], natural_key(x[0])))[0]
