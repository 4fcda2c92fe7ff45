import json
import logging
from typing import Dict, Iterable, List, Mapping, Optional, Tuple

import networkx as nx
import pandas as pd

from src.corpus import LocationRecord
from src.errors import AssemblyError, CorpusError, NotFoundError
from src.utils.concept_hierarchy import ConceptScore
from src.utils.extractor import ActivityRecord, ActivitySet
from src.utils.geo_utils import UNBOUNDED, BouAssignment
from src.utils.similarity import ActivityLocationMatrix, popularity_matrix
from src.utils.text_utils import natural_key, parse_activity_name, render_activity_name

logger = logging.getLogger(__name__)

LOCATION = "Location"
ACTIVITY = "Activity"
IS_PERFORMED_AT = "Is_Performed_At"
IS_SIMILAR_TO = "Is_Similar_To"

API_TOLERANCE = 1e-9


def location_node(location_id: str) -> str:
    return f"L:{location_id}"


def activity_node(activity_name: str) -> str:
    return f"A:{activity_name}"


class LANetGraph:
    """Property graph of location and activity nodes with Is_Performed_At and Is_Similar_To links."""

    def __init__(self, graph: Optional[nx.Graph] = None):
        self.graph = graph if graph is not None else nx.Graph()

    # --- construction ---------------------------------------------------------------

    def add_location(self, location: LocationRecord):
        self.graph.add_node(
            location_node(location.location_id),
            kind=LOCATION,
            Location_ID=location.location_id,
            Name_of_Location=location.name,
            Formatted_Address=location.formatted_address,
            Latitude=location.latitude,
            Longitude=location.longitude,
            Category=list(location.categories),
            No_of_Reviews=len(location.reviews),
        )

    def add_activity(self, activity_name: str):
        self.graph.add_node(activity_node(activity_name), kind=ACTIVITY, Activity_Name=activity_name)

    def link_activity(self, activity_name: str, location_id: str, **properties):
        self.graph.add_edge(activity_node(activity_name), location_node(location_id), label=IS_PERFORMED_AT, **properties)

    def link_locations(self, p: str, q: str, **properties):
        if p == q:
            raise AssemblyError(f"location {p} cannot be similar to itself")
        a, b = sorted([p, q], key=natural_key)
        self.graph.add_edge(location_node(a), location_node(b), label=IS_SIMILAR_TO, **properties)

    # --- lookups --------------------------------------------------------------------

    def location_ids(self) -> List[str]:
        ids = [d["Location_ID"] for _, d in self.graph.nodes(data=True) if d["kind"] == LOCATION]
        return sorted(ids, key=natural_key)

    def activity_names(self) -> List[str]:
        return sorted(d["Activity_Name"] for _, d in self.graph.nodes(data=True) if d["kind"] == ACTIVITY)

    def has_location(self, location_id: str) -> bool:
        return location_node(location_id) in self.graph

    def location(self, location_id: str) -> dict:
        node = location_node(location_id)
        if node not in self.graph:
            raise NotFoundError(f"unknown location '{location_id}'")
        return self.graph.nodes[node]

    def covering_names(self, query: str) -> List[str]:
        """
        Activity names answering `query`: the exact Activity_Name first, then every node with the
        same concept whose verb group holds the queried verbs (merged groups answer member queries).
        """
        try:
            verbs, concept = parse_activity_name(query)
        except ValueError as e:
            raise NotFoundError(str(e))
        canonical = render_activity_name(verbs, concept)
        exact = canonical if activity_node(canonical) in self.graph else None
        names = [exact] if exact else []
        for name in self.activity_names():
            if name == exact:
                continue
            node_verbs, node_concept = parse_activity_name(name)
            if node_concept == concept and set(verbs) <= set(node_verbs):
                names.append(name)
        if not names:
            raise NotFoundError(f"unknown activity '{query}'")
        return names

    def resolve_activity(self, query: str) -> str:
        return self.covering_names(query)[0]

    def activities_at(self, location_id: str) -> List[Tuple[str, dict]]:
        node = location_node(self.location(location_id)["Location_ID"])
        links = []
        for neighbour, data in self.graph[node].items():
            if data["label"] == IS_PERFORMED_AT:
                links.append((self.graph.nodes[neighbour]["Activity_Name"], data))
        return sorted(links, key=lambda x: x[0])

    def locations_for(self, activity_name: str) -> List[Tuple[str, dict]]:
        node = activity_node(activity_name)
        if node not in self.graph:
            raise NotFoundError(f"unknown activity '{activity_name}'")
        links = [(self.graph.nodes[n]["Location_ID"], d) for n, d in self.graph[node].items()]
        return sorted(links, key=lambda x: natural_key(x[0]))

    def similar_to(self, location_id: str) -> List[Tuple[str, dict]]:
        node = location_node(self.location(location_id)["Location_ID"])
        links = []
        for neighbour, data in self.graph[node].items():
            if data["label"] == IS_SIMILAR_TO:
                links.append((self.graph.nodes[neighbour]["Location_ID"], data))
        return sorted(links, key=lambda x: natural_key(x[0]))

    def activity_sets(self) -> Dict[str, ActivitySet]:
        """Per-location activity sets rebuilt from the AL-links."""
        sets = {}
        for location_id in self.location_ids():
            records = []
            for name, data in self.activities_at(location_id):
                verbs, concept = parse_activity_name(name)
                records.append(ActivityRecord(verbs, concept, frozenset(data["Supporting_Reviews"])))
            sets[location_id] = ActivitySet.from_records(location_id, records)
        return sets

    def link_counts(self) -> Tuple[int, int]:
        al = sum(1 for _, _, d in self.graph.edges(data=True) if d["label"] == IS_PERFORMED_AT)
        return al, self.graph.number_of_edges() - al

    def stats(self) -> dict:
        al, il = self.link_counts()
        return {
            "location_nodes": len(self.location_ids()),
            "activity_nodes": len(self.activity_names()),
            "al_links": al,
            "il_links": il,
            "links": al + il,
        }

    # --- invariants -----------------------------------------------------------------

    def validate(self, locations: Optional[Iterable[LocationRecord]] = None):
        names = {}
        for _, data in self.graph.nodes(data=True):
            if data["kind"] == ACTIVITY:
                if data["Activity_Name"] in names:
                    raise AssemblyError(f"duplicate activity node {data['Activity_Name']}")
                names[data["Activity_Name"]] = True

        performed = {loc: {n for n, _ in self.activities_at(loc)} for loc in self.location_ids()}
        for u, v, data in self.graph.edges(data=True):
            if data["label"] != IS_SIMILAR_TO:
                continue
            p, q = self.graph.nodes[u]["Location_ID"], self.graph.nodes[v]["Location_ID"]
            if not data["Similarity_Index"] > 0:
                raise AssemblyError(f"link {p}-{q} carries SI {data['Similarity_Index']}")
            cal = data["Common_Activity_List"]
            if not cal or set(cal) != performed[p] & performed[q]:
                raise AssemblyError(f"link {p}-{q} has an inconsistent common activity list")

        for name in names:
            total = sum(d["Activity_Popularity_Index"] for _, d in self.locations_for(name))
            if abs(total - 1.0) > API_TOLERANCE:
                raise AssemblyError(f"API of {name} sums to {total}")

        if locations is not None:
            for location in locations:
                if self.location(location.location_id)["No_of_Reviews"] != len(location.reviews):
                    raise AssemblyError(f"location {location.location_id}: No_of_Reviews differs from the corpus")

    # --- serialization --------------------------------------------------------------

    def to_records(self) -> List[dict]:
        """Nodes then links in a fixed order; one JSON object per line when written."""
        records = []
        for location_id in self.location_ids():
            props = dict(self.location(location_id))
            props.pop("kind")
            records.append({"type": "node", "label": LOCATION, "id": location_node(location_id), "properties": props})
        for name in self.activity_names():
            records.append({"type": "node", "label": ACTIVITY, "id": activity_node(name), "properties": {"Activity_Name": name}})
        for location_id in self.location_ids():
            for name, data in self.activities_at(location_id):
                props = {k: v for k, v in data.items() if k != "label"}
                if props.get("Boundary_of_Uniqueness") is None:
                    props["Boundary_of_Uniqueness"] = UNBOUNDED
                records.append({
                    "type": "link", "label": IS_PERFORMED_AT,
                    "source": activity_node(name), "target": location_node(location_id), "properties": props,
                })
        for location_id in self.location_ids():
            for other, data in self.similar_to(location_id):
                if natural_key(other) < natural_key(location_id):
                    continue
                props = {k: v for k, v in data.items() if k != "label"}
                records.append({
                    "type": "link", "label": IS_SIMILAR_TO,
                    "source": location_node(location_id), "target": location_node(other), "properties": props,
                })
        return records

    def dumps(self) -> str:
        return "".join(json.dumps(r, sort_keys=True, ensure_ascii=False) + "\n" for r in self.to_records())

    def write_records(self, path: str) -> int:
        text = self.dumps()
        with open(path, "w", encoding="utf-8") as f:
            f.write(text)
        return len(text.encode("utf-8"))

    @classmethod
    def read_records(cls, path: str) -> "LANetGraph":
        lanet = cls()
        with open(path, "r", encoding="utf-8") as f:
            for line_no, line in enumerate(f, 1):
                if not line.strip():
                    continue
                try:
                    record = json.loads(line)
                    props = dict(record["properties"])
                    if record["type"] == "node":
                        kind = record["label"]
                        lanet.graph.add_node(record["id"], kind=kind, **props)
                    elif record["type"] == "link":
                        if props.get("Boundary_of_Uniqueness") == UNBOUNDED:
                            props["Boundary_of_Uniqueness"] = None
                        lanet.graph.add_edge(record["source"], record["target"], label=record["label"], **props)
                    else:
                        raise CorpusError(f"unknown record type '{record['type']}'", record=f"line {line_no}", field="type")
                except (json.JSONDecodeError, KeyError, TypeError) as e:
                    raise CorpusError(f"malformed graph record: {e}", record=f"line {line_no}")
        logger.info(f"Loaded graph {path}: {lanet.graph.number_of_nodes()} nodes, {lanet.graph.number_of_edges()} links")
        return lanet

    def write_graphml(self, path: str):
        """GraphML only carries scalars: lists are joined and an unbounded BoU becomes the literal token."""
        flat = nx.Graph()
        for node, data in self.graph.nodes(data=True):
            flat.add_node(node, **{k: _graphml_value(k, v) for k, v in data.items()})
        for u, v, data in self.graph.edges(data=True):
            flat.add_edge(u, v, **{k: _graphml_value(k, val) for k, val in data.items()})
        nx.write_graphml(flat, path)

    def similarity_frame(self) -> pd.DataFrame:
        ids = self.location_ids()
        frame = pd.DataFrame(0.0, index=ids, columns=ids)
        for location_id in ids:
            # a location only has a nonzero vector if it performs something not performed everywhere
            local = any(len(self.locations_for(name)) < len(ids) for name, _ in self.activities_at(location_id))
            frame.loc[location_id, location_id] = 1.0 if local else 0.0
            for other, data in self.similar_to(location_id):
                frame.loc[location_id, other] = data["Similarity_Index"]
        return frame


def _graphml_value(key, value):
    if key == "Boundary_of_Uniqueness":
        return UNBOUNDED if value is None else str(value)
    if key == "Nearest_Alternative":
        return "" if value is None else value
    if isinstance(value, (list, tuple)):
        return "; ".join(str(v) for v in value)
    return value


def assemble_graph(
    locations: Iterable[LocationRecord],
    activity_sets: Mapping[str, ActivitySet],
    alm: ActivityLocationMatrix,
    scores: Mapping[str, Mapping[str, ConceptScore]],
    si: Mapping[Tuple[str, str], float],
    bou: Mapping[str, Mapping[str, BouAssignment]],
    distances: Mapping[Tuple[str, str], float],
) -> LANetGraph:
    locations = list(locations)
    lanet = LANetGraph()
    for location in locations:
        lanet.add_location(location)
    known = {l.location_id for l in locations}

    for name in alm.activity_names:
        lanet.add_activity(name)
    api = popularity_matrix(alm)

    for location_id, aset in sorted(activity_sets.items(), key=lambda x: natural_key(x[0])):
        if location_id not in known:
            raise AssemblyError(f"activity set for unknown location {location_id}")
        j = alm.column(location_id)
        for activity in aset:
            i = alm.row(activity.name)
            if alm.counts[i, j] != activity.af:
                raise AssemblyError(f"ALM cell ({activity.name}, {location_id}) is {alm.counts[i, j]}, AF is {activity.af}")
            score = scores.get(location_id, {}).get(activity.concept)
            assignment = bou.get(location_id, {}).get(activity.name, BouAssignment(location_id, activity.name))
            lanet.link_activity(
                activity.name, location_id,
                Activity_Frequency=activity.af,
                Activity_Popularity_Index=float(api[i, j]),
                Generalized_Concept_Score=score.gc_score if score else 0.0,
                Specialized_Concept_Score=score.sc_score if score else 0.0,
                Concept_Frequency=score.cf if score else 0,
                Boundary_of_Uniqueness=assignment.bou,
                Nearest_Alternative=assignment.nearest_alternative,
                Supporting_Reviews=sorted(activity.supporting_reviews, key=natural_key),
            )

    expected = int((alm.counts > 0).sum())
    if lanet.link_counts()[0] != expected:
        raise AssemblyError(f"{lanet.link_counts()[0]} activity-location links for {expected} nonzero ALM cells")

    names = {loc: aset.names() for loc, aset in activity_sets.items()}
    for (p, q), value in sorted(si.items(), key=lambda x: (natural_key(x[0][0]), natural_key(x[0][1]))):
        if p == q or not value > 0:
            continue
        common = sorted(names.get(p, frozenset()) & names.get(q, frozenset()))
        lanet.link_locations(
            p, q,
            Similarity_Index=float(value),
            Common_Activity_List=common,
            Distance=distances[(p, q)],
        )

    lanet.validate(locations)
    return lanet


def location_pairs(location_ids: Iterable[str]) -> List[Tuple[str, str]]:
    ids = sorted(location_ids, key=natural_key)
    return [(p, q) for i, p in enumerate(ids) for q in ids[i + 1:]]

