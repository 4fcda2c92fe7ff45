import logging
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Optional, Tuple

import networkx as nx

from src.corpus import Relation, RelationSnapshot
from src.utils.concept_hierarchy import ConceptHierarchy
from src.utils.extractor import ActivityRecord, ActivitySet

logger = logging.getLogger(__name__)

SENSE_RELATIONS = (Relation.RELATED_TO, Relation.IS_A, Relation.USED_FOR)


class SenseIndex:
    """Hidden senses of (verb, concept) pairs looked up in the relation snapshot."""

    def __init__(self, snapshot: RelationSnapshot):
        self.snapshot = snapshot
        self._cache: Dict[str, FrozenSet[str]] = {}

    def _neighbours(self, key: str) -> FrozenSet[str]:
        if key not in self._cache:
            found = {tail for rel, tail in self.snapshot.outgoing(key) if rel in SENSE_RELATIONS}
            found |= {head for rel, head in self.snapshot.incoming(key) if rel in SENSE_RELATIONS}
            found.discard(key)
            self._cache[key] = frozenset(found)
        return self._cache[key]

    def senses(self, verb: str, concept: str) -> FrozenSet[str]:
        return self._neighbours(f"{verb} {concept}") | self._neighbours(verb)


def hidden_senses(verb: str, concept: str, sense_index: SenseIndex) -> FrozenSet[str]:
    return sense_index.senses(verb, concept)


@dataclass(frozen=True)
class MergeGroup:
    concept: str
    verbs: Tuple[str, ...]
    sense: str
    af: int

    def to_line(self) -> str:
        return f"{self.concept}\t{self.sense}\t{'/'.join(self.verbs)}\t{self.af}"


@dataclass(frozen=True)
class MergeResult:
    activity_set: ActivitySet
    groups: List[MergeGroup] = field(default_factory=list)


def _activity_senses(activity: ActivityRecord, sense_index: SenseIndex) -> FrozenSet[str]:
    senses = frozenset()
    for verb in activity.verbs:
        senses |= sense_index.senses(verb, activity.concept)
    return senses


def _union(members: List[ActivityRecord]) -> ActivityRecord:
    verbs = tuple(v for m in members for v in m.verbs)
    reviews = frozenset().union(*(m.supporting_reviews for m in members))
    return ActivityRecord(verbs, members[0].concept, reviews)


def _sense_clusters(activities: List[ActivityRecord], sense_index: SenseIndex) -> List[Tuple[List[ActivityRecord], str]]:
    """Connected components of the "shares a hidden sense" relation among same-concept activities."""
    ordered = sorted(activities, key=lambda a: a.verbs)
    senses = {a.name: _activity_senses(a, sense_index) for a in ordered}

    graph = nx.Graph()
    graph.add_nodes_from(a.name for a in ordered)
    for i, a in enumerate(ordered):
        for b in ordered[i + 1:]:
            shared = senses[a.name] & senses[b.name]
            if shared:
                graph.add_edge(a.name, b.name, sense=min(shared))

    by_name = {a.name: a for a in ordered}
    clusters = []
    for component in nx.connected_components(graph):
        if len(component) < 2:
            continue
        members = sorted((by_name[n] for n in component), key=lambda a: a.verbs)
        sense = min(d["sense"] for _, _, d in graph.subgraph(component).edges(data=True))
        clusters.append((members, sense))
    return sorted(clusters, key=lambda c: c[0][0].verbs)


def merge_redundant(aset: ActivitySet, cch: Optional[ConceptHierarchy], sense_index: SenseIndex) -> MergeResult:
    """
    Merge same-concept activities that share a hidden sense, then propagate merges recorded on a
    generalised concept down to its specialised concepts. Both passes repeat until nothing changes.
    """
    current: Dict[str, ActivityRecord] = dict(aset.activities)
    sense_of: Dict[str, str] = {}

    def apply(members: List[ActivityRecord], sense: str):
        merged = _union(members)
        for m in members:
            del current[m.name]
            sense_of.pop(m.name, None)
        current[merged.name] = merged
        sense_of[merged.name] = sense
        logger.debug(f"Location {aset.location_id}: merged {', '.join(m.name for m in members)} -> {merged.name} (sense '{sense}')")

    rounds = 0
    changed = True
    while changed:
        changed = False
        rounds += 1

        by_concept: Dict[str, List[ActivityRecord]] = {}
        for activity in current.values():
            by_concept.setdefault(activity.concept, []).append(activity)

        # direct pass
        for concept in sorted(by_concept):
            for members, sense in _sense_clusters(by_concept[concept], sense_index):
                apply(members, sense)
                changed = True

        # propagation pass
        if cch is None:
            continue
        merged_at: Dict[str, List[ActivityRecord]] = {}
        for activity in current.values():
            if len(activity.verbs) > 1:
                merged_at.setdefault(activity.concept, []).append(activity)

        for concept in sorted({a.concept for a in current.values()}):
            if concept not in cch:
                continue
            source = next((merged_at[c] for c in cch.ancestors(concept) if c in merged_at), None)
            if source is None:
                continue
            for group in sorted(source, key=lambda a: a.verbs):
                members = sorted(
                    (a for a in current.values() if a.concept == concept and set(a.verbs) <= set(group.verbs)),
                    key=lambda a: a.verbs,
                )
                if len(members) >= 2:
                    apply(members, sense_of.get(group.name, group.concept))
                    changed = True

    merged_set = ActivitySet.from_records(aset.location_id, current.values())
    groups = [
        MergeGroup(a.concept, a.verbs, sense_of.get(a.name, ""), a.af)
        for a in merged_set if len(a.verbs) > 1
    ]
    logger.debug(f"Location {aset.location_id}: {len(aset)} -> {len(merged_set)} activities, {len(groups)} merge groups, {rounds} rounds")
    return MergeResult(merged_set, groups)


def redundancy_count(aset_before: ActivitySet, aset_after: ActivitySet, sense_index: Optional[SenseIndex] = None) -> Tuple[int, int]:
    """
    `before`: activities of the unmerged set that were absorbed into a merge group (group size - 1 each).
    `after`: redundant activities still left in the merged set; needs the sense index, 0 without it.
    """
    before = 0
    for merged in aset_after:
        if len(merged.verbs) < 2:
            continue
        members = [a for a in aset_before if a.concept == merged.concept and set(a.verbs) <= set(merged.verbs)]
        before += max(len(members) - 1, 0)

    after = 0
    if sense_index is not None:
        by_concept: Dict[str, List[ActivityRecord]] = {}
        for activity in aset_after:
            by_concept.setdefault(activity.concept, []).append(activity)
        for activities in by_concept.values():
            after += sum(len(members) - 1 for members, _ in _sense_clusters(activities, sense_index))
    return before, after


def write_merge_audit(groups_by_location: Iterable[Tuple[str, List[MergeGroup]]], path: str) -> int:
    lines = []
    for location_id, groups in groups_by_location:
        lines.extend(f"{location_id}\t{g.to_line()}" for g in groups)
    with open(path, "w", encoding="utf-8") as f:
        f.write("location_id\tconcept\tsense\tverbs\taf_after\n")
        for line in lines:
            f.write(line + "\n")
    return len(lines)
