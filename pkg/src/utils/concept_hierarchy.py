import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence

from src.corpus import Relation, RelationSnapshot
from src.errors import HierarchyError
from src.utils.extractor import ActivityRecord, ActivitySet

logger = logging.getLogger(__name__)

EXPAND_RELATIONS = (Relation.RELATED_TO, Relation.USED_FOR)
EXTEND_RELATIONS = (Relation.IS_A, Relation.AT_LOCATION, Relation.DERIVED_FROM)


@dataclass(frozen=True)
class ConceptEntry:
    concept: str
    cf: int


@dataclass(frozen=True)
class ConceptArc:
    source: str
    relation: Relation
    target: str


@dataclass(frozen=True)
class ConceptScore:
    concept: str
    cf: int
    cli: int
    gc_score: float
    sc_score: float


@dataclass
class ConceptHierarchy:
    levels: List[List[str]]
    arcs: List[ConceptArc] = field(default_factory=list)
    parent_of: Dict[str, Optional[str]] = field(default_factory=dict)
    iterations: int = 0

    def __post_init__(self):
        self._level_of = {c: i for i, level in enumerate(self.levels, 1) for c in level}

    def __contains__(self, concept: str) -> bool:
        return concept in self._level_of

    def __len__(self):
        return len(self._level_of)

    @property
    def categories(self) -> List[str]:
        return self.levels[0]

    def nodes(self) -> List[str]:
        return [c for level in self.levels for c in level]

    def level(self, concept: str) -> int:
        if concept not in self._level_of:
            raise HierarchyError(f"concept '{concept}' is not in the hierarchy")
        return self._level_of[concept]

    def add(self, concept: str, level: int, arc: Optional[ConceptArc], parent: Optional[str]):
        while len(self.levels) < level:
            self.levels.append([])
        self.levels[level - 1].append(concept)
        self._level_of[concept] = level
        self.parent_of[concept] = parent
        if arc is not None:
            self.arcs.append(arc)

    def ancestors(self, concept: str) -> List[str]:
        """Generalised concepts of `concept`, nearest first."""
        chain = []
        current = self.parent_of.get(concept)
        while current is not None and current not in chain:
            chain.append(current)
            current = self.parent_of.get(current)
        return chain

    def validate(self, categories: Sequence[str], cset: Iterable[str]) -> None:
        cset = set(cset)
        if len(self.nodes()) != len(self._level_of):
            raise HierarchyError("a concept appears on more than one level")
        if not set(categories) <= set(self.levels[0]):
            raise HierarchyError("level 1 must hold the location categories")
        for concept in self.levels[0]:
            if concept not in categories and concept not in cset:
                raise HierarchyError(f"level-1 concept '{concept}' is neither a category nor an extracted concept")
        for level in self.levels[1:]:
            for concept in level:
                if concept not in cset:
                    raise HierarchyError(f"concept '{concept}' is not an extracted concept")
        for arc in self.arcs:
            a, b = self.level(arc.source), self.level(arc.target)
            if a == b and arc.relation not in EXPAND_RELATIONS:
                raise HierarchyError(f"same-level arc {arc.source} -{arc.relation.value}-> {arc.target}")
            if a != b and (abs(a - b) != 1 or arc.relation not in EXTEND_RELATIONS):
                raise HierarchyError(f"cross-level arc {arc.source} -{arc.relation.value}-> {arc.target}")

    def to_text(self) -> str:
        """Indented tree followed by the arc list "from<TAB>relation<TAB>to<TAB>level"."""
        children: Dict[Optional[str], List[str]] = {}
        for concept in self.nodes():
            parent = self.parent_of.get(concept)
            if parent is not None and self.level(parent) == self.level(concept):
                parent = self.parent_of.get(parent)
            children.setdefault(parent, []).append(concept)

        lines = []

        def walk(node, depth):
            for child in sorted(children.get(node, [])):
                lines.append(f"{'  ' * depth}{child} (level {self.level(child)})")
                walk(child, depth + 1)

        walk(None, 0)
        lines.append("")
        for arc in self.arcs:
            lines.append(f"{arc.source}\t{arc.relation.value}\t{arc.target}\t{self.level(arc.source)}")
        return "\n".join(lines) + "\n"


def extract_concepts(aset: ActivitySet) -> List[ConceptEntry]:
    reviews: Dict[str, set] = {}
    for activity in aset:
        reviews.setdefault(activity.concept, set()).update(activity.supporting_reviews)
    return [ConceptEntry(concept, len(ids)) for concept, ids in sorted(reviews.items())]


def _snapshot_key(concept: str, snapshot: RelationSnapshot) -> str:
    # phrases missing from the snapshot are matched through their head noun
    if snapshot.knows(concept) or " " not in concept:
        return concept
    return concept.split()[-1]


def _expand_link(concept: str, anchor: str, snapshot: RelationSnapshot) -> Optional[ConceptArc]:
    c, a = _snapshot_key(concept, snapshot), _snapshot_key(anchor, snapshot)
    for rel in EXPAND_RELATIONS:
        if snapshot.has(c, rel, a):
            return ConceptArc(concept, rel, anchor)
        if snapshot.has(a, rel, c):
            return ConceptArc(anchor, rel, concept)
    return None


def _extend_link(concept: str, parent: str, snapshot: RelationSnapshot) -> Optional[ConceptArc]:
    c, p = _snapshot_key(concept, snapshot), _snapshot_key(parent, snapshot)
    for rel in EXTEND_RELATIONS:
        if snapshot.has(c, rel, p):
            return ConceptArc(concept, rel, parent)
    return None


def build_cch(categories: Sequence[str], concepts: Iterable, snapshot: RelationSnapshot) -> ConceptHierarchy:
    """Grow the hierarchy from the categories with Expand / Extend until an iteration adds nothing."""
    if not categories:
        raise HierarchyError("a hierarchy needs at least one category")
    cset = sorted({c.concept if isinstance(c, ConceptEntry) else c for c in concepts})
    cch = ConceptHierarchy(levels=[sorted(dict.fromkeys(categories))])
    for category in cch.levels[0]:
        cch.parent_of[category] = None
    pending = [c for c in cset if c not in cch]

    current = 1
    while True:
        cch.iterations += 1
        added = 0

        # Expand: same level, repeated until the level stops growing
        grew = True
        while grew:
            grew = False
            for concept in list(pending):
                for anchor in sorted(cch.levels[current - 1]):
                    arc = _expand_link(concept, anchor, snapshot)
                    if arc is not None:
                        cch.add(concept, current, arc, cch.parent_of.get(anchor))
                        pending.remove(concept)
                        added += 1
                        grew = True
                        break

        # Extend: children of the current level form the next level
        extended = 0
        for concept in list(pending):
            for parent in sorted(cch.levels[current - 1]):
                arc = _extend_link(concept, parent, snapshot)
                if arc is not None:
                    cch.add(concept, current + 1, arc, parent)
                    pending.remove(concept)
                    extended += 1
                    break
        added += extended

        logger.debug(f"CCH iteration {cch.iterations}: level {current} +{added - extended} expanded, +{extended} extended")
        if added == 0:
            break
        if extended:
            current += 1

    for level in cch.levels:
        level.sort()
    cch.validate(categories, cset)
    logger.debug(f"CCH over {len(categories)} categories: {len(cch)} concepts on {len(cch.levels)} levels after {cch.iterations} iterations")
    return cch


def is_relevant(activity: ActivityRecord, cch: ConceptHierarchy) -> bool:
    return activity.concept in cch


def filter_relevant(aset: ActivitySet, cch: ConceptHierarchy) -> ActivitySet:
    kept = {name: a for name, a in aset.activities.items() if is_relevant(a, cch)}
    logger.debug(f"Location {aset.location_id}: {len(kept)}/{len(aset)} activities relevant")
    return ActivitySet(aset.location_id, kept)


def concept_scores(concept: str, cf: int, cch: ConceptHierarchy) -> ConceptScore:
    if concept not in cch:
        raise HierarchyError(f"no concept score for '{concept}': it is not a relevant concept")
    cli = cch.level(concept)
    weight = math.log10(cf)
    return ConceptScore(concept, cf, cli, weight / cli, weight * cli)


def score_table(entries: Iterable[ConceptEntry], cch: ConceptHierarchy) -> Mapping[str, ConceptScore]:
    """Scores for every relevant concept; out-of-hierarchy concepts score 0."""
    table = {}
    for entry in entries:
        if entry.concept in cch:
            table[entry.concept] = concept_scores(entry.concept, entry.cf, cch)
        else:
            table[entry.concept] = ConceptScore(entry.concept, entry.cf, 0, 0.0, 0.0)
    return table
