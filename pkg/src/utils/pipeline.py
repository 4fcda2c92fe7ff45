import logging
import os
import time
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence

from src.corpus import LemmaLexicon, LocationRecord, RelationSnapshot, load_corpus, load_lexicon, load_relation_snapshot
from src.errors import LanetError, StageError, ValidationError
from src.utils.concept_hierarchy import ConceptHierarchy, build_cch, extract_concepts, filter_relevant, score_table
from src.utils.evaluation import baseline_extract
from src.utils.extractor import ActivitySet, build_activity_set
from src.utils.geo_utils import compute_bou, radial_distance, similarity_set
from src.utils.lanet_graph import LANetGraph, assemble_graph, location_pairs
from src.utils.merger import MergeGroup, SenseIndex, merge_redundant, write_merge_audit
from src.utils.similarity import af_ilf, build_alm, similarity_matrix, ubiquitous_activities
from src.utils.text_utils import natural_key

logger = logging.getLogger(__name__)

EXTRACTORS = ("dependency", "baseline")


@dataclass(frozen=True)
class BuildManifest:
    corpus: str
    snapshot: str
    lexicon: str
    output: Optional[str] = None
    skip_filter: bool = False
    skip_merge: bool = False
    extractor: str = "dependency"
    log_level: str = "INFO"

    def __post_init__(self):
        if self.extractor not in EXTRACTORS:
            raise ValidationError(f"unknown extractor '{self.extractor}' (expected one of {', '.join(EXTRACTORS)})")

    @property
    def filter_enabled(self) -> bool:
        return not self.skip_filter and self.extractor == "dependency"

    @property
    def merge_enabled(self) -> bool:
        return not self.skip_merge and self.extractor == "dependency"

    @property
    def variant(self) -> str:
        if self.extractor == "baseline":
            return "baseline"
        if not self.filter_enabled and not self.merge_enabled:
            return "extract-only"
        if not self.merge_enabled:
            return "extract+filter"
        if not self.filter_enabled:
            return "extract+merge"
        return "full"

    def check_paths(self):
        for label, path in (("corpus", self.corpus), ("snapshot", self.snapshot), ("lexicon", self.lexicon)):
            if not path or not os.path.isfile(path):
                raise ValidationError(f"{label} file not found: {path}")


@dataclass(frozen=True)
class StageTiming:
    stage: str
    seconds: float
    summary: str


@dataclass
class BuildResult:
    graph: LANetGraph
    activity_sets: Dict[str, ActivitySet]
    hierarchies: Dict[str, ConceptHierarchy]
    merge_groups: Dict[str, List[MergeGroup]]
    timings: List[StageTiming] = field(default_factory=list)


def run_stage(name: str, timings: List[StageTiming], fn: Callable, *args, **kwargs):
    logger.info(f"Stage '{name}' started")
    start = time.perf_counter()
    try:
        result, summary = fn(*args, **kwargs)
    except (LanetError, ValueError, KeyError) as e:
        raise StageError(name, e) from e
    elapsed = time.perf_counter() - start
    timings.append(StageTiming(name, elapsed, summary))
    logger.info(f"Stage '{name}' finished in {elapsed:.3f}s: {summary}")
    return result


def _index_locations(locations: Sequence[LocationRecord]):
    by_id = {}
    for location in locations:
        if location.location_id in by_id:
            raise ValidationError(f"duplicate location_id '{location.location_id}'")
        by_id[location.location_id] = location
    return by_id, f"{len(by_id)} location nodes"


def _extract(locations, lexicon, extractor):
    extract = baseline_extract if extractor == "baseline" else build_activity_set
    sets = {l.location_id: extract(l, lexicon) for l in locations}
    return sets, f"{sum(len(s) for s in sets.values())} candidate activities ({extractor})"


def _filter(locations, sets, snapshot, enabled):
    hierarchies, filtered = {}, {}
    for location in locations:
        aset = sets[location.location_id]
        cch = build_cch(location.categories, extract_concepts(aset), snapshot)
        hierarchies[location.location_id] = cch
        filtered[location.location_id] = filter_relevant(aset, cch) if enabled else aset
    removed = sum(len(sets[k]) - len(v) for k, v in filtered.items())
    return (hierarchies, filtered), f"{removed} irrelevant activities removed" if enabled else "filter skipped (hierarchies built for scoring)"


def _merge(sets, hierarchies, snapshot, enabled):
    if not enabled:
        return (sets, {k: [] for k in sets}), "merge skipped"
    sense_index = SenseIndex(snapshot)
    merged, groups = {}, {}
    for location_id, aset in sets.items():
        result = merge_redundant(aset, hierarchies[location_id], sense_index)
        merged[location_id] = result.activity_set
        groups[location_id] = result.groups
    absorbed = sum(len(sets[k]) - len(v) for k, v in merged.items())
    return (merged, groups), f"{sum(len(g) for g in groups.values())} merge groups, {absorbed} activities absorbed"


def _activities(location_ids, sets):
    scores = {loc: score_table(extract_concepts(aset), cch) for loc, aset, cch in sets}
    alm = build_alm((aset for _, aset, _ in sets), location_ids)
    return (alm, scores), f"ALM {alm.shape[0]} activities x {alm.shape[1]} locations"


def _similarity(alm, by_id):
    weights = af_ilf(alm)
    matrix = similarity_matrix(weights)
    ids = alm.location_ids
    si, distances = {}, {}
    for i, p in enumerate(ids):
        for j, q in enumerate(ids):
            if i != j:
                si[(p, q)] = float(matrix[i, j])
    for p, q in location_pairs(ids):
        d = radial_distance(by_id[p], by_id[q])
        distances[(p, q)] = distances[(q, p)] = d
    linked = sum(1 for p, q in location_pairs(ids) if si[(p, q)] > 0)
    return (si, distances), f"{linked} location pairs with SI > 0"


def _uniqueness(locations, sets, alm, scores, si, distances):
    names = {loc: aset.names() for loc, aset in sets.items()}
    everywhere = ubiquitous_activities(alm)
    bou = {}
    for location_id in sorted(sets, key=natural_key):
        si_row = {q: v for (p, q), v in si.items() if p == location_id}
        candidates = similarity_set(location_id, si_row, names, everywhere)
        dist_row = {q: d for (p, q), d in distances.items() if p == location_id}
        bou[location_id] = compute_bou(location_id, names, candidates, dist_row)
    graph = assemble_graph(locations, sets, alm, scores, si, bou, distances)
    bounded = sum(1 for row in bou.values() for a in row.values() if a.bounded)
    return graph, f"{bounded} bounded / {sum(len(r) for r in bou.values())} activity-location pairs"


def discover_lanet(
    locations: Sequence[LocationRecord],
    snapshot: RelationSnapshot,
    lexicon: LemmaLexicon,
    filter_enabled: bool = True,
    merge_enabled: bool = True,
    extractor: str = "dependency",
) -> BuildResult:
    timings: List[StageTiming] = []
    locations = sorted(locations, key=lambda l: natural_key(l.location_id))

    by_id = run_stage("locations", timings, _index_locations, locations)
    sets = run_stage("extract", timings, _extract, locations, lexicon, extractor)
    hierarchies, sets = run_stage("filter", timings, _filter, locations, sets, snapshot, filter_enabled)
    sets, groups = run_stage("merge", timings, _merge, sets, hierarchies, snapshot, merge_enabled)
    alm, scores = run_stage(
        "activities", timings, _activities, list(by_id),
        [(loc, sets[loc], hierarchies[loc]) for loc in by_id],
    )
    si, distances = run_stage("similarity", timings, _similarity, alm, by_id)
    graph = run_stage("uniqueness", timings, _uniqueness, locations, sets, alm, scores, si, distances)

    return BuildResult(graph, sets, hierarchies, groups, timings)


def build(manifest: BuildManifest) -> BuildResult:
    manifest.check_paths()
    locations = load_corpus(manifest.corpus)
    snapshot = load_relation_snapshot(manifest.snapshot)
    lexicon = load_lexicon(manifest.lexicon)
    logger.info(f"Building LANet ({manifest.variant})")

    result = discover_lanet(
        locations, snapshot, lexicon,
        filter_enabled=manifest.filter_enabled,
        merge_enabled=manifest.merge_enabled,
        extractor=manifest.extractor,
    )

    if manifest.output:
        size = result.graph.write_records(manifest.output)
        logger.info(f"Wrote {manifest.output} ({size} bytes)")
        if manifest.merge_enabled:
            audit = f"{manifest.output}.merges.tsv"
            count = write_merge_audit(sorted(result.merge_groups.items(), key=lambda x: natural_key(x[0])), audit)
            logger.info(f"Wrote {audit} ({count} merge groups)")
    return result
