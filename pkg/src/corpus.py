import json
import logging
from collections import defaultdict
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Set, Tuple

from src.errors import CorpusError, ValidationError
from src.utils.text_utils import natural_key, normalize_concept, render_activity_name

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Token:
    index: int
    surface: str
    lemma: str
    pos: str


@dataclass(frozen=True)
class DependencyArc:
    head: int
    dependent: int
    label: str


@dataclass(frozen=True)
class AnnotatedSentence:
    tokens: Tuple[Token, ...]
    arcs: Tuple[DependencyArc, ...] = ()


@dataclass(frozen=True)
class ReviewRecord:
    review_id: str
    sentences: Tuple[AnnotatedSentence, ...]


@dataclass(frozen=True)
class LocationRecord:
    location_id: str
    name: str
    formatted_address: str
    latitude: float
    longitude: float
    categories: Tuple[str, ...]
    reviews: Tuple[ReviewRecord, ...] = ()


class Relation(str, Enum):
    IS_A = "IsA"
    AT_LOCATION = "AtLocation"
    DERIVED_FROM = "DerivedFrom"
    USED_FOR = "UsedFor"
    RELATED_TO = "RelatedTo"


class RelationSnapshot:
    """Concept-relation triples with lookup indexes by head and by tail."""

    def __init__(self, triples: Iterable[Tuple[str, Relation, str]] = ()):
        self.triples: FrozenSet[Tuple[str, Relation, str]] = frozenset(
            (normalize_concept(h), Relation(r), normalize_concept(t)) for h, r, t in triples
        )
        self._by_head: Dict[str, Set[Tuple[Relation, str]]] = defaultdict(set)
        self._by_tail: Dict[str, Set[Tuple[Relation, str]]] = defaultdict(set)
        for head, rel, tail in self.triples:
            self._by_head[head].add((rel, tail))
            self._by_tail[tail].add((rel, head))

    def __len__(self):
        return len(self.triples)

    def knows(self, concept: str) -> bool:
        return concept in self._by_head or concept in self._by_tail

    def outgoing(self, head: str) -> FrozenSet[Tuple[Relation, str]]:
        return frozenset(self._by_head.get(head, ()))

    def incoming(self, tail: str) -> FrozenSet[Tuple[Relation, str]]:
        return frozenset(self._by_tail.get(tail, ()))

    def has(self, head: str, relation: Relation, tail: str) -> bool:
        return (relation, tail) in self._by_head.get(head, ())


@dataclass(frozen=True)
class LemmaLexicon:
    entries: Mapping[Tuple[str, str], str] = field(default_factory=dict)
    ing_verb_map: Mapping[str, str] = field(default_factory=dict)

    def lemmatize(self, surface: str, pos_class: str, fallback: Optional[str] = None) -> str:
        key = (surface.lower(), pos_class)
        if key in self.entries:
            return self.entries[key]
        if fallback:
            return fallback.lower()
        return surface.lower()

    def base_verb(self, noun_surface: str) -> Optional[str]:
        return self.ing_verb_map.get(noun_surface.lower())


@dataclass(frozen=True)
class GroundTruth:
    activities: Mapping[str, FrozenSet[str]] = field(default_factory=dict)

    def for_location(self, location_id: str) -> FrozenSet[str]:
        return self.activities.get(location_id, frozenset())

    def __len__(self):
        return len(self.activities)


def location_sort_key(location_id: str):
    return natural_key(location_id)


# --- corpus --------------------------------------------------------------------------


def _require(obj: dict, key: str, record: str):
    if key not in obj or obj[key] is None:
        raise CorpusError("missing value", record=record, field=key)
    return obj[key]


def _parse_sentence(raw: dict, record: str) -> AnnotatedSentence:
    raw_tokens = _require(raw, "tokens", record)
    if not isinstance(raw_tokens, list) or not raw_tokens:
        raise CorpusError("sentence has no tokens", record=record, field="tokens")

    tokens = []
    for expected, t in enumerate(raw_tokens):
        try:
            index = int(_require(t, "i", record))
        except (TypeError, ValueError):
            raise CorpusError("token index is not an integer", record=record, field="tokens.i")
        if index != expected:
            raise ValidationError(f"record {record}: token indices must be consecutive from 0 (got {index}, expected {expected})")
        lemma = str(_require(t, "lemma", record)).strip()
        if not lemma:
            raise ValidationError(f"record {record}: token {index} has an empty lemma")
        tokens.append(Token(index, str(_require(t, "surface", record)), lemma, str(_require(t, "pos", record))))

    arcs = []
    seen = set()
    for a in raw.get("arcs") or []:
        try:
            head, dep = int(_require(a, "head", record)), int(_require(a, "dep", record))
        except (TypeError, ValueError):
            raise CorpusError("arc endpoint is not an integer", record=record, field="arcs")
        label = str(_require(a, "label", record)).strip()
        if not (0 <= head < len(tokens)) or not (0 <= dep < len(tokens)):
            raise ValidationError(f"record {record}: arc {label}({head}, {dep}) points outside the sentence")
        if head == dep:
            raise ValidationError(f"record {record}: arc {label}({head}, {dep}) is a self loop")
        if (head, dep, label) in seen:
            raise ValidationError(f"record {record}: duplicate arc {label}({head}, {dep})")
        seen.add((head, dep, label))
        arcs.append(DependencyArc(head, dep, label))

    return AnnotatedSentence(tuple(tokens), tuple(arcs))


def _parse_location_header(raw: dict, record: str) -> dict:
    location_id = str(_require(raw, "location_id", record))
    try:
        latitude = float(_require(raw, "latitude", record))
        longitude = float(_require(raw, "longitude", record))
    except (TypeError, ValueError):
        raise CorpusError("coordinates must be numbers", record=record, field="latitude/longitude")
    if not -90.0 <= latitude <= 90.0:
        raise ValidationError(f"location {location_id}: latitude {latitude} outside [-90, 90]")
    if not -180.0 <= longitude <= 180.0:
        raise ValidationError(f"location {location_id}: longitude {longitude} outside [-180, 180]")

    raw_categories = _require(raw, "categories", record)
    if isinstance(raw_categories, str):
        raw_categories = [raw_categories]
    categories = []
    for c in raw_categories:
        norm = normalize_concept(c)
        if norm and norm not in categories:
            categories.append(norm)
    if not categories:
        raise ValidationError(f"location {location_id}: categories must not be empty")

    return {
        "location_id": location_id,
        "name": str(raw.get("name", "")),
        "formatted_address": str(raw.get("formatted_address", "")),
        "latitude": latitude,
        "longitude": longitude,
        "categories": tuple(categories),
        "reviews": [],
    }


def load_corpus(path: str) -> List[LocationRecord]:
    """Load a line-delimited corpus: each location header record is followed by its review records."""
    locations: Dict[str, dict] = {}
    current = None

    with open(path, "r", encoding="utf-8") as f:
        for line_no, line in enumerate(f, 1):
            line = line.strip()
            if not line:
                continue
            record = f"line {line_no}"
            try:
                raw = json.loads(line)
            except json.JSONDecodeError as e:
                raise CorpusError(f"invalid JSON: {e.msg}", record=record)
            if not isinstance(raw, dict):
                raise CorpusError("record is not an object", record=record)

            kind = raw.get("type", "review" if "review_id" in raw else "location")
            if kind == "location":
                header = _parse_location_header(raw, record)
                if header["location_id"] in locations:
                    raise ValidationError(f"duplicate location_id '{header['location_id']}' at {record}")
                locations[header["location_id"]] = header
                current = header
            elif kind == "review":
                if current is None:
                    raise CorpusError("review before any location header", record=record)
                owner = raw.get("location_id")
                if owner is not None and str(owner) != current["location_id"]:
                    raise CorpusError(f"review belongs to '{owner}' but follows location '{current['location_id']}'", record=record, field="location_id")
                review_id = str(_require(raw, "review_id", record))
                if any(r.review_id == review_id for r in current["reviews"]):
                    raise ValidationError(f"location {current['location_id']}: duplicate review_id '{review_id}'")
                raw_sentences = _require(raw, "sentences", record)
                if not isinstance(raw_sentences, list) or not raw_sentences:
                    raise ValidationError(f"location {current['location_id']}: review '{review_id}' has no sentences")
                sentences = tuple(_parse_sentence(s, f"{record} ({current['location_id']}/{review_id})") for s in raw_sentences)
                current["reviews"].append(ReviewRecord(review_id, sentences))
            else:
                raise CorpusError(f"unknown record type '{kind}'", record=record, field="type")

    result = [
        LocationRecord(**{**h, "reviews": tuple(h["reviews"])})
        for h in sorted(locations.values(), key=lambda h: location_sort_key(h["location_id"]))
    ]
    logger.info(f"Loaded corpus {path}: {len(result)} locations, {sum(len(l.reviews) for l in result)} reviews")
    return result


def dump_corpus(locations: Iterable[LocationRecord], path: str) -> None:
    """Serialize locations in the load_corpus format."""
    with open(path, "w", encoding="utf-8") as f:
        for loc in locations:
            header = {
                "type": "location",
                "location_id": loc.location_id,
                "name": loc.name,
                "formatted_address": loc.formatted_address,
                "latitude": loc.latitude,
                "longitude": loc.longitude,
                "categories": list(loc.categories),
            }
            f.write(json.dumps(header, ensure_ascii=False) + "\n")
            for review in loc.reviews:
                body = {
                    "type": "review",
                    "location_id": loc.location_id,
                    "review_id": review.review_id,
                    "sentences": [
                        {
                            "tokens": [{"i": t.index, "surface": t.surface, "lemma": t.lemma, "pos": t.pos} for t in s.tokens],
                            "arcs": [{"head": a.head, "dep": a.dependent, "label": a.label} for a in s.arcs],
                        }
                        for s in review.sentences
                    ],
                }
                f.write(json.dumps(body, ensure_ascii=False) + "\n")


# --- snapshot / lexicon / ground truth --------------------------------------------------


def _tsv_lines(path: str):
    with open(path, "r", encoding="utf-8") as f:
        for line_no, line in enumerate(f, 1):
            stripped = line.rstrip("\n").rstrip("\r")
            if not stripped.strip() or stripped.lstrip().startswith("#"):
                continue
            yield line_no, stripped, [p.strip() for p in stripped.split("\t")]


def load_relation_snapshot(path: str) -> RelationSnapshot:
    known = {r.value: r for r in Relation}
    triples = []
    for line_no, line, parts in _tsv_lines(path):
        if len(parts) != 3:
            raise CorpusError(f"expected head<TAB>relation<TAB>tail, got '{line}'", record=f"line {line_no}")
        head, rel, tail = parts
        if rel not in known:
            raise CorpusError(f"unknown relation '{rel}' in line '{line}'", record=f"line {line_no}", field="relation")
        if not normalize_concept(head) or not normalize_concept(tail):
            raise CorpusError(f"empty concept in line '{line}'", record=f"line {line_no}")
        triples.append((head, known[rel], tail))

    snapshot = RelationSnapshot(triples)
    logger.info(f"Loaded relation snapshot {path}: {len(snapshot)} triples ({len(triples) - len(snapshot)} duplicates collapsed)")
    return snapshot


def load_lexicon(path: str) -> LemmaLexicon:
    """Three-column lines are lemma entries, two-column lines belong to the -ing noun to verb map."""
    entries: Dict[Tuple[str, str], str] = {}
    ing_verbs: Dict[str, str] = {}
    for line_no, line, parts in _tsv_lines(path):
        if len(parts) == 3:
            surface, pos, lemma = parts
            if pos not in ("verb", "noun", "other"):
                raise CorpusError(f"unknown pos-class '{pos}'", record=f"line {line_no}", field="pos-class")
            entries[(surface.lower(), pos)] = lemma.lower()
        elif len(parts) == 2:
            ing_verbs[parts[0].lower()] = parts[1].lower()
        else:
            raise CorpusError(f"unexpected column count in '{line}'", record=f"line {line_no}")
    logger.info(f"Loaded lexicon {path}: {len(entries)} lemma entries, {len(ing_verbs)} ing-verbs")
    return LemmaLexicon(entries, ing_verbs)


def load_ground_truth(path: str, lexicon: LemmaLexicon, location_ids: Optional[Iterable[str]] = None) -> GroundTruth:
    known = set(location_ids) if location_ids is not None else None
    activities: Dict[str, Set[str]] = defaultdict(set)
    for line_no, line, parts in _tsv_lines(path):
        if len(parts) != 3:
            raise CorpusError(f"expected location_id<TAB>verb<TAB>concept, got '{line}'", record=f"line {line_no}")
        location_id, verb, concept = parts
        if known is not None and location_id not in known:
            raise ValidationError(f"ground truth line {line_no}: unknown location_id '{location_id}'")
        verb_lemma = lexicon.lemmatize(verb, "verb")
        concept_lemma = " ".join(lexicon.lemmatize(w, "noun") for w in normalize_concept(concept).split())
        activities[location_id].add(render_activity_name([verb_lemma], concept_lemma))

    return GroundTruth({k: frozenset(v) for k, v in activities.items()})
