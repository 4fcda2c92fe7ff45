"""
Dependency-aware extraction of (verb, noun / noun phrase) activities.

Sentences arrive pre-annotated (tokens, lemmas, POS, typed dependencies); this module only
applies the pairing rules and counts Activity Frequency over distinct reviews.
"""
import logging
from dataclasses import dataclass, field, replace
from typing import Dict, FrozenSet, Iterable, List, Mapping, Set, Tuple

from src.corpus import AnnotatedSentence, LemmaLexicon, LocationRecord
from src.utils.text_utils import (
    is_copula, is_noun, is_verb, natural_key, normalize_concept, render_activity_name,
)

logger = logging.getLogger(__name__)

PAIR_RELATIONS = frozenset({"dobj", "ccomp", "nsubjpass"})
PREP_PREFIX = "prep_"
AUX_RELATIONS = frozenset({"aux", "auxpass"})
ING_PROMOTION = "ing"


@dataclass(frozen=True)
class ActivityRecord:
    verbs: Tuple[str, ...]
    concept: str
    supporting_reviews: FrozenSet[str]

    def __post_init__(self):
        if not self.verbs:
            raise ValueError("an activity needs at least one verb")
        if not self.supporting_reviews:
            raise ValueError("an activity needs at least one supporting review")
        object.__setattr__(self, "verbs", tuple(sorted(set(self.verbs))))

    @property
    def af(self) -> int:
        return len(self.supporting_reviews)

    @property
    def name(self) -> str:
        return render_activity_name(self.verbs, self.concept)

    @property
    def member_names(self) -> Tuple[str, ...]:
        """Single-verb names this (possibly merged) activity stands for."""
        return tuple(render_activity_name([v], self.concept) for v in self.verbs)


@dataclass(frozen=True)
class ActivitySet:
    location_id: str
    activities: Mapping[str, ActivityRecord] = field(default_factory=dict)

    @classmethod
    def from_records(cls, location_id: str, records: Iterable[ActivityRecord]) -> "ActivitySet":
        ordered = sorted(records, key=lambda a: a.name)
        by_name = {}
        for record in ordered:
            if record.name in by_name:
                raise ValueError(f"duplicate activity {record.name} at location {location_id}")
            by_name[record.name] = record
        return cls(location_id, by_name)

    def __len__(self):
        return len(self.activities)

    def __iter__(self):
        return iter(self.activities.values())

    def __contains__(self, name: str) -> bool:
        return name in self.activities

    def names(self) -> FrozenSet[str]:
        return frozenset(self.activities)

    def ranked(self) -> List[ActivityRecord]:
        """Activities by AF desc, then name asc."""
        return sorted(self.activities.values(), key=lambda a: (-a.af, a.name))

    def to_lines(self) -> List[str]:
        return [
            "\t".join([
                self.location_id,
                "/".join(a.verbs),
                a.concept,
                str(a.af),
                ",".join(sorted(a.supporting_reviews, key=natural_key)),
            ])
            for a in self.ranked()
        ]


@dataclass(frozen=True)
class CandidatePair:
    """A verb (or promoted -ing noun) paired with a noun span [start, end)."""
    verb_index: int
    noun_start: int
    noun_end: int
    relation: str

    @property
    def noun_index(self) -> int:
        return self.noun_end - 1


def potential_verbs(sentence: AnnotatedSentence) -> Set[int]:
    auxiliaries = {a.dependent for a in sentence.arcs if a.label in AUX_RELATIONS}
    return {
        t.index for t in sentence.tokens
        if is_verb(t.pos) and not is_copula(t.surface, t.lemma) and t.index not in auxiliaries
    }


def noun_phrases(sentence: AnnotatedSentence, exclude: FrozenSet[int] = frozenset()) -> List[Tuple[int, int]]:
    """Maximal runs of >= 2 consecutive noun tokens, as half-open (start, end) spans."""
    spans = []
    start = None
    tokens = sentence.tokens
    for t in list(tokens) + [None]:
        noun = t is not None and is_noun(t.pos) and t.index not in exclude
        if noun and start is None:
            start = t.index
        elif not noun and start is not None:
            end = t.index if t is not None else len(tokens)
            if end - start >= 2:
                spans.append((start, end))
            start = None
    return spans


def extract_pairs(sentence: AnnotatedSentence) -> List[Tuple[int, int, str]]:
    verbs = potential_verbs(sentence)
    pairs = []
    seen = set()
    for arc in sentence.arcs:
        if arc.label not in PAIR_RELATIONS and not arc.label.startswith(PREP_PREFIX):
            continue
        if arc.head not in verbs or not is_noun(sentence.tokens[arc.dependent].pos):
            continue
        key = (arc.head, arc.dependent)
        if key in seen:
            continue
        seen.add(key)
        pairs.append((arc.head, arc.dependent, arc.label))
    return pairs


def promote_ing_nouns(sentence: AnnotatedSentence, lexicon: LemmaLexicon) -> List[Tuple[int, int]]:
    promoted = [
        t.index for t in sentence.tokens
        if is_noun(t.pos) and t.surface.lower().endswith("ing") and lexicon.base_verb(t.surface)
    ]
    candidates = [t.index for t in sentence.tokens if is_noun(t.pos) and t.index not in promoted]
    pairs = []
    for p in promoted:
        if not candidates:
            break
        # min over (distance, index) picks the earlier token on ties
        nearest = min(candidates, key=lambda i: (abs(i - p), i))
        pairs.append((p, nearest))
    return pairs


def substitute_phrase(pair: CandidatePair, spans: Iterable[Tuple[int, int]]) -> CandidatePair:
    for start, end in spans:
        if start <= pair.noun_index < end:
            return replace(pair, noun_start=start, noun_end=end)
    return pair


def sentence_candidates(sentence: AnnotatedSentence, lexicon: LemmaLexicon) -> List[CandidatePair]:
    """Full extraction rule set for one sentence, noun phrases substituted."""
    promoted = promote_ing_nouns(sentence, lexicon)
    spans = noun_phrases(sentence, exclude=frozenset(p for p, _ in promoted))

    pairs = [CandidatePair(v, n, n + 1, label) for v, n, label in extract_pairs(sentence)]
    pairs += [CandidatePair(p, n, n + 1, ING_PROMOTION) for p, n in promoted]
    return [substitute_phrase(p, spans) for p in pairs]


def pair_lemmas(sentence: AnnotatedSentence, pair: CandidatePair, lexicon: LemmaLexicon) -> Tuple[str, str]:
    verb_token = sentence.tokens[pair.verb_index]
    if pair.relation == ING_PROMOTION:
        verb = lexicon.base_verb(verb_token.surface)
    else:
        verb = lexicon.lemmatize(verb_token.surface, "verb", fallback=verb_token.lemma)
    concept = normalize_concept(" ".join(
        lexicon.lemmatize(t.surface, "noun", fallback=t.lemma)
        for t in sentence.tokens[pair.noun_start:pair.noun_end]
    ))
    return verb, concept


def build_activity_set(location: LocationRecord, lexicon: LemmaLexicon) -> ActivitySet:
    support: Dict[Tuple[str, str], Set[str]] = {}
    for review in location.reviews:
        for sentence in review.sentences:
            for pair in sentence_candidates(sentence, lexicon):
                verb, concept = pair_lemmas(sentence, pair, lexicon)
                if not verb or not concept:
                    continue
                support.setdefault((verb, concept), set()).add(review.review_id)

    aset = ActivitySet.from_records(
        location.location_id,
        (ActivityRecord((verb,), concept, frozenset(reviews)) for (verb, concept), reviews in support.items()),
    )
    logger.debug(f"Location {location.location_id}: {len(aset)} candidate activities from {len(location.reviews)} reviews")
    return aset
