import logging
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Set, Tuple

import pandas as pd

from src.corpus import LemmaLexicon, LocationRecord
from src.utils.extractor import ActivityRecord, ActivitySet
from src.utils.lanet_graph import LANetGraph
from src.utils.merger import SenseIndex, redundancy_count
from src.utils.recommender import activity_frequency, recommend_location
from src.utils.text_utils import is_copula, is_noun, is_verb, natural_key, normalize_concept

logger = logging.getLogger(__name__)

BASELINE_WINDOW = 5
ABSENT = "ABSENT"


# --- baseline extractor ---------------------------------------------------------------


def baseline_pairs(sentence) -> List[Tuple[int, int]]:
    """Each non-copula verb with the first noun among the next BASELINE_WINDOW tokens."""
    pairs = []
    tokens = sentence.tokens
    for t in tokens:
        if not is_verb(t.pos) or is_copula(t.surface, t.lemma):
            continue
        for other in tokens[t.index + 1:t.index + 1 + BASELINE_WINDOW]:
            if is_noun(other.pos):
                pairs.append((t.index, other.index))
                break
    return pairs


def baseline_extract(location: LocationRecord, lexicon: LemmaLexicon) -> ActivitySet:
    support: Dict[Tuple[str, str], Set[str]] = {}
    for review in location.reviews:
        for sentence in review.sentences:
            for v, n in baseline_pairs(sentence):
                verb_token, noun_token = sentence.tokens[v], sentence.tokens[n]
                verb = lexicon.lemmatize(verb_token.surface, "verb", fallback=verb_token.lemma)
                concept = normalize_concept(lexicon.lemmatize(noun_token.surface, "noun", fallback=noun_token.lemma))
                if verb and concept:
                    support.setdefault((verb, concept), set()).add(review.review_id)
    return ActivitySet.from_records(
        location.location_id,
        (ActivityRecord((verb,), concept, frozenset(r)) for (verb, concept), r in support.items()),
    )


# --- accuracy ---------------------------------------------------------------------------


def accuracy(aset: ActivitySet, gt: FrozenSet[str]) -> Optional[float]:
    """Share of extracted activities confirmed by the ground truth; None for an empty set."""
    if len(aset) == 0:
        return None
    matched = sum(1 for a in aset if set(a.member_names) & gt)
    return matched / len(aset)


def accuracy_frame(activity_sets: Mapping[str, ActivitySet], ground_truth) -> pd.DataFrame:
    rows = []
    for location_id in sorted(activity_sets, key=natural_key):
        gt = ground_truth.for_location(location_id)
        if location_id not in ground_truth.activities:
            continue
        aset = activity_sets[location_id]
        value = accuracy(aset, gt)
        matched = sum(1 for a in aset if set(a.member_names) & gt)
        rows.append({
            "location_id": location_id,
            "activities": len(aset),
            "matched": matched,
            "accuracy": value,
        })
    return pd.DataFrame(rows, columns=["location_id", "activities", "matched", "accuracy"])


# --- redundancy -------------------------------------------------------------------------


def redundancy_frame(
    before_sets: Mapping[str, ActivitySet],
    after_sets: Mapping[str, ActivitySet],
    sense_index: Optional[SenseIndex] = None,
) -> pd.DataFrame:
    rows = []
    for location_id in sorted(after_sets, key=natural_key):
        before_set = before_sets.get(location_id, ActivitySet(location_id, {}))
        before, after = redundancy_count(before_set, after_sets[location_id], sense_index)
        rows.append({"location_id": location_id, "before": before, "after": after})
    return pd.DataFrame(rows, columns=["location_id", "before", "after"])


# --- rank shift -------------------------------------------------------------------------


@dataclass(frozen=True)
class RankShift:
    activity_name: str
    subject_rank: int
    baseline_rank: Optional[int]

    @property
    def shift(self) -> Optional[int]:
        if self.baseline_rank is None:
            return None
        return self.baseline_rank - self.subject_rank

    def shift_text(self) -> str:
        return ABSENT if self.shift is None else str(self.shift)


def rank_shift(subject: Sequence[ActivityRecord], baseline: Sequence[ActivityRecord]) -> List[RankShift]:
    """Ranks are 1-based list positions; a merged subject activity takes the best rank of its members."""
    baseline_rank: Dict[str, int] = {}
    for rank, activity in enumerate(baseline, 1):
        for member in activity.member_names:
            baseline_rank.setdefault(member, rank)

    shifts = []
    for rank, activity in enumerate(subject, 1):
        ranks = [baseline_rank[m] for m in activity.member_names if m in baseline_rank]
        shifts.append(RankShift(activity.name, rank, min(ranks) if ranks else None))
    return shifts


def rank_shift_frame(subject_sets: Mapping[str, ActivitySet], baseline_sets: Mapping[str, ActivitySet], k: int = 20) -> pd.DataFrame:
    """k x locations matrix of shifts, ABSENT where the activity is missing from the baseline ranking."""
    columns = {}
    for location_id in sorted(subject_sets, key=natural_key):
        top = subject_sets[location_id].ranked()[:k]
        baseline = baseline_sets.get(location_id, ActivitySet(location_id, {})).ranked()
        shifts = [s.shift_text() for s in rank_shift(top, baseline)]
        columns[location_id] = shifts + [""] * (k - len(shifts))
    frame = pd.DataFrame(columns, index=range(1, k + 1))
    frame.index.name = "rank"
    return frame


# --- win / loss -------------------------------------------------------------------------


@dataclass(frozen=True)
class WinLossTally:
    wins: int = 0
    losses: int = 0
    draws: int = 0

    @property
    def total(self) -> int:
        return self.wins + self.losses + self.draws

    def percentages(self) -> Tuple[float, float, float]:
        if self.total == 0:
            return 0.0, 0.0, 0.0
        return tuple(100.0 * c / self.total for c in (self.wins, self.losses, self.draws))

    def to_frame(self) -> pd.DataFrame:
        win, loss, draw = self.percentages()
        return pd.DataFrame([{
            "wins": self.wins, "losses": self.losses, "draws": self.draws, "total": self.total,
            "win_pct": win, "loss_pct": loss, "draw_pct": draw,
        }])


def win_loss(activities: Iterable[str], candidates: Iterable[str], system_a: LANetGraph, system_b: LANetGraph) -> WinLossTally:
    """
    Each system recommends its highest-AF candidate for every query activity. The recommendation
    backed by the higher AF (in its own knowledgebase) wins; same location or equal AF is a draw.
    Activities neither system can answer are left out of the tally.
    """
    candidates = list(candidates)
    wins = losses = draws = 0
    for activity in activities:
        rec_a = recommend_location(system_a, activity, candidates)
        rec_b = recommend_location(system_b, activity, candidates)
        if rec_a is None and rec_b is None:
            continue
        if rec_b is None:
            wins += 1
        elif rec_a is None:
            losses += 1
        elif rec_a == rec_b:
            draws += 1
        else:
            af_a = activity_frequency(system_a, activity, rec_a)
            af_b = activity_frequency(system_b, activity, rec_b)
            if af_a > af_b:
                wins += 1
            elif af_a < af_b:
                losses += 1
            else:
                draws += 1
    tally = WinLossTally(wins, losses, draws)
    logger.info(f"Win/loss over {tally.total} activities: {wins} wins, {losses} losses, {draws} draws")
    return tally


def query_activities(*graphs: LANetGraph) -> List[str]:
    """Distinct single-verb activity names found in any of the graphs."""
    names = set()
    for graph in graphs:
        for aset in graph.activity_sets().values():
            for activity in aset:
                names.update(activity.member_names)
    return sorted(names)
