import logging
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Union

import numpy as np
import pandas as pd

from src.errors import NetworkError, NotFoundError
from src.utils.extractor import ActivitySet
from src.utils.text_utils import natural_key

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ActivityLocationMatrix:
    """AF counts, one row per distinct activity name and one column per location."""
    activity_names: List[str]
    location_ids: List[str]
    counts: np.ndarray

    @property
    def shape(self):
        return self.counts.shape

    def row(self, activity_name: str) -> int:
        try:
            return self.activity_names.index(activity_name)
        except ValueError:
            raise NotFoundError(f"activity {activity_name} is not in the matrix")

    def column(self, location_id: str) -> int:
        try:
            return self.location_ids.index(location_id)
        except ValueError:
            raise NotFoundError(f"location {location_id} is not in the matrix")

    def supporting_locations(self, activity_name: str) -> List[str]:
        row = self.counts[self.row(activity_name)]
        return [self.location_ids[j] for j in np.flatnonzero(row)]

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.counts, index=self.activity_names, columns=self.location_ids)


@dataclass(frozen=True)
class AfIlfWeights:
    af: np.ndarray
    ilf: np.ndarray
    afilf: np.ndarray
    location_ids: List[str]

    def vector(self, location_id: str) -> np.ndarray:
        try:
            return self.afilf[:, self.location_ids.index(location_id)]
        except ValueError:
            raise NotFoundError(f"location {location_id} has no AF-ILF vector")


def build_alm(activity_sets: Iterable[ActivitySet], location_ids: Optional[Sequence[str]] = None) -> ActivityLocationMatrix:
    sets = list(activity_sets)
    columns = sorted(location_ids if location_ids is not None else (s.location_id for s in sets), key=natural_key)
    names = sorted({name for s in sets for name in s.names()})
    if not names:
        raise NetworkError("no activities: the activity-location matrix would be empty")

    row_of = {name: i for i, name in enumerate(names)}
    col_of = {loc: j for j, loc in enumerate(columns)}
    counts = np.zeros((len(names), len(columns)), dtype=np.int64)
    for s in sets:
        if s.location_id not in col_of:
            raise NetworkError(f"activity set for unknown location {s.location_id}")
        for activity in s:
            counts[row_of[activity.name], col_of[s.location_id]] = activity.af

    logger.debug(f"ALM {counts.shape[0]}x{counts.shape[1]}, {int(np.count_nonzero(counts))} nonzero cells")
    return ActivityLocationMatrix(names, list(columns), counts)


def af_ilf(alm: ActivityLocationMatrix) -> AfIlfWeights:
    counts = alm.counts.astype(float)
    m = counts.shape[1]
    af = np.log10(1.0 + counts)
    nnz = np.count_nonzero(counts, axis=1)
    ilf = np.log10(m / nnz)
    return AfIlfWeights(af, ilf, af * ilf[:, np.newaxis], alm.location_ids)


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    norm = float(np.linalg.norm(a) * np.linalg.norm(b))
    if norm == 0.0:
        return 0.0
    # float noise can push the cosine slightly past 1
    return float(min(max(np.dot(a, b) / norm, 0.0), 1.0))


def similarity_index(p: str, q: str, weights: AfIlfWeights) -> float:
    return cosine(weights.vector(p), weights.vector(q))


def similarity_matrix(weights: AfIlfWeights) -> np.ndarray:
    vectors = weights.afilf
    norms = np.linalg.norm(vectors, axis=0)
    safe = np.where(norms == 0.0, 1.0, norms)
    unit = vectors / safe
    si = np.clip(unit.T @ unit, 0.0, 1.0)
    zero = norms == 0.0
    si[zero, :] = 0.0
    si[:, zero] = 0.0
    return si


def popularity_index(alm: ActivityLocationMatrix, activity: Union[str, int], location: Union[str, int]) -> float:
    i = activity if isinstance(activity, int) else alm.row(activity)
    j = location if isinstance(location, int) else alm.column(location)
    total = alm.counts[i].sum()
    if total == 0:
        raise NetworkError(f"activity row {alm.activity_names[i]} has no support")
    return float(alm.counts[i, j] / total)


def popularity_matrix(alm: ActivityLocationMatrix) -> np.ndarray:
    totals = alm.counts.sum(axis=1, keepdims=True)
    return alm.counts / totals


def ubiquitous_activities(alm: ActivityLocationMatrix) -> frozenset:
    """Activities performed at every location (ILF = 0)."""
    full = np.count_nonzero(alm.counts, axis=1) == alm.counts.shape[1]
    return frozenset(name for name, flag in zip(alm.activity_names, full) if flag)
