import math
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Tuple

from src.utils.text_utils import natural_key

EARTH_RADIUS_M = 6_371_000.0
UNBOUNDED = "unbounded"


def haversine(lat1: float, lon1: float, lat2: float, lon2: float) -> float:
    """Great-circle distance in metres."""
    phi1, phi2 = math.radians(lat1), math.radians(lat2)
    d_phi = phi2 - phi1
    d_lambda = math.radians(lon2 - lon1)
    a = math.sin(d_phi / 2) ** 2 + math.cos(phi1) * math.cos(phi2) * math.sin(d_lambda / 2) ** 2
    return 2 * EARTH_RADIUS_M * math.asin(min(1.0, math.sqrt(a)))


def radial_distance(a, b) -> float:
    """Distance between two objects carrying `latitude` / `longitude`."""
    return haversine(a.latitude, a.longitude, b.latitude, b.longitude)


def format_distance(meters: Optional[float]) -> str:
    if meters is None:
        return UNBOUNDED
    if meters < 1000:
        return f"{meters:.2f} m"
    return f"{meters / 1000:.2f} Km"


@dataclass(frozen=True)
class BouAssignment:
    location_id: str
    activity_name: str
    bou: Optional[float] = None
    nearest_alternative: Optional[str] = None

    @property
    def bounded(self) -> bool:
        return self.bou is not None

    def serialized(self):
        return self.bou if self.bounded else UNBOUNDED


def similarity_set(
    location_id: str,
    si_row: Mapping[str, float],
    names: Mapping[str, FrozenSet[str]],
    ubiquitous: FrozenSet[str] = frozenset(),
) -> List[str]:
    """
    Locations to explore for uniqueness: SI > 0, plus locations whose overlap lies only on
    activities performed everywhere (their SI contribution is 0 but they still offer the activity).
    """
    own = names.get(location_id, frozenset())
    members = []
    for other, si in si_row.items():
        if other == location_id:
            continue
        if si > 0 or (own & names.get(other, frozenset()) & ubiquitous):
            members.append(other)
    return members


def compute_bou(
    location_id: str,
    names: Mapping[str, FrozenSet[str]],
    candidates: Iterable[str],
    distances: Mapping[str, float],
) -> Dict[str, BouAssignment]:
    """
    Sweep the candidate locations nearest first; the first one offering an activity fixes its BoU.
    Equidistant candidates are taken in location_id order.
    """
    own = sorted(names.get(location_id, frozenset()))
    result: Dict[str, BouAssignment] = {}
    remaining = set(own)

    for other in sorted(candidates, key=lambda c: (distances[c], natural_key(c))):
        if not remaining:
            break
        shared = remaining & names.get(other, frozenset())
        for name in sorted(shared):
            result[name] = BouAssignment(location_id, name, distances[other], other)
        remaining -= shared

    for name in sorted(remaining):
        result[name] = BouAssignment(location_id, name)
    return {name: result[name] for name in own}


def alternatives_by_distance(
    location_id: str,
    activity_name: str,
    names: Mapping[str, FrozenSet[str]],
    distances: Mapping[str, float],
) -> List[Tuple[str, float]]:
    others = [
        other for other, acts in names.items()
        if other != location_id and activity_name in acts
    ]
    return [(o, distances[o]) for o in sorted(others, key=lambda o: (distances[o], natural_key(o)))]
