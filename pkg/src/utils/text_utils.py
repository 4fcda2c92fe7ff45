import re
from typing import Iterable, Tuple

_NON_WORD = re.compile(r"[^0-9a-z]+")

# Copula forms never take part in an activity, whatever lemma the annotator gave them
COPULA_LEMMAS = frozenset({"be"})
COPULA_FORMS = frozenset({"be", "am", "is", "are", "was", "were", "been", "being", "'s", "'re", "'m"})


def normalize_concept(text: str) -> str:
    """Lowercase, punctuation to spaces, single spaces ("Stadiums & Arenas" -> "stadiums arenas")."""
    return " ".join(_NON_WORD.sub(" ", str(text).lower()).split())


def pos_class(tag: str) -> str:
    """Collapse a Penn-Treebank tag into the lexicon's pos-class."""
    tag = tag.upper()
    if tag.startswith("VB"):
        return "verb"
    if tag.startswith("NN"):
        return "noun"
    return "other"


def is_noun(tag: str) -> bool:
    return tag.upper().startswith("NN")


def is_verb(tag: str) -> bool:
    return tag.upper().startswith("VB")


def is_copula(surface: str, lemma: str) -> bool:
    return lemma.lower() in COPULA_LEMMAS or surface.lower() in COPULA_FORMS


def render_activity_name(verbs: Iterable[str], concept: str) -> str:
    """Render "(v1/v2/..., concept)" with the verb group sorted."""
    return f"({'/'.join(sorted(set(verbs)))}, {concept})"


def parse_activity_name(name: str) -> Tuple[Tuple[str, ...], str]:
    """Inverse of render_activity_name. Also accepts the bare "verb concept words" query form."""
    text = name.strip()
    if text.startswith("(") and text.endswith(")") and "," in text:
        verb_part, concept = text[1:-1].split(",", 1)
        verbs = tuple(sorted({v.strip().lower() for v in verb_part.split("/") if v.strip()}))
        return verbs, normalize_concept(concept)
    words = normalize_concept(text).split()
    if len(words) < 2:
        raise ValueError(f"activity '{name}' needs a verb and a concept")
    return (words[0],), " ".join(words[1:])


def natural_key(value: str):
    """Ordering key that sorts numeric ids numerically ("2" < "10") and others lexically after them."""
    value = str(value)
    # raw string breaks ties between "7" and "07"
    return (0, int(value), value) if value.isdecimal() else (1, 0, value)
