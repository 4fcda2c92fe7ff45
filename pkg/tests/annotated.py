"""Compact builders for hand-annotated test input.

A sentence is written as space-separated ``surface/POS[/lemma]`` items; arcs are ``(head, dep, label)``.
"""
from typing import Iterable, Sequence, Tuple

from src.corpus import AnnotatedSentence, DependencyArc, LocationRecord, ReviewRecord, Token


def sentence(text: str, arcs: Iterable[Tuple[int, int, str]] = ()) -> AnnotatedSentence:
    tokens = []
    for i, item in enumerate(text.split()):
        parts = item.split("/")
        surface, pos = parts[0], parts[1]
        lemma = parts[2] if len(parts) > 2 else surface.lower()
        tokens.append(Token(i, surface, lemma, pos))
    return AnnotatedSentence(tuple(tokens), tuple(DependencyArc(h, d, label) for h, d, label in arcs))


def svo(subject: str, verb: str, verb_lemma: str, noun: str, noun_lemma: str = None) -> AnnotatedSentence:
    """"<subject> <verb> <noun> ." with nsubj / dobj arcs."""
    return sentence(
        f"{subject}/PRP {verb}/VBD/{verb_lemma} {noun}/NN/{noun_lemma or noun} ./.",
        [(1, 0, "nsubj"), (1, 2, "dobj"), (1, 3, "punct")],
    )


def review(review_id: str, *sentences: AnnotatedSentence) -> ReviewRecord:
    return ReviewRecord(review_id, tuple(sentences))


def location(
    location_id: str,
    categories: Sequence[str],
    reviews: Sequence[ReviewRecord] = (),
    latitude: float = 29.865,
    longitude: float = 77.89,
    name: str = None,
) -> LocationRecord:
    return LocationRecord(
        location_id=location_id,
        name=name or f"Location {location_id}",
        formatted_address="Roorkee, Uttarakhand, India",
        latitude=latitude,
        longitude=longitude,
        categories=tuple(categories),
        reviews=tuple(reviews),
    )
