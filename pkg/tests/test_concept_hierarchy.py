import math

import pytest

from src.corpus import Relation, RelationSnapshot
from src.errors import HierarchyError
from src.utils.concept_hierarchy import (
    ConceptArc, ConceptEntry, ConceptHierarchy, build_cch, concept_scores, extract_concepts, filter_relevant,
    score_table,
)
from src.utils.extractor import ActivityRecord, ActivitySet

R, U, A, I = Relation.RELATED_TO, Relation.USED_FOR, Relation.AT_LOCATION, Relation.IS_A

RESTAURANT_SNAPSHOT = RelationSnapshot([
    ("order", R, "restaurant"),
    ("bar", R, "restaurant"),
    ("beer", A, "restaurant"),
    ("food", A, "restaurant"),
    ("drink", R, "beer"),
    ("beer", U, "party"),
    ("taste", R, "food"),
    ("guinness", I, "beer"),
    ("coffee", I, "drink"),
    ("tea", I, "drink"),
    ("burger", I, "food"),
    ("pie", I, "food"),
    ("bread", I, "food"),
])

CONCEPTS = [
    "bar", "beer", "bread", "burger", "car", "coffee", "cricket match", "drink", "food", "guinness", "movie",
    "order", "party", "pie", "taste", "tea",
]


@pytest.fixture
def restaurant_cch():
    return build_cch(["restaurant"], CONCEPTS, RESTAURANT_SNAPSHOT)


def test_levels_grow_until_nothing_is_added(restaurant_cch):
    assert restaurant_cch.levels == [
        ["bar", "order", "restaurant"],
        ["beer", "drink", "food", "party", "taste"],
        ["bread", "burger", "coffee", "guinness", "pie", "tea"],
    ]
    assert restaurant_cch.iterations == 3
    assert "movie" not in restaurant_cch and "car" not in restaurant_cch
    assert len(restaurant_cch) == 14


def test_parent_chain(restaurant_cch):
    assert restaurant_cch.ancestors("guinness") == ["beer", "restaurant"]
    # expanded concepts share their anchor's parent
    assert restaurant_cch.ancestors("coffee") == ["drink", "restaurant"]
    assert restaurant_cch.ancestors("bar") == []
    assert restaurant_cch.level("tea") == 3


def test_arcs_follow_level_rules(restaurant_cch):
    assert ConceptArc("guinness", I, "beer") in restaurant_cch.arcs
    assert ConceptArc("beer", U, "party") in restaurant_cch.arcs
    assert ConceptArc("bar", R, "restaurant") in restaurant_cch.arcs
    restaurant_cch.validate(["restaurant"], CONCEPTS)


def test_validate_rejects_a_skipping_arc(restaurant_cch):
    restaurant_cch.arcs.append(ConceptArc("guinness", A, "restaurant"))
    with pytest.raises(HierarchyError):
        restaurant_cch.validate(["restaurant"], CONCEPTS)


def test_validate_rejects_extend_relation_within_a_level():
    cch = ConceptHierarchy(levels=[["restaurant"], ["beer", "food"]], arcs=[ConceptArc("beer", I, "food")])
    with pytest.raises(HierarchyError):
        cch.validate(["restaurant"], ["beer", "food"])


def test_unknown_level_raises(restaurant_cch):
    with pytest.raises(HierarchyError):
        restaurant_cch.level("movie")


def test_no_categories_is_an_error():
    with pytest.raises(HierarchyError):
        build_cch([], CONCEPTS, RESTAURANT_SNAPSHOT)


def test_phrase_matches_through_head_noun():
    snapshot = RelationSnapshot([("food", A, "restaurant"), ("naan", I, "food")])
    cch = build_cch(["restaurant"], ["food", "butter naan"], snapshot)
    assert cch.level("butter naan") == 3
    assert cch.ancestors("butter naan") == ["food", "restaurant"]


def test_hierarchy_without_relations_is_just_the_categories():
    cch = build_cch(["restaurant", "bar"], ["movie"], RelationSnapshot())
    assert cch.levels == [["bar", "restaurant"]]
    assert cch.iterations == 1


def test_to_text_lists_tree_and_arcs(restaurant_cch):
    text = restaurant_cch.to_text()
    assert "restaurant (level 1)\n" in text
    assert "    guinness (level 3)\n" in text
    assert "guinness\tIsA\tbeer\t3\n" in text


def _aset():
    return ActivitySet.from_records("4", [
        ActivityRecord(("have",), "food", frozenset({"r1", "r2", "r3"})),
        ActivityRecord(("eat",), "food", frozenset({"r3", "r4"})),
        ActivityRecord(("drink",), "guinness", frozenset({"r5", "r6"})),
        ActivityRecord(("watch",), "movie", frozenset({"r7"})),
    ])


def test_extract_concepts_counts_reviews_per_concept():
    assert extract_concepts(_aset()) == [
        ConceptEntry("food", 4), ConceptEntry("guinness", 2), ConceptEntry("movie", 1),
    ]


def test_filter_relevant(restaurant_cch):
    kept = filter_relevant(_aset(), restaurant_cch)
    assert kept.names() == {"(have, food)", "(eat, food)", "(drink, guinness)"}


def test_concept_scores(restaurant_cch):
    food = concept_scores("food", 4, restaurant_cch)
    assert food.cli == 2
    assert food.gc_score == pytest.approx(math.log10(4) / 2)
    assert food.sc_score == pytest.approx(math.log10(4) * 2)
    guinness = concept_scores("guinness", 2, restaurant_cch)
    assert guinness.sc_score > guinness.gc_score
    # a concept mentioned once carries no weight
    assert concept_scores("bar", 1, restaurant_cch).gc_score == 0.0
    with pytest.raises(HierarchyError):
        concept_scores("movie", 1, restaurant_cch)


def test_score_table_zeroes_irrelevant_concepts(restaurant_cch):
    table = score_table(extract_concepts(_aset()), restaurant_cch)
    assert table["movie"].cli == 0 and table["movie"].gc_score == 0.0
    assert table["guinness"].cli == 3


def test_two_categories_with_the_full_concept_set():
    concepts = [
        "order", "beer", "food", "party", "drink", "taste", "guinness", "coffee", "tea", "burger", "pie", "bread",
        "movie", "car", "cricket match",
    ]
    cch = build_cch(["restaurant", "bar"], concepts, RESTAURANT_SNAPSHOT)
    assert cch.levels == [
        ["bar", "order", "restaurant"],
        ["beer", "drink", "food", "party", "taste"],
        ["bread", "burger", "coffee", "guinness", "pie", "tea"],
    ]
    assert cch.iterations == 3
    assert not {"movie", "car", "cricket match"} & set(cch.parent_of)
    cch.validate(["restaurant", "bar"], concepts)


def test_expand_wins_over_extend_for_the_same_concept():
    snapshot = RelationSnapshot([("beer", R, "restaurant"), ("beer", A, "restaurant")])
    cch = build_cch(["restaurant"], ["beer"], snapshot)
    assert cch.levels == [["beer", "restaurant"]]
    assert cch.level("beer") == 1
    assert sum(level.count("beer") for level in cch.levels) == 1
    assert cch.arcs == [ConceptArc("beer", R, "restaurant")]
