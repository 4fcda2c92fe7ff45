import networkx as nx
import pytest

from src.corpus import LemmaLexicon, Relation, RelationSnapshot
from src.errors import AssemblyError, CorpusError, NotFoundError
from src.utils.geo_utils import UNBOUNDED
from src.utils.lanet_graph import LANetGraph, activity_node, location_node, location_pairs
from src.utils.pipeline import discover_lanet
from src.utils.similarity import build_alm, popularity_matrix
from src.utils.text_utils import natural_key
from tests.annotated import location, review, svo


def test_graph_size(mini_graph):
    assert mini_graph.stats() == {
        "location_nodes": 7, "activity_nodes": 13, "al_links": 22, "il_links": 7, "links": 29,
    }


def test_location_properties(mini_graph):
    node = mini_graph.location("4")
    assert node["Name_of_Location"] == "Hotel Royal Palace"
    assert node["Category"] == ["hotel", "restaurant", "bar"]
    assert node["No_of_Reviews"] == 7
    with pytest.raises(NotFoundError):
        mini_graph.location("99")


def test_similarity_links(mini_graph):
    pairs = {(p, q) for p in mini_graph.location_ids() for q, _ in mini_graph.similar_to(p) if int(p) < int(q)}
    assert pairs == {("1", "2"), ("3", "4"), ("3", "6"), ("3", "7"), ("4", "6"), ("4", "7"), ("6", "7")}
    assert mini_graph.similar_to("5") == []
    link = dict(mini_graph.similar_to("4"))["6"]
    assert link["Similarity_Index"] == pytest.approx(0.319, abs=1e-3)
    assert link["Common_Activity_List"] == ["(eat, chicken)", "(have, butter naan)", "(have, dinner)"]
    assert link["Distance"] == pytest.approx(222.39, abs=0.01)


def test_activity_links(mini_graph):
    links = dict(mini_graph.activities_at("4"))
    assert sorted(links) == ["(eat, chicken)", "(get, beer)", "(have, butter naan)", "(have, dinner)", "(have/take, food)"]
    food = links["(have/take, food)"]
    assert food["Activity_Frequency"] == 2
    assert food["Activity_Popularity_Index"] == pytest.approx(1.0)
    assert food["Boundary_of_Uniqueness"] is None
    assert food["Nearest_Alternative"] is None
    assert food["Supporting_Reviews"] == ["r1", "r2"]
    dinner = links["(have, dinner)"]
    assert dinner["Boundary_of_Uniqueness"] == pytest.approx(51.15, abs=0.01)
    assert dinner["Nearest_Alternative"] == "7"
    assert dinner["Activity_Popularity_Index"] == pytest.approx(0.2)


def test_covering_names(mini_graph):
    assert mini_graph.covering_names("take food") == ["(take, food)", "(have/take, food)"]
    assert mini_graph.covering_names("(have, food)") == ["(have/take, food)"]
    assert mini_graph.resolve_activity("Have Dinner") == "(have, dinner)"
    with pytest.raises(NotFoundError):
        mini_graph.covering_names("eat food")
    with pytest.raises(NotFoundError):
        mini_graph.covering_names("dinner")


def test_activity_sets_are_rebuilt_from_links(mini_graph, mini_build):
    assert mini_graph.activity_sets() == mini_build.activity_sets


def test_records_read_back_identically(mini_graph, tmp_path):
    path = tmp_path / "lanet.jsonl"
    size = mini_graph.write_records(str(path))
    assert size == path.stat().st_size
    lines = path.read_text(encoding="utf-8").splitlines()
    assert len(lines) == 7 + 13 + 29
    assert f'"Boundary_of_Uniqueness": "{UNBOUNDED}"' in path.read_text(encoding="utf-8")

    loaded = LANetGraph.read_records(str(path))
    assert loaded.stats() == mini_graph.stats()
    assert loaded.dumps() == mini_graph.dumps()
    assert dict(loaded.activities_at("4"))["(get, beer)"]["Boundary_of_Uniqueness"] is None


def test_malformed_records(tmp_path):
    path = tmp_path / "bad.jsonl"
    path.write_text('{"type": "node", "id": "L:1"}\n', encoding="utf-8")
    with pytest.raises(CorpusError):
        LANetGraph.read_records(str(path))


def test_graphml_flattens_lists_and_unbounded(mini_graph, tmp_path):
    path = tmp_path / "lanet.graphml"
    mini_graph.write_graphml(str(path))
    flat = nx.read_graphml(str(path))
    assert flat.number_of_nodes() == 20
    assert flat.number_of_edges() == 29
    assert flat.nodes[location_node("4")]["Category"] == "hotel; restaurant; bar"
    beer = flat.edges[activity_node("(get, beer)"), location_node("4")]
    assert beer["Boundary_of_Uniqueness"] == UNBOUNDED
    # empty strings come back as missing keys from the GraphML reader
    assert beer.get("Nearest_Alternative", "") == ""
    dinner = flat.edges[activity_node("(have, dinner)"), location_node("4")]
    assert dinner["Nearest_Alternative"] == "7"
    assert float(dinner["Boundary_of_Uniqueness"]) == pytest.approx(51.15, abs=0.01)


def test_similarity_frame(mini_graph):
    frame = mini_graph.similarity_frame()
    assert list(frame.index) == ["1", "2", "3", "4", "5", "6", "7"]
    assert frame.loc["4", "6"] == frame.loc["6", "4"] == pytest.approx(0.319, abs=1e-3)
    assert frame.loc["5", "5"] == 1.0
    assert frame.loc["1", "5"] == 0.0


def test_validate_rejects_broken_popularity(mini_graph):
    broken = LANetGraph(mini_graph.graph.copy())
    broken.graph.edges[activity_node("(have, dinner)"), location_node("3")]["Activity_Popularity_Index"] = 0.9
    with pytest.raises(AssemblyError):
        broken.validate()


def test_validate_rejects_wrong_common_activities(mini_graph):
    broken = LANetGraph(mini_graph.graph.copy())
    broken.graph.edges[location_node("1"), location_node("2")]["Common_Activity_List"] = ["(eat, rasmalai)"]
    with pytest.raises(AssemblyError):
        broken.validate()


def test_self_similarity_is_rejected():
    with pytest.raises(AssemblyError):
        LANetGraph().link_locations("3", "3", Similarity_Index=1.0)


def test_location_pairs():
    assert location_pairs(["10", "2", "1"]) == [("1", "2"), ("1", "10"), ("2", "10")]


def test_natural_key_orders_every_id():
    ids = ["10", "a", "07", "2", "7", "²"]
    assert sorted(ids, key=natural_key) == ["2", "07", "7", "10", "a", "²"]
    assert natural_key("7") != natural_key("07")


def test_zero_padded_ids_write_one_similarity_link(tmp_path):
    snapshot = RelationSnapshot([
        ("dinner", Relation.AT_LOCATION, "restaurant"),
        ("pizza", Relation.AT_LOCATION, "restaurant"),
    ])
    locations = [
        location("7", ["restaurant"], [review("r1", svo("We", "had", "have", "dinner"))], latitude=29.860),
        location("07", ["restaurant"], [review("r1", svo("We", "had", "have", "dinner"))], latitude=29.861),
        location("8", ["restaurant"], [review("r1", svo("I", "ate", "eat", "pizza"))], latitude=29.862),
    ]
    graph = discover_lanet(locations, snapshot, LemmaLexicon()).graph
    assert graph.location_ids() == ["07", "7", "8"]
    similarity_links = [r for r in graph.to_records() if r["label"] == "Is_Similar_To"]
    assert len(similarity_links) == graph.link_counts()[1] == 1

    path = tmp_path / "padded.jsonl"
    graph.write_records(str(path))
    assert LANetGraph.read_records(str(path)).dumps() == graph.dumps()


def test_popularity_index_is_the_alm_row_share(mini_build):
    alm = build_alm(mini_build.activity_sets.values(), mini_build.graph.location_ids())
    api = popularity_matrix(alm)
    for name in alm.activity_names:
        links = mini_build.graph.locations_for(name)
        for location_id, link in links:
            assert link["Activity_Popularity_Index"] == pytest.approx(api[alm.row(name), alm.column(location_id)])
        assert sum(link["Activity_Popularity_Index"] for _, link in links) == pytest.approx(1.0)
