import io
import json

import networkx as nx
import pandas as pd
import pytest
from typer.testing import CliRunner

from src.errors import EXIT_NO_RESULT, EXIT_USAGE
from src.main import create_app

runner = CliRunner()


@pytest.fixture(scope="module")
def app():
    return create_app()


@pytest.fixture(scope="module")
def graph_file(tmp_path_factory, mini_graph):
    path = tmp_path_factory.mktemp("graph") / "lanet.jsonl"
    mini_graph.write_records(str(path))
    return str(path)


def invoke(app, *args, **kwargs):
    return runner.invoke(app, ["--log-level", "WARNING", *args], **kwargs)


def _csv(result) -> pd.DataFrame:
    return pd.read_csv(io.StringIO(result.stdout), dtype=str, keep_default_na=False)


def test_build(app, fixture_dir, tmp_path):
    output = tmp_path / "lanet.jsonl"
    result = invoke(
        app, "build",
        "--corpus", str(fixture_dir / "corpus.jsonl"),
        "--snapshot", str(fixture_dir / "conceptnet.tsv"),
        "--lexicon", str(fixture_dir / "lexicon.tsv"),
        "--output", str(output),
    )
    assert result.exit_code == 0, result.output
    assert "7 location nodes, 13 activity nodes and total 29 links" in result.stdout
    assert "uniqueness" in result.stdout
    assert output.exists()


def test_build_reports_missing_corpus(app, fixture_dir, tmp_path):
    result = invoke(
        app, "build",
        "--corpus", str(tmp_path / "missing.jsonl"),
        "--snapshot", str(fixture_dir / "conceptnet.tsv"),
        "--lexicon", str(fixture_dir / "lexicon.tsv"),
        "--output", str(tmp_path / "out.jsonl"),
    )
    assert result.exit_code == 1


def test_unknown_log_level(app):
    result = runner.invoke(app, ["--log-level", "LOUD", "stats", "--graph", "x"])
    assert result.exit_code == EXIT_USAGE


def test_query_activities(app, graph_file):
    result = invoke(app, "query", "activities", "--loc", "4", "--k", "3", "--format", "csv", "--graph", graph_file)
    assert result.exit_code == 0, result.output
    frame = _csv(result)
    assert list(frame["activity"]) == ["(have/take, food)", "(eat, chicken)", "(get, beer)"]
    assert list(frame["BoU"]) == ["unbounded", "51.15 m", "unbounded"]


def test_query_activities_with_concept_filter(app, graph_file):
    result = invoke(app, "query", "activities", "--loc", "4", "--filter", "generalized", "--m", "2", "-f", "csv", "-g", graph_file)
    assert list(_csv(result)["activity"]) == ["(have/take, food)", "(get, beer)"]


def test_query_activities_errors(app, graph_file):
    assert invoke(app, "query", "activities", "--loc", "99", "-g", graph_file).exit_code == EXIT_NO_RESULT
    assert invoke(app, "query", "activities", "--loc", "4", "--k", "-1", "-g", graph_file).exit_code == EXIT_USAGE
    assert invoke(app, "query", "activities", "--loc", "4", "--filter", "popular", "-g", graph_file).exit_code == EXIT_USAGE


def test_query_locations(app, graph_file):
    result = invoke(app, "query", "locations", "--activity", "have dinner", "--graph", graph_file)
    assert result.exit_code == 0, result.output
    assert "Hotel Prakash" in result.stdout
    ranked = _csv(invoke(app, "query", "locations", "--activity", "have dinner", "--rank-by", "api", "-f", "csv", "-g", graph_file))
    assert list(ranked["location_id"]) == ["3", "4", "6", "7"]


def test_query_alternates(app, graph_file):
    frame = _csv(invoke(app, "query", "alternates", "--loc", "4", "-f", "csv", "-g", graph_file))
    assert list(frame["location_id"]) == ["6", "7", "3"]
    assert invoke(app, "query", "alternates", "--loc", "5", "-g", graph_file).exit_code == EXIT_NO_RESULT


def test_query_unique(app, graph_file):
    frame = _csv(invoke(app, "query", "unique", "--loc", "4", "-f", "csv", "-g", graph_file))
    rows = frame.set_index("activity")
    assert rows.loc["(have, dinner)", "alternatives"] == "7, 3, 6"
    assert rows.loc["(have, dinner)", "BoU"] == "51.15 m"
    assert rows.loc["(get, beer)", "BoU"] == "unbounded"
    assert rows.loc["(get, beer)", "nearest"] == "-"
    single = _csv(invoke(app, "query", "unique", "--loc", "4", "--activity", "eat chicken", "-f", "csv", "-g", graph_file))
    assert list(single["alternatives"]) == ["7, 6"]


def test_query_broadcast(app, graph_file):
    result = invoke(app, "query", "broadcast", "--loc", "4", "--radius", "120", "--k", "1", "-g", graph_file)
    assert result.exit_code == 0, result.output
    records = [json.loads(line) for line in result.stdout.splitlines()]
    assert [r["location_id"] for r in records] == ["4", "7", "1", "3"]
    assert records[0]["activities"][0]["activity"] == "(have/take, food)"


def test_query_broadcast_needs_a_center(app, graph_file):
    assert invoke(app, "query", "broadcast", "--radius", "120", "-g", graph_file).exit_code == EXIT_USAGE
    assert invoke(app, "query", "broadcast", "--lat", "0", "--lon", "0", "--radius", "120", "-g", graph_file).exit_code == EXIT_NO_RESULT


def test_query_broadcast_repeats_on_interval(app, graph_file):
    result = invoke(
        app, "query", "broadcast", "--lat", "29.865", "--lon", "77.89", "--radius", "60",
        "--interval", "0.05", "--count", "2", "-g", graph_file,
    )
    assert result.exit_code == 0, result.output
    assert [json.loads(line)["location_id"] for line in result.stdout.splitlines()] == ["4", "7", "4", "7"]


def test_query_recommend(app, graph_file):
    result = invoke(app, "query", "recommend", "--activity", "have dinner", "-g", graph_file)
    assert result.stdout.strip() == "3"
    restricted = invoke(app, "query", "recommend", "--activity", "have dinner", "--candidates", "7, 6", "-g", graph_file)
    assert restricted.stdout.strip() == "6"
    missing = invoke(app, "query", "recommend", "--activity", "eat pizza", "--candidates", "1,2", "-g", graph_file)
    assert missing.exit_code == EXIT_NO_RESULT


def test_graph_from_environment(app, graph_file):
    result = invoke(app, "query", "recommend", "--activity", "eat rasmalai", env={"LANET_GRAPH": graph_file})
    assert result.exit_code == 0, result.output
    assert result.stdout.strip() == "1"


def test_export(app, graph_file, tmp_path):
    graphml = tmp_path / "lanet.graphml"
    assert invoke(app, "export", "graphml", "-g", graph_file, "-o", str(graphml)).exit_code == 0
    assert nx.read_graphml(str(graphml)).number_of_edges() == 29

    records = tmp_path / "copy.jsonl"
    assert invoke(app, "export", "records", "-g", graph_file, "-o", str(records)).exit_code == 0
    with open(graph_file, encoding="utf-8") as f:
        assert records.read_text(encoding="utf-8") == f.read()

    si = tmp_path / "si.csv"
    assert invoke(app, "export", "si-csv", "-g", graph_file, "-o", str(si)).exit_code == 0
    frame = pd.read_csv(si, index_col="location_id")
    assert frame.shape == (7, 7)
    assert frame.loc[4, "6"] == pytest.approx(0.319, abs=1e-3)


def test_stats(app, graph_file):
    result = invoke(app, "stats", "-g", graph_file, "-f", "csv")
    assert result.exit_code == 0, result.output
    first, *rest = result.stdout.splitlines()
    assert first.startswith("7 location nodes, 13 activity nodes and total 29 links")
    frame = pd.read_csv(io.StringIO("\n".join(rest)), dtype=str)
    assert frame.set_index("location_id").loc["4", "activities"] == "5"


def test_eval_accuracy(app, graph_file, fixture_dir):
    result = invoke(
        app, "eval", "accuracy", "-g", graph_file,
        "--ground-truth", str(fixture_dir / "ground_truth.tsv"),
        "--lexicon", str(fixture_dir / "lexicon.tsv"),
        "-f", "csv",
    )
    assert result.exit_code == 0, result.output
    frame = _csv(result)
    assert list(frame["location_id"]) == ["1", "4"]
    assert [float(v) for v in frame["accuracy"]] == pytest.approx([1.0, 0.8])


def test_eval_winloss_against_itself_is_all_draws(app, graph_file):
    frame = _csv(invoke(app, "eval", "winloss", "-g", graph_file, "--baseline", graph_file, "-f", "csv"))
    assert frame.loc[0, "wins"] == "0" and frame.loc[0, "losses"] == "0"
    assert frame.loc[0, "draws"] == frame.loc[0, "total"]


def test_eval_rankshift_to_file(app, graph_file, tmp_path):
    output = tmp_path / "shift.csv"
    result = invoke(app, "eval", "rankshift", "-g", graph_file, "--baseline", graph_file, "--k", "3", "-o", str(output))
    assert result.exit_code == 0, result.output
    frame = pd.read_csv(output, index_col="rank", dtype=str, keep_default_na=False)
    assert list(frame["4"]) == ["0", "0", "0"]
