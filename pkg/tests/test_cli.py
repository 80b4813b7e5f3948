"""Command-line behaviour through click's test runner."""

import orjson
import pytest
from click.testing import CliRunner

from boxmso.engine.expressions import evaluate, max_label
from boxmso.engine.expressions import parse as parse_expression
from boxmso.engine.graphs import parse_graph
from boxmso.main import EXIT_ERROR, cli

ITEMS = "v 0 1 2\nweight w 0 3\nweight w 1 5\nweight w 2 8\n"
SUBSET_SUM_8 = (
    "(query (free X)\n"
    "  (constraint (and (cmp <= (term 0 (coef w X 1)) 8) (cmp >= (term 0 (coef w X 1)) 8)))\n"
    "  (target 0))\n"
)
KNAPSACK = "problem knapsack\nvalues 5 4 3\nsizes 4 3 2\ncapacity 5\n"


@pytest.fixture
def runner() -> CliRunner:
    return CliRunner()


@pytest.fixture
def instance(tmp_path):
    graph = tmp_path / "items.graph"
    graph.write_text(ITEMS)
    query = tmp_path / "subset.query"
    query.write_text(SUBSET_SUM_8)
    return graph, query


def test_solve_prints_key_value_lines(runner, instance):
    graph, query = instance
    result = runner.invoke(cli, ["solve", str(graph), str(query), "--epsilon", "0.25"])
    assert result.exit_code == 0, result.output
    lines = result.output.splitlines()
    assert "alpha: 5/4" in lines
    assert "max_plus: 0" in lines
    assert "epsilon_used: 1/4" in lines


def test_structured_answer_passes_check(runner, instance, tmp_path):
    graph, query = instance
    result = runner.invoke(
        cli, ["solve", str(graph), str(query), "--epsilon", "1/4", "--format", "structured"]
    )
    assert result.exit_code == 0, result.output
    document = orjson.loads(result.output)
    assert document["max_plus"] == 0
    assert "elapsed_ms" not in document["stats"]

    answer = tmp_path / "answer.json"
    answer.write_text(result.output)
    checked = runner.invoke(cli, ["check", str(graph), str(query), str(answer)])
    assert checked.exit_code == 0, checked.output
    assert "verdict: valid" in checked.output


def test_check_rejects_a_false_claim(runner, instance, tmp_path):
    graph, query = instance
    answer = tmp_path / "answer.json"
    answer.write_bytes(orjson.dumps({
        "max_minus": "-inf",
        "max_plus": "-inf",
        "alpha": "5/4",
        "epsilon_used": "1/4",
    }))
    result = runner.invoke(cli, ["check", str(graph), str(query), str(answer)])
    assert result.exit_code == 1
    assert "verdict: invalid" in result.output


def test_exact_mode(runner, instance):
    graph, query = instance
    result = runner.invoke(cli, ["exact", str(graph), str(query)])
    assert result.exit_code == 0, result.output
    assert "status: solution" in result.output
    assert "value: 0" in result.output
    assert "witness: X={0,1}" in result.output


def test_trace_lines_follow_the_answer(runner, instance):
    graph, query = instance
    result = runner.invoke(cli, ["solve", str(graph), str(query), "--mode", "exact", "--trace"])
    assert result.exit_code == 0, result.output
    traced = [line for line in result.output.splitlines() if line.startswith("{")]
    assert traced
    assert orjson.loads(traced[0])["type"] == "node"


def test_malformed_query(runner, instance, tmp_path):
    graph, _ = instance
    broken = tmp_path / "broken.query"
    broken.write_text("(query (free X)\n")
    result = runner.invoke(cli, ["solve", str(graph), str(broken)])
    assert result.exit_code == EXIT_ERROR
    assert "error: syntax-error" in result.output


def test_epsilon_out_of_range(runner, instance):
    graph, query = instance
    result = runner.invoke(cli, ["solve", str(graph), str(query), "--epsilon", "0.75"])
    assert result.exit_code == 2


def test_missing_input_file(runner, tmp_path):
    result = runner.invoke(cli, ["solve", str(tmp_path / "a.graph"), str(tmp_path / "b.query")])
    assert result.exit_code == 2


def test_gen_writes_graph_and_expression(runner, tmp_path):
    prefix = tmp_path / "p4"
    result = runner.invoke(cli, ["gen", "path", "4", "--out", str(prefix)])
    assert result.exit_code == 0, result.output
    assert (tmp_path / "p4.graph").read_text().startswith("v 0\n")
    assert (tmp_path / "p4.cwe").exists()


def test_gen_cograph(runner, tmp_path):
    prefix = tmp_path / "co"
    result = runner.invoke(cli, ["gen", "cograph", "9", "--seed", "3", "--out", str(prefix)])
    assert result.exit_code == 0, result.output
    g = parse_graph((tmp_path / "co.graph").read_text())
    e = parse_expression((tmp_path / "co.cwe").read_text())
    assert g.n == 9
    assert max_label(e) <= 2
    assert len(evaluate(e).edges) == len(g.edges)


def test_encode_prints_the_note(runner, tmp_path):
    path = tmp_path / "bag.instance"
    path.write_text(KNAPSACK)
    result = runner.invoke(cli, ["encode", str(path), "--out", str(tmp_path / "bag")])
    assert result.exit_code == 0, result.output
    assert result.output.startswith("knapsack: conservative:")
    assert (tmp_path / "bag.query").exists()


def test_encode_and_solve_decodes_witnesses(runner, tmp_path):
    path = tmp_path / "bag.instance"
    path.write_text(KNAPSACK)
    result = runner.invoke(cli, ["encode", str(path), "--solve", "--format", "structured"])
    assert result.exit_code == 0, result.output
    document = orjson.loads(result.output)
    assert document["decoded_plus"]["value"] >= 7
    assert document["note"].startswith("conservative:")


@pytest.mark.slow
def test_suite_command(runner):
    result = runner.invoke(cli, ["suite", "--count", "6", "--format", "structured"])
    assert result.exit_code == 0, result.output
    assert orjson.loads(result.output)["failed"] == 0
