"""Documents read and written by the command line."""

from fractions import Fraction

import orjson
import pytest
from pydantic import ValidationError

from boxmso.core.errors import ParseError
from boxmso.models.answer import NEG_INF, ApproximateAnswer, RunStatistics
from boxmso.models.formula import VarKind
from boxmso.schemas import (
    AnswerDocument,
    ErrorDocument,
    Mode,
    RunConfig,
    RunStats,
    decode_value,
    decode_witness,
    dumps,
    encode_value,
    encode_witness,
    parse_epsilon,
)


def test_values():
    assert encode_value(NEG_INF) == "-inf"
    assert encode_value(Fraction(7)) == 7
    assert decode_value("-inf") == NEG_INF
    assert decode_value(3) == 3


def test_witnesses_list_members_in_order():
    witness = {"X": frozenset({3, 1}), "F": frozenset({(0, 1), (1, 2)})}
    document = encode_witness(witness)
    assert document == {"X": [1, 3], "F": [[0, 1], [1, 2]]}
    kinds = {"X": VarKind.SET, "F": VarKind.EDGE_SET}
    assert decode_witness(document, kinds) == witness
    assert encode_witness(None) is None


@pytest.mark.parametrize(
    "text, expected",
    [("0.25", Fraction(1, 4)), ("1/4", Fraction(1, 4)), (" 0.1 ", Fraction(1, 10))],
)
def test_parse_epsilon(text, expected):
    assert parse_epsilon(text) == expected


def test_parse_epsilon_rejects_garbage():
    with pytest.raises(ValueError):
        parse_epsilon("a quarter")


def test_answer_document_round_trip():
    answer = ApproximateAnswer(
        max_minus=NEG_INF,
        witness_minus=None,
        max_plus=0,
        witness_plus={"X": frozenset({0, 1})},
        alpha=Fraction(5, 4),
        epsilon_used=Fraction(1, 4),
        stats=RunStatistics(depth=2, b=60, limit=16, states=5, elapsed_ms=1.5),
    )
    document = AnswerDocument.from_answer(answer)
    assert document.alpha == "5/4"
    assert document.stats.elapsed_ms is None
    restored = document.to_answer({"X": VarKind.SET})
    assert restored.max_minus == NEG_INF
    assert restored.witness_plus == answer.witness_plus
    assert restored.alpha == answer.alpha

    payload = orjson.loads(dumps(document))
    assert "witness_minus" not in payload
    assert payload["stats"]["N"] == 16
    assert list(payload) == sorted(payload)


def test_timed_stats_carry_elapsed_time():
    stats = RunStats.from_statistics(RunStatistics(elapsed_ms=2.0), timed=True)
    assert stats.elapsed_ms == 2.0


def test_answer_document_rejects_unknown_values():
    with pytest.raises(ValidationError):
        AnswerDocument(max_minus="inf", max_plus=0, alpha="1", epsilon_used="1/4")


def test_error_document():
    document = ErrorDocument(**ParseError("unexpected token", 2, 5).to_dict())
    assert document.error == "syntax-error"
    assert document.detail == {"line": 2, "column": 5}


def test_run_config_epsilon(tmp_path):
    assert RunConfig(command="solve", epsilon="0.5").epsilon == Fraction(1, 2)
    with pytest.raises(ValidationError):
        RunConfig(command="solve", epsilon="0.75")
    with pytest.raises(ValidationError):
        RunConfig(command="solve", epsilon="0")
    assert RunConfig(command="exact", epsilon="0.75", mode=Mode.EXACT).mode is Mode.EXACT


def test_run_config_paths_must_exist(tmp_path):
    present = tmp_path / "g.graph"
    present.write_text("v 0\n")
    assert RunConfig(command="solve", graph=present).graph == present
    with pytest.raises(ValidationError):
        RunConfig(command="solve", graph=tmp_path / "missing.graph")
    with pytest.raises(ValidationError):
        RunConfig(command="solve", budget=0)
