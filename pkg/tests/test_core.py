"""Errors, budget, settings and trace recording."""

from fractions import Fraction

import orjson
import pytest

from boxmso.core.budget import EnumerationBudget
from boxmso.core.config import Limits, Settings
from boxmso.core.errors import (
    BoxmsoError,
    BudgetExceededError,
    NotBoxedError,
    ParseError,
    SymbolNotFoundError,
)
from boxmso.core.events import Stopwatch, TraceRecorder


def test_error_codes_are_stable():
    assert ParseError("x").code == "syntax-error"
    assert SymbolNotFoundError("x").code == "symbol-not-found"
    assert BudgetExceededError("x").code == "budget-exceeded"
    assert issubclass(NotBoxedError, BoxmsoError)


def test_parse_error_carries_position():
    err = ParseError("unexpected token", line=3, column=7)
    assert err.line == 3 and err.column == 7
    assert str(err) == "syntax-error: unexpected token at 3:7"
    assert err.to_dict() == {
        "error": "syntax-error",
        "message": "unexpected token at 3:7",
        "detail": {"line": 3, "column": 7},
    }


def test_budget_charges_until_the_limit():
    budget = EnumerationBudget(limit=10)
    budget.charge("oracle", 6)
    budget.charge("oracle", 4)
    assert budget.spent("oracle") == 10
    assert budget.spent("table states") == 0
    with pytest.raises(BudgetExceededError):
        budget.charge("oracle")


def test_budget_refuses_known_work_up_front():
    budget = EnumerationBudget(limit=100)
    budget.ensure("tables", 100)
    with pytest.raises(BudgetExceededError) as info:
        budget.ensure("tables", 101)
    assert info.value.detail["limit"] == 100


def test_settings_read_prefixed_environment(monkeypatch):
    monkeypatch.setenv("BOXMSO_BUDGET", "123")
    monkeypatch.setenv("BOXMSO_DEFAULT_EPSILON", "0.1")
    s = Settings(_env_file=None)
    assert s.budget == 123
    assert s.epsilon == Fraction(1, 10)


def test_limits_from_settings_with_override():
    s = Settings(_env_file=None, budget=99)
    assert Limits.from_settings(s).budget == 99
    assert Limits.from_settings(s, budget=7).budget == 7


def test_limits_check_context():
    limits = Limits(max_rank=2, max_arity=2, max_labels=4)
    limits.check_context(2, 2, 4)
    with pytest.raises(BudgetExceededError) as info:
        limits.check_context(3, 1, 1)
    assert info.value.detail["limit"] == "max_rank"
    with pytest.raises(BudgetExceededError):
        limits.check_context(1, 3, 1)
    with pytest.raises(BudgetExceededError):
        limits.check_context(1, 1, 5)


def test_trace_recorder_lines_are_sorted_json():
    trace = TraceRecorder()
    trace.record("node", kind="union", states=4)
    trace.record("node", kind="leaf", states=9)
    lines = trace.lines()
    assert len(lines) == 2
    assert orjson.loads(lines[0]) == {"type": "node", "kind": "union", "states": 4}
    assert lines[0].index('"kind"') < lines[0].index('"states"')
    assert trace.largest("states") == 9


def test_disabled_recorder_keeps_nothing():
    trace = TraceRecorder(enabled=False)
    trace.record("node", states=1)
    assert trace.events == []
    assert trace.largest() == 0


def test_stopwatch_is_monotone():
    watch = Stopwatch()
    first = watch.elapsed_ms
    assert first >= 0
    assert watch.elapsed_ms >= first
