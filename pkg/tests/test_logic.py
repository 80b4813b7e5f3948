"""Normal forms, the boxed fragment, and constraint loosening and tightening."""

from fractions import Fraction

import pytest

from boxmso.core.errors import NotBoxedError, OutOfRangeError
from boxmso.engine.logic import (
    Block,
    BlockExists,
    blocks,
    check_boxed,
    free_variables,
    granularity,
    loosen,
    negation_normalize,
    quantifier_rank,
    rescale_epsilon,
    shift_constraint_minus,
    shift_constraint_plus,
    snap_epsilon,
    strip_existentials,
    substitute,
    tighten,
    violation_persists,
    weaken_strict,
)
from boxmso.engine.queries import parse_formula
from boxmso.models.formula import TRUE, Compare, Exists, Not, Op, VarKind, WeightTerm

SET_X = {"X": VarKind.SET}


def x_at_most(bound):
    return parse_formula(f"(cmp <= (term 0 (coef w X 1)) {bound})", SET_X)


def test_negation_flips_comparisons():
    c = x_at_most(5)
    assert negation_normalize(Not(c)) == Compare(Op.GT, c.left, c.right)


def test_double_negation_and_quantifier_duality():
    f = parse_formula("(not (exists x (not (in x X))))", SET_X)
    normal = negation_normalize(f)
    assert normal == parse_formula("(forall x (in x X))", SET_X)
    assert negation_normalize(Not(Not(x_at_most(3)))) == x_at_most(3)


def test_rank_and_free_variables():
    f = parse_formula("(exists-set Y (forall x (forall y (or (in x Y) (in y X)))))", SET_X)
    assert quantifier_rank(f) == 3
    assert free_variables(f) == frozenset({"X"})


def test_granularity_is_the_common_denominator():
    f = parse_formula(
        "(and (cmp <= (term 0 (coef w X 1/2)) 1) (cmp >= (term 0 (coef w X 1/3)) 0))", SET_X
    )
    assert granularity(f) == 6


def test_subset_sum_constraint_is_boxed():
    f = parse_formula(
        "(and (cmp <= (term 0 (coef w X 1)) 8) (cmp >= (term 0 (coef w X 1)) 8))", SET_X
    )
    found = blocks(check_boxed(f))
    assert found
    assert all(b.universal == () and b.universal_comparison is None for b in found)


def test_universal_block_with_one_exceptional_term():
    f = parse_formula(
        "(forall-set Y (or (not (within red Y))"
        " (cmp <= (term 0 (coef w Y 1)) (term 0 (coef w X 1)))))",
        SET_X,
    )
    (block,) = blocks(check_boxed(negation_normalize(f)))
    assert block.universal == (("Y", VarKind.SET),)
    assert block.universal_term == WeightTerm.of(0, {("w", "Y"): 1})
    assert block.bound_term == WeightTerm.of(0, {("w", "X"): 1})
    assert block.existential_terms == (WeightTerm.of(0, {("w", "X"): 1}),)


def test_existential_prefix_becomes_block_exists():
    f = Exists("Z", VarKind.SET, x_at_most(4))
    d = check_boxed(f)
    assert isinstance(d, BlockExists)
    stripped, extra = strip_existentials(f)
    assert stripped == x_at_most(4)
    assert extra == (("Z", VarKind.SET),)


@pytest.mark.parametrize(
    "text, reason",
    [
        (
            "(forall-set Y (cmp <= (term 0 (coef w Y 1)) (term 0 (coef # Y 1))))",
            "two-universal-terms",
        ),
        (
            "(forall-set Y (exists-set Z (cmp <= (term 0 (coef w Z 1)) 3)))",
            "inner-variable",
        ),
    ],
)
def test_not_boxed(text, reason):
    with pytest.raises(NotBoxedError) as info:
        check_boxed(parse_formula(text))
    assert info.value.reason == reason


def test_not_boxed_requires_negation_normal_form():
    with pytest.raises(NotBoxedError) as info:
        check_boxed(Not(x_at_most(2)))
    assert info.value.reason == "not-normalized"


def test_not_boxed_rejects_negative_terms():
    f = Compare(Op.LE, WeightTerm.of(0, {("w", "X"): -1}), WeightTerm.constant_term(3))
    with pytest.raises(NotBoxedError) as info:
        check_boxed(f)
    assert info.value.reason == "negative-term"


# ============================================================================
# LOOSENING AND TIGHTENING
# ============================================================================


def test_loosen_and_tighten_scale_both_sides():
    f = x_at_most(6)
    assert loosen(f, Fraction(2)) == Compare(
        Op.LE, WeightTerm.of(0, {("w", "X"): Fraction(1, 2)}), WeightTerm.constant_term(12)
    )
    assert tighten(f, Fraction(2)) == Compare(
        Op.LE, WeightTerm.of(0, {("w", "X"): 2}), WeightTerm.constant_term(3)
    )
    assert loosen(f, Fraction(1)) is f
    with pytest.raises(OutOfRangeError):
        tighten(f, Fraction(1, 2))


def test_lower_bounds_scale_the_other_way():
    f = parse_formula("(cmp >= (term 0 (coef w X 1)) 6)", SET_X)
    loose = loosen(f, Fraction(2))
    assert loose == Compare(
        Op.GE, WeightTerm.of(0, {("w", "X"): 2}), WeightTerm.constant_term(3)
    )


def test_shift_constraint_minus_tightens_by_one_third_of_epsilon():
    f = parse_formula("(cmp <= (term 0 (coef # X 1)) 6)", SET_X)
    shifted = shift_constraint_minus(f, Fraction(1))
    assert shifted == Compare(
        Op.LE,
        WeightTerm.of(0, {("#", "X"): Fraction(4, 3)}),
        WeightTerm.constant_term(Fraction(9, 2)),
    )
    assert shift_constraint_plus(f, Fraction(1)) == loosen(f, Fraction(4, 3))


def test_shift_needs_a_natural_step_count():
    with pytest.raises(OutOfRangeError):
        shift_constraint_minus(x_at_most(1), Fraction(2, 7))


@pytest.mark.parametrize("epsilon", [Fraction(1, 10), Fraction(3, 10), Fraction(1, 2)])
def test_rescaled_epsilon_composes_within_bounds(epsilon):
    small = rescale_epsilon(epsilon)
    assert small == epsilon / 3
    assert (1 + small) ** 2 <= 1 + epsilon
    assert 1 / (1 + small) ** 2 >= 1 - epsilon


def test_rescale_epsilon_range():
    with pytest.raises(OutOfRangeError):
        rescale_epsilon(Fraction(0))
    with pytest.raises(OutOfRangeError):
        rescale_epsilon(Fraction(3, 5))


@pytest.mark.parametrize(
    "epsilon, b",
    [
        (Fraction(1, 4), 12),
        (Fraction(3, 10), 10),
        (Fraction(1, 5), 15),
        (Fraction(7, 20), 9),
    ],
)
def test_snap_epsilon(epsilon, b):
    found, snapped = snap_epsilon(epsilon)
    assert found == b
    assert snapped == Fraction(3, b)
    assert snapped <= epsilon


def test_weaken_strict():
    f = parse_formula("(cmp < (term 0 (coef w X 1)) 5)", SET_X)
    assert weaken_strict(f) == Compare(
        Op.LE, WeightTerm.of(1, {("w", "X"): 1}), WeightTerm.constant_term(5)
    )
    g = parse_formula("(cmp > (term 0 (coef w X 1/2)) 5)", SET_X)
    half = WeightTerm.of(0, {("w", "X"): Fraction(1, 2)})
    assert weaken_strict(g) == Compare(Op.GE, half, WeightTerm.constant_term(Fraction(11, 2)))


def test_substitute_replaces_one_comparison():
    f = parse_formula(
        "(and (cmp <= (term 0 (coef w X 1)) 2) (cmp >= (term 0 (coef w X 1)) 1))", SET_X
    )
    (first, second) = f.parts
    assert substitute(f, first, True).parts == (TRUE, second)


def test_block_formula_restores_quantifiers():
    f = parse_formula("(forall x (or (in x X) (color red x)))", SET_X)
    (block,) = blocks(check_boxed(f))
    assert isinstance(block, Block)
    assert block.formula == f


PAIR = {"X": VarKind.SET, "x": VarKind.VERTEX, "y": VarKind.VERTEX}
ANCHORED = frozenset({"x", "y"})


@pytest.mark.parametrize(
    "text, persists",
    [
        ("(or (not (in x X)) (not (in y X)) (not (edge x y)))", True),
        ("(and (or (in x X) (color red x)) (not (= x y)))", True),
        ("(or (not (in x X)) (cmp <= (term 0 (coef w X 1)) 3))", True),
        ("(or (not (in x X)) (edge x y))", False),
        ("(or (not (in x X)) (exists z (and (in z X) (edge x z))))", False),
        ("(or (not (in x X)) (within red X))", False),
    ],
)
def test_violation_persists(text, persists):
    body = negation_normalize(parse_formula(text, PAIR))
    assert violation_persists(body, ANCHORED) is persists


def test_violation_needs_anchored_elements():
    body = parse_formula("(not (in x X))", PAIR)
    assert violation_persists(body, ANCHORED)
    assert not violation_persists(body, frozenset())
