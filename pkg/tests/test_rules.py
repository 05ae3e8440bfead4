"""Rule construction: closed forms vs the general solver, error taxonomy."""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gradshift.errors import (
    DegenerateStencil,
    IllConditionedWarning,
    InsufficientStencils,
    SingularShift,
    SingularShiftPair,
    SingularStencil,
    SingularSystem,
)
from gradshift.gates import pauli_string
from gradshift.rules import (
    ShiftRule,
    apply_chain,
    build_sine_system,
    closed_s1,
    closed_s2,
    closed_s3,
    default_shifts,
    real_symmetric_rule,
    symmetric_rule,
    triangulation_general,
    triangulation_s1,
)
from gradshift.sim import evaluate_rule, exact_derivative, random_circuit

PI = np.pi


# ---------------------------------------------------------------- shifts


def test_default_shifts_single_gap():
    assert np.allclose(default_shifts([2.0]), [PI / 4])


def test_default_shifts_two_gaps_conditioned():
    shifts = default_shifts([2.0, 4.0])
    assert shifts.size == 2 and shifts[0] != shifts[1]
    system = build_sine_system([2.0, 4.0], shifts)
    assert system.condition_number < 1e6


def test_default_shifts_three_gaps_invertible():
    shifts = default_shifts([1.0, 3.0, 4.0])
    system = build_sine_system([1.0, 3.0, 4.0], shifts)
    assert abs(np.linalg.det(system.matrix)) > 0
    assert np.abs(np.outer(shifts, [1.0, 3.0, 4.0]) / 2).max() < PI


# ---------------------------------------------------------------- symmetric


def test_psr_table_is_exact_half():
    rule = symmetric_rule([2.0], [PI / 2])
    assert dict(rule.terms) == {PI / 2: 0.5, -PI / 2: -0.5}
    assert rule.condition_number == 1.0


def test_symmetric_matches_closed_s2_weights():
    shifts = (PI / 8, 3 * PI / 8)
    a = symmetric_rule([2.0, 4.0], list(shifts))
    b = closed_s2((2.0, 4.0), shifts)
    assert np.abs(np.sort(a.weights) - np.sort(b.weights)).max() < 1e-12


def test_symmetric_singular_shift_raises():
    with pytest.raises(SingularSystem):
        symmetric_rule([2.0], [PI])


def test_symmetric_antisymmetry():
    rule = symmetric_rule([1.0, 3.0, 4.0])
    w = dict(rule.terms)
    for d, weight in rule.terms:
        assert w[-d] == pytest.approx(-weight, abs=0)


def test_condition_number_recorded():
    rule = symmetric_rule([1.0, 3.0, 4.0])
    assert rule.condition_number > 1.0


def test_ill_conditioned_warning_band():
    with pytest.warns(IllConditionedWarning):
        symmetric_rule([2.0, 4.0], [PI / 8, PI / 8 + 1e-6])
    with pytest.raises(SingularSystem):
        symmetric_rule([2.0, 4.0], [PI / 8, PI / 8 + 1e-9])


# ---------------------------------------------------------------- closed s1


def test_closed_s1_standard():
    rule = closed_s1(2.0, PI / 2)
    assert dict(rule.terms) == {PI / 2: 0.5, -PI / 2: -0.5}


def test_closed_s1_off_angle():
    rule = closed_s1(2.0, PI / 3)
    expect = 2.0 / (4.0 * np.sin(PI / 3))
    assert rule.weights[0] == pytest.approx(expect, rel=1e-15)
    solver = symmetric_rule([2.0], [PI / 3])
    assert np.abs(np.sort(rule.weights) - np.sort(solver.weights)).max() < 1e-12


def test_closed_s1_singular():
    with pytest.raises(SingularShift):
        closed_s1(2.0, PI)


@settings(max_examples=40, deadline=None)
@given(shift=st.floats(0.05, 3.0, allow_nan=False))
def test_closed_s1_periodicity(shift):
    base = closed_s1(2.0, shift)
    moved = closed_s1(2.0, shift + 4 * PI / 2.0)
    assert np.abs(base.weights - moved.weights).max() < 1e-12


# ------------------------------------------------------------- tri s1


def test_triangulation_reduces_to_psr():
    rule = triangulation_s1(2.0, (PI / 2, -PI / 2, 0.0))
    w = dict(rule.terms)
    assert w[0.0] == pytest.approx(0.0, abs=1e-15)
    assert w[PI / 2] == pytest.approx(0.5, abs=1e-12)
    assert w[-PI / 2] == pytest.approx(-0.5, abs=1e-12)


def test_triangulation_degenerate_stencil():
    with pytest.raises(DegenerateStencil):
        triangulation_s1(2.0, (PI / 2, PI / 2, 0.0))


def test_triangulation_exact_on_random_circuits():
    rule = triangulation_s1(2.0, (PI / 2, 3 * PI / 2, 0.0))
    gen = pauli_string("Z")
    for seed in range(20):
        circuit = random_circuit(gen, seed=seed)
        x = float(np.random.default_rng(seed).uniform(-3, 3))
        assert evaluate_rule(circuit, x, rule) == pytest.approx(
            exact_derivative(circuit, x), abs=1e-10
        )


def test_triangulation_zero_sum():
    for stencil in ((0.3, 1.1, -0.7), (1.9, 0.2, 0.9)):
        rule = triangulation_s1(2.0, stencil)
        assert abs(rule.weights.sum()) < 1e-12


# ------------------------------------------------------------- closed s2/s3


def test_closed_s2_fig3_shifts_valid():
    rule = closed_s2((2.0, 4.0), (0.80 * PI, 0.29 * PI))
    assert np.all(np.isfinite(rule.weights))
    assert len(rule.terms) == 4


def test_closed_s2_same_formula_for_qutrit_gaps():
    shifts = (0.6, 1.7)
    rule = closed_s2((1.0, 2.0), shifts)
    solver = symmetric_rule([1.0, 2.0], list(shifts))
    assert np.abs(np.sort(rule.weights) - np.sort(solver.weights)).max() < 1e-12


def test_closed_s2_equal_shifts_singular():
    with pytest.raises(SingularShiftPair):
        closed_s2((2.0, 4.0), (0.7, 0.7))


def test_closed_s3_matches_solver():
    shifts = default_shifts([1.0, 3.0, 4.0])
    closed = closed_s3((1.0, 3.0, 4.0), shifts)
    solver = symmetric_rule([1.0, 3.0, 4.0], shifts)
    assert np.abs(np.sort(closed.weights) - np.sort(solver.weights)).max() < 1e-12


def test_closed_s3_six_finite_weights():
    rule = closed_s3((1.0, 3.0, 4.0), (PI / 5, 2 * PI / 5, 3 * PI / 5))
    assert len(rule.terms) == 6
    assert np.all(np.isfinite(rule.weights))


def test_closed_s3_degenerate_shifts():
    with pytest.raises(SingularStencil):
        closed_s3((1.0, 3.0, 4.0), (0.4, 0.9, 0.9))


# ------------------------------------------------------- triangulation general


def test_triangulation_general_matches_closed_s1():
    gen = pauli_string("Z")
    for seed, x in ((3, 0.4), (4, -1.2), (5, 2.8)):
        circuit = random_circuit(gen, seed=seed)
        rule = triangulation_general([2.0], [PI / 2, -PI / 2, 0.0], x=x)
        assert evaluate_rule(circuit, x, rule) == pytest.approx(
            evaluate_rule(circuit, x, closed_s1(2.0, PI / 2)), abs=1e-10
        )


def test_triangulation_general_matches_triangulation_s1():
    stencil = (0.9, -0.4, 1.7)
    a = triangulation_general([2.0], list(stencil), x=0.6)
    b = triangulation_s1(2.0, stencil)
    order = np.argsort(a.shifts)
    assert np.abs(a.weights[order] - b.weights[np.argsort(b.shifts)]).max() < 1e-10


def test_insufficient_stencils():
    with pytest.raises(InsufficientStencils):
        triangulation_general([2.0], [PI / 2, -PI / 2])
    with pytest.raises(InsufficientStencils):
        triangulation_general([2.0, 4.0], [0.1, 0.2, 0.3, 0.4])


def test_triangulation_general_zero_sum():
    rule = triangulation_general([2.0, 4.0], x=0.9)
    assert abs(rule.weights.sum()) < 1e-12
    assert len(rule.terms) == 5


# ------------------------------------------------------------- real symmetric


def test_real_symmetric_counts():
    rule = real_symmetric_rule([2.0, 4.0], x=0.7)
    assert len(rule.terms) == 3


def test_real_symmetric_detects_violation():
    from gradshift.gates import product_feature_map
    from gradshift.sim import random_real_circuit

    gen = product_feature_map(2).generator("x")
    x = 0.9
    rule = real_symmetric_rule([2.0, 4.0], x=x)
    good = random_real_circuit(gen, seed=21)
    assert evaluate_rule(good, x, rule) == pytest.approx(
        exact_derivative(good, x), abs=1e-9
    )
    bad = random_circuit(gen, seed=22)  # complex amplitudes: hypothesis violated
    assert abs(evaluate_rule(bad, x, rule) - exact_derivative(bad, x)) > 1e-4


# ------------------------------------------------------------------- chain


def test_apply_chain_identity_and_zero():
    rule = closed_s1(2.0, PI / 2)
    assert apply_chain(rule, 1.0) == rule
    circuit = random_circuit(pauli_string("Z"), seed=11)
    assert evaluate_rule(circuit, 0.4, apply_chain(rule, 0.0)) == 0.0


def test_apply_chain_linearity():
    rule = closed_s1(2.0, PI / 2)
    circuit = random_circuit(pauli_string("Z"), seed=12)
    v1 = evaluate_rule(circuit, 0.4, rule)
    v2 = evaluate_rule(circuit, 0.4, apply_chain(rule, 2.0))
    assert v2 == pytest.approx(2.0 * v1, rel=1e-14)


# ------------------------------------------------------------------ misc


def test_exactness_small_sweep_per_family():
    from gradshift.gates import cross_resonance, fsim

    cases = [
        ([2.0], pauli_string("Z")),
        ([2.0, 4.0], fsim().generator("theta")),
        ([1.0, 3.0, 4.0], cross_resonance([1.0, -0.5, 1.0, 0.0, 0.0]).generator("x")),
    ]
    for gaps, gen in cases:
        rule = symmetric_rule(gaps)
        for seed in range(30):
            circuit = random_circuit(gen, seed=1000 + seed)
            x = float(np.random.default_rng(seed).uniform(-3, 3))
            assert evaluate_rule(circuit, x, rule) == pytest.approx(
                exact_derivative(circuit, x), abs=1e-9
            )


def test_gap_superset_rule_stays_exact():
    rule = symmetric_rule([2.0, 4.0])  # superset of Z's single gap
    circuit = random_circuit(pauli_string("Z"), seed=31)
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert evaluate_rule(circuit, 0.8, rule) == pytest.approx(
            exact_derivative(circuit, 0.8), abs=1e-9
        )


def test_rule_json_roundtrip():
    rule = closed_s3((1.0, 3.0, 4.0), (PI / 5, 2 * PI / 5, 3 * PI / 5))
    back = ShiftRule.from_dict(rule.to_dict())
    assert back.method == rule.method
    assert np.array_equal(back.shifts, rule.shifts)
    assert np.array_equal(back.weights, rule.weights)
    assert back.chain_factor == rule.chain_factor
