"""Simulator: expectations, derivative oracles, rule evaluation."""
import json
import warnings

import numpy as np
import pytest

from gradshift.errors import DimensionMismatch, GapMismatchWarning, NonUnitaryInput
from gradshift.gates import fsim, pauli_string
from gradshift.rules import apply_chain, closed_s1, closed_s2, symmetric_rule
from gradshift.sim import (
    CircuitSpec,
    StateVector,
    basis_state,
    circuit_from_dict,
    evaluate_rule,
    exact_derivative,
    expectation,
    fd_derivative,
    generator_unitary,
    haar_unitary,
    random_circuit,
    random_hermitian,
)
from gradshift.spectral import HermitianOperator

HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


def cos_circuit(dphi_dx=1.0):
    return CircuitSpec(
        generator=pauli_string("Z"),
        cost=pauli_string("X"),
        pre=HADAMARD,
        dphi_dx=dphi_dx,
    )


def brute_force_expectation(circuit, x):
    """Independent oracle: plain dense matrix chain with numpy's eigh."""
    w, u = np.linalg.eigh(circuit.generator.entries)
    ux = (u * np.exp(-0.5j * x * w)) @ u.conj().T
    psi = circuit.initial_state.amplitudes
    if circuit.pre is not None:
        psi = circuit.pre @ psi
    psi = ux @ psi
    if circuit.post is not None:
        psi = circuit.post @ psi
    return (psi.conj() @ circuit.cost.entries @ psi).real


def test_z_eigenstate_constant():
    circuit = CircuitSpec(generator=pauli_string("Z"), cost=pauli_string("Z"))
    for x in np.linspace(-5, 5, 7):
        assert expectation(circuit, x) == pytest.approx(1.0, abs=1e-12)


def test_cosine_circuit():
    circuit = cos_circuit()
    rng = np.random.default_rng(0)
    for x in rng.uniform(-4, 4, size=20):
        assert expectation(circuit, x) == pytest.approx(np.cos(x), abs=1e-12)
        assert exact_derivative(circuit, x) == pytest.approx(-np.sin(x), abs=1e-10)


def test_constant_generator_zero_derivative():
    gen = HermitianOperator(entries=1.7 * np.eye(4, dtype=complex))
    circuit = CircuitSpec(generator=gen, cost=random_hermitian(4, np.random.default_rng(2)))
    for x in (0.0, 0.3, 2.2):
        assert exact_derivative(circuit, x) == pytest.approx(0.0, abs=1e-12)


def test_expectation_against_brute_force():
    gen = fsim().generator("theta")
    for seed in range(20):
        circuit = random_circuit(gen, seed=seed)
        x = float(np.random.default_rng(seed).uniform(-3, 3))
        assert expectation(circuit, x) == pytest.approx(
            brute_force_expectation(circuit, x), abs=1e-12
        )


def test_fd_at_extremum_and_slope():
    circuit = cos_circuit()
    assert fd_derivative(circuit, 0.0, 1e-5) == pytest.approx(0.0, abs=1e-10)
    assert fd_derivative(circuit, np.pi / 2, 1e-5) == pytest.approx(-1.0, abs=1e-9)


def test_exact_matches_fd_three_qubits():
    gen = random_hermitian(8, np.random.default_rng(5))
    for seed in range(5):
        circuit = random_circuit(gen, seed=40 + seed)
        x = float(np.random.default_rng(seed).uniform(-2, 2))
        assert exact_derivative(circuit, x) == pytest.approx(
            fd_derivative(circuit, x, 1e-5), abs=1e-7
        )


def test_richardson_extrapolation():
    gen = random_hermitian(4, np.random.default_rng(8))
    for seed in range(5):
        circuit = random_circuit(gen, seed=60 + seed)
        x = float(np.random.default_rng(100 + seed).uniform(-2, 2))
        h = 1e-4
        rich = (4 * fd_derivative(circuit, x, h / 2) - fd_derivative(circuit, x, h)) / 3
        assert rich == pytest.approx(exact_derivative(circuit, x), abs=1e-9)


def test_unitarity_preserved_at_large_x():
    gen = random_hermitian(6, np.random.default_rng(9))
    circuit = random_circuit(gen, seed=70)
    for x in (0.0, 1.0, -37.5, 1e3, -1e3):
        assert np.linalg.norm(circuit.evolved_state(x)) == pytest.approx(1.0, abs=1e-10)


def test_one_parameter_group():
    gen = random_hermitian(5, np.random.default_rng(10))
    rng = np.random.default_rng(11)
    for _ in range(5):
        x, y = rng.uniform(-3, 3, size=2)
        uxy = generator_unitary(gen, x + y)
        assert np.abs(uxy - generator_unitary(gen, x) @ generator_unitary(gen, y)).max() < 1e-10


def test_expectation_real_for_many_random_circuits():
    rng = np.random.default_rng(12)
    for k in range(1000):
        d = int(rng.integers(2, 9))
        circuit = random_circuit(random_hermitian(d, rng), seed=2000 + k)
        expectation(circuit, float(rng.uniform(-3, 3)))  # internal residue assert


def test_evaluate_rule_psr():
    circuit = cos_circuit()
    rule = closed_s1(2.0, np.pi / 2)
    for x in (0.0, 0.5, 1.3, -2.2):
        assert evaluate_rule(circuit, x, rule) == pytest.approx(-np.sin(x), abs=1e-10)


def test_evaluate_rule_matches_exact_when_gaps_covered():
    gen = fsim().generator("theta")
    rule = closed_s2((2.0, 4.0), (0.8 * np.pi, 0.29 * np.pi))
    for seed in range(25):
        circuit = random_circuit(gen, seed=3000 + seed)
        x = float(np.random.default_rng(seed).uniform(-3, 3))
        assert evaluate_rule(circuit, x, rule) == pytest.approx(
            exact_derivative(circuit, x), abs=1e-9
        )


def test_gap_mismatch_warns():
    gen = fsim().generator("theta")  # gaps {2, 4}
    circuit = random_circuit(gen, seed=80)
    rule = closed_s1(2.0, np.pi / 2)  # misses gap 4
    with pytest.warns(GapMismatchWarning):
        evaluate_rule(circuit, 0.5, rule)


def test_gap_superset_no_warning():
    circuit = random_circuit(pauli_string("Z"), seed=81)
    rule = symmetric_rule([2.0, 4.0])
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        evaluate_rule(circuit, 0.5, rule)


def test_chain_factor_scales_rule_value():
    circuit = cos_circuit()
    rule = closed_s1(2.0, np.pi / 2)
    doubled = apply_chain(rule, 2.0)
    assert evaluate_rule(circuit, 0.7, doubled) == pytest.approx(
        2 * evaluate_rule(circuit, 0.7, rule), rel=1e-14
    )
    chained = cos_circuit(dphi_dx=2.0)
    assert exact_derivative(chained, 0.7) == pytest.approx(-2 * np.sin(0.7), abs=1e-10)


def test_state_norm_validated():
    with pytest.raises(ValueError):
        StateVector(amplitudes=np.array([1.0, 1.0]))


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        CircuitSpec(generator=pauli_string("Z"), cost=pauli_string("ZZ"))
    with pytest.raises(DimensionMismatch):
        CircuitSpec(
            generator=pauli_string("Z"),
            cost=pauli_string("X"),
            initial_state=basis_state(4),
        )


def test_non_unitary_pre_rejected():
    with pytest.raises(NonUnitaryInput):
        CircuitSpec(
            generator=pauli_string("Z"),
            cost=pauli_string("X"),
            pre=np.array([[1.0, 0.1], [0.0, 1.0]], dtype=complex),
        )


def test_haar_unitary_is_unitary():
    rng = np.random.default_rng(13)
    u = haar_unitary(6, rng)
    assert np.abs(u.conj().T @ u - np.eye(6)).max() < 1e-12


def test_circuit_json_with_catalog_tokens(tmp_path):
    obj = {
        "dim": 2,
        "generator": "pauli:Z",
        "cost": "pauli:X",
        "pre": [[[v.real, v.imag] for v in row] for row in HADAMARD],
        "dphi_dx": 1.0,
    }
    path = tmp_path / "circuit.json"
    path.write_text(json.dumps(obj))
    circuit = circuit_from_dict(json.loads(path.read_text()))
    assert expectation(circuit, 0.9) == pytest.approx(np.cos(0.9), abs=1e-12)


def test_circuit_json_declared_dim_checked():
    with pytest.raises(DimensionMismatch):
        circuit_from_dict({"dim": 4, "generator": "pauli:Z", "cost": "pauli:X"})


def test_circuit_json_initial_state_and_matrices():
    gen = {"dim": 2, "entries": [[[1, 0], [0, 0]], [[0, 0], [-1, 0]]]}
    obj = {
        "generator": gen,
        "cost": "pauli:Z",
        "initial_state": [[0, 0], [1, 0]],
    }
    circuit = circuit_from_dict(obj)
    assert expectation(circuit, 0.3) == pytest.approx(-1.0, abs=1e-12)
