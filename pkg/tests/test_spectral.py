"""Eigensolver and gap-filter tests against the numpy.linalg oracle."""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gradshift.errors import (
    ConvergenceFailure,
    EmptyGapSet,
    InternalConsistencyError,
    InvalidPauliCharacter,
    NonHermitianInput,
)
from gradshift.gates import pauli_string, product_feature_map
from gradshift.spectral import (
    GapSet,
    HermitianOperator,
    Spectrum,
    diagonalize,
    unique_gaps,
)


def rand_herm(d, rng):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return a + a.conj().T


def test_pauli_z_already_diagonal():
    spec = diagonalize(pauli_string("Z"))
    assert np.array_equal(spec.eigenvalues, [1.0, -1.0])


def test_fsim_theta_generator_eigenvalues():
    g = HermitianOperator.from_pauli_terms([(1.0, "XX"), (1.0, "YY")])
    spec = diagonalize(g)
    assert np.allclose(spec.eigenvalues, [2.0, 0.0, 0.0, -2.0], atol=1e-12)


@pytest.mark.parametrize("seed", range(10))
def test_random_hermitian_matches_numpy_oracle(seed):
    rng = np.random.default_rng(seed)
    d = int(rng.integers(2, 17))
    g = rand_herm(d, rng)
    spec = diagonalize(g)
    ref = np.sort(np.linalg.eigvalsh(g))[::-1]
    assert np.abs(spec.eigenvalues - ref).max() < 1e-9


def test_random_8x8_example():
    rng = np.random.default_rng(1234)
    g = rand_herm(8, rng)
    spec = diagonalize(g)
    ref = np.sort(np.linalg.eigvalsh(g))[::-1]
    assert np.abs(spec.eigenvalues - ref).max() < 1e-9


@pytest.mark.parametrize("seed", range(8))
def test_spectrum_invariants(seed):
    rng = np.random.default_rng(100 + seed)
    d = int(rng.integers(2, 33))
    g = rand_herm(d, rng)
    spec = diagonalize(g)
    u = spec.eigenvectors
    assert np.abs(u.conj().T @ u - np.eye(d)).max() <= 1e-10
    recon = (u * spec.eigenvalues) @ u.conj().T
    assert np.abs(recon - g).max() <= 1e-10 * max(1.0, np.abs(g).max())
    assert np.all(np.diff(spec.eigenvalues) <= 0)


def test_eigenpair_residuals():
    rng = np.random.default_rng(7)
    for _ in range(30):
        d = int(rng.integers(2, 33))
        g = rand_herm(d, rng)
        spec = diagonalize(g)
        res = np.linalg.norm(
            g @ spec.eigenvectors - spec.eigenvectors * spec.eigenvalues, axis=0
        ).max()
        assert res <= 1e-10 * np.linalg.norm(g)


def test_determinism():
    rng = np.random.default_rng(42)
    g = rand_herm(12, rng)
    a = diagonalize(g)
    b = diagonalize(g)
    assert np.array_equal(a.eigenvalues, b.eigenvalues)
    assert np.array_equal(a.eigenvectors, b.eigenvectors)


def test_sweep_cap_raises():
    rng = np.random.default_rng(0)
    with pytest.raises(ConvergenceFailure):
        diagonalize(rand_herm(6, rng), max_sweeps=0)


def test_non_hermitian_rejected():
    m = np.array([[0.0, 1.0], [0.5, 0.0]], dtype=complex)
    with pytest.raises(NonHermitianInput):
        diagonalize(m)
    with pytest.raises(NonHermitianInput):
        HermitianOperator(entries=m)


def _spectrum_of(eigenvalues):
    w = np.asarray(eigenvalues, dtype=float)
    return Spectrum(eigenvalues=w, eigenvectors=np.eye(w.size, dtype=complex))


def test_single_gap_pair():
    gs = unique_gaps(_spectrum_of([1.0, -1.0]))
    assert np.allclose(gs.gaps, [2.0])
    assert list(gs.multiplicities) == [1]


def test_fsim_gap_multiplicities():
    gs = unique_gaps(_spectrum_of([2.0, 0.0, 0.0, -2.0]))
    assert np.allclose(gs.gaps, [2.0, 4.0])
    assert list(gs.multiplicities) == [2, 1]


def test_cr_gap_values():
    gs = unique_gaps(_spectrum_of([1.5, 0.5, 0.5, -2.5]))
    assert np.allclose(gs.gaps, [1.0, 3.0, 4.0], atol=1e-12)


def test_degenerate_spectrum_raises():
    with pytest.raises(EmptyGapSet):
        unique_gaps(_spectrum_of([3.3, 3.3, 3.3]))


def test_gap_merging_within_tolerance():
    gs = unique_gaps(_spectrum_of([1.0, 1.0 + 4e-10, -1.0]), gap_tolerance=1e-9)
    assert gs.count == 1
    assert abs(gs.gaps[0] - (2.0 + 2e-10)) < 1e-10


@settings(max_examples=30, deadline=None)
@given(c=st.floats(-50, 50, allow_nan=False))
def test_spectral_shift_invariance(c):
    rng = np.random.default_rng(5)
    g = rand_herm(5, rng)
    base = unique_gaps(diagonalize(g))
    shifted = unique_gaps(diagonalize(g + c * np.eye(5)))
    assert base.count == shifted.count
    assert np.abs(base.gaps - shifted.gaps).max() < 1e-8 * max(1.0, abs(c))


@settings(max_examples=30, deadline=None)
@given(a=st.floats(0.1, 10.0, allow_nan=False))
def test_gap_scaling_covariance(a):
    rng = np.random.default_rng(6)
    g = rand_herm(5, rng)
    base = unique_gaps(diagonalize(g))
    scaled = unique_gaps(diagonalize(a * g))
    assert np.abs(scaled.gaps - a * base.gaps).max() < 1e-8 * a


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_feature_map_gap_count(n):
    gen = product_feature_map(n).generator("x")
    gs = unique_gaps(diagonalize(gen))
    assert gs.count == n
    assert np.allclose(gs.gaps, 2.0 * np.arange(1, n + 1), atol=1e-9)


def test_gapset_bounds():
    with pytest.raises(EmptyGapSet):
        GapSet(gaps=np.array([]), multiplicities=np.array([], dtype=int))
    with pytest.raises(ValueError):
        GapSet(gaps=np.array([2.0, 1.0]), multiplicities=np.array([1, 1]))


def test_operator_json_roundtrip():
    rng = np.random.default_rng(3)
    g = HermitianOperator(entries=rand_herm(3, rng))
    back = HermitianOperator.from_dict(g.to_dict())
    assert np.allclose(back.entries, g.entries)
    p = HermitianOperator.from_pauli_terms([(0.7, "XZ"), (-1.2, "YY")])
    back = HermitianOperator.from_dict(p.to_dict())
    assert np.allclose(back.entries, p.entries)
    assert back.pauli_terms == p.pauli_terms


def test_pauli_expansion_validated():
    with pytest.raises(InternalConsistencyError):
        HermitianOperator(entries=np.eye(2, dtype=complex), pauli_terms=((1.0, "Z"),))
    with pytest.raises(InvalidPauliCharacter):
        HermitianOperator.from_pauli_terms([(1.0, "XQ")])
