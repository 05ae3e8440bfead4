"""Hermitian eigendecomposition and spectral-gap extraction.

Every differentiation rule in this library is driven by the unique positive
eigenvalue differences (gaps) of a generator.  This module owns the generator
representation, a cyclic Jacobi eigensolver for dense Hermitian matrices, and
the gap filter.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    ConvergenceFailure,
    DimensionMismatch,
    EmptyGapSet,
    GradshiftError,
    InternalConsistencyError,
    InvalidPauliCharacter,
    NonHermitianInput,
)

__all__ = [
    "HermitianOperator",
    "Spectrum",
    "GapSet",
    "diagonalize",
    "unique_gaps",
    "default_gap_tolerance",
]

HERMITICITY_TOL = 1e-12
PAULI_1Q = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex),
    "Y": np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex),
    "Z": np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex),
}


def _expand_pauli_terms(terms) -> np.ndarray:
    """Dense matrix of sum_k coeff_k * (P_1 x P_2 x ...) for Pauli strings.

    Qubit 1 is the leftmost character and the most significant basis index.
    """
    out = None
    for coeff, string in terms:
        if not string or any(c not in PAULI_1Q for c in string):
            raise InvalidPauliCharacter(
                f"Pauli string {string!r} must be non-empty over I, X, Y, Z"
            )
        m = PAULI_1Q[string[0]]
        for c in string[1:]:
            m = np.kron(m, PAULI_1Q[c])
        out = coeff * m if out is None else out + coeff * m
    if out is None:
        raise GradshiftError("empty Pauli term list")
    return out


def _complex_matrix_from_json(rows) -> np.ndarray:
    return np.array([[complex(re, im) for re, im in row] for row in rows])


def _complex_matrix_to_json(m: np.ndarray):
    return [[[float(v.real), float(v.imag)] for v in row] for row in m]


@dataclass(frozen=True)
class HermitianOperator:
    """Dense Hermitian matrix, optionally tagged with its Pauli-sum form.

    Parameters
    ----------
    entries : (d, d) complex ndarray
        The matrix itself.  Hermiticity is enforced at construction:
        max |H - H^dag| <= 1e-12 * max |H|.
    pauli_terms : list of (coeff, string), optional
        A Pauli-sum whose dense expansion equals ``entries`` (checked).
    """

    entries: np.ndarray
    pauli_terms: tuple | None = None

    def __post_init__(self):
        m = np.array(self.entries, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
            raise DimensionMismatch(f"expected a square matrix, got shape {m.shape}")
        scale = np.abs(m).max()
        dev = np.abs(m - m.conj().T).max()
        if dev > HERMITICITY_TOL * max(scale, 0.0) and dev > 0.0:
            raise NonHermitianInput(
                f"matrix deviates from Hermiticity by {dev:.3e} "
                f"(allowed {HERMITICITY_TOL * scale:.3e})"
            )
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)
        if self.pauli_terms is not None:
            terms = tuple((float(c), str(s)) for c, s in self.pauli_terms)
            object.__setattr__(self, "pauli_terms", terms)
            dense = _expand_pauli_terms(terms)
            if dense.shape != m.shape or np.abs(dense - m).max() > 1e-12 * max(1.0, scale):
                raise InternalConsistencyError(
                    "pauli_terms expansion does not reproduce the dense entries"
                )

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @classmethod
    def from_pauli_terms(cls, terms) -> "HermitianOperator":
        terms = tuple((float(c), str(s)) for c, s in terms)
        return cls(entries=_expand_pauli_terms(terms), pauli_terms=terms)

    @classmethod
    def from_dict(cls, obj: dict) -> "HermitianOperator":
        """Build from the generator JSON schema.

        Either ``{"dim": d, "entries": [[[re, im], ...], ...]}`` or
        ``{"paulis": [{"coeff": c, "string": "XXI"}, ...]}``.
        """
        if "paulis" in obj:
            return cls.from_pauli_terms(
                (t["coeff"], t["string"]) for t in obj["paulis"]
            )
        if "entries" not in obj:
            raise KeyError("generator JSON needs either 'entries' or 'paulis'")
        m = _complex_matrix_from_json(obj["entries"])
        if "dim" in obj and int(obj["dim"]) != m.shape[0]:
            raise DimensionMismatch(
                f"declared dim {obj['dim']} does not match entries shape {m.shape}"
            )
        return cls(entries=m)

    def to_dict(self) -> dict:
        if self.pauli_terms is not None:
            return {
                "paulis": [{"coeff": c, "string": s} for c, s in self.pauli_terms]
            }
        return {"dim": self.dim, "entries": _complex_matrix_to_json(self.entries)}


@dataclass(frozen=True)
class Spectrum:
    """Eigendecomposition with eigenvalues sorted non-increasing.

    ``eigenvectors[:, j]`` is the eigenvector of ``eigenvalues[j]``; the
    eigenvector matrix is unitary and ``U diag(w) U^dag`` reconstructs the
    input matrix.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def __post_init__(self):
        w = np.array(self.eigenvalues, dtype=float)
        u = np.array(self.eigenvectors, dtype=complex)
        w.setflags(write=False)
        u.setflags(write=False)
        object.__setattr__(self, "eigenvalues", w)
        object.__setattr__(self, "eigenvectors", u)

    @property
    def dim(self) -> int:
        return self.eigenvalues.shape[0]

    def unitary(self, x: float) -> np.ndarray:
        """Evolution operator exp(-i * x * G / 2) of the decomposed G."""
        u = self.eigenvectors
        return (u * np.exp(-0.5j * x * self.eigenvalues)) @ u.conj().T


@dataclass(frozen=True)
class GapSet:
    """Unique positive spectral gaps, sorted ascending.

    ``multiplicities[s]`` counts the distinct eigenvalue pairs realizing
    gap ``gaps[s]`` (degenerate eigenvalues are merged first, so the pair
    count is over unique eigenvalue *values*).
    """

    gaps: np.ndarray
    multiplicities: np.ndarray
    source_dim: int = 0

    def __post_init__(self):
        g = np.array(self.gaps, dtype=float)
        m = np.array(self.multiplicities, dtype=int)
        if g.size == 0:
            raise EmptyGapSet("a GapSet must contain at least one gap")
        if np.any(g <= 0) or np.any(np.diff(g) <= 0):
            raise ValueError("gaps must be strictly positive and sorted ascending")
        if m.shape != g.shape:
            raise ValueError("multiplicities must align with gaps")
        if self.source_dim and g.size > self.source_dim * (self.source_dim - 1) // 2:
            raise ValueError("more gaps than d(d-1)/2 eigenvalue pairs")
        g.setflags(write=False)
        m.setflags(write=False)
        object.__setattr__(self, "gaps", g)
        object.__setattr__(self, "multiplicities", m)

    @property
    def count(self) -> int:
        """Number of unique gaps (the S of the differentiation rules)."""
        return self.gaps.shape[0]

    @classmethod
    def from_values(cls, values) -> "GapSet":
        g = np.sort(np.asarray(values, dtype=float))
        return cls(gaps=g, multiplicities=np.ones(g.size, dtype=int))


def _as_operator(G) -> np.ndarray:
    if isinstance(G, HermitianOperator):
        return np.array(G.entries, dtype=complex)
    m = np.array(G, dtype=complex)
    # route raw arrays through the same validation as HermitianOperator
    return np.array(HermitianOperator(entries=m).entries, dtype=complex)


def _offdiag_norm(A: np.ndarray) -> float:
    B = A.copy()
    np.fill_diagonal(B, 0.0)
    return float(np.linalg.norm(B))


def _jacobi(A: np.ndarray, max_sweeps: int, tol_factor: float):
    """Cyclic Jacobi diagonalization of a Hermitian matrix, in place.

    Returns (diagonal, accumulated unitary, sweeps used).  Convergence target
    is ``tol_factor * ||A||_F`` on the off-diagonal Frobenius norm.
    """
    d = A.shape[0]
    V = np.eye(d, dtype=complex)
    if d == 1:
        return np.array([A[0, 0].real]), V, 0
    fro = float(np.linalg.norm(A))
    target = tol_factor * fro
    tiny = 1e-280 * max(1.0, fro)  # guard against subnormal pivots
    for sweep in range(max_sweeps):
        off = _offdiag_norm(A)
        if off <= target:
            return np.real(np.diagonal(A)).copy(), V, sweep
        thresh = max(off / (d * d), tiny)
        for p in range(d - 1):
            for q in range(p + 1, d):
                apq = A[p, q]
                m = abs(apq)
                if m <= thresh:
                    continue
                phase = apq / m
                tau = (A[p, p].real - A[q, q].real) / (2.0 * m)
                if abs(tau) > 1e12:
                    t = 0.5 / tau
                elif tau == 0.0:
                    t = 1.0
                else:
                    t = math.copysign(1.0, tau) / (abs(tau) + math.hypot(1.0, tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                sp = s * phase
                spc = s * np.conj(phase)
                Ap = A[:, p].copy()
                Aq = A[:, q].copy()
                A[:, p] = c * Ap + spc * Aq
                A[:, q] = -sp * Ap + c * Aq
                Rp = A[p, :].copy()
                Rq = A[q, :].copy()
                A[p, :] = c * Rp + sp * Rq
                A[q, :] = -spc * Rp + c * Rq
                A[p, q] = 0.0
                A[q, p] = 0.0
                A[p, p] = A[p, p].real
                A[q, q] = A[q, q].real
                Vp = V[:, p].copy()
                Vq = V[:, q].copy()
                V[:, p] = c * Vp + spc * Vq
                V[:, q] = -sp * Vp + c * Vq
    if _offdiag_norm(A) > target:
        raise ConvergenceFailure(
            f"Jacobi did not reach off-diagonal norm {target:.3e} "
            f"within {max_sweeps} sweeps (dim {d})"
        )
    return np.real(np.diagonal(A)).copy(), V, max_sweeps


def diagonalize(G, *, max_sweeps: int = 100, tol_factor: float = 1e-12) -> Spectrum:
    """Diagonalize a Hermitian operator by cyclic Jacobi rotations.

    Parameters
    ----------
    G : HermitianOperator or (d, d) array_like
        Hermitian matrix; raw arrays are validated against the same
        Hermiticity tolerance as :class:`HermitianOperator`.
    max_sweeps : int
        Sweep cap before :class:`ConvergenceFailure` is raised.
    tol_factor : float
        Off-diagonal norm target relative to the Frobenius norm of ``G``.

    Returns
    -------
    Spectrum
        Eigenvalues sorted non-increasing; ties keep the solver's column
        order, which is deterministic for a fixed sweep order.
    """
    A = _as_operator(G)
    if A.shape[0] > 4096:
        raise ValueError("dense Jacobi diagonalization is capped at dim 4096")
    w, V, _ = _jacobi(A, max_sweeps, tol_factor)
    order = np.argsort(-w, kind="stable")
    return Spectrum(eigenvalues=w[order], eigenvectors=V[:, order])


def default_gap_tolerance(eigenvalues) -> float:
    """Relative degeneracy tolerance: 1e-9 * max(1, eigenvalue spread)."""
    w = np.asarray(eigenvalues, dtype=float)
    spread = float(w.max() - w.min()) if w.size else 0.0
    return 1e-9 * max(1.0, spread)


def _cluster(values: np.ndarray, tol: float):
    """Group ascending values whose neighbours are within tol; yield groups."""
    start = 0
    for i in range(1, values.size + 1):
        if i == values.size or values[i] - values[i - 1] > tol:
            yield values[start:i]
            start = i


def unique_gaps(spec: Spectrum, gap_tolerance: float | None = None) -> GapSet:
    """Filter the unique positive non-zero gaps of a spectrum.

    Eigenvalues closer than ``gap_tolerance`` are treated as degenerate and
    merged to their mean before pairwise differences are formed; gap values
    within the tolerance of each other are likewise merged, and the
    multiplicity of each surviving gap counts the merged eigenvalue pairs.

    Raises
    ------
    EmptyGapSet
        If every eigenvalue is degenerate (constant generator): the
        derivative of any encoded function is identically zero.
    """
    w = np.asarray(spec.eigenvalues, dtype=float)
    if gap_tolerance is None:
        gap_tolerance = default_gap_tolerance(w)
    if gap_tolerance <= 0:
        raise ValueError("gap_tolerance must be positive")
    levels = np.array([g.mean() for g in _cluster(np.sort(w), gap_tolerance)])
    if levels.size < 2:
        raise EmptyGapSet(
            "all eigenvalues are degenerate; derivative is identically zero"
        )
    diffs = np.sort((levels[None, :] - levels[:, None])[np.triu_indices(levels.size, 1)])
    gaps, counts = [], []
    for group in _cluster(diffs, gap_tolerance):
        gaps.append(group.mean())
        counts.append(group.size)
    return GapSet(
        gaps=np.array(gaps),
        multiplicities=np.array(counts, dtype=int),
        source_dim=spec.dim,
    )
