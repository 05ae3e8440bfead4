"""Dense statevector simulation: exact expectations and derivative oracles.

The encoded function is

    f(x) = <0| V^dag e^{+i x G / 2} W^dag C W e^{-i x G / 2} V |0>

and every rule in this library is validated against the exact commutator
derivative and a finite-difference oracle computed here.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import (
    DimensionMismatch,
    EmptyGapSet,
    GapMismatchWarning,
    InternalConsistencyError,
    NonUnitaryInput,
)
from .rules import ShiftRule
from .spectral import HermitianOperator, Spectrum, diagonalize, unique_gaps

__all__ = [
    "StateVector",
    "CircuitSpec",
    "expectation",
    "exact_derivative",
    "fd_derivative",
    "evaluate_rule",
    "generator_unitary",
    "basis_state",
    "haar_unitary",
    "random_orthogonal",
    "random_hermitian",
    "random_circuit",
    "random_real_circuit",
    "circuit_from_dict",
]

UNITARITY_TOL = 1e-10
NORM_TOL = 1e-10
IMAG_RESIDUE_TOL = 1e-10


@dataclass(frozen=True)
class StateVector:
    """Normalized complex amplitude vector."""

    amplitudes: np.ndarray

    def __post_init__(self):
        a = np.array(self.amplitudes, dtype=complex).ravel()
        norm = np.linalg.norm(a)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state norm {norm} deviates from 1 beyond {NORM_TOL}")
        a.setflags(write=False)
        object.__setattr__(self, "amplitudes", a)

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]


def basis_state(dim: int, index: int = 0) -> StateVector:
    a = np.zeros(dim, dtype=complex)
    a[index] = 1.0
    return StateVector(amplitudes=a)


def _check_unitary(m: np.ndarray, label: str):
    dev = np.abs(m.conj().T @ m - np.eye(m.shape[0])).max()
    if dev > UNITARITY_TOL:
        raise NonUnitaryInput(f"{label} deviates from unitarity by {dev:.3e}")


@dataclass
class CircuitSpec:
    """One differentiable block inside a fixed circuit.

    ``pre`` and ``post`` are the circuit pieces before and after the
    generator evolution (identity when omitted); ``dphi_dx`` carries the
    chain-rule scalar of a nonlinear encoding phi(x) and multiplies the
    derivative, never the function value itself.
    """

    generator: HermitianOperator
    cost: HermitianOperator
    pre: np.ndarray | None = None
    post: np.ndarray | None = None
    initial_state: StateVector | None = None
    dphi_dx: float = 1.0

    def __post_init__(self):
        d = self.generator.dim
        if self.cost.dim != d:
            raise DimensionMismatch(
                f"cost dim {self.cost.dim} != generator dim {d}"
            )
        for name in ("pre", "post"):
            m = getattr(self, name)
            if m is None:
                continue
            m = np.array(m, dtype=complex)
            if m.shape != (d, d):
                raise DimensionMismatch(f"{name} circuit must be {d}x{d}")
            _check_unitary(m, name)
            m.setflags(write=False)
            setattr(self, name, m)
        if self.initial_state is None:
            self.initial_state = basis_state(d)
        elif not isinstance(self.initial_state, StateVector):
            self.initial_state = StateVector(amplitudes=self.initial_state)
        if self.initial_state.dim != d:
            raise DimensionMismatch(
                f"initial state dim {self.initial_state.dim} != generator dim {d}"
            )
        self.dphi_dx = float(self.dphi_dx)

    @property
    def dim(self) -> int:
        return self.generator.dim

    @cached_property
    def generator_spectrum(self) -> Spectrum:
        return diagonalize(self.generator)

    @cached_property
    def generator_gaps(self) -> np.ndarray:
        """Unique positive generator gaps; empty for a constant generator."""
        try:
            return unique_gaps(self.generator_spectrum).gaps
        except EmptyGapSet:
            return np.array([])

    @cached_property
    def cost_spectrum(self) -> Spectrum:
        return diagonalize(self.cost)

    @cached_property
    def dressed_cost(self) -> np.ndarray:
        c = self.cost.entries
        if self.post is None:
            return c
        return self.post.conj().T @ c @ self.post

    @cached_property
    def prepared_state(self) -> np.ndarray:
        psi = self.initial_state.amplitudes
        return psi if self.pre is None else self.pre @ psi

    def evolved_state(self, x: float) -> np.ndarray:
        """State W U(x) V |0> just before the cost measurement."""
        spec = self.generator_spectrum
        psi = spec.eigenvectors.conj().T @ self.prepared_state
        psi = spec.eigenvectors @ (np.exp(-0.5j * x * spec.eigenvalues) * psi)
        return psi if self.post is None else self.post @ psi


def _real_part(value: complex, label: str) -> float:
    if abs(value.imag) > IMAG_RESIDUE_TOL:
        raise InternalConsistencyError(
            f"{label} has imaginary residue {value.imag:.3e} beyond "
            f"{IMAG_RESIDUE_TOL:.0e}"
        )
    return float(value.real)


def expectation(circuit: CircuitSpec, x: float) -> float:
    """Exact f(x) = <psi(x)| C |psi(x)> on the statevector."""
    psi = circuit.evolved_state(x)
    return _real_part(psi.conj() @ (circuit.cost.entries @ psi), "expectation")


def exact_derivative(circuit: CircuitSpec, x: float) -> float:
    """Commutator-overlap derivative (i/2) <psi_x| [G, C_dressed] |psi_x>.

    This is the analytic df/dx against which every shift rule is validated;
    the chain scalar multiplies the result.
    """
    spec = circuit.generator_spectrum
    psi = spec.eigenvectors.conj().T @ circuit.prepared_state
    psi = spec.eigenvectors @ (np.exp(-0.5j * x * spec.eigenvalues) * psi)
    g = circuit.generator.entries
    cd = circuit.dressed_cost
    comm = g @ cd - cd @ g
    val = 0.5j * (psi.conj() @ (comm @ psi))
    return _real_part(val, "exact derivative") * circuit.dphi_dx


def fd_derivative(circuit: CircuitSpec, x: float, h: float = 1e-5) -> float:
    """Central difference [f(x+h) - f(x-h)] / (2h), the independent oracle."""
    if h <= 0:
        raise ValueError("finite-difference step must be positive")
    return (expectation(circuit, x + h) - expectation(circuit, x - h)) / (2.0 * h)


def _check_gap_coverage(circuit: CircuitSpec, rule: ShiftRule):
    gen_gaps = circuit.generator_gaps
    if gen_gaps.size == 0:
        return
    rule_gaps = np.asarray(rule.gaps.gaps, dtype=float)
    for g in gen_gaps:
        if not np.any(np.isclose(rule_gaps, g, rtol=1e-9, atol=1e-9)):
            warnings.warn(
                f"generator gap {g:.9g} is absent from rule gaps "
                f"{rule_gaps.tolist()}: exactness void",
                GapMismatchWarning,
                stacklevel=3,
            )
            return


def evaluate_rule(circuit: CircuitSpec, x: float, rule: ShiftRule) -> float:
    """Contract the rule with exact shifted expectations.

    Point-dependent rule families are re-solved at ``x`` internally.  When
    the circuit generator carries a unique gap the rule does not cover, a
    :class:`GapMismatchWarning` is emitted (a superset of gaps is fine).
    """
    _check_gap_coverage(circuit, rule)
    live = rule.materialize(x)
    total = sum(w * expectation(circuit, x + d) for d, w in live.terms)
    return rule.chain_factor * total


def generator_unitary(G: HermitianOperator, x: float) -> np.ndarray:
    """Evolution matrix exp(-i * x * G / 2) by spectral decomposition."""
    return diagonalize(G).unitary(x)


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-ish random unitary from the QR of a complex Gaussian matrix."""
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(a)
    return q * (np.diagonal(r) / np.abs(np.diagonal(r)))


def random_orthogonal(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Random real orthogonal matrix (QR of a real Gaussian, signs fixed)."""
    a = rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(a)
    return (q * np.sign(np.diagonal(r))).astype(complex)


def random_hermitian(dim: int, rng: np.random.Generator) -> HermitianOperator:
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return HermitianOperator(entries=a + a.conj().T)


def random_circuit(
    generator: HermitianOperator,
    seed: int,
    cost: HermitianOperator | None = None,
) -> CircuitSpec:
    """Random dressed circuit around a fixed generator (Haar V, W; random C)."""
    rng = np.random.default_rng(seed)
    d = generator.dim
    if cost is None:
        cost = random_hermitian(d, rng)
    return CircuitSpec(
        generator=generator,
        cost=cost,
        pre=haar_unitary(d, rng),
        post=haar_unitary(d, rng),
    )


def random_real_circuit(
    generator: HermitianOperator,
    seed: int,
) -> CircuitSpec:
    """Random circuit satisfying the real-structure hypothesis.

    Orthogonal pre/post blocks, a real-symmetric cost and the basis initial
    state keep every matrix element of the dressed cost real, which is what
    the (S+1)-evaluation reduced rule relies on.
    """
    rng = np.random.default_rng(seed)
    d = generator.dim
    c = rng.normal(size=(d, d))
    return CircuitSpec(
        generator=generator,
        cost=HermitianOperator(entries=(c + c.T).astype(complex)),
        pre=random_orthogonal(d, rng),
        post=random_orthogonal(d, rng),
    )


def _operator_from_spec(obj) -> HermitianOperator:
    if isinstance(obj, str):
        from .gates import resolve_generator

        return resolve_generator(obj)
    return HermitianOperator.from_dict(obj)


def circuit_from_dict(obj: dict) -> CircuitSpec:
    """Build a CircuitSpec from its JSON form.

    ``generator`` and ``cost`` accept either catalog tokens (see the gate
    catalog) or operator dictionaries; ``pre``/``post`` are raw complex
    matrices encoded as [re, im] pairs and ``initial_state`` a raw vector.
    """
    from .spectral import _complex_matrix_from_json

    generator = _operator_from_spec(obj["generator"])
    cost = _operator_from_spec(obj["cost"])
    pre = post = None
    if obj.get("pre") is not None:
        pre = _complex_matrix_from_json(obj["pre"])
    if obj.get("post") is not None:
        post = _complex_matrix_from_json(obj["post"])
    state = None
    if obj.get("initial_state") is not None:
        state = StateVector(
            amplitudes=np.array([complex(re, im) for re, im in obj["initial_state"]])
        )
    circuit = CircuitSpec(
        generator=generator,
        cost=cost,
        pre=pre,
        post=post,
        initial_state=state,
        dphi_dx=float(obj.get("dphi_dx", 1.0)),
    )
    if "dim" in obj and int(obj["dim"]) != circuit.dim:
        raise DimensionMismatch(
            f"declared dim {obj['dim']} does not match generator dim {circuit.dim}"
        )
    return circuit
