"""Catalog of generators with known gap structure.

Each entry exposes one Hermitian generator per differentiable parameter
together with golden gap values; the gap values are re-derived numerically
at construction time, so a broken catalog entry fails loudly.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyGapSet, InternalConsistencyError, InvalidPauliCharacter
from .spectral import GapSet, HermitianOperator, diagonalize, unique_gaps

__all__ = [
    "GateDescriptor",
    "pauli_string",
    "product_feature_map",
    "fsim",
    "fsim_matrix",
    "cross_resonance",
    "qutrit_generators",
    "resolve_generator",
]

GOLDEN_GAP_TOL = 1e-9


def pauli_string(spec: str, coeff: float = 1.0) -> HermitianOperator:
    """Dense Kronecker product of single-qubit Paulis, times ``coeff``.

    Qubit 1 is the leftmost character (most significant basis index).

    >>> pauli_string("Z").entries.real
    array([[ 1.,  0.],
           [ 0., -1.]])
    """
    if not spec or any(c not in "IXYZ" for c in spec):
        raise InvalidPauliCharacter(
            f"Pauli string {spec!r} must be non-empty over I, X, Y, Z"
        )
    return HermitianOperator.from_pauli_terms([(coeff, spec)])


@dataclass
class GateDescriptor:
    """A named gate with per-parameter generators and golden gaps.

    ``generators[p]`` drives the unitary factor ``exp(-i * p_value * G_p / 2)``
    for parameter ``p``; ``expected_gaps[p]`` holds the golden gap values
    (``None`` entries are filled from the computed spectrum instead of
    checked, used where no closed-form gaps exist).
    """

    name: str
    parameters: dict
    generators: dict
    expected_gaps: dict = field(default_factory=dict)
    dim: int = 0

    def __post_init__(self):
        gens = {k: v for k, v in self.generators.items()}
        dims = {g.dim for g in gens.values()}
        if len(dims) != 1:
            raise ValueError(f"generators of {self.name!r} disagree on dimension")
        self.dim = dims.pop()
        checked = {}
        for p, gen in gens.items():
            try:
                computed = unique_gaps(diagonalize(gen)).gaps
            except EmptyGapSet:
                computed = np.array([])
            golden = self.expected_gaps.get(p)
            if golden is None:
                checked[p] = tuple(float(v) for v in computed)
                continue
            golden = np.sort(np.asarray(golden, dtype=float))
            if golden.size != computed.size or np.abs(golden - computed).max() > GOLDEN_GAP_TOL:
                raise InternalConsistencyError(
                    f"catalog entry {self.name!r}, parameter {p!r}: computed gaps "
                    f"{computed.tolist()} do not match golden {golden.tolist()}"
                )
            checked[p] = tuple(float(v) for v in golden)
        self.expected_gaps = checked

    def generator(self, parameter: str | None = None) -> HermitianOperator:
        if parameter is None:
            if len(self.generators) != 1:
                raise KeyError(
                    f"{self.name!r} has parameters {sorted(self.generators)}; pick one"
                )
            parameter = next(iter(self.generators))
        return self.generators[parameter]

    def gap_set(self, parameter: str | None = None) -> GapSet:
        return unique_gaps(diagonalize(self.generator(parameter)))

    def unitary(self) -> np.ndarray:
        """exp(-i * sum_p value_p * G_p / 2) at the stored parameter values."""
        h = sum(
            self.parameters[p] * g.entries for p, g in self.generators.items()
        )
        return diagonalize(HermitianOperator(entries=h)).unitary(1.0)


def product_feature_map(n_qubits: int, axis: str = "z") -> GateDescriptor:
    """Tensor product of identical single-qubit rotations encoding one variable.

    The generator is the total-magnetization sum of single-qubit Paulis: its
    spectrum is {-N, -N+2, ..., N} and it carries exactly N unique gaps
    {2, 4, ..., 2N}.
    """
    if not 1 <= n_qubits <= 10:
        raise ValueError("n_qubits must be between 1 and 10")
    axis = axis.lower()
    if axis not in ("x", "y", "z"):
        raise ValueError(f"axis must be x, y or z, got {axis!r}")
    p = axis.upper()
    terms = [
        (1.0, "I" * j + p + "I" * (n_qubits - 1 - j)) for j in range(n_qubits)
    ]
    gen = HermitianOperator.from_pauli_terms(terms)
    return GateDescriptor(
        name=f"feature_map:{axis}:{n_qubits}",
        parameters={"x": 0.0},
        generators={"x": gen},
        expected_gaps={"x": tuple(2.0 * k for k in range(1, n_qubits + 1))},
    )


def fsim(theta: float = 0.0, phi: float = 0.0) -> GateDescriptor:
    """Two-qubit fSim gate with commuting swap-like and phase generators.

    The swap-like generator ``X1 X2 + Y1 Y2`` has gaps {2, 4}; the phase
    generator ``(I - Z1 - Z2 + Z1 Z2) / 2`` carries the 1/2 prefactor so that
    every catalog unitary follows the same exp(-i * param * G / 2) convention,
    and has the single gap {2}.
    """
    g_theta = HermitianOperator.from_pauli_terms([(1.0, "XX"), (1.0, "YY")])
    g_phi = HermitianOperator.from_pauli_terms(
        [(0.5, "II"), (-0.5, "ZI"), (-0.5, "IZ"), (0.5, "ZZ")]
    )
    return GateDescriptor(
        name="fsim",
        parameters={"theta": float(theta), "phi": float(phi)},
        generators={"theta": g_theta, "phi": g_phi},
        expected_gaps={"theta": (2.0, 4.0), "phi": (2.0,)},
    )


def fsim_matrix(theta: float, phi: float) -> np.ndarray:
    """Closed-form 4x4 fSim unitary (cos/-i sin block, e^{-i phi} corner)."""
    c, s = np.cos(theta), np.sin(theta)
    return np.array(
        [
            [1, 0, 0, 0],
            [0, c, -1j * s, 0],
            [0, -1j * s, c, 0],
            [0, 0, 0, np.exp(-1j * phi)],
        ],
        dtype=complex,
    )


def cross_resonance(gammas) -> GateDescriptor:
    """Cross-resonance effective generator from its five Pauli amplitudes.

    ``gammas`` weights (Z1, Z1X2, X2, Z2, Z1Z2) in that order.  Gaps are
    computed numerically; for the drive regime gamma = (1, g2, 1, 0, 0) with
    -1 < g2 < 0 they come out as {2(1+g2), 2(1-g2), 4}.
    """
    g = [float(v) for v in gammas]
    if len(g) != 5:
        raise ValueError(f"need 5 gamma amplitudes, got {len(g)}")
    strings = ("ZI", "ZX", "IX", "IZ", "ZZ")
    terms = [(c, s) for c, s in zip(g, strings) if c != 0.0]
    if not terms:
        terms = [(0.0, "II")]
    gen = HermitianOperator.from_pauli_terms(terms)
    return GateDescriptor(
        name="cr:" + ",".join(f"{v:g}" for v in g),
        parameters={"x": 0.0},
        generators={"x": gen},
        expected_gaps={"x": None},
    )


def qutrit_generators() -> list[GateDescriptor]:
    """The two written three-level rotation generators, spectrum {1, 0, -1}.

    Both carry gaps {1, 2}; the remaining Gell-Mann-like generators share the
    same spectrum but are not materialized here.
    """
    g1 = HermitianOperator(
        entries=np.array([[0, 1, 0], [1, 0, 0], [0, 0, 0]], dtype=complex)
    )
    g2 = HermitianOperator(entries=np.diag([1.0, -1.0, 0.0]).astype(complex))
    out = []
    for i, g in enumerate((g1, g2), start=1):
        out.append(
            GateDescriptor(
                name=f"qutrit:{i}",
                parameters={"x": 0.0},
                generators={"x": g},
                expected_gaps={"x": (1.0, 2.0)},
            )
        )
    return out


def resolve_generator(token: str) -> HermitianOperator:
    """Map a catalog token to its generator.

    Understood forms: ``pauli:<string>``, ``feature_map:<axis>:<N>``,
    ``fsim:theta``, ``fsim:phi``, ``cr:<g1,g2,g3,g4,g5>``, ``qutrit:1``,
    ``qutrit:2``.
    """
    kind, _, rest = token.partition(":")
    if not rest:
        raise ValueError(f"not a catalog token: {token!r}")
    if kind == "pauli":
        return pauli_string(rest)
    if kind == "feature_map":
        axis, _, n = rest.partition(":")
        return product_feature_map(int(n), axis).generator("x")
    if kind == "fsim":
        if rest not in ("theta", "phi"):
            raise ValueError(f"fsim parameter must be theta or phi, got {rest!r}")
        return fsim().generator(rest)
    if kind == "cr":
        return cross_resonance([float(v) for v in rest.split(",")]).generator("x")
    if kind == "qutrit":
        idx = int(rest)
        if idx not in (1, 2):
            raise ValueError("qutrit index must be 1 or 2")
        return qutrit_generators()[idx - 1].generator("x")
    raise ValueError(f"unknown catalog kind {kind!r} in {token!r}")
