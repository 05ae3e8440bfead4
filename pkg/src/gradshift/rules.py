"""Bias-free derivative rules built from spectral gaps.

A rule is a table of ``(shift, weight)`` pairs realizing

    df/dx = chain_factor * sum_i  w_i * f(x + delta_i)

exactly (at infinite shots) for any circuit whose generator gaps are covered
by the rule's gaps.  Symmetric rules use ``+/-delta`` pairs and are
independent of the evaluation point; distinct-shift (triangulation) and
real-symmetric rules solve a small linear system whose coefficients contain
the evaluation point, so they are materialized per point.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np

from .errors import (
    DegenerateStencil,
    IllConditionedWarning,
    InsufficientStencils,
    ShiftSelectionFailure,
    SingularShift,
    SingularShiftPair,
    SingularStencil,
    SingularSystem,
)
from .spectral import GapSet

__all__ = [
    "ShiftRule",
    "SineSystem",
    "default_shifts",
    "symmetric_rule",
    "closed_s1",
    "triangulation_s1",
    "closed_s2",
    "closed_s3",
    "triangulation_general",
    "real_symmetric_rule",
    "apply_chain",
    "METHODS",
    "X_DEPENDENT_METHODS",
]

METHODS = (
    "symmetric-general",
    "closed-s1",
    "triangulation-s1",
    "closed-s2",
    "closed-s3",
    "triangulation-general",
    "real-symmetric",
)
# weights of these depend on the evaluation point and are re-solved there
X_DEPENDENT_METHODS = ("triangulation-general", "real-symmetric")

COND_REJECT = 1e8
COND_WARN = 1e6
SMALLEST_SINGULAR = 1e-10  # absolute floor; system entries are O(1) sines
DENOM_TOL = 1e-12


def _as_gap_values(gaps) -> np.ndarray:
    if isinstance(gaps, GapSet):
        return np.array(gaps.gaps, dtype=float)
    g = np.atleast_1d(np.asarray(gaps, dtype=float))
    if g.size == 0 or np.any(g <= 0):
        raise ValueError("gaps must be a non-empty set of positive values")
    return np.sort(g)


def _as_gapset(gaps) -> GapSet:
    if isinstance(gaps, GapSet):
        return gaps
    return GapSet.from_values(_as_gap_values(gaps))


@dataclass(frozen=True)
class ShiftRule:
    """Shift/weight table for one derivative estimator.

    ``chain_factor`` is applied when the rule is evaluated, not baked into
    the stored weights, so one table can be reused across encodings with
    different d(phi)/dx.
    """

    terms: tuple
    method: str
    gaps: GapSet
    condition_number: float = 1.0
    chain_factor: float = 1.0

    def __post_init__(self):
        terms = tuple((float(d), float(w)) for d, w in self.terms)
        if not all(map(math.isfinite, (v for t in terms for v in t))):
            raise ValueError("rule shifts and weights must be finite")
        object.__setattr__(self, "terms", terms)

    @property
    def shifts(self) -> np.ndarray:
        return np.array([d for d, _ in self.terms])

    @property
    def weights(self) -> np.ndarray:
        return np.array([w for _, w in self.terms])

    @property
    def x_dependent(self) -> bool:
        return self.method in X_DEPENDENT_METHODS

    def materialize(self, x: float) -> "ShiftRule":
        """Rule with weights solved at evaluation point ``x``.

        Symmetric and closed-form rules are point-independent and returned
        unchanged; triangulation and real-symmetric tables are re-solved.
        """
        if self.method == "triangulation-general":
            out = triangulation_general(self.gaps, self.shifts, x=x)
        elif self.method == "real-symmetric":
            out = real_symmetric_rule(self.gaps, self.shifts, x=x)
        else:
            return self
        return replace(out, chain_factor=self.chain_factor)

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "gaps": [float(g) for g in self.gaps.gaps],
            "terms": [{"shift": d, "weight": w} for d, w in self.terms],
            "condition_number": float(self.condition_number),
            "chain_factor": float(self.chain_factor),
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "ShiftRule":
        return cls(
            terms=tuple((t["shift"], t["weight"]) for t in obj["terms"]),
            method=obj["method"],
            gaps=GapSet.from_values(obj["gaps"]),
            condition_number=float(obj.get("condition_number", 1.0)),
            chain_factor=float(obj.get("chain_factor", 1.0)),
        )


@dataclass(frozen=True)
class SineSystem:
    """The S x S system M[l, s] = 4 sin(delta_l * Delta_s / 2)."""

    matrix: np.ndarray
    shifts: np.ndarray
    gaps: np.ndarray

    @property
    def condition_number(self) -> float:
        try:
            c = float(np.linalg.cond(self.matrix))
        except np.linalg.LinAlgError:
            return float("inf")
        return c if math.isfinite(c) else float("inf")

    @property
    def smallest_singular_value(self) -> float:
        return float(np.linalg.svd(self.matrix, compute_uv=False).min())


def build_sine_system(gaps, shifts) -> SineSystem:
    g = _as_gap_values(gaps)
    d = np.atleast_1d(np.asarray(shifts, dtype=float))
    if d.size != g.size:
        raise ValueError(f"need {g.size} shifts for {g.size} gaps, got {d.size}")
    return SineSystem(matrix=4.0 * np.sin(np.outer(d, g) / 2.0), shifts=d, gaps=g)


def default_shifts(gaps) -> np.ndarray:
    """Equidistant odd-multiple shifts, rescaled and jittered to condition.

    Starts from ``delta_l = (2l - 1) pi / (2 Delta_max)``, halves all shifts
    until every ``|delta_l Delta_s / 2| < pi``, then perturbs the largest
    shift by +5% (up to 20 attempts) if the sine system condition number is
    not below 1e6.
    """
    g = _as_gap_values(gaps)
    S = g.size
    dmax = g.max()
    shifts = (2.0 * np.arange(1, S + 1) - 1.0) * np.pi / (2.0 * dmax)
    while np.abs(np.outer(shifts, g) / 2.0).max() >= np.pi:
        shifts = shifts / 2.0
    for _ in range(20):
        system = build_sine_system(g, shifts)
        if system.condition_number < COND_WARN and (
            system.smallest_singular_value > SMALLEST_SINGULAR
        ):
            return shifts
        shifts = shifts.copy()
        shifts[-1] *= 1.05
    raise ShiftSelectionFailure(
        f"no acceptably conditioned shifts found for gaps {g.tolist()}"
    )


def _check_system(system: SineSystem) -> float:
    cond = system.condition_number
    if cond > COND_REJECT or system.smallest_singular_value < SMALLEST_SINGULAR:
        bad = np.argwhere(np.abs(system.matrix) < 1e-9)
        hint = "; ".join(
            f"sin(delta*gap/2) ~ 0 for shift {system.shifts[l]:.6g}, "
            f"gap {system.gaps[s]:.6g}"
            for l, s in bad[:3]
        )
        raise SingularSystem(
            f"sine system is singular (cond {cond:.3e}) for shifts "
            f"{system.shifts.tolist()} and gaps {system.gaps.tolist()}"
            + (": " + hint if hint else "")
        )
    if cond > COND_WARN:
        warnings.warn(
            f"sine system condition number {cond:.3e} above {COND_WARN:.0e}",
            IllConditionedWarning,
            stacklevel=3,
        )
    return cond


def symmetric_rule(gaps, shifts=None) -> ShiftRule:
    """2S-term rule from symmetric shifts (the general solver).

    Solves ``F = M R`` for the gap coefficients and contracts with the gaps,
    giving weights ``w_l = sum_s Delta_s (M^-1)_{s l}`` on the central
    differences ``f(x + delta_l) - f(x - delta_l)``.
    """
    gapset = _as_gapset(gaps)
    if shifts is None:
        shifts = default_shifts(gapset)
    system = build_sine_system(gapset, shifts)
    cond = _check_system(system)
    w = np.linalg.solve(system.matrix.T, system.gaps)
    terms = []
    for dl, wl in zip(system.shifts, w):
        terms.append((dl, wl))
        terms.append((-dl, -wl))
    return ShiftRule(
        terms=tuple(terms),
        method="symmetric-general",
        gaps=gapset,
        condition_number=cond,
    )


def closed_s1(gap: float, shift: float) -> ShiftRule:
    """Two-term rule for a single gap: weights +/- gap / (4 sin(shift*gap/2))."""
    gap = float(gap)
    shift = float(shift)
    den = math.sin(shift * gap / 2.0)
    if abs(den) <= DENOM_TOL:
        raise SingularShift(
            f"sin(shift*gap/2) = {den:.3e} vanishes for shift {shift:.6g}, gap {gap:.6g}"
        )
    w = gap / (4.0 * den)
    return ShiftRule(
        terms=((shift, w), (-shift, -w)),
        method="closed-s1",
        gaps=_as_gapset([gap]),
    )


def triangulation_s1(gap: float, shifts) -> ShiftRule:
    """Three-term distinct-shift rule for a single gap.

    Weights carry a ``gap/8 * cosine-difference`` numerator over the product
    of the three pairwise sines ``sin((delta_i - delta_j) gap / 4)``; they sum
    to zero, so constant functions differentiate to zero.
    """
    gap = float(gap)
    d1, d2, d3 = (float(v) for v in shifts)
    pair_sines = {
        "(d2-d1)": math.sin((d2 - d1) * gap / 4.0),
        "(d2-d3)": math.sin((d2 - d3) * gap / 4.0),
        "(d3-d1)": math.sin((d3 - d1) * gap / 4.0),
    }
    for label, s in pair_sines.items():
        if abs(s) <= DENOM_TOL:
            raise DegenerateStencil(
                f"shifts coincide modulo 4*pi/gap: sin({label}*gap/4) = {s:.3e}"
            )
    den = pair_sines["(d2-d1)"] * pair_sines["(d2-d3)"] * pair_sines["(d3-d1)"]
    c1 = math.cos(d1 * gap / 2.0)
    c2 = math.cos(d2 * gap / 2.0)
    c3 = math.cos(d3 * gap / 2.0)
    w = gap / 8.0 * np.array([c2 - c3, c3 - c1, c1 - c2]) / den
    return ShiftRule(
        terms=tuple(zip((d1, d2, d3), w)),
        method="triangulation-s1",
        gaps=_as_gapset([gap]),
    )


def closed_s2(gaps, shifts) -> ShiftRule:
    """Four-term symmetric rule for two gaps (fSim-style generators)."""
    g1, g2 = (float(v) for v in _as_gap_values(gaps))
    d1, d2 = (float(v) for v in shifts)
    s = math.sin
    den = s(d1 * g1 / 2) * s(d2 * g2 / 2) - s(d1 * g2 / 2) * s(d2 * g1 / 2)
    if abs(den) <= DENOM_TOL:
        raise SingularShiftPair(
            f"sine-pair denominator {den:.3e} vanishes for shifts "
            f"({d1:.6g}, {d2:.6g}) and gaps ({g1:.6g}, {g2:.6g})"
        )
    a1 = (g1 * s(d2 * g2 / 2) - g2 * s(d2 * g1 / 2)) / (4.0 * den)
    a2 = (g2 * s(d1 * g1 / 2) - g1 * s(d1 * g2 / 2)) / (4.0 * den)
    return ShiftRule(
        terms=((d1, a1), (-d1, -a1), (d2, a2), (-d2, -a2)),
        method="closed-s2",
        gaps=_as_gapset([g1, g2]),
    )


def closed_s3(gaps, shifts) -> ShiftRule:
    """Six-term symmetric rule for three gaps (cross-resonance-style).

    The weights are ``nu_l / (4 V)`` with ``nu_l`` the signed two-sine sums
    and ``V`` the alternating product of six sines; both are cofactor
    expansions of the S=3 sine system, so this equals the general solver.
    """
    g1, g2, g3 = (float(v) for v in _as_gap_values(gaps))
    d1, d2, d3 = (float(v) for v in shifts)

    def s(d, g):
        return math.sin(d * g / 2.0)

    V = (
        s(d1, g3) * s(d2, g2) * s(d3, g1)
        - s(d1, g3) * s(d2, g1) * s(d3, g2)
        + s(d1, g2) * s(d2, g1) * s(d3, g3)
        - s(d1, g2) * s(d2, g3) * s(d3, g1)
        + s(d1, g1) * s(d2, g3) * s(d3, g2)
        - s(d1, g1) * s(d2, g2) * s(d3, g3)
    )
    if abs(V) <= DENOM_TOL:
        raise SingularStencil(
            f"alternating sine denominator {V:.3e} vanishes for shifts "
            f"({d1:.6g}, {d2:.6g}, {d3:.6g}) and gaps ({g1:.6g}, {g2:.6g}, {g3:.6g})"
        )
    nu1 = (
        g3 * (s(d2, g2) * s(d3, g1) - s(d2, g1) * s(d3, g2))
        + g2 * (s(d2, g1) * s(d3, g3) - s(d2, g3) * s(d3, g1))
        + g1 * (s(d2, g3) * s(d3, g2) - s(d2, g2) * s(d3, g3))
    )
    nu2 = (
        g3 * (s(d1, g1) * s(d3, g2) - s(d1, g2) * s(d3, g1))
        + g2 * (s(d1, g3) * s(d3, g1) - s(d1, g1) * s(d3, g3))
        + g1 * (s(d1, g2) * s(d3, g3) - s(d1, g3) * s(d3, g2))
    )
    nu3 = (
        g3 * (s(d1, g2) * s(d2, g1) - s(d1, g1) * s(d2, g2))
        + g2 * (s(d1, g1) * s(d2, g3) - s(d1, g3) * s(d2, g1))
        + g1 * (s(d1, g3) * s(d2, g2) - s(d1, g2) * s(d2, g3))
    )
    terms = []
    for d, nu in zip((d1, d2, d3), (nu1, nu2, nu3)):
        w = nu / (4.0 * V)
        terms.append((d, w))
        terms.append((-d, -w))
    return ShiftRule(
        terms=tuple(terms),
        method="closed-s3",
        gaps=_as_gapset([g1, g2, g3]),
    )


def _reference_index(shifts: np.ndarray) -> int:
    """Reference stencil for difference rows: the shift closest to zero."""
    return int(np.argmin(np.abs(shifts)))


def _point_stencils(gaps: np.ndarray, count: int) -> np.ndarray:
    """Zero plus stencils equispaced over the slowest-frequency period.

    Point-built difference systems condition far better on spread-out
    samples than on the small shifts favoured by the symmetric solver,
    uniformly over evaluation points.
    """
    step = 2.0 * np.pi / (count * gaps.min())
    half = (count - 1) // 2
    if count % 2:  # 0, +-step, +-2 step, ...
        offsets = np.column_stack([np.arange(1, half + 1), -np.arange(1, half + 1)])
        return np.concatenate([[0.0], offsets.ravel() * step])
    return np.concatenate([[0.0], np.arange(1, count) * step])


def _difference_system(gaps, shifts, x, real_only):
    """Rows of f(x+delta_l) - f(x+delta_ref) against the matrix-element vector.

    Unknowns are Re O_s (and Im O_s unless ``real_only``); the row for
    stencil l has entries

        4 sin((d_ref - d_l) Delta_s / 4) * sin((2x + d_ref + d_l) Delta_s / 4)

    on the real part and the matching cosine on the imaginary part.
    """
    g = np.asarray(gaps, dtype=float)
    d = np.asarray(shifts, dtype=float)
    S = g.size
    ref = _reference_index(d)
    others = [i for i in range(d.size) if i != ref]
    ncols = S if real_only else 2 * S
    A = np.zeros((len(others), ncols))
    for r, idx in enumerate(others):
        pre = 4.0 * np.sin((d[ref] - d[idx]) * g / 4.0)
        ang = (2.0 * x + d[ref] + d[idx]) * g / 4.0
        A[r, :S] = pre * np.sin(ang)
        if not real_only:
            A[r, S:] = pre * np.cos(ang)
    # derivative functional on the same unknowns
    rhs = -g * np.sin(x * g / 2.0)
    if not real_only:
        rhs = np.concatenate([rhs, -g * np.cos(x * g / 2.0)])
    return A, rhs, ref, others


def _solve_stencil_weights(A, rhs, shifts, ref, others, err_cls):
    if A.shape[0] != A.shape[1]:
        raise ValueError("difference system must be square")
    smin = float(np.linalg.svd(A, compute_uv=False).min())
    cond = float(np.linalg.cond(A))
    if not math.isfinite(cond) or cond > COND_REJECT or smin < SMALLEST_SINGULAR:
        raise err_cls(
            f"difference system singular (cond {cond:.3e}) for shifts "
            f"{np.asarray(shifts).tolist()}"
        )
    if cond > COND_WARN:
        warnings.warn(
            f"difference system condition number {cond:.3e} above {COND_WARN:.0e}",
            IllConditionedWarning,
            stacklevel=4,
        )
    v = np.linalg.solve(A.T, rhs)
    w = np.zeros(len(shifts))
    for r, idx in enumerate(others):
        w[idx] = v[r]
    w[ref] = -v.sum()
    return w, cond


def _check_distinct(shifts: np.ndarray):
    d = np.asarray(shifts, dtype=float)
    for i in range(d.size):
        for j in range(i + 1, d.size):
            if abs(d[i] - d[j]) <= 1e-12:
                raise DegenerateStencil(
                    f"stencil shifts {d[i]:.6g} and {d[j]:.6g} coincide"
                )


def triangulation_general(gaps, shifts=None, x: float = 0.0) -> ShiftRule:
    """(2S+1)-term rule from distinct shifts, solved at evaluation point x.

    The reference stencil is the shift closest to zero (by default 0 itself,
    a plain function evaluation).  Fewer than 2S+1 stencils cannot determine
    the S complex matrix elements plus the constant background, so
    :class:`InsufficientStencils` is raised.
    """
    gapset = _as_gapset(gaps)
    g = np.array(gapset.gaps, dtype=float)
    S = g.size
    if shifts is None:
        shifts = _point_stencils(g, 2 * S + 1)
    d = np.atleast_1d(np.asarray(shifts, dtype=float))
    if d.size < 2 * S + 1:
        raise InsufficientStencils(
            f"{d.size} stencils cannot recover {S} complex matrix elements; "
            f"need 2S+1 = {2 * S + 1}"
        )
    if d.size > 2 * S + 1:
        raise ValueError(f"expected exactly {2 * S + 1} stencils, got {d.size}")
    _check_distinct(d)
    A, rhs, ref, others = _difference_system(g, d, x, real_only=False)
    w, cond = _solve_stencil_weights(A, rhs, d, ref, others, SingularSystem)
    return ShiftRule(
        terms=tuple(zip(d, w)),
        method="triangulation-general",
        gaps=gapset,
        condition_number=cond,
    )


def real_symmetric_rule(gaps, shifts=None, x: float = 0.0) -> ShiftRule:
    """(S+1)-term rule valid under the real-structure hypothesis.

    The caller asserts that the state amplitudes and the dressed cost matrix
    elements are real (real initial state, orthogonal ansatze, real-element
    cost): then the imaginary matrix-element parts vanish and S+1 stencils
    suffice.  On circuits violating the hypothesis the rule carries no
    exactness contract.
    """
    gapset = _as_gapset(gaps)
    g = np.array(gapset.gaps, dtype=float)
    S = g.size
    if shifts is None:
        shifts = _point_stencils(g, S + 1)
    d = np.atleast_1d(np.asarray(shifts, dtype=float))
    if d.size != S + 1:
        raise ValueError(f"expected S+1 = {S + 1} stencils, got {d.size}")
    _check_distinct(d)
    A, rhs, ref, others = _difference_system(g, d, x, real_only=True)
    w, cond = _solve_stencil_weights(A, rhs, d, ref, others, SingularSystem)
    return ShiftRule(
        terms=tuple(zip(d, w)),
        method="real-symmetric",
        gaps=gapset,
        condition_number=cond,
    )


def apply_chain(rule: ShiftRule, dphi_dx: float) -> ShiftRule:
    """Fold a chain-rule scalar d(phi)/dx into the rule's chain factor."""
    dphi_dx = float(dphi_dx)
    if not math.isfinite(dphi_dx):
        raise ValueError("dphi_dx must be finite")
    return replace(rule, chain_factor=rule.chain_factor * dphi_dx)
