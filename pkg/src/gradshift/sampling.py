"""Finite-shot estimators, analytic shot-noise variances, variance grids.

Shot sampling draws from the exact multinomial outcome distribution in the
cost-operator eigenbasis; the normal approximation enters only through the
analytic variance formulas.  All randomness is position-derived from a
master seed, so results are reproducible regardless of execution order.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np

from .rules import ShiftRule
from .sim import CircuitSpec

__all__ = [
    "DerivativeEstimate",
    "VarianceGrid",
    "sample_expectation",
    "estimate_derivative",
    "analytic_variance",
    "measurement_sigma2",
    "variance_grid",
    "figure_preset",
    "empirical_variance",
]

SINGULAR_SINE_TOL = 1e-9
DEFAULT_MASK_LEVEL = 8.0


def _term_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(index)]))


def _check_seed(seed: int) -> int:
    seed = int(seed)
    if seed < 0:
        raise ValueError("seed must be a non-negative integer")
    return seed


def _outcome_distribution(circuit: CircuitSpec, point: float):
    """Cost eigenvalues and measurement probabilities at parameter value."""
    spec = circuit.cost_spectrum
    amp = spec.eigenvectors.conj().T @ circuit.evolved_state(point)
    p = np.abs(amp) ** 2
    p = np.clip(p, 0.0, None)
    p /= p.sum()
    return spec.eigenvalues, p


def measurement_sigma2(circuit: CircuitSpec, point: float) -> float:
    """Per-shot variance of the cost measurement at one parameter value."""
    lam, p = _outcome_distribution(circuit, point)
    mean = float(p @ lam)
    return float(p @ lam**2) - mean * mean


def sample_expectation(circuit: CircuitSpec, x: float, shots: int, seed: int) -> float:
    """Multinomial estimate of f(x) from ``shots`` projective measurements."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    seed = _check_seed(seed)
    lam, p = _outcome_distribution(circuit, x)
    counts = np.random.default_rng(seed).multinomial(shots, p)
    return float(counts @ lam) / shots


@dataclass(frozen=True)
class DerivativeEstimate:
    """Finite-shot derivative with its analytic shot-noise variance.

    ``value`` equals ``chain_factor * sum_i weight_i * estimate_i`` and is
    reproducible from the recorded per-term data; ``analytic_variance`` uses
    the exact per-shift outcome variance, in squared function units.
    """

    value: float
    per_term_estimates: tuple
    weights: tuple
    analytic_variance: float
    seed: int
    shots_per_term: int
    chain_factor: float = 1.0

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "per_term_estimates": [
                {"shift": d, "estimate": e, "shots": n}
                for d, e, n in self.per_term_estimates
            ],
            "weights": list(self.weights),
            "analytic_variance": self.analytic_variance,
            "seed": self.seed,
            "shots_per_term": self.shots_per_term,
            "chain_factor": self.chain_factor,
        }


def estimate_derivative(
    circuit: CircuitSpec,
    x: float,
    rule: ShiftRule,
    shots_per_term: int,
    seed: int,
) -> DerivativeEstimate:
    """Sample every rule term independently and contract with the weights.

    Each term draws from its own generator seeded by (seed, term index), so
    terms are statistically independent yet the whole estimate is
    deterministic in the master seed.
    """
    if shots_per_term < 1:
        raise ValueError("shots_per_term must be >= 1")
    seed = _check_seed(seed)
    live = rule.materialize(x)
    chain = rule.chain_factor
    per_term = []
    var_sum = 0.0
    total = 0.0
    for i, (d, w) in enumerate(live.terms):
        lam, p = _outcome_distribution(circuit, x + d)
        counts = _term_rng(seed, i).multinomial(shots_per_term, p)
        est = float(counts @ lam) / shots_per_term
        mean = float(p @ lam)
        sigma2 = float(p @ lam**2) - mean * mean
        per_term.append((d, est, shots_per_term))
        total += w * est
        var_sum += w * w * sigma2
    return DerivativeEstimate(
        value=chain * total,
        per_term_estimates=tuple(per_term),
        weights=tuple(w for _, w in live.terms),
        analytic_variance=chain * chain * var_sum / shots_per_term,
        seed=seed,
        shots_per_term=shots_per_term,
        chain_factor=chain,
    )


def analytic_variance(rule: ShiftRule, sigma2=1.0, shots: int = 1) -> float:
    """Var[f'] = chain^2 * sum_i w_i^2 sigma2(delta_i) / shots.

    ``sigma2`` is either a constant (the sigma_0^2 model used for all
    variance landscapes) or a callable of the shift, for exact per-shift
    measurement variances.  With the defaults the result is in
    sigma_0^2 / N_shots units.
    """
    model = sigma2 if callable(sigma2) else (lambda _d: sigma2)
    total = sum(w * w * model(d) for d, w in rule.terms)
    return rule.chain_factor**2 * total / shots


def empirical_variance(
    circuit: CircuitSpec,
    x: float,
    rule: ShiftRule,
    shots_per_term: int,
    repetitions: int,
    seed: int,
) -> float:
    """Sample variance of the derivative estimator over seeded repetitions."""
    if repetitions < 100:
        raise ValueError("need at least 100 repetitions for a stable variance")
    seed = _check_seed(seed)
    values = np.empty(repetitions)
    for r in range(repetitions):
        rep_seed = int(np.random.SeedSequence([seed, r]).generate_state(1)[0])
        values[r] = estimate_derivative(
            circuit, x, rule, shots_per_term, rep_seed
        ).value
    return float(values.var(ddof=1))


@dataclass
class VarianceGrid:
    """Shot-noise variance over a shift plane, in sigma_0^2 / N_shots units.

    Singular stencils hold ``inf``; CSV emission additionally masks any value
    above ``mask_level`` (the white cut of the variance maps) as ``inf``.
    """

    family: str
    gaps: tuple
    axis1: np.ndarray
    values: np.ndarray
    axis2: np.ndarray | None = None
    mask_level: float = DEFAULT_MASK_LEVEL

    @property
    def min_value(self) -> float:
        return float(self.values.min())

    @property
    def argmin(self) -> tuple:
        k = np.unravel_index(int(np.argmin(self.values)), self.values.shape)
        if self.axis2 is None:
            return (float(self.axis1[k[0]]),)
        return (float(self.axis1[k[0]]), float(self.axis2[k[1]]))

    def csv_text(self) -> str:
        buf = io.StringIO()
        if self.axis2 is None:
            buf.write("delta,variance\n")
            for d, v in zip(self.axis1, self.values):
                buf.write(f"{d:.17g},{self._fmt(v)}\n")
        else:
            buf.write("delta1,delta2,variance\n")
            for i, d1 in enumerate(self.axis1):
                for j, d2 in enumerate(self.axis2):
                    buf.write(f"{d1:.17g},{d2:.17g},{self._fmt(self.values[i, j])}\n")
        return buf.getvalue()

    def _fmt(self, v: float) -> str:
        if not math.isfinite(v) or v > self.mask_level:
            return "inf"
        return f"{v:.17g}"

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.csv_text())

    def metadata(self) -> dict:
        return {
            "family": self.family,
            "gaps": [float(g) for g in self.gaps],
            "argmin": [float(v) for v in self.argmin],
            "min_value": self.min_value,
            "mask_level": float(self.mask_level),
        }


def _grid_symmetric_s1(gap: float, d: np.ndarray, sigma2: float) -> np.ndarray:
    s = np.sin(d * gap / 2.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        v = gap**2 * sigma2 / (8.0 * s**2)
    v[np.abs(s) < SINGULAR_SINE_TOL] = np.inf
    return v


def _grid_symmetric_s2(gaps, d1: np.ndarray, d2: np.ndarray, sigma2: float) -> np.ndarray:
    g1, g2 = gaps
    s11 = np.sin(d1 * g1 / 2.0)
    s12 = np.sin(d1 * g2 / 2.0)
    s21 = np.sin(d2 * g1 / 2.0)
    s22 = np.sin(d2 * g2 / 2.0)
    den = s11 * s22 - s12 * s21
    with np.errstate(divide="ignore", invalid="ignore"):
        a1 = (g1 * s22 - g2 * s21) / (4.0 * den)
        a2 = (g2 * s11 - g1 * s12) / (4.0 * den)
        v = 2.0 * sigma2 * (a1**2 + a2**2)
    v[np.abs(den) < SINGULAR_SINE_TOL] = np.inf
    return v


def _grid_triangulation_s1(gap: float, d1: np.ndarray, d2: np.ndarray, sigma2: float) -> np.ndarray:
    # third stencil pinned at zero: a plain function evaluation
    s12 = np.sin((d2 - d1) * gap / 4.0)
    s23 = np.sin(d2 * gap / 4.0)
    s31 = np.sin(-d1 * gap / 4.0)
    c1 = np.cos(d1 * gap / 2.0)
    c2 = np.cos(d2 * gap / 2.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        den = 64.0 * s12**2 * s23**2 * s31**2
        nu1 = gap**2 * (c2 - 1.0) ** 2 / den
        nu2 = gap**2 * (1.0 - c1) ** 2 / den
        nu3 = gap**2 * (c1 - c2) ** 2 / den
        v = sigma2 * (nu1 + nu2 + nu3)
    bad = (
        (np.abs(s12) < SINGULAR_SINE_TOL)
        | (np.abs(s23) < SINGULAR_SINE_TOL)
        | (np.abs(s31) < SINGULAR_SINE_TOL)
    )
    v[bad | ~np.isfinite(v)] = np.inf
    return v


def variance_grid(
    gaps,
    axis1,
    axis2=None,
    *,
    family: str = "symmetric",
    sigma2: float = 1.0,
    mask_level: float = DEFAULT_MASK_LEVEL,
) -> VarianceGrid:
    """Constant-sigma variance landscape over a shift axis or plane.

    ``family="symmetric"`` handles one gap (1-D in the symmetric shift) or
    two gaps (2-D in the shift pair); ``family="triangulation"`` is the
    single-gap distinct-shift landscape with the third stencil at zero.
    Cells coinciding with degenerate stencils are set to ``inf``.
    """
    g = tuple(float(v) for v in np.sort(np.atleast_1d(np.asarray(gaps, float))))
    axis1 = np.asarray(axis1, dtype=float)
    axis2 = None if axis2 is None else np.asarray(axis2, dtype=float)
    if family == "symmetric" and len(g) == 1:
        if axis2 is not None:
            raise ValueError("single-gap symmetric grid is one-dimensional")
        values = _grid_symmetric_s1(g[0], axis1, sigma2)
        name = "symmetric-s1"
    elif family == "symmetric" and len(g) == 2:
        if axis2 is None:
            raise ValueError("two-gap symmetric grid needs a second axis")
        d1, d2 = np.meshgrid(axis1, axis2, indexing="ij")
        values = _grid_symmetric_s2(g, d1, d2, sigma2)
        name = "symmetric-s2"
    elif family == "triangulation" and len(g) == 1:
        if axis2 is None:
            raise ValueError("triangulation grid needs two axes")
        d1, d2 = np.meshgrid(axis1, axis2, indexing="ij")
        values = _grid_triangulation_s1(g[0], d1, d2, sigma2)
        name = "triangulation-s1"
    else:
        raise ValueError(
            f"unsupported grid family {family!r} for {len(g)} gaps"
        )
    return VarianceGrid(
        family=name,
        gaps=g,
        axis1=axis1,
        axis2=axis2,
        values=values,
        mask_level=mask_level,
    )


def figure_preset(name: str) -> VarianceGrid:
    """The three reference variance landscapes at 0.01 pi resolution.

    ``fig2a``: single gap 2, symmetric shift over (0, 2 pi).
    ``fig2b``: single gap 2, distinct shifts over (-2 pi, 2 pi)^2, third
    stencil at zero.
    ``fig3``: gaps (2, 4), symmetric shift pair over (0, pi)^2.
    """
    if name == "fig2a":
        return variance_grid([2.0], np.linspace(0.0, 2 * np.pi, 201))
    if name == "fig2b":
        ax = np.linspace(-2 * np.pi, 2 * np.pi, 401)
        return variance_grid([2.0], ax, ax, family="triangulation")
    if name == "fig3":
        ax = np.linspace(0.0, np.pi, 101)
        return variance_grid([2.0, 4.0], ax, ax)
    raise ValueError(f"unknown preset {name!r}; pick fig2a, fig2b or fig3")
