"""Self-verification suite: every advertised guarantee as a runnable check.

Each check is deterministic (fixed seeds), returns a structured result and
carries its tolerance inline.  The CLI ``verify`` command and the acceptance
test module both run these.
"""
from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from . import gates, rules, sampling, sim
from .errors import InsufficientStencils
from .spectral import diagonalize, unique_gaps

__all__ = ["CheckResult", "run_checks", "CHECKS"]


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "detail": self.detail,
            "seconds": round(self.seconds, 3),
        }


def _sweep_rule_error(generator, rule, n_circuits, seed0, x_scale=3.0, pre_factor=None):
    """Max |rule - exact commutator derivative| over seeded random circuits.

    ``pre_factor(rng)`` may supply an extra unitary folded before the random
    pre-circuit (used to absorb a commuting second gate parameter).
    """
    worst = 0.0
    for k in range(n_circuits):
        circuit = sim.random_circuit(generator, seed=seed0 + k)
        if pre_factor is not None:
            rng = np.random.default_rng(10_000 + seed0 + k)
            circuit = sim.CircuitSpec(
                generator=circuit.generator,
                cost=circuit.cost,
                pre=pre_factor(rng) @ circuit.pre,
                post=circuit.post,
            )
        x = float(np.random.default_rng(20_000 + seed0 + k).uniform(-x_scale, x_scale))
        err = abs(sim.evaluate_rule(circuit, x, rule) - sim.exact_derivative(circuit, x))
        worst = max(worst, err)
    return worst


def check_psr_recovery() -> CheckResult:
    """Single-gap rule at pi/2 recovers the two-term +-1/2 table exactly."""
    t0 = time.time()
    problems = []
    rule = rules.symmetric_rule([2.0], [np.pi / 2])
    w = dict(rule.terms)
    if w.get(np.pi / 2) != 0.5 or w.get(-np.pi / 2) != -0.5:
        problems.append(f"weights {rule.terms} are not exactly +-1/2")
    worst = 0.0
    for n_qubits, count in ((1, 67), (2, 67), (3, 66)):
        gen = gates.pauli_string("Z" + "I" * (n_qubits - 1))
        worst = max(worst, _sweep_rule_error(gen, rule, count, seed0=1000 * n_qubits))
    if worst > 1e-10:
        problems.append(f"max |rule - exact| = {worst:.3e} > 1e-10")
    dt = time.time() - t0
    if dt > 5.0:
        problems.append(f"runtime {dt:.1f}s exceeds 5s")
    return CheckResult(
        "psr-recovery",
        not problems,
        "; ".join(problems) or f"weights exact, max err {worst:.2e} over 200 circuits",
        dt,
    )


def check_fsim_theta() -> CheckResult:
    """Four-term two-gap rule: closed form == solver, exact on fSim circuits."""
    t0 = time.time()
    problems = []
    shifts = (0.80 * np.pi, 0.29 * np.pi)
    closed = rules.closed_s2((2.0, 4.0), shifts)
    solver = rules.symmetric_rule([2.0, 4.0], list(shifts))
    dev = np.abs(np.sort(closed.weights) - np.sort(solver.weights)).max()
    if dev > 1e-12:
        problems.append(f"closed vs solver weight deviation {dev:.3e} > 1e-12")
    g_theta = gates.fsim().generator("theta")
    g_phi = gates.fsim().generator("phi")

    def phi_factor(rng):
        return sim.generator_unitary(g_phi, float(rng.uniform(-np.pi, np.pi)))

    worst = _sweep_rule_error(g_theta, closed, 100, seed0=5000, pre_factor=phi_factor)
    if worst > 1e-9:
        problems.append(f"max |rule - exact| = {worst:.3e} > 1e-9")
    dt = time.time() - t0
    if dt > 10.0:
        problems.append(f"runtime {dt:.1f}s exceeds 10s")
    return CheckResult(
        "fsim-theta-exactness",
        not problems,
        "; ".join(problems)
        or f"closed==solver to {dev:.1e}, max err {worst:.2e} over 100 circuits",
        dt,
    )


def check_fsim_phi() -> CheckResult:
    """Phase generator has the single gap 2; two evaluations differentiate it."""
    t0 = time.time()
    problems = []
    g_phi = gates.fsim().generator("phi")
    g_theta = gates.fsim().generator("theta")
    gap_values = unique_gaps(diagonalize(g_phi)).gaps
    if gap_values.size != 1 or abs(gap_values[0] - 2.0) > 1e-9:
        problems.append(f"phi gaps {gap_values.tolist()} != [2]")
    rule = rules.closed_s1(2.0, np.pi / 2)

    def theta_factor(rng):
        return sim.generator_unitary(g_theta, float(rng.uniform(-np.pi, np.pi)))

    worst = _sweep_rule_error(g_phi, rule, 100, seed0=6000, pre_factor=theta_factor)
    if worst > 1e-9:
        problems.append(f"max |rule - exact| = {worst:.3e} > 1e-9")
    return CheckResult(
        "fsim-phi-rule",
        not problems,
        "; ".join(problems) or f"gaps [2], two-term rule max err {worst:.2e}",
        time.time() - t0,
    )


def check_cr_s3() -> CheckResult:
    """Three-gap cross-resonance: gaps {1,3,4}, six-term closed form exact."""
    t0 = time.time()
    problems = []
    descriptor = gates.cross_resonance([1.0, -0.5, 1.0, 0.0, 0.0])
    gap_values = descriptor.gap_set("x").gaps
    if gap_values.size != 3 or np.abs(gap_values - [1.0, 3.0, 4.0]).max() > 1e-9:
        problems.append(f"CR gaps {gap_values.tolist()} != [1, 3, 4]")
    shifts = rules.default_shifts([1.0, 3.0, 4.0])
    closed = rules.closed_s3((1.0, 3.0, 4.0), shifts)
    solver = rules.symmetric_rule([1.0, 3.0, 4.0], shifts)
    dev = np.abs(np.sort(closed.weights) - np.sort(solver.weights)).max()
    if dev > 1e-12:
        problems.append(f"closed vs solver weight deviation {dev:.3e} > 1e-12")
    worst = _sweep_rule_error(descriptor.generator("x"), closed, 100, seed0=7000)
    if worst > 1e-9:
        problems.append(f"max |rule - exact| = {worst:.3e} > 1e-9")
    dt = time.time() - t0
    if dt > 10.0:
        problems.append(f"runtime {dt:.1f}s exceeds 10s")
    return CheckResult(
        "cr-s3-rule",
        not problems,
        "; ".join(problems)
        or f"gaps ok, closed==solver to {dev:.1e}, max err {worst:.2e}",
        dt,
    )


def check_triangulation_s1() -> CheckResult:
    """Distinct-shift rule with a zero stencil is exact; 2S stencils fail."""
    t0 = time.time()
    problems = []
    gen = gates.pauli_string("Z")
    worst = 0.0
    for stencil in ((np.pi / 2, 3 * np.pi / 2, 0.0), (1.9, 0.2, 0.0), (0.7, -1.1, 0.0)):
        rule = rules.triangulation_s1(2.0, stencil)
        worst = max(worst, _sweep_rule_error(gen, rule, 40, seed0=8000))
    if worst > 1e-9:
        problems.append(f"max |rule - exact| = {worst:.3e} > 1e-9")
    try:
        rules.triangulation_general([2.0], [np.pi / 2, -np.pi / 2])
        problems.append("2S stencils did not raise InsufficientStencils")
    except InsufficientStencils:
        pass
    return CheckResult(
        "triangulation-s1",
        not problems,
        "; ".join(problems) or f"three-shift rules exact (max err {worst:.2e}); "
        "2S stencils rejected",
        time.time() - t0,
    )


def check_feature_map() -> CheckResult:
    """(N+1)-evaluation reduced rule matches the 2N-evaluation rule exactly."""
    t0 = time.time()
    problems = []
    for n in (2, 3, 4):
        gen = gates.product_feature_map(n).generator("x")
        gap_values = [2.0 * k for k in range(1, n + 1)]
        full = rules.symmetric_rule(gap_values)
        worst_red = worst_full = worst_pair = 0.0
        for k in range(25):
            circuit = sim.random_real_circuit(gen, seed=9000 + 100 * n + k)
            x = float(np.random.default_rng(9500 + 100 * n + k).uniform(-3, 3))
            reduced = rules.real_symmetric_rule(gap_values, x=x)
            exact = sim.exact_derivative(circuit, x)
            v_red = sim.evaluate_rule(circuit, x, reduced)
            v_full = sim.evaluate_rule(circuit, x, full)
            worst_red = max(worst_red, abs(v_red - exact))
            worst_full = max(worst_full, abs(v_full - exact))
            worst_pair = max(worst_pair, abs(v_red - v_full))
        if max(worst_red, worst_full, worst_pair) > 1e-9:
            problems.append(
                f"N={n}: reduced err {worst_red:.3e}, full err {worst_full:.3e}, "
                f"cross {worst_pair:.3e} (tolerance 1e-9)"
            )
    return CheckResult(
        "feature-map-reduction",
        not problems,
        "; ".join(problems) or "N+1-evaluation rule exact for N=2,3,4",
        time.time() - t0,
    )


def check_variance_fig2a() -> CheckResult:
    """Single-gap symmetric landscape: minimum 1/2 at the quarter-period."""
    t0 = time.time()
    problems = []
    grid = sampling.figure_preset("fig2a")
    if abs(grid.min_value - 0.5) > 1e-9:
        problems.append(f"min {grid.min_value} != 0.5")
    if abs(grid.argmin[0] - np.pi / 2) > 0.01 * np.pi + 1e-12:
        problems.append(f"argmin {grid.argmin[0] / np.pi}pi not at 0.5pi")
    return CheckResult(
        "variance-fig2a",
        not problems,
        "; ".join(problems)
        or f"min {grid.min_value:.3f} at {grid.argmin[0] / np.pi:.2f}pi",
        time.time() - t0,
    )


def check_variance_fig2b() -> CheckResult:
    """Distinct-shift landscape: minima 1/2 at +-pi/2 / +-3pi/2 combinations."""
    t0 = time.time()
    problems = []
    grid = sampling.figure_preset("fig2b")
    if abs(grid.min_value - 0.5) > 1e-9:
        problems.append(f"min {grid.min_value} != 0.5")
    halves = (np.pi / 2, -np.pi / 2, 3 * np.pi / 2, -3 * np.pi / 2)
    combos = [(a, b) for a in halves for b in halves if abs(a) != abs(b)]
    combos += [(a, -a) for a in halves]
    # drop combos where stencils coincide modulo the 2 pi period (gray lines)
    combos = [
        (a, b)
        for a, b in combos
        if min(abs(np.sin((a - b) / 2)), abs(np.sin(a / 2)), abs(np.sin(b / 2))) > 1e-9
    ]
    d1, d2 = grid.argmin
    if not any(abs(d1 - a) < 0.011 * np.pi and abs(d2 - b) < 0.011 * np.pi for a, b in combos):
        problems.append(f"argmin ({d1 / np.pi:.3f}pi, {d2 / np.pi:.3f}pi) not a +-pi/2 / +-3pi/2 combo")
    for a, b in combos:
        i = int(np.argmin(np.abs(grid.axis1 - a)))
        j = int(np.argmin(np.abs(grid.axis2 - b)))
        if abs(grid.values[i, j] - 0.5) > 1e-9:
            problems.append(
                f"value {grid.values[i, j]:.6f} != 0.5 at ({a / np.pi:.2f}pi, {b / np.pi:.2f}pi)"
            )
            break
    return CheckResult(
        "variance-fig2b",
        not problems,
        "; ".join(problems) or f"{len(combos)} expected minima all at 0.500",
        time.time() - t0,
    )


def check_variance_fig3() -> CheckResult:
    """Two-gap landscape: minimum ~1.40 near (0.80 pi, 0.29 pi)."""
    t0 = time.time()
    problems = []
    grid = sampling.figure_preset("fig3")
    hi, lo = sorted(grid.argmin, reverse=True)
    if abs(hi - 0.80 * np.pi) > 0.02 * np.pi or abs(lo - 0.29 * np.pi) > 0.02 * np.pi:
        problems.append(
            f"argmin ({hi / np.pi:.3f}pi, {lo / np.pi:.3f}pi) not within 0.02pi of (0.80pi, 0.29pi)"
        )
    if abs(grid.min_value - 1.40) > 0.02:
        problems.append(f"min {grid.min_value:.4f} not within 1.40 +- 0.02")
    dt = time.time() - t0
    if dt > 60.0:
        problems.append(f"runtime {dt:.1f}s exceeds 60s")
    return CheckResult(
        "variance-fig3",
        not problems,
        "; ".join(problems)
        or f"min {grid.min_value:.4f} at ({hi / np.pi:.3f}pi, {lo / np.pi:.3f}pi)",
        dt,
    )


def _sampling_case(circuit, x, rule, shots, reps, seed):
    values = np.empty(reps)
    for r in range(reps):
        rep_seed = int(np.random.SeedSequence([seed, r]).generate_state(1)[0])
        values[r] = sampling.estimate_derivative(circuit, x, rule, shots, rep_seed).value
    exact = sim.exact_derivative(circuit, x)
    live = rule.materialize(x)
    sigma_model = lambda d: sampling.measurement_sigma2(circuit, x + d)
    var_analytic = sampling.analytic_variance(live, sigma2=sigma_model, shots=shots)
    var_emp = float(values.var(ddof=1))
    mean_err = abs(values.mean() - exact)
    se = np.sqrt(var_analytic / reps)
    return var_emp, var_analytic, mean_err, se


def check_sampling_consistency() -> CheckResult:
    """Empirical estimator variance matches the analytic formula within 10%."""
    t0 = time.time()
    problems = []
    reps, shots = 10_000, 1000
    hada = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
    cos_circuit = sim.CircuitSpec(
        generator=gates.pauli_string("Z"), cost=gates.pauli_string("X"), pre=hada
    )
    psr = rules.closed_s1(2.0, np.pi / 2)
    cases = [("psr", cos_circuit, 0.9, psr)]
    fsim_circuit = sim.random_circuit(gates.fsim().generator("theta"), seed=303)
    cases.append(
        ("fsim", fsim_circuit, 0.7, rules.closed_s2((2.0, 4.0), (0.8 * np.pi, 0.29 * np.pi)))
    )
    for label, circuit, x, rule in cases:
        var_emp, var_an, mean_err, se = _sampling_case(circuit, x, rule, shots, reps, seed=11)
        if var_an > 0 and abs(var_emp / var_an - 1.0) > 0.10:
            problems.append(
                f"{label}: empirical/analytic variance {var_emp / var_an:.3f} outside 10%"
            )
        if mean_err > 4.0 * se:
            problems.append(f"{label}: |mean - exact| = {mean_err:.3e} > 4 SE = {4 * se:.3e}")
    dt = time.time() - t0
    if dt > 300.0:
        problems.append(f"runtime {dt:.1f}s exceeds 5min")
    return CheckResult(
        "sampling-consistency",
        not problems,
        "; ".join(problems) or f"variance ratios within 10%, means within 4 SE ({reps} reps)",
        dt,
    )


def check_qutrit_rules() -> CheckResult:
    """Both three-level generators have gaps {1,2}; the S=2 rule is exact."""
    t0 = time.time()
    problems = []
    rule = rules.closed_s2((1.0, 2.0), (0.8 * np.pi, 0.29 * np.pi))
    for descriptor in gates.qutrit_generators():
        gap_values = descriptor.gap_set("x").gaps
        if gap_values.size != 2 or np.abs(gap_values - [1.0, 2.0]).max() > 1e-9:
            problems.append(f"{descriptor.name}: gaps {gap_values.tolist()} != [1, 2]")
        worst = _sweep_rule_error(descriptor.generator("x"), rule, 50, seed0=12000)
        if worst > 1e-9:
            problems.append(f"{descriptor.name}: max |rule - exact| = {worst:.3e} > 1e-9")
    return CheckResult(
        "qutrit-rules",
        not problems,
        "; ".join(problems) or "gaps [1,2] and S=2 rule exact for both generators",
        time.time() - t0,
    )


def check_qutrit_variance() -> CheckResult:
    """Qutrit landscape minimum sits at the gap-rescaled two-gap optimum.

    Gaps (1,2) are half the (2,4) reference, so the optimal shifts double to
    (1.60 pi, 0.58 pi) and the minimal variance drops by 4 to ~0.351.
    """
    t0 = time.time()
    problems = []
    ax = np.linspace(0.0, 2 * np.pi, 201)
    grid = sampling.variance_grid([1.0, 2.0], ax, ax)
    hi, lo = sorted(grid.argmin, reverse=True)
    if abs(hi - 1.60 * np.pi) > 0.02 * np.pi or abs(lo - 0.58 * np.pi) > 0.02 * np.pi:
        problems.append(
            f"argmin ({hi / np.pi:.3f}pi, {lo / np.pi:.3f}pi) not within 0.02pi of "
            "(1.60pi, 0.58pi), the rescaled two-gap optimum"
        )
    if abs(grid.min_value - 1.40 / 4.0) > 0.02 / 4.0:
        problems.append(f"min {grid.min_value:.4f} not within 0.350 +- 0.005")
    return CheckResult(
        "qutrit-variance",
        not problems,
        "; ".join(problems)
        or f"min {grid.min_value:.4f} at ({hi / np.pi:.3f}pi, {lo / np.pi:.3f}pi)",
        time.time() - t0,
    )


def check_eigensolver_quality() -> CheckResult:
    """Per-eigenpair residual below 1e-10 * ||G||_F on 1000 random matrices."""
    t0 = time.time()
    worst = 0.0
    rng = np.random.default_rng(99)
    for i in range(1000):
        d = 2 + (i % 63)
        a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        g = a + a.conj().T
        spec = diagonalize(g)
        res = np.linalg.norm(
            g @ spec.eigenvectors - spec.eigenvectors * spec.eigenvalues, axis=0
        ).max()
        worst = max(worst, res / np.linalg.norm(g))
    passed = worst <= 1e-10
    return CheckResult(
        "eigensolver-quality",
        passed,
        f"worst residual / ||G||_F = {worst:.3e} over 1000 matrices, dims 2-64"
        + ("" if passed else " (tolerance 1e-10)"),
        time.time() - t0,
    )


CHECKS = (
    ("psr-recovery", check_psr_recovery),
    ("fsim-theta-exactness", check_fsim_theta),
    ("fsim-phi-rule", check_fsim_phi),
    ("cr-s3-rule", check_cr_s3),
    ("triangulation-s1", check_triangulation_s1),
    ("feature-map-reduction", check_feature_map),
    ("variance-fig2a", check_variance_fig2a),
    ("variance-fig2b", check_variance_fig2b),
    ("variance-fig3", check_variance_fig3),
    ("sampling-consistency", check_sampling_consistency),
    ("qutrit-rules", check_qutrit_rules),
    ("qutrit-variance", check_qutrit_variance),
    ("eigensolver-quality", check_eigensolver_quality),
)


def run_checks(name_filter: str | None = None) -> list[CheckResult]:
    """Run every check whose name contains ``name_filter`` (all when None)."""
    return [fn() for name, fn in CHECKS if not name_filter or name_filter in name]
