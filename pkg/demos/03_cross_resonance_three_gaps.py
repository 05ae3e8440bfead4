"""Cross-resonance generators: gap structure tracks the drive parameters.

The effective CR Hamiltonian is a tunable Pauli sum.  Depending on which
terms dominate it needs one, two, or three unique gaps, and with three gaps
the exact derivative costs six evaluations.
"""
import numpy as np

import gradshift as gs

regimes = {
    "pure Z1X2 drive        ": [0.0, 1.0, 0.0, 0.0, 0.0],
    "Z1 = -Z1X2             ": [1.0, -1.0, 0.0, 0.0, 0.0],
    "Z1 + X2, weak coupling ": [1.0, -0.5, 1.0, 0.0, 0.0],
}
for label, gammas in regimes.items():
    desc = gs.cross_resonance(gammas)
    print(f"{label} gaps = {np.round(desc.gap_set('x').gaps, 9)}")

# -- the coupling-strength family: gaps {2(1+g2), 2(1-g2), 4} -----------------
print("\ngap drift with the two-qubit amplitude g2:")
for g2 in (-0.25, -0.5, -0.75):
    desc = gs.cross_resonance([1.0, g2, 1.0, 0.0, 0.0])
    print(f"  g2 = {g2:+.2f}: {np.round(desc.gap_set('x').gaps, 9)}")

# -- six-term rule for the {1, 3, 4} point ------------------------------------
desc = gs.cross_resonance([1.0, -0.5, 1.0, 0.0, 0.0])
shifts = gs.default_shifts([1.0, 3.0, 4.0])
rule = gs.closed_s3((1.0, 3.0, 4.0), shifts)
solver = gs.symmetric_rule([1.0, 3.0, 4.0], shifts)
print("\nsix-term rule (closed form vs general solver):")
for (s1, w1), (s2, w2) in zip(sorted(rule.terms), sorted(solver.terms)):
    print(f"  shift {s1:+.6f}  closed {w1:+.9f}  solver {w2:+.9f}")

circuit = gs.random_circuit(desc.generator("x"), seed=3)
x = 1.1
val = gs.evaluate_rule(circuit, x, rule)
exact = gs.exact_derivative(circuit, x)
print(f"\nrule = {val:+.12f}  exact = {exact:+.12f}  |err| = {abs(val - exact):.2e}")

# -- four unique gaps appear for generic drive amplitudes ---------------------
generic = gs.cross_resonance([0.9, -0.45, 0.8, 0.3, 0.15])
gaps = generic.gap_set("x")
print(f"\ngeneric drive: S = {gaps.count} gaps = {np.round(gaps.gaps, 6)}")
rule = gs.symmetric_rule(gaps)
circuit = gs.random_circuit(generic.generator("x"), seed=4)
err = abs(gs.evaluate_rule(circuit, x, rule) - gs.exact_derivative(circuit, x))
print(f"2S = {len(rule.terms)} evaluations, |err| = {err:.2e}")
