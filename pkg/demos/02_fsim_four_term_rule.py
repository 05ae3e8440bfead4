"""Differentiating the fSim gate without decomposing it.

The swap-angle generator X1X2 + Y1Y2 carries two unique gaps {2, 4}, so four
shifted evaluations give the exact derivative; the phase generator is
projector-like with the single gap {2} and needs only two.
"""
import numpy as np

import gradshift as gs

fsim = gs.fsim(theta=0.7, phi=-1.3)
print("fSim unitary matches its closed form to",
      np.abs(fsim.unitary() - gs.fsim_matrix(0.7, -1.3)).max())

for param in ("theta", "phi"):
    gaps = fsim.gap_set(param)
    print(f"{param}: gaps {np.round(gaps.gaps, 12)}")

# -- theta derivative: the four-term rule ------------------------------------
g_theta = fsim.generator("theta")
g_phi = fsim.generator("phi")
rule4 = gs.closed_s2((2.0, 4.0), (0.8 * np.pi, 0.29 * np.pi))
print("\nfour-term rule:")
for shift, weight in rule4.terms:
    print(f"  shift {shift:+.6f}  weight {weight:+.6f}")

# a random dressed circuit; the fixed phi rotation commutes with the theta
# generator, so it folds into the pre-circuit
rng = np.random.default_rng(42)
theta, phi = 0.9, -0.4
pre = gs.generator_unitary(g_phi, phi) @ gs.haar_unitary(4, rng)
circuit = gs.CircuitSpec(
    generator=g_theta,
    cost=gs.random_hermitian(4, rng),
    pre=pre,
    post=gs.haar_unitary(4, rng),
)
val = gs.evaluate_rule(circuit, theta, rule4)
exact = gs.exact_derivative(circuit, theta)
print(f"\nd f/d theta  rule = {val:+.12f}  exact = {exact:+.12f}  |err| = {abs(val-exact):.2e}")

# -- phi derivative: plain two-term rule -------------------------------------
circuit_phi = gs.CircuitSpec(
    generator=g_phi,
    cost=circuit.cost,
    pre=gs.generator_unitary(g_theta, theta) @ gs.haar_unitary(4, np.random.default_rng(42)),
    post=circuit.post,
)
rule2 = gs.closed_s1(2.0, np.pi / 2)
val = gs.evaluate_rule(circuit_phi, phi, rule2)
exact = gs.exact_derivative(circuit_phi, phi)
print(f"d f/d phi    rule = {val:+.12f}  exact = {exact:+.12f}  |err| = {abs(val-exact):.2e}")

# -- the same coefficients drive any two-gap generator, e.g. qutrit rotations -
qutrit = gs.qutrit_generators()[1]
rule_qutrit = gs.closed_s2((1.0, 2.0), (0.8 * np.pi, 0.29 * np.pi))
circ3 = gs.random_circuit(qutrit.generator("x"), seed=7)
val = gs.evaluate_rule(circ3, 0.5, rule_qutrit)
exact = gs.exact_derivative(circ3, 0.5)
print(f"\nqutrit (gaps 1,2): rule = {val:+.12f}  exact = {exact:+.12f}  |err| = {abs(val-exact):.2e}")
