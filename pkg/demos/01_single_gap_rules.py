"""Single-gap generators: the classic two-term rule and its relatives.

A Pauli-string generator has eigenvalues +-1, so the only positive spectral
gap is 2.  Two symmetric evaluations recover the derivative exactly; three
distinct evaluations (one of them free, at zero shift) do too.
"""
import numpy as np

import gradshift as gs

# -- inspect the generator -------------------------------------------------
gen = gs.pauli_string("Z")
spectrum = gs.diagonalize(gen)
gaps = gs.unique_gaps(spectrum)
print("eigenvalues:", spectrum.eigenvalues)
print("unique positive gaps:", gaps.gaps, "multiplicities:", gaps.multiplicities)

# -- a circuit encoding f(x) = cos(x) ---------------------------------------
hadamard = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
circuit = gs.CircuitSpec(generator=gen, cost=gs.pauli_string("X"), pre=hadamard)
x = 0.6
print(f"\nf({x}) = {gs.expectation(circuit, x):+.12f}   cos  = {np.cos(x):+.12f}")

# -- the symmetric rule at the standard pi/2 shift ---------------------------
psr = gs.closed_s1(gap=2.0, shift=np.pi / 2)
print("\ntwo-term rule:", psr.terms)
print("rule derivative :", gs.evaluate_rule(circuit, x, psr))
print("exact derivative:", gs.exact_derivative(circuit, x))
print("finite diff     :", gs.fd_derivative(circuit, x))

# -- any non-singular shift works; weights rescale ---------------------------
for shift in (np.pi / 3, 1.0, 2.5):
    rule = gs.closed_s1(2.0, shift)
    err = abs(gs.evaluate_rule(circuit, x, rule) - gs.exact_derivative(circuit, x))
    print(f"shift {shift:4.2f}: weight {rule.weights[0]:+.6f}, |error| = {err:.2e}")

# -- distinct shifts: three evaluations, one of them at zero -----------------
tri = gs.triangulation_s1(2.0, (np.pi / 2, 3 * np.pi / 2, 0.0))
print("\ntriangulation stencil:", np.round(tri.shifts, 4))
print("weights (sum to zero):", np.round(tri.weights, 6))
err = abs(gs.evaluate_rule(circuit, x, tri) - gs.exact_derivative(circuit, x))
print("|error| =", f"{err:.2e}")

# -- with only 2S stencils the distinct-shift system has no solution ---------
try:
    gs.triangulation_general([2.0], [0.4, 1.9])
except gs.InsufficientStencils as exc:
    print("\n2S stencils rejected as expected:", exc)
