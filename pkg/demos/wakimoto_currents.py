"""
Free-field currents and confluent primary fields
================================================

Solves for the anomaly coefficients that make the βγ + boson currents close
into an affine algebra, then lets the current modes act on a confluent
primary field and reads off its conformal data from T(z)Φ(w).
"""

from confluent_wznw import (
    WeightTuple,
    build_algebra,
    compute_P,
    mode_action,
    primary_field,
    solve_r_coeffs,
    solved_currents,
    sugawara_T,
    t_phi_ope,
)
from confluent_wznw.fields import ope

g = build_algebra("A", 1)

# The anomaly coefficient and the level are fixed together: κ = k + 2.
sol = solve_r_coeffs(g)
print("anomaly coefficient:", sol.r_level, " κ =", sol.kappa_of_level)

cur, _ = solved_currents(g)
print("E =", cur.E[0])
print("H =", cur.H[0])
print("F =", cur.F[0])

# Singular parts of a few current OPEs, written as (z-w)^n -> field.
for a, b in (("H", "H"), ("E", "F"), ("F", "F")):
    res = ope(cur.current(a), cur.current(b), order=-1)
    print(f"{a}(z){b}(w):", "; ".join(res.lines()) or "regular")

# The Sugawara tensor coincides with the free-field stress tensor.
print("Sugawara == free T:", sugawara_T(cur) == cur.T)

# A primary with two irregular weights (r = 1) built from the f-word f[1].
r = 1
lam = WeightTuple.symbolic(g, r)
P = compute_P(g, [(0, 1)], lam)
phi = primary_field(g, P, lam)
print("Φ =", phi)
for label in ("E", "H", "F"):
    for n in range(r + 2):
        print(f"  {label}[{n}]Φ =", mode_action(cur, label, n, phi))

# T(z)Φ(w) splits into the weight, the derivative and the jet-shift pieces.
rep = t_phi_ope(cur, P, lam)
print("T(z)Φ(w) decomposition exact:", rep.ok)
for line in rep.ope.lines():
    print("  ", line)
