"""
Euler integrals and their confluent limit
=========================================

With one screening between two ordinary primaries the correlator is a Gauss
hypergeometric function.  With an r = 1 primary the power singularity turns
into an exponential one and the integral becomes a Gamma function.
"""

import cmath

import mpmath

from confluent_wznw import (
    InsertionConfig,
    PrimaryInsertion,
    Ray,
    WeightTuple,
    build_algebra,
    integrate,
    psi_eval,
)
from confluent_wznw.poly import MultiPoly

g = build_algebra("A", 1)
kappa = 3
l1, l2 = mpmath.mpf("1.3"), mpmath.mpf("0.7")

p1 = PrimaryInsertion(WeightTuple.numeric([["13/10"]]), MultiPoly.const(1))
p2 = PrimaryInsertion.from_word(g, WeightTuple.numeric([["7/10"]]), [(0, 0)])
cfg = InsertionConfig(g, (0,), (p1, p2), kappa)
bare = InsertionConfig(g, (), (p1, p2), kappa)

a, b = 1 + l2 / kappa, (l1 + l2) / kappa
print(" z     integral / prefactor      (λ2/b)·2F1(a, b; b+1; z)")
for z in (0.1, 0.3, 0.5, 0.7):
    res = integrate(cfg, [Ray(1, 1)], [0, z], tolerance=1e-12)
    F = res.value / psi_eval(bare, [], [0, z]).value
    ref = l2 / b * mpmath.hyp2f1(a, b, b + 1, z)
    print(f" {z:.1f}   {F.real:.15f}   {float(ref):.15f}")

# The r = 1 primary: Ψ = (t - z)^{-λ0/κ} exp(λ1 / (κ (t - z))).
prim = PrimaryInsertion.from_word(g, WeightTuple.numeric([["13/10"], ["-9/10"]]), [(0, 1)])
cfg1 = InsertionConfig(g, (0,), (prim,), kappa)
l0, l1 = mpmath.mpf("1.3"), mpmath.mpf("-0.9")
exact = l1 * mpmath.gamma(l0 / kappa) * (-l1 / kappa) ** (-l0 / kappa)
print("closed form:", mpmath.nstr(exact, 14))
for par in ("rational", "exp", "linear"):
    res = integrate(cfg1, [Ray(0.4, 1)], [0.4], tolerance=1e-12, parameterization=par)
    print(f"  {par:9s}", f"{res.value.real:.14f}", " ", res.diagnostics[0])

# Rotating the ray inside the damping sector leaves the value unchanged.
for angle in (-0.3, 0.3):
    res = integrate(cfg1, [Ray(0.4, cmath.exp(1j * angle))], [0.4], tolerance=1e-12)
    print(f"  direction e^({angle:+.1f}i): {res.value.real:.14f} {res.value.imag:+.1e}i")
