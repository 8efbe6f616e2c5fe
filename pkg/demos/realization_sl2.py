"""
Differential realization of a truncated current algebra
=======================================================

Builds sl2, realizes the truncated current algebra sl2 ⊗ C[t]/t^2 by
first-order differential operators in the jet coordinates x0, x1, checks the
bracket relations and compares constant terms with Verma matrix elements.
"""

import itertools

from confluent_wznw import (
    TruncatedElement,
    WeightTuple,
    build_algebra,
    compute_P,
    matrix_element,
    realize,
    rep_check,
    screening_constant_term,
    screening_op,
    truncated_basis,
)

g = build_algebra("A", 1)
r = 1
lam = WeightTuple.symbolic(g, r)  # λ0, λ1 stay symbolic

# Each mode x[p] of e, h, f becomes a vector field plus a multiplication operator.
for kind in ("e", "h", "f"):
    for p in range(r + 1):
        print(f"{kind}[{p}] ->", realize(g, TruncatedElement((kind, 0), p, r), lam))

# The map is a Lie algebra homomorphism: every bracket is reproduced exactly.
basis = truncated_basis(g, r)
bad = [(a, b) for a, b in itertools.combinations(basis, 2) if not rep_check(g, a, b, lam)[0]]
print("bracket relations violated:", bad or "none")

# Screening operators S[p] commute with the realization up to jets.
print("S[0] =", screening_op(g, 0, 0, r))

# The polynomial P attached to an f-word is the image of the word acting on 1.
word = [(0, 1), (0, 0)]
P = compute_P(g, word, lam)
print("P for f[1] f[0]:", P)

# Acting with screenings and taking the constant term gives the Verma pairing.
es = (0, 1)
ct = screening_constant_term(g, es, word, lam)
me = matrix_element(g, list(reversed(es)), [q for _, q in word], lam)
print("constant term:", ct, "| matrix element:", me, "| equal:", ct == me)
