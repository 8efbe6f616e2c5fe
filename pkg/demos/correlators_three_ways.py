"""
Correlator numerators three ways
================================

The rational function ω multiplying the master function can be computed by a
Ward-identity recursion, by summing Wick contractions, or (for sl2) by a
closed product formula.  This script shows all three agree.
"""

from confluent_wznw import (
    InsertionConfig,
    PrimaryInsertion,
    WeightTuple,
    build_algebra,
    omega_sl2_closed,
    omega_ward,
    omega_wick,
)

g = build_algebra("A", 1)

# Two primaries: an r = 1 one carrying f[0] f[1] and an ordinary one carrying f[0].
p1 = PrimaryInsertion.from_word(g, WeightTuple.symbolic(g, 1, 0), [(0, 0), (0, 1)])
p2 = PrimaryInsertion.from_word(g, WeightTuple.symbolic(g, 0, 1), [(0, 0)])
cfg = InsertionConfig(g, (0, 0, 0), (p1, p2))

# Two screenings at a single primary are small enough to read.
small = InsertionConfig(g, (0, 0), (p1,))
print("Ward   :", omega_ward(small))
print("Wick   :", omega_wick(small))
print("closed :", omega_sl2_closed(small))

# Three screenings and two primaries: too long to print, so only compare.
ward = omega_ward(cfg)
print("three screenings, all equal:", ward == omega_wick(cfg) == omega_sl2_closed(cfg))
print("numerator terms:", len(ward.together()[0].terms))

# Charge conservation: one screening too many gives zero.
print("unbalanced:", omega_ward(InsertionConfig(g, (0,) * 4, (p1, p2))))

# For sl3 the closed form is not available but Ward and Wick still agree.
g3 = build_algebra("A", 2)
f1, f2 = g3.simple_root_indices
q1 = PrimaryInsertion.from_word(g3, WeightTuple.symbolic(g3, 1, 0), [(f1, 1)])
q2 = PrimaryInsertion.from_word(g3, WeightTuple.symbolic(g3, 0, 1), [(f2, 0)])
cfg3 = InsertionConfig(g3, (0, 1), (q1, q2))
print("sl3 Ward == Wick:", omega_ward(cfg3) == omega_wick(cfg3))
