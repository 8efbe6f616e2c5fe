"""Verma-module checks against a brute-force oracle.

The oracle computes ``⟨λ| word |λ⟩`` by pushing the rightmost raising letter
to the right one commutator at a time, with commutators taken from explicit
matrices; it shares no code with the PBW engine.
"""

import itertools
from functools import lru_cache
from math import factorial

import numpy as np
import pytest

from confluent_wznw import TruncatedElement, WeightTuple, matrix_element, normal_order
from confluent_wznw.poly import MultiPoly, lamvar


def _root_matrix(g, kind, idx):
    n = g.rank + 1
    m = np.zeros((n, n), dtype=int)
    if kind == "h":
        m[idx, idx], m[idx + 1, idx + 1] = 1, -1
        return m
    root = g.positive_roots[idx]
    a = next(i for i, c in enumerate(root) if c)
    b = a + sum(root)
    if kind == "e":
        m[a, b] = 1
    else:
        m[b, a] = 1
    return m


def _decompose(g, m):
    out = {}
    n = g.rank + 1
    for j in range(g.n_roots):
        root = g.positive_roots[j]
        a = next(i for i, c in enumerate(root) if c)
        b = a + sum(root)
        if m[a, b]:
            out[("e", j)] = int(m[a, b])
        if m[b, a]:
            out[("f", j)] = int(m[b, a])
    # diagonal: h_i coefficients from cumulative sums
    acc = 0
    for i in range(n - 1):
        acc += m[i, i]
        if acc:
            out[("h", i)] = int(acc)
    return out


def make_oracle(g, lam):
    mats = {key: _root_matrix(g, *key) for key in g.basis}

    def bracket(a, b):
        (ka, pa), (kb, pb) = a, b
        if pa + pb > lam.r:
            return {}
        comm = mats[ka] @ mats[kb] - mats[kb] @ mats[ka]
        return {(k, pa + pb): c for k, c in _decompose(g, comm).items()}

    @lru_cache(maxsize=None)
    def val(word):
        raising = [i for i, (k, _) in enumerate(word) if k[0] == "e"]
        if not raising:
            if any(k[0] == "f" for k, _ in word):
                return MultiPoly()
            out = MultiPoly.const(1)
            for (_, i), p in word:
                out = out * lam.components[p][i]
            return out
        i = raising[-1]
        if i == len(word) - 1:
            return MultiPoly()
        a, b = word[i], word[i + 1]
        out = val(word[:i] + (b, a) + word[i + 2:])
        for z, c in bracket(a, b).items():
            out = out + val(word[:i] + (z,) + word[i + 2:]) * c
        return out

    return val


def _letters(g, r):
    return [((kind, j), p) for kind in "ef" for j in range(g.n_roots) for p in range(r + 1)]


@pytest.mark.parametrize("r", [0, 1, 2])
def test_sl2_matches_oracle(sl2, r):
    lam = WeightTuple.symbolic(sl2, r)
    oracle = make_oracle(sl2, lam)
    for ne, nf in [(1, 1), (2, 2), (3, 3), (1, 2)]:
        for es in itertools.product(range(r + 1), repeat=ne):
            for fs in itertools.product(range(r + 1), repeat=nf):
                word = tuple((("e", 0), p) for p in es) + tuple((("f", 0), q) for q in fs)
                assert matrix_element(sl2, list(es), list(fs), lam) == oracle(word), word


def test_sl3_mixed_words_match_oracle(sl3):
    lam = WeightTuple.symbolic(sl3, 1)
    oracle = make_oracle(sl3, lam)
    letters = _letters(sl3, 1) + [(("h", i), p) for i in range(2) for p in range(2)]
    for word in itertools.product(letters, repeat=3):
        els = [TruncatedElement(k, p, 1) for k, p in word]
        got = normal_order(sl3, els, lam).get((), MultiPoly())
        assert got == oracle(tuple(word)), word


def test_examples(sl2):
    lam0 = WeightTuple.symbolic(sl2, 0)
    l = MultiPoly.var(lamvar(0, 0, 1, 1))
    assert matrix_element(sl2, [0], [0], lam0) == l
    assert matrix_element(sl2, [0, 0], [0, 0], lam0) == 2 * l * (l - 1)
    lam2 = WeightTuple.symbolic(sl2, 2)
    assert matrix_element(sl2, [1], [1], lam2) == lam2.component(2, 1)
    for p, q in itertools.product(range(3), repeat=2):
        want = lam2.component(p + q, 1) if p + q <= 2 else 0
        assert matrix_element(sl2, [p], [q], lam2) == want


def test_normalization_and_grading(sl2, sl3):
    lam = WeightTuple.symbolic(sl3, 1)
    assert matrix_element(sl3, [], [], lam) == 1
    # e_{α1} against f_{α2}: different root content
    assert matrix_element(sl3, [0], [0], lam, e_roots=[0], f_roots=[1]).is_zero()
    assert matrix_element(sl3, [0], [0, 0], lam, e_roots=[2], f_roots=[0, 1]) != 0


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_r0_reduces_to_ordinary_verma(sl2, n):
    """⟨λ|eⁿfⁿ|λ⟩ = n! λ(λ-1)⋯(λ-n+1) in the sl₂ Verma module."""
    lam = WeightTuple.symbolic(sl2, 0)
    l = lam.component(0, 1)
    want = MultiPoly.const(factorial(n))
    for j in range(n):
        want = want * (l - j)
    assert matrix_element(sl2, [0] * n, [0] * n, lam) == want


def test_pbw_form_has_only_lowering_letters(sl3):
    lam = WeightTuple.symbolic(sl3, 1)
    word = [TruncatedElement(("e", 0), 1, 1), TruncatedElement(("f", 2), 0, 1), TruncatedElement(("f", 1), 0, 1)]
    vec = normal_order(sl3, word, lam)
    assert vec
    for mono in vec:
        assert all(t.key[0] == "f" for t in mono)


def test_regularity_flag(sl2):
    assert WeightTuple.numeric([[1], [2]]).is_regular(sl2)
    assert not WeightTuple.numeric([[1], [0]]).is_regular(sl2)
    assert WeightTuple.symbolic(sl2, 1).is_regular(sl2)
