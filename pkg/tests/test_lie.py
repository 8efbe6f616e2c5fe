import itertools
from fractions import Fraction

import numpy as np
import pytest

from confluent_wznw import (
    TruncatedElement,
    UnsupportedAlgebraError,
    build_algebra,
    parse_algebra,
    parse_element,
    truncated_basis,
    truncated_bracket,
)
from confluent_wznw.lie import bracket_combination


def test_sl2_data(sl2):
    assert sl2.positive_roots == ((1,),)
    assert sl2.cartan == ((2,),)
    assert sl2.pair((2,), (2,)) == 2  # (α, α) = 2 with α = 2ϖ
    assert sl2.rho == (Fraction(1, 2),)


def test_sl3_data(sl3):
    assert sl3.positive_roots == ((1, 0), (0, 1), (1, 1))
    assert sl3.cartan == ((2, -1), (-1, 2))
    assert sl3.rho == (1, 1)


def test_chevalley_relation(sl2, sl3):
    for g in (sl2, sl3):
        for i, j in enumerate(g.simple_root_indices):
            assert g.bracket(("e", j), ("f", j)) == {("h", i): 1}


def test_unsupported_series():
    with pytest.raises(UnsupportedAlgebraError):
        build_algebra("B", 2)
    with pytest.raises(UnsupportedAlgebraError):
        parse_algebra("E")


def _matrix(g, key):
    n = g.rank + 1
    m = np.zeros((n, n))
    kind, idx = key
    if kind == "h":
        m[idx, idx], m[idx + 1, idx + 1] = 1, -1
        return m
    root = g.positive_roots[idx]
    start = next(i for i, c in enumerate(root) if c)
    stop = start + sum(root)
    if kind == "e":
        m[start, stop] = 1
    else:
        m[stop, start] = 1
    return m


@pytest.mark.parametrize("rank", [1, 2, 3])
def test_structure_constants_match_matrix_units(rank):
    g = build_algebra("A", rank)
    for a, b in itertools.product(g.basis, repeat=2):
        lhs = _matrix(g, a) @ _matrix(g, b) - _matrix(g, b) @ _matrix(g, a)
        rhs = sum((float(c) * _matrix(g, k) for k, c in g.bracket(a, b).items()), np.zeros_like(lhs))
        assert np.allclose(lhs, rhs), (a, b)


@pytest.mark.parametrize("rank", [1, 2])
def test_form_symmetric_and_invariant(rank):
    g = build_algebra("A", rank)
    B = g.basis
    for x, y in itertools.product(B, repeat=2):
        assert g.form(x, y) == g.form(y, x)
    for x, y, z in itertools.product(B, repeat=3):
        lhs = sum(c * g.form(k, z) for k, c in g.bracket(x, y).items())
        lhs += sum(c * g.form(y, k) for k, c in g.bracket(x, z).items())
        assert lhs == 0


def test_form_matches_trace(sl3):
    for a, b in itertools.product(sl3.basis, repeat=2):
        assert float(sl3.form(a, b)) == pytest.approx(np.trace(_matrix(sl3, a) @ _matrix(sl3, b)))


@pytest.mark.parametrize("rank,r", [(1, 0), (1, 1), (1, 2), (1, 3), (2, 0), (2, 1), (2, 2), (2, 3)])
def test_jacobi_on_truncated_basis(rank, r):
    g = build_algebra("A", rank)
    basis = truncated_basis(g, r)
    for a, b, c in itertools.combinations(basis, 3):
        total: dict = {}
        for x, y, z in ((a, b, c), (b, c, a), (c, a, b)):
            inner = truncated_bracket(g, y, z)
            outer = bracket_combination(g, {x: 1}, inner)
            for k, v in outer.items():
                total[k] = total.get(k, 0) + v
        assert all(v == 0 for v in total.values()), (a, b, c)


def test_truncated_bracket_examples(sl2):
    e = lambda p: TruncatedElement(("e", 0), p, 2)  # noqa: E731
    f = lambda p: TruncatedElement(("f", 0), p, 2)  # noqa: E731
    h = lambda p: TruncatedElement(("h", 0), p, 2)  # noqa: E731
    assert truncated_bracket(sl2, e(1), f(1)) == {h(2): 1}
    assert truncated_bracket(sl2, e(1), f(2)) == {}
    assert truncated_bracket(sl2, h(0), e(1)) == {e(1): 2}


def test_truncated_bracket_rejects_mixed_orders(sl2):
    with pytest.raises(ValueError):
        truncated_bracket(sl2, TruncatedElement(("e", 0), 0, 1), TruncatedElement(("f", 0), 0, 2))
    with pytest.raises(ValueError):
        TruncatedElement(("e", 0), 3, 2)


def test_parse_element(sl2, sl3):
    assert parse_element(sl2, "f[1]", 2) == TruncatedElement(("f", 0), 1, 2)
    assert parse_element(sl3, "h2[0]", 1) == TruncatedElement(("h", 1), 0, 1)
    assert parse_element(sl3, "e11[1]", 1) == TruncatedElement(("e", 2), 1, 1)
    assert parse_element(sl3, "f2", 0) == TruncatedElement(("f", 1), 0, 0)
    with pytest.raises(ValueError):
        parse_element(sl3, "e", 0)
