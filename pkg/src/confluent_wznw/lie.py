"""Simple Lie algebra data and the truncated current algebra g ⊗ C[t]/t^{r+1}.

Only series A is supported.  Structure constants come from the matrix-unit
realization of sl_{l+1}: ``e_α = E_ij``, ``f_α = E_ji``, ``h_i = E_ii - E_{i+1,i+1}``.
All downstream sign conventions are inherited from this choice.

Basis keys are tuples ``('e', j)``, ``('h', i)``, ``('f', j)`` with ``j`` an
index into :attr:`LieAlgebraData.positive_roots` and ``i`` a 0-based simple
root index.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

import numpy as np


class UnsupportedAlgebraError(ValueError):
    pass


@dataclass(frozen=True)
class LieAlgebraData:
    series: str
    rank: int
    positive_roots: tuple  # simple-root coordinates, sorted by height then lex
    cartan: tuple  # a_ij = (ν_i, α_j)
    _brackets: dict = field(repr=False, compare=False)
    _forms: dict = field(repr=False, compare=False)

    @property
    def name(self) -> str:
        return f"{self.series}{self.rank}"

    @property
    def n_roots(self) -> int:
        return len(self.positive_roots)

    @cached_property
    def simple_root_indices(self) -> tuple:
        return tuple(self.positive_roots.index(self.simple_root(i)) for i in range(self.rank))

    def simple_root(self, i: int) -> tuple:
        return tuple(1 if k == i else 0 for k in range(self.rank))

    def root_index(self, root) -> int:
        return self.positive_roots.index(tuple(root))

    def height(self, root) -> int:
        return sum(root)

    @cached_property
    def basis(self) -> tuple:
        e = [("e", j) for j in range(self.n_roots)]
        h = [("h", i) for i in range(self.rank)]
        f = [("f", j) for j in range(self.n_roots)]
        return tuple(e + h + f)

    def bracket(self, a, b) -> dict:
        """``[a, b]`` for basis keys, as ``{basis key: Fraction}``."""
        return self._brackets[(a, b)]

    def form(self, a, b) -> Fraction:
        """Invariant form normalized so long roots have (α, α) = 2 (trace form for sl_n)."""
        return self._forms.get((a, b), Fraction(0))

    # ---- weights in Dynkin-label coordinates ----------------------------
    @cached_property
    def cartan_inverse(self) -> tuple:
        n = self.rank
        a = [[Fraction(x) for x in row] for row in self.cartan]
        inv = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
        for col in range(n):
            piv = next(r for r in range(col, n) if a[r][col] != 0)
            a[col], a[piv] = a[piv], a[col]
            inv[col], inv[piv] = inv[piv], inv[col]
            p = a[col][col]
            a[col] = [x / p for x in a[col]]
            inv[col] = [x / p for x in inv[col]]
            for r in range(n):
                if r != col and a[r][col] != 0:
                    f = a[r][col]
                    a[r] = [x - f * y for x, y in zip(a[r], a[col])]
                    inv[r] = [x - f * y for x, y in zip(inv[r], inv[col])]
        return tuple(tuple(row) for row in inv)

    def root_labels(self, root) -> tuple:
        """Dynkin labels ``(α, ν_i)`` of a root given in simple-root coordinates."""
        return tuple(sum(self.cartan[i][j] * root[j] for j in range(self.rank))
                     for i in range(self.rank))

    def pair(self, lam, mu):
        """``(λ, μ)`` for weights given by Dynkin labels (entries may be MultiPoly)."""
        inv = self.cartan_inverse
        total = 0
        for i in range(self.rank):
            for j in range(self.rank):
                if inv[i][j]:
                    total = total + lam[i] * mu[j] * inv[i][j]
        return total

    def weight_to_simple(self, lam) -> tuple:
        """Simple-root coordinates ``c`` with ``λ = Σ c_i α_i``."""
        inv = self.cartan_inverse
        return tuple(sum((lam[j] * inv[i][j] for j in range(self.rank) if inv[i][j]), 0)
                     for i in range(self.rank))

    @cached_property
    def rho(self) -> tuple:
        """Weyl vector in simple-root coordinates."""
        n = len(self.positive_roots)
        return tuple(Fraction(sum(r[i] for r in self.positive_roots), 2) for i in range(self.rank)) if n else ()

    @cached_property
    def rho_labels(self) -> tuple:
        return tuple(Fraction(1) for _ in range(self.rank))

    @property
    def dual_coxeter(self) -> int:
        return self.rank + 1

    def is_regular(self, lam) -> bool:
        """``(λ, α) ≠ 0`` for every positive root; λ numeric Dynkin labels."""
        for root in self.positive_roots:
            if sum(c * l for c, l in zip(root, lam)) == 0:
                return False
        return True

    def to_json(self) -> str:
        data = {
            "algebra": self.name,
            "rank": self.rank,
            "positive_roots": [list(r) for r in self.positive_roots],
            "cartan_matrix": [list(row) for row in self.cartan],
            "rho": [str(x) for x in self.rho],
            "brackets": {
                f"[{_key_name(self, a)},{_key_name(self, b)}]": {
                    _key_name(self, c): str(v) for c, v in sorted(br.items())
                }
                for (a, b), br in sorted(self._brackets.items()) if br
            },
        }
        return json.dumps(data, indent=2, sort_keys=True, ensure_ascii=False)


def _key_name(g: LieAlgebraData, key) -> str:
    kind, j = key
    if kind == "h":
        return f"h{j + 1}"
    root = g.positive_roots[j]
    return kind + "".join(str(c) for c in root) if g.rank > 1 else kind


def key_name(g: LieAlgebraData, key) -> str:
    return _key_name(g, key)


def build_algebra(series: str, rank: int) -> LieAlgebraData:
    """Chevalley data for a simple Lie algebra (series A only)."""
    series = series.upper()
    if series != "A" or not isinstance(rank, int) or rank < 1:
        raise UnsupportedAlgebraError(f"unsupported algebra {series}{rank}")
    n = rank + 1
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]

    def root_of(i, j):
        return tuple(1 if i <= k < j else 0 for k in range(rank))

    entries = sorted(((root_of(i, j), (i, j)) for i, j in pairs),
                     key=lambda rp: (sum(rp[0]), tuple(-c for c in rp[0])))
    roots = tuple(r for r, _ in entries)
    unit = {r: ij for r, ij in entries}

    def matrix(key):
        m = np.zeros((n, n), dtype=np.int64)
        kind, j = key
        if kind == "h":
            m[j, j], m[j + 1, j + 1] = 1, -1
        else:
            a, b = unit[roots[j]]
            if kind == "e":
                m[a, b] = 1
            else:
                m[b, a] = 1
        return m

    basis = [("e", j) for j in range(len(roots))] + [("h", i) for i in range(rank)] \
        + [("f", j) for j in range(len(roots))]
    mats = {key: matrix(key) for key in basis}
    root_pos = {unit[r]: idx for idx, r in enumerate(roots)}

    def decompose(m) -> dict:
        out = {}
        for (a, b), idx in root_pos.items():
            if m[a, b]:
                out[("e", idx)] = Fraction(int(m[a, b]))
            if m[b, a]:
                out[("f", idx)] = Fraction(int(m[b, a]))
        acc = 0
        for i in range(rank):
            acc += int(m[i, i])
            if acc:
                out[("h", i)] = Fraction(acc)
        check = sum((int(c) * mats[k] for k, c in out.items()), np.zeros((n, n), dtype=np.int64))
        assert np.array_equal(check, m), "matrix not in sl_n span"
        return out

    brackets = {}
    forms = {}
    for a in basis:
        for b in basis:
            ma, mb = mats[a], mats[b]
            brackets[(a, b)] = decompose(ma @ mb - mb @ ma)
            tr = int(np.trace(ma @ mb))
            if tr:
                forms[(a, b)] = Fraction(tr)
    cartan = tuple(tuple(2 if i == j else -1 if abs(i - j) == 1 else 0 for j in range(rank))
                   for i in range(rank))
    return LieAlgebraData("A", rank, roots, cartan, brackets, forms)


def parse_algebra(name: str) -> LieAlgebraData:
    """``'A1'`` / ``'A2'`` → algebra data."""
    name = name.strip()
    if len(name) < 2 or not name[1:].isdigit():
        raise UnsupportedAlgebraError(f"unsupported algebra {name!r}")
    return build_algebra(name[0], int(name[1:]))


# ---- truncated current algebra -------------------------------------------

@dataclass(frozen=True, order=True)
class TruncatedElement:
    """Basis element ``x[p] = x ⊗ t^p`` of g_(r)."""

    key: tuple
    mode: int
    r: int

    def __post_init__(self):
        if not 0 <= self.mode <= self.r:
            raise ValueError(f"mode {self.mode} outside 0..{self.r}")

    @property
    def kind(self) -> str:
        return self.key[0]


def truncated_bracket(g: LieAlgebraData, a: TruncatedElement, b: TruncatedElement) -> dict:
    """``[x[p], y[q]] = [x, y][p+q]``, zero once ``p + q > r``.

    Returns ``{TruncatedElement: Fraction}``.
    """
    if a.r != b.r:
        raise ValueError(f"truncation orders differ: {a.r} != {b.r}")
    s = a.mode + b.mode
    if s > a.r:
        return {}
    return {TruncatedElement(k, s, a.r): c for k, c in g.bracket(a.key, b.key).items()}


def truncated_basis(g: LieAlgebraData, r: int) -> list:
    return [TruncatedElement(k, p, r) for p in range(r + 1) for k in g.basis]


def bracket_combination(g: LieAlgebraData, x: dict, y: dict) -> dict:
    """Bilinear extension of :func:`truncated_bracket` to linear combinations."""
    out: dict = {}
    for a, ca in x.items():
        for b, cb in y.items():
            for c, v in truncated_bracket(g, a, b).items():
                out[c] = out.get(c, 0) + ca * cb * v
    return {k: v for k, v in out.items() if v}


def parse_element(g: LieAlgebraData, text: str, r: int) -> TruncatedElement:
    """Parse ``'f[1]'``, ``'e2[0]'``, ``'h1[2]'``, ``'e11[0]'`` (several digits give the root's simple-root coefficients)."""
    text = text.strip()
    if "[" in text:
        head, rest = text.split("[", 1)
        mode = int(rest.rstrip("]"))
    else:
        head, mode = text, 0
    kind, tail = head[0], head[1:]
    if kind not in "ehf":
        raise ValueError(f"unknown generator {text!r}")
    if kind == "h":
        i = int(tail) - 1 if tail else 0
        if not 0 <= i < g.rank:
            raise ValueError(f"no Cartan generator {text!r}")
        return TruncatedElement(("h", i), mode, r)
    if not tail:
        if g.rank != 1:
            raise ValueError(f"root label required in {text!r}")
        root = (1,)
    elif g.rank == 1:
        root = (int(tail),)
    elif len(tail) == 1:
        root = g.simple_root(int(tail) - 1)
    else:
        root = tuple(int(c) for c in tail)
    try:
        j = g.root_index(root)
    except ValueError:
        raise ValueError(f"no root {root} in {g.name}") from None
    return TruncatedElement((kind, j), mode, r)
