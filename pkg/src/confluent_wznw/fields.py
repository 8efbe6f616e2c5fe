"""Free fields, normal-ordered products and the Wick OPE engine.

Generators are divided jets ``X^{(m)} = ∂^m X / m!`` of

* ``('b', j, m)``: β_α with α the j-th positive root,
* ``('g', j, m)``: γ^α,
* ``('p', i, m)``: φ_i = (ν_i, φ), only for ``m ≥ 1``.

A :class:`Field` is a sum of normal-ordered monomials in these generators
times a common vertex factor ``:exp(Σ_{p,i} c_{p,i} φ_i^{(p)}):``.  The
vertex is stored in φ-coordinates: ``vertex[p][i] = c_{p,i}``.

Contractions (``z`` first, ``w`` second, ``u = z - w``)::

    β(z)γ(w) =  1/u        γ(z)β(w) = -1/u
    φ_i^{(m)}(z) φ_j^{(n)}(w) = (ν_i,ν_j)/κ · (-1)^{m+1} C(m+n,m)/(m+n) · u^{-(m+n)}
"""

from __future__ import annotations

from fractions import Fraction
from math import comb, factorial

from .lie import LieAlgebraData
from .poly import KAPPA, MultiPoly, format_poly, xvar, is_xvar

KAPPA_INV = MultiPoly.var(KAPPA, -1)


def _root_tag(g: LieAlgebraData, j: int) -> str:
    if g.rank == 1:
        return ""
    return "[" + "".join(str(c) for c in g.positive_roots[j]) + "]"


def generator_name(g: LieAlgebraData, gen) -> str:
    kind, idx, m = gen
    if kind == "b":
        return f"β{m}{_root_tag(g, idx)}"
    if kind == "g":
        return f"γ{m}{_root_tag(g, idx)}"
    return f"φ{m}" if g.rank == 1 else f"φ{m}^{idx + 1}"


def _zero_vertex_strip(vertex) -> tuple:
    vertex = tuple(tuple(MultiPoly.coerce(c) for c in row) for row in vertex)
    while vertex and all(c.is_zero() for c in vertex[-1]):
        vertex = vertex[:-1]
    return vertex


def _vertex_add(a: tuple, b: tuple, rank: int) -> tuple:
    n = max(len(a), len(b))
    zero = tuple(MultiPoly() for _ in range(rank))
    a = a + (zero,) * (n - len(a))
    b = b + (zero,) * (n - len(b))
    return _zero_vertex_strip(tuple(tuple(x + y for x, y in zip(ra, rb)) for ra, rb in zip(a, b)))


class Field:
    """Normal-ordered field at a single (implicit) point."""

    __slots__ = ("g", "terms", "vertex")

    def __init__(self, g: LieAlgebraData, terms=None, vertex=()):
        self.g = g
        self.terms = {m: c for m, c in (terms or {}).items() if not c.is_zero()}
        self.vertex = _zero_vertex_strip(vertex)

    # ---- constructors -------------------------------------------------
    @classmethod
    def one(cls, g, coeff=1) -> "Field":
        return cls(g, {(): MultiPoly.coerce(coeff)})

    @classmethod
    def generator(cls, g, kind: str, idx: int, m: int = 0, coeff=1) -> "Field":
        if kind == "p" and m < 1:
            raise ValueError("φ itself only appears inside the vertex exponent")
        return cls(g, {((kind, idx, m),): MultiPoly.coerce(coeff)})

    @classmethod
    def vertex_operator(cls, g, vertex) -> "Field":
        return cls(g, {(): MultiPoly.const(1)}, vertex)

    @classmethod
    def from_polynomial(cls, g, poly: MultiPoly, vertex=()) -> "Field":
        """``P(γ)`` with ``x_q^α ↦ ∂^qγ^α/q!``; non-x variables stay in the coefficients."""
        terms: dict = {}
        for xm, coeff in poly.collect(is_xvar).items():
            gens = []
            for v, e in xm:
                if e < 0:
                    raise ValueError("negative powers of γ are not fields")
                gens.extend([("g", g.root_index(v[1]), v[2])] * e)
            key = tuple(sorted(gens))
            terms[key] = terms.get(key, MultiPoly()) + coeff
        return cls(g, terms, vertex)

    # ---- algebra ------------------------------------------------------
    def _check(self, other: "Field"):
        if self.vertex != other.vertex and self.terms and other.terms:
            raise ValueError("cannot add fields with different vertex factors")

    def __add__(self, other: "Field") -> "Field":
        self._check(other)
        terms = dict(self.terms)
        for m, c in other.terms.items():
            terms[m] = terms.get(m, MultiPoly()) + c
        vertex = self.vertex if self.terms else other.vertex
        return Field(self.g, terms, vertex)

    def __neg__(self):
        return Field(self.g, {m: -c for m, c in self.terms.items()}, self.vertex)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "Field":
        c = MultiPoly.coerce(c)
        return Field(self.g, {m: c * x for m, x in self.terms.items()}, self.vertex)

    def nprod(self, other: "Field") -> "Field":
        """Naive normal-ordered product ``:A B:`` at the same point (no contractions)."""
        terms: dict = {}
        for ma, ca in self.terms.items():
            for mb, cb in other.terms.items():
                key = tuple(sorted(ma + mb))
                terms[key] = terms.get(key, MultiPoly()) + ca * cb
        return Field(self.g, terms, _vertex_add(self.vertex, other.vertex, self.g.rank))

    def derivative(self) -> "Field":
        """``∂`` of the field: jets shift, the vertex brings down ``∂X``."""
        terms: dict = {}
        for m, c in self.terms.items():
            for idx, (kind, j, order) in enumerate(m):
                new = tuple(sorted(m[:idx] + ((kind, j, order + 1),) + m[idx + 1:]))
                terms[new] = terms.get(new, MultiPoly()) + c * (order + 1)
            for p, row in enumerate(self.vertex):
                for i, ci in enumerate(row):
                    if not ci.is_zero():
                        new = tuple(sorted(m + (("p", i, p + 1),)))
                        terms[new] = terms.get(new, MultiPoly()) + c * ci * (p + 1)
        return Field(self.g, terms, self.vertex)

    def map_coefficients(self, fn) -> "Field":
        return Field(self.g, {m: fn(c) for m, c in self.terms.items()},
                     tuple(tuple(fn(c) for c in row) for row in self.vertex))

    def subs(self, mapping: dict) -> "Field":
        return self.map_coefficients(lambda c: c.subs(mapping))

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other):
        if not isinstance(other, Field):
            return NotImplemented
        if self.is_zero() and other.is_zero():
            return True
        return self.terms == other.terms and self.vertex == other.vertex

    def __hash__(self):
        return hash((frozenset(self.terms.items()), self.vertex))

    def to_polynomial(self) -> MultiPoly:
        """Inverse of :meth:`from_polynomial` for pure γ-monomials (vertex ignored)."""
        out = MultiPoly()
        for m, c in self.terms.items():
            mono = MultiPoly.const(1)
            for kind, j, order in m:
                if kind != "g":
                    raise ValueError("field contains non-γ generators")
                mono = mono * MultiPoly.var(xvar(self.g.positive_roots[j], order))
            out = out + c * mono
        return out

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for m in sorted(self.terms):
            c = self.terms[m]
            names = "·".join(generator_name(self.g, gen) for gen in m)
            coeff = format_poly(c)
            if not names:
                parts.append(f"({coeff})")
            else:
                parts.append(f"({coeff})·{names}")
        text = " + ".join(parts)
        if self.vertex:
            exps = []
            for p, row in enumerate(self.vertex):
                for i, ci in enumerate(row):
                    if not ci.is_zero():
                        name = f"φ{p}" if self.g.rank == 1 else f"φ{p}^{i + 1}"
                        exps.append(f"({format_poly(ci)})·{name}")
            text = f"[{text}]·:exp({' + '.join(exps)}):"
        return text

    __repr__ = __str__


# ---- contractions ---------------------------------------------------------

def _phi_kernel(m: int, n: int) -> Fraction:
    return Fraction((-1) ** (m + 1) * comb(m + n, m), m + n)


def contract(g: LieAlgebraData, a, b) -> dict:
    """Contraction of generator ``a`` at z with ``b`` at w as ``{pole order: coeff}``."""
    ka, ia, ma = a
    kb, ib, mb = b
    if ka == "b" and kb == "g" and ia == ib:
        return {1 + ma + mb: MultiPoly.const((-1) ** ma * comb(ma + mb, ma))}
    if ka == "g" and kb == "b" and ia == ib:
        return {1 + ma + mb: MultiPoly.const(-((-1) ** ma) * comb(ma + mb, ma))}
    if ka == "p" and kb == "p":
        gram = g.cartan[ia][ib]
        if gram == 0:
            return {}
        return {ma + mb: KAPPA_INV * (gram * _phi_kernel(ma, mb))}
    return {}


def contract_with_vertex(g: LieAlgebraData, item, vertex, item_first: bool) -> dict:
    """Contraction of a φ-jet with a vertex exponent (item at z iff ``item_first``)."""
    kind, i, m = item
    out: dict = {}
    if kind != "p":
        return out
    for p, row in enumerate(vertex):
        for j, cj in enumerate(row):
            if cj.is_zero() or g.cartan[i][j] == 0:
                continue
            k = _phi_kernel(m, p) if item_first else _phi_kernel(p, m)
            e = m + p
            val = KAPPA_INV * cj * (g.cartan[i][j] * k)
            out[e] = out.get(e, MultiPoly()) + val
    return {e: c for e, c in out.items() if not c.is_zero()}


def vertex_pairing(g: LieAlgebraData, va, vb):
    """Return ``(offset, irregular)``: the ``log u`` coefficient and whether inverse powers occur."""
    offset = MultiPoly()
    irregular = False
    for p, ra in enumerate(va):
        for q, rb in enumerate(vb):
            s = MultiPoly()
            for i, ci in enumerate(ra):
                for j, cj in enumerate(rb):
                    if g.cartan[i][j] and not ci.is_zero() and not cj.is_zero():
                        s = s + ci * cj * g.cartan[i][j]
            if s.is_zero():
                continue
            if p == q == 0:
                offset = KAPPA_INV * s
            else:
                irregular = True
    return offset, irregular


def _series_mul(a: dict, b: dict) -> dict:
    out: dict = {}
    for ea, ca in a.items():
        for eb, cb in b.items():
            e = ea + eb
            v = ca * cb
            out[e] = out.get(e, MultiPoly()) + v
    return {e: c for e, c in out.items() if not c.is_zero()}


# ---- OPE ---------------------------------------------------------------------

class OPEResult:
    """``A(z)B(w) = u^{offset} Σ_n u^n · terms[n](w)``, kept for ``n ≤ order``."""

    def __init__(self, g, terms: dict, order: int, offset=None):
        self.g = g
        self.terms = {n: f for n, f in terms.items() if not f.is_zero()}
        self.order = order
        self.offset = MultiPoly.coerce(offset if offset is not None else 0)

    def coefficient(self, n: int) -> Field:
        if n > self.order:
            raise ValueError(f"order {n} beyond the computed truncation {self.order}")
        return self.terms.get(n, Field(self.g))

    def singular(self) -> dict:
        return {n: f for n, f in self.terms.items() if n < 0}

    def singular_part(self) -> "OPEResult":
        return OPEResult(self.g, self.singular(), -1, self.offset)

    def is_regular(self) -> bool:
        return not self.singular()

    def __sub__(self, other: "OPEResult") -> "OPEResult":
        order = min(self.order, other.order)
        keys = set(self.terms) | set(other.terms)
        terms = {}
        for n in keys:
            if n <= order:
                terms[n] = self.terms.get(n, Field(self.g)) - other.terms.get(n, Field(self.g))
        return OPEResult(self.g, terms, order, self.offset)

    def __add__(self, other: "OPEResult") -> "OPEResult":
        return self - OPEResult(self.g, {n: -f for n, f in other.terms.items()}, other.order, other.offset)

    def subs(self, mapping: dict) -> "OPEResult":
        return OPEResult(self.g, {n: f.subs(mapping) for n, f in self.terms.items()},
                         self.order, self.offset.subs(mapping))

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other):
        if not isinstance(other, OPEResult):
            return NotImplemented
        return (self - other).is_zero() and self.offset == other.offset

    def lines(self) -> list:
        out = []
        for n in sorted(self.terms):
            exp = f"{n}" if self.offset.is_zero() else f"{n} + ({format_poly(self.offset)})"
            out.append(f"(z-w)^{exp} : {self.terms[n]}")
        return out

    def __str__(self):
        return "\n".join(self.lines()) if self.terms else "0"


def _taylor_item(item, degree: int) -> dict:
    """``X^{(m)}(z) = Σ_k C(m+k, m) u^k X^{(m+k)}(w)``."""
    kind, j, m = item
    return {k: {((kind, j, m + k),): MultiPoly.const(comb(m + k, m))} for k in range(degree + 1)}


def _taylor_vertex(vertex, degree: int) -> dict:
    """``exp(X(z) - X(w))`` as ``{k: {monomial: coeff}}`` up to ``u^degree``."""
    delta: dict = {}
    for k in range(1, degree + 1):
        for p, row in enumerate(vertex):
            for i, c in enumerate(row):
                if not c.is_zero():
                    key = (("p", i, p + k),)
                    bucket = delta.setdefault(k, {})
                    bucket[key] = bucket.get(key, MultiPoly()) + c * comb(p + k, p)
    result = {0: {(): MultiPoly.const(1)}}
    power = {0: {(): MultiPoly.const(1)}}
    for n in range(1, degree + 1):
        power = _poly_series_mul(power, delta, degree)
        if not power:
            break
        for k, bucket in power.items():
            target = result.setdefault(k, {})
            for m, c in bucket.items():
                target[m] = target.get(m, MultiPoly()) + c * Fraction(1, factorial(n))
    return result


def _poly_series_mul(a: dict, b: dict, degree: int) -> dict:
    out: dict = {}
    for ka, ba in a.items():
        for kb, bb in b.items():
            k = ka + kb
            if k > degree:
                continue
            target = out.setdefault(k, {})
            for ma, ca in ba.items():
                for mb, cb in bb.items():
                    key = tuple(sorted(ma + mb))
                    target[key] = target.get(key, MultiPoly()) + ca * cb
    return out


def ope(A: Field, B: Field, order: int = 0) -> OPEResult:
    """Wick expansion of ``A(z)B(w)`` around ``w``, keeping ``(z-w)^n`` for ``n ≤ order``."""
    g = A.g
    offset, irregular = vertex_pairing(g, A.vertex, B.vertex)
    if irregular:
        raise ValueError("vertex–vertex pairing with higher modes has infinitely many singular terms")
    vertex = _vertex_add(A.vertex, B.vertex, g.rank)
    acc: dict = {}
    taylor_cache: dict = {}

    def z_side(rest_a: tuple, degree: int) -> dict:
        key = (rest_a, degree)
        hit = taylor_cache.get(key)
        if hit is None:
            series = _taylor_vertex(A.vertex, degree) if A.vertex else {0: {(): MultiPoly.const(1)}}
            for item in rest_a:
                series = _poly_series_mul(series, _taylor_item(item, degree), degree)
            hit = taylor_cache[key] = series
        return hit

    for ma, ca in A.terms.items():
        for mb, cb in B.terms.items():
            for sing, rest_a, rest_b in _patterns(g, ma, mb, A.vertex, B.vertex):
                if not sing:
                    continue
                scale = ca * cb
                top = max(sing)
                degree = order + top
                if degree < 0:
                    continue
                zs = z_side(tuple(rest_a), degree)
                for e, s in sing.items():
                    for k, bucket in zs.items():
                        n = k - e
                        if n > order:
                            continue
                        target = acc.setdefault(n, {})
                        for m, c in bucket.items():
                            key = tuple(sorted(m + rest_b))
                            target[key] = target.get(key, MultiPoly()) + c * s * scale
    terms = {n: Field(g, bucket, vertex) for n, bucket in acc.items()}
    return OPEResult(g, terms, order, offset)


def _patterns(g, ma: tuple, mb: tuple, va, vb):
    """Yield ``(singular series, remaining A items, remaining B items)`` per Wick pattern."""
    nb = len(mb)

    def rec_a(i: int, used: frozenset, series: dict, rest_a: list):
        if i == len(ma):
            yield from rec_b(0, used, series, rest_a, [])
            return
        item = ma[i]
        yield from rec_a(i + 1, used, series, rest_a + [item])
        for j in range(nb):
            if j in used:
                continue
            c = contract(g, item, mb[j])
            if c:
                yield from rec_a(i + 1, used | {j}, _series_mul(series, c), rest_a)
        if vb:
            c = contract_with_vertex(g, item, vb, item_first=True)
            if c:
                yield from rec_a(i + 1, used, _series_mul(series, c), rest_a)

    def rec_b(j: int, used: frozenset, series: dict, rest_a: list, rest_b: list):
        if j == nb:
            yield series, rest_a, tuple(rest_b)
            return
        if j in used:
            yield from rec_b(j + 1, used, series, rest_a, rest_b)
            return
        item = mb[j]
        yield from rec_b(j + 1, used, series, rest_a, rest_b + [item])
        if va:
            c = contract_with_vertex(g, item, va, item_first=False)
            if c:
                yield from rec_b(j + 1, used, _series_mul(series, c), rest_a, rest_b)

    yield from rec_a(0, frozenset(), {0: MultiPoly.const(1)}, [])


def normal_ordered_product(A: Field, B: Field) -> Field:
    """Point-split normal ordering ``:AB:(w)`` = the ``(z-w)^0`` coefficient of ``A(z)B(w)``."""
    return ope(A, B, order=0).coefficient(0)
