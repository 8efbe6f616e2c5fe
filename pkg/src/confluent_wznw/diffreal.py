"""Differential realization of g_(r) on C[x_q^α].

For ``J ∈ g_(r)`` the operator ``D_J`` is fixed by ``D_J ⟨λ|Z = ⟨λ|Z J`` with
``Z = exp(Σ x_q^α e_α[q])``.  It is computed as follows:

1. ``Ad_Z J = exp(ad x) J`` (finite: ``ad x`` is nilpotent).
2. The n_- part is killed by ``⟨λ|``; the Cartan part ``h[s]`` contributes
   ``λ_s(h)`` to the affine term.
3. Each ``⟨λ|e_β[s] Z`` is rewritten as a vector field: since
   ``dZ·Z^{-1} = M(dx)`` with ``M = (e^{ad x} - 1)/ad x`` on n_+[t], the
   left translation by ``e_β[s]`` is ``Σ [M^{-1} e_β[s]]_{α,q} ∂/∂x_q^α``.
   ``M`` is unipotent; its inverse is a terminating Neumann series.

The same vector fields ``S_β[s]`` are the screening operators.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import product
from math import factorial

from .lie import LieAlgebraData, TruncatedElement, bracket_combination, truncated_bracket
from .poly import MultiPoly, is_lamvar, is_xvar, lamvar, xvar
from .verma import WeightTuple, matrix_element, vacuum_coefficient


class DiffOp:
    """First-order operator ``Σ_v c_v ∂/∂v + affine`` with polynomial coefficients."""

    __slots__ = ("vec", "affine")

    def __init__(self, vec=None, affine=None):
        self.vec = {v: c for v, c in (vec or {}).items() if not c.is_zero()}
        self.affine = MultiPoly.coerce(affine if affine is not None else 0)

    def apply(self, p: MultiPoly) -> MultiPoly:
        p = MultiPoly.coerce(p)
        out = self.affine * p
        for v, c in self.vec.items():
            d = p.diff(v)
            if not d.is_zero():
                out = out + c * d
        return out

    def vector_apply(self, p: MultiPoly) -> MultiPoly:
        out = MultiPoly()
        for v, c in self.vec.items():
            d = p.diff(v)
            if not d.is_zero():
                out = out + c * d
        return out

    def commutator(self, other: "DiffOp") -> "DiffOp":
        """``[A, B] = A∘B - B∘A``; first order again."""
        keys = set(self.vec) | set(other.vec)
        vec = {}
        for v in keys:
            vec[v] = self.vector_apply(other.vec.get(v, MultiPoly())) \
                - other.vector_apply(self.vec.get(v, MultiPoly()))
        affine = self.vector_apply(other.affine) - other.vector_apply(self.affine)
        return DiffOp(vec, affine)

    def compose(self, other: "DiffOp"):
        """``A∘B`` as a callable on polynomials (second order in general)."""
        return lambda p: self.apply(other.apply(p))

    def __add__(self, other: "DiffOp") -> "DiffOp":
        vec = dict(self.vec)
        for v, c in other.vec.items():
            vec[v] = vec.get(v, MultiPoly()) + c
        return DiffOp(vec, self.affine + other.affine)

    def __neg__(self):
        return DiffOp({v: -c for v, c in self.vec.items()}, -self.affine)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "DiffOp":
        c = MultiPoly.coerce(c)
        return DiffOp({v: c * x for v, x in self.vec.items()}, c * self.affine)

    def is_zero(self) -> bool:
        return not self.vec and self.affine.is_zero()

    def is_vector_field(self) -> bool:
        return self.affine.is_zero()

    def __eq__(self, other):
        if not isinstance(other, DiffOp):
            return NotImplemented
        return self.vec == other.vec and self.affine == other.affine

    def __hash__(self):
        return hash((frozenset(self.vec.items()), self.affine))

    def coefficient(self, v) -> MultiPoly:
        return self.vec.get(v, MultiPoly())

    def variables(self) -> set:
        out = set(self.vec)
        for c in self.vec.values():
            out |= c.variables()
        return out | self.affine.variables()

    def __str__(self):
        parts = []
        for v in sorted(self.vec):
            name = v[-1]
            parts.append(f"({self.vec[v]})·d/d{name}")
        if not self.affine.is_zero() or not parts:
            parts.append(str(self.affine))
        return " + ".join(parts)

    __repr__ = __str__


# ---- g_(r) elements with polynomial coefficients --------------------------

def _x_element(g: LieAlgebraData, r: int) -> dict:
    return {TruncatedElement(("e", j), q, r): MultiPoly.var(xvar(root, q))
            for j, root in enumerate(g.positive_roots) for q in range(r + 1)}


def _ad(g: LieAlgebraData, x: dict, y: dict) -> dict:
    out: dict = {}
    for a, ca in x.items():
        for b, cb in y.items():
            for c, v in truncated_bracket(g, a, b).items():
                val = ca * cb * v
                cur = out.get(c)
                out[c] = val if cur is None else cur + val
    return {k: v for k, v in out.items() if not v.is_zero()}


def _add_into(out: dict, y: dict, scale=1) -> None:
    for k, v in y.items():
        cur = out.get(k)
        val = v * scale
        out[k] = val if cur is None else cur + val


def _clean(d: dict) -> dict:
    return {k: v for k, v in d.items() if not v.is_zero()}


def adjoint_action(g: LieAlgebraData, r: int, y: dict) -> dict:
    """``Ad_Z y = Σ_n (ad x)^n y / n!`` with ``x = Σ x_q^α e_α[q]``."""
    x = _x_element(g, r)
    out = dict(y)
    term = y
    n = 0
    bound = (max(g.height(rt) for rt in g.positive_roots) + 1) * 2 + 2
    while True:
        n += 1
        term = _ad(g, x, term)
        if not term:
            break
        if n > bound:
            raise AssertionError("ad x failed to be nilpotent")
        _add_into(out, term, Fraction(1, factorial(n)))
    return _clean(out)


def _inverse_trivialization(g: LieAlgebraData, r: int, y: dict) -> dict:
    """``M^{-1} y`` for ``M = Σ_{n≥0} (ad x)^n/(n+1)!`` on n_+[t]/t^{r+1}."""
    x = _x_element(g, r)

    def nilpart(z: dict) -> dict:
        out: dict = {}
        term = z
        n = 0
        while True:
            n += 1
            term = _ad(g, x, term)
            if not term:
                break
            _add_into(out, term, Fraction(1, factorial(n + 1)))
        return _clean(out)

    bound = max(g.height(rt) for rt in g.positive_roots) * (r + 1) + 1
    out = dict(y)
    term = y
    k = 0
    while True:
        k += 1
        term = {key: -v for key, v in nilpart(term).items()}
        if not term:
            break
        if k > bound:
            raise AssertionError("trivialization matrix is not unipotent")
        _add_into(out, term)
    return _clean(out)


def _bernoulli_inverse(g: LieAlgebraData, r: int, y: dict) -> dict:
    """Same map as :func:`_inverse_trivialization`, via ``ad x/(e^{ad x}-1) = Σ B_n (ad x)^n/n!``."""
    x = _x_element(g, r)
    bern = [Fraction(1)]
    out = dict(y)
    term = y
    n = 0
    while True:
        n += 1
        term = _ad(g, x, term)
        if not term:
            break
        while len(bern) <= n:
            m = len(bern)
            bern.append(-sum(Fraction(factorial(m + 1), factorial(k) * factorial(m + 1 - k)) * bern[k]
                             for k in range(m)) / (m + 1))
        _add_into(out, term, bern[n] / factorial(n))
    return _clean(out)


def _to_vector_field(g: LieAlgebraData, elem: dict) -> dict:
    vec = {}
    for t, c in elem.items():
        kind, j = t.key
        if kind != "e":
            raise AssertionError("left translation left n_+")
        vec[xvar(g.positive_roots[j], t.mode)] = c
    return vec


_screen_cache: dict = {}
_real_cache: dict = {}


def screening_op(g: LieAlgebraData, root, p: int, r: int) -> DiffOp:
    """``S_α[p]`` with ``S_α[p]⟨λ|Z = ⟨λ|e_α[p]Z``; zero affine part."""
    j = root if isinstance(root, int) else g.root_index(tuple(root))
    if not 0 <= p <= r:
        raise ValueError(f"mode {p} outside 0..{r}")
    key = (g.name, j, p, r)
    op = _screen_cache.get(key)
    if op is None:
        elem = _inverse_trivialization(g, r, {TruncatedElement(("e", j), p, r): MultiPoly.const(1)})
        op = _screen_cache[key] = DiffOp(_to_vector_field(g, elem))
    return op


def realize(g: LieAlgebraData, J, lam: WeightTuple) -> DiffOp:
    """Differential operator for ``J`` (a TruncatedElement or ``{element: coeff}``)."""
    if isinstance(J, dict):
        out = DiffOp()
        for t, c in J.items():
            out = out + realize(g, t, lam).scale(c)
        return out
    if J.r != lam.r:
        raise ValueError(f"element of g_({J.r}) but weights of length {lam.r + 1}")
    key = (g.name, J, lam)
    hit = _real_cache.get(key)
    if hit is not None:
        return hit
    r = J.r
    ad = adjoint_action(g, r, {J: MultiPoly.const(1)})
    vec: dict = {}
    affine = MultiPoly()
    for t, c in ad.items():
        kind, j = t.key
        if kind == "h":
            affine = affine + c * lam.components[t.mode][j]
        elif kind == "e":
            s = screening_op(g, j, t.mode, r)
            for v, sc in s.vec.items():
                cur = vec.get(v)
                vec[v] = c * sc if cur is None else cur + c * sc
    op = DiffOp(vec, affine)
    if len(_real_cache) > 20000:
        _real_cache.clear()
    _real_cache[key] = op
    return op


# ---- jets ---------------------------------------------------------------

def jet_rule(g: LieAlgebraData, poly: MultiPoly, grade: int, r: int) -> MultiPoly:
    """Replace each monomial of mode-0 data by its grade-``grade`` jet expansion.

    An ``x^β`` factor becomes ``Σ_j x_j^β t^j`` and a ``λ^i`` factor becomes
    ``Σ_s λ_s^i t^{-s}`` (``0 ≤ j, s ≤ r``); the coefficient of ``t^grade``
    of the product is returned.  For pure x-monomials this is the
    convolution ``Σ_{j_1+⋯+j_m = grade} x_{j_1}^{β_1}⋯x_{j_m}^{β_m}``.
    """
    def lift(m) -> MultiPoly:
        series = {0: MultiPoly.const(1)}
        for v, e in m:
            if e < 0 and (is_xvar(v) or is_lamvar(v)):
                raise ValueError("negative powers cannot be jet-lifted")
            if is_xvar(v):
                if v[2] != 0:
                    raise ValueError(f"{v[-1]} is not a mode-0 variable")
                factor = {j: MultiPoly.var(xvar(v[1], j)) for j in range(r + 1)}
            elif is_lamvar(v):
                if v[2] != 0:
                    raise ValueError(f"{v[-1]} is not a mode-0 weight")
                factor = {-s: MultiPoly.var(lamvar(v[1], s, v[3], g.rank)) for s in range(r + 1)}
            else:
                factor = {0: MultiPoly.var(v, e)}
                e = 1
            for _ in range(e):
                new: dict = {}
                for d1, c1 in series.items():
                    for d2, c2 in factor.items():
                        cur = new.get(d1 + d2)
                        new[d1 + d2] = c1 * c2 if cur is None else cur + c1 * c2
                series = new
        return series.get(grade, MultiPoly())

    return poly.map_monomials(lift)


def jet_lift(g: LieAlgebraData, op: DiffOp, p: int, r: int) -> DiffOp:
    """Lift a mode-0 operator to the mode-``p`` operator on jet variables ``x_q``, q ≤ r."""
    if not 0 <= p <= r:
        raise ValueError(f"mode {p} outside 0..{r}")
    vec = {}
    for v, c in op.vec.items():
        if not is_xvar(v) or v[2] != 0:
            raise ValueError(f"{v[-1]} is not a mode-0 coordinate")
        for q in range(p, r + 1):
            lifted = jet_rule(g, c, q - p, r)
            if not lifted.is_zero():
                vec[xvar(v[1], q)] = lifted
    return DiffOp(vec, jet_rule(g, op.affine, -p, r))


# ---- polynomials P_λ^I ----------------------------------------------------

def _pairs_to_letters(g: LieAlgebraData, I, r: int, kind: str = "f") -> list:
    out = []
    for root, mode in I:
        j = root if isinstance(root, int) else g.root_index(tuple(root))
        out.append(TruncatedElement((kind, j), mode, r))
    return out


def compute_P(g: LieAlgebraData, I, lam: WeightTuple, route: str = "operator") -> MultiPoly:
    """``P_λ^I = ⟨λ|Z f_{α_1}[k_1]⋯f_{α_n}[k_n]|λ⟩``.

    ``I`` is a sequence of ``(root, mode)`` pairs (root index or coordinates).
    ``route='operator'`` iterates ``F[k]`` on ``1``; ``route='verma'`` expands
    ``Z`` and pairs against the Verma module.
    """
    r = lam.r
    letters = _pairs_to_letters(g, I, r)
    for t in letters:
        if t.mode > r:
            raise ValueError(f"mode {t.mode} exceeds r = {r}")
    if route == "operator":
        p = MultiPoly.const(1)
        for t in reversed(letters):
            p = realize(g, t, lam).apply(p)
        return p
    if route == "verma":
        return _pairing_route(g, letters, lam)
    raise ValueError(f"unknown route {route!r}")


def _pairing_route(g: LieAlgebraData, letters: list, lam: WeightTuple, shift: int | None = None) -> MultiPoly:
    """``Σ_n 1/n! Σ ⟨λ| x^n f-word |λ⟩`` restricted by root content.

    With ``shift = k`` the derivation ``d_k(e_α[q]) = q·e_α[q+k]`` is applied to
    the expansion of ``Z`` first (one letter at a time, Leibniz rule).
    """
    r = lam.r
    content = [0] * g.rank
    for t in letters:
        for i, c in enumerate(g.positive_roots[t.key[1]]):
            content[i] += c
    gens = [(j, q) for j in range(g.n_roots) for q in range(r + 1)]
    total = MultiPoly()

    def words(prefix):
        if shift is None:
            yield 1, [TruncatedElement(("e", j), q, r) for j, q in prefix]
            return
        for pos, (j, q) in enumerate(prefix):
            if q == 0 or q + shift > r:
                continue
            word = [TruncatedElement(("e", jj), qq, r) for jj, qq in prefix]
            word[pos] = TruncatedElement(("e", j), q + shift, r)
            yield q, word

    def rec(prefix: list, remaining: tuple):
        nonlocal total
        if not any(remaining):
            val = MultiPoly()
            for c, word in words(prefix):
                val = val + vacuum_coefficient(g, word + letters, lam) * c
            if not val.is_zero():
                mono = MultiPoly.const(Fraction(1, factorial(len(prefix))))
                for j, q in prefix:
                    mono = mono * MultiPoly.var(xvar(g.positive_roots[j], q))
                total = total + mono * val
            return
        for j, q in gens:
            root = g.positive_roots[j]
            rest = tuple(a - b for a, b in zip(remaining, root))
            if all(x >= 0 for x in rest):
                rec(prefix + [(j, q)], rest)

    rec([], tuple(content))
    return total


def compute_dP(g: LieAlgebraData, I, lam: WeightTuple, k: int) -> MultiPoly:
    """``⟨λ| d_k(Z) f-word |λ⟩`` for the mode-shifting derivation ``d_k``."""
    return _pairing_route(g, _pairs_to_letters(g, I, lam.r), lam, shift=k)


def constant_term(p: MultiPoly) -> MultiPoly:
    """``[p]``: value at all ``x = 0``."""
    return p.zero_vars(is_xvar)


def screening_constant_term(g: LieAlgebraData, e_modes, I, lam: WeightTuple, e_roots=None) -> MultiPoly:
    """``[S[p_1]⋯S[p_k] P_λ^I]`` with ``e_modes = (p_1, …, p_k)``; S[p_1] is applied last."""
    r = lam.r
    p = compute_P(g, I, lam)
    roots = e_roots or [g.simple_root_indices[0]] * len(e_modes)
    for root, mode in reversed(list(zip(roots, e_modes))):
        p = screening_op(g, root, mode, r).apply(p)
    return constant_term(p)


# ---- representation check ------------------------------------------------

def rep_check(g: LieAlgebraData, J1: TruncatedElement, J2: TruncatedElement, lam: WeightTuple):
    """Return ``(ok, realize([J1,J2]) - [realize J1, realize J2])``."""
    if J1.r != J2.r:
        raise ValueError("elements of different truncations")
    br = truncated_bracket(g, J1, J2)
    lhs = realize(g, br, lam) if br else DiffOp()
    rhs = realize(g, J1, lam).commutator(realize(g, J2, lam))
    disc = lhs - rhs
    return disc.is_zero(), disc


def screening_bracket_check(g: LieAlgebraData, a: TruncatedElement, b: TruncatedElement) -> DiffOp:
    """``[S_a, S_b] + S_{[a,b]}`` (screenings realize n_+ anti-homomorphically)."""
    r = a.r
    sa = screening_op(g, a.key[1], a.mode, r)
    sb = screening_op(g, b.key[1], b.mode, r)
    out = sa.commutator(sb)
    for t, c in truncated_bracket(g, a, b).items():
        out = out + screening_op(g, t.key[1], t.mode, r).scale(c)
    return out
