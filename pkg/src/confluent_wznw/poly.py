"""Sparse multivariate Laurent polynomials with exact rational coefficients.

Every exact quantity in the package (scalars in the formal parameters, the
coefficient polynomials of differential operators, numerators of correlators)
is a :class:`MultiPoly`.  Variables are plain tuples whose last entry is the
display name, e.g. ``('x', (1,), 0, 'x0')`` or ``('kappa', 'κ')``.  Tuples
order lexicographically, which gives a canonical monomial order for free.

Negative exponents are allowed, so division by a monomial (``1/κ``) stays
inside the ring and equality remains decidable.
"""

from __future__ import annotations

from fractions import Fraction
from math import comb
from numbers import Rational

Var = tuple
Monomial = tuple  # sorted tuple of (Var, nonzero int exponent)

ONE_MONO: Monomial = ()


def _mono_mul(a: Monomial, b: Monomial) -> Monomial:
    if not a:
        return b
    if not b:
        return a
    out = []
    i = j = 0
    la, lb = len(a), len(b)
    while i < la and j < lb:
        va, ea = a[i]
        vb, eb = b[j]
        if va == vb:
            e = ea + eb
            if e:
                out.append((va, e))
            i += 1
            j += 1
        elif va < vb:
            out.append(a[i])
            i += 1
        else:
            out.append(b[j])
            j += 1
    out.extend(a[i:])
    out.extend(b[j:])
    return tuple(out)


def _coerce_coeff(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, (int, Rational)):
        return Fraction(c)
    raise TypeError(f"cannot use {type(c).__name__} as an exact coefficient")


class MultiPoly:
    """Immutable sparse polynomial ``{monomial: Fraction}``; zero terms never stored."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms=None):
        if terms is None:
            self._terms = {}
        elif isinstance(terms, dict):
            self._terms = {m: c for m, c in terms.items() if c}
        else:
            raise TypeError("MultiPoly expects a dict of monomials")
        self._hash = None

    # ---- constructors -------------------------------------------------
    @classmethod
    def _raw(cls, terms: dict) -> "MultiPoly":
        p = cls.__new__(cls)
        p._terms = terms
        p._hash = None
        return p

    @classmethod
    def const(cls, c) -> "MultiPoly":
        c = _coerce_coeff(c)
        return cls._raw({ONE_MONO: c} if c else {})

    @classmethod
    def var(cls, v: Var, exp: int = 1) -> "MultiPoly":
        if exp == 0:
            return cls.const(1)
        return cls._raw({((v, exp),): Fraction(1)})

    @classmethod
    def coerce(cls, x) -> "MultiPoly":
        if isinstance(x, MultiPoly):
            return x
        return cls.const(x)

    # ---- inspection ---------------------------------------------------
    @property
    def terms(self) -> dict:
        return self._terms

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self):
        return bool(self._terms)

    def __len__(self):
        return len(self._terms)

    def items(self):
        return self._terms.items()

    def variables(self) -> set:
        return {v for m in self._terms for v, _ in m}

    def is_constant(self) -> bool:
        return all(m == ONE_MONO for m in self._terms)

    def constant_value(self) -> Fraction:
        if not self.is_constant():
            raise ValueError(f"{self} is not a constant")
        return self._terms.get(ONE_MONO, Fraction(0))

    def degree(self, pred=None) -> int:
        """Total degree, counting only variables accepted by ``pred``."""
        best = 0
        for m in self._terms:
            d = sum(e for v, e in m if pred is None or pred(v))
            best = max(best, d)
        return best

    # ---- arithmetic ---------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, MultiPoly):
            if isinstance(other, (int, Rational)):
                other = MultiPoly.const(other)
            else:
                return NotImplemented
        if not other._terms:
            return self
        if not self._terms:
            return other
        out = dict(self._terms)
        for m, c in other._terms.items():
            s = out.get(m, 0) + c
            if s:
                out[m] = s
            else:
                out.pop(m, None)
        return MultiPoly._raw(out)

    __radd__ = __add__

    def __neg__(self):
        return MultiPoly._raw({m: -c for m, c in self._terms.items()})

    def __sub__(self, other):
        if not isinstance(other, MultiPoly):
            if isinstance(other, (int, Rational)):
                other = MultiPoly.const(other)
            else:
                return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, MultiPoly):
            if isinstance(other, (int, Rational)):
                c = Fraction(other)
                if not c:
                    return MultiPoly()
                return MultiPoly._raw({m: v * c for m, v in self._terms.items()})
            return NotImplemented
        if not self._terms or not other._terms:
            return MultiPoly()
        out: dict = {}
        for ma, ca in self._terms.items():
            for mb, cb in other._terms.items():
                m = _mono_mul(ma, mb)
                s = out.get(m, 0) + ca * cb
                if s:
                    out[m] = s
                else:
                    out.pop(m, None)
        return MultiPoly._raw(out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Rational)):
            return self * (Fraction(1) / Fraction(other))
        if isinstance(other, MultiPoly) and len(other._terms) == 1:
            (m, c), = other._terms.items()
            inv = tuple((v, -e) for v, e in m)
            return self * MultiPoly._raw({inv: 1 / c})
        raise ZeroDivisionError("only division by a nonzero monomial stays in the ring")

    def __pow__(self, n: int):
        if n < 0:
            return MultiPoly.const(1) / (self ** (-n))
        result = MultiPoly.const(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    # ---- comparison ---------------------------------------------------
    def __eq__(self, other):
        if isinstance(other, MultiPoly):
            return self._terms == other._terms
        if isinstance(other, (int, Rational)):
            c = Fraction(other)
            if not c:
                return not self._terms
            return self._terms == {ONE_MONO: c}
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    # ---- calculus / substitution -------------------------------------
    def diff(self, v: Var) -> "MultiPoly":
        out: dict = {}
        for m, c in self._terms.items():
            for idx, (w, e) in enumerate(m):
                if w == v:
                    nm = m[:idx] + (((w, e - 1),) if e != 1 else ()) + m[idx + 1:]
                    out[nm] = out.get(nm, 0) + c * e
                    break
        return MultiPoly(out)

    def subs(self, mapping: dict) -> "MultiPoly":
        """Substitute variables by polynomials or numbers (applied simultaneously)."""
        if not mapping:
            return self
        mapping = {v: MultiPoly.coerce(p) for v, p in mapping.items()}
        result = MultiPoly()
        cache: dict = {}
        for m, c in self._terms.items():
            kept = []
            factor = MultiPoly.const(c)
            for v, e in m:
                if v in mapping:
                    key = (v, e)
                    if key not in cache:
                        cache[key] = mapping[v] ** e
                    factor = factor * cache[key]
                else:
                    kept.append((v, e))
            result = result + factor * MultiPoly._raw({tuple(kept): Fraction(1)})
        return result

    def evaluate(self, values: dict):
        """Numerically evaluate with all variables supplied in ``values``."""
        total = 0
        for m, c in self._terms.items():
            t = c
            for v, e in m:
                t = t * values[v] ** e
            total = total + t
        return total

    def zero_vars(self, pred) -> "MultiPoly":
        """Set every variable satisfying ``pred`` to zero (constant-term extraction)."""
        out = {}
        for m, c in self._terms.items():
            hit = False
            for v, e in m:
                if pred(v):
                    if e < 0:
                        raise ZeroDivisionError(f"negative power of {v[-1]} set to zero")
                    hit = True
                    break
            if not hit:
                out[m] = c
        return MultiPoly._raw(out)

    def collect(self, pred) -> dict:
        """Split into ``{monomial in pred-variables: coefficient polynomial}``."""
        out: dict = {}
        for m, c in self._terms.items():
            inner = tuple(ve for ve in m if pred(ve[0]))
            rest = tuple(ve for ve in m if not pred(ve[0]))
            bucket = out.setdefault(inner, {})
            bucket[rest] = bucket.get(rest, 0) + c
        return {k: MultiPoly(v) for k, v in out.items() if any(v.values())}

    def map_monomials(self, fn) -> "MultiPoly":
        """Rebuild by replacing each monomial ``m`` with the polynomial ``fn(m)``."""
        result = MultiPoly()
        for m, c in self._terms.items():
            result = result + fn(m) * c
        return result

    # ---- printing -----------------------------------------------------
    def sorted_terms(self):
        return sorted(self._terms.items(), key=lambda mc: (_mono_key(mc[0])))

    def __str__(self):
        return format_poly(self)

    def __repr__(self):
        return f"MultiPoly({format_poly(self)!r})"


def _mono_key(m: Monomial):
    return (-sum(abs(e) for _, e in m), m)


def format_var(v: Var) -> str:
    return str(v[-1])


def format_coeff(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def format_monomial(m: Monomial) -> str:
    parts = []
    for v, e in m:
        name = format_var(v)
        parts.append(name if e == 1 else f"{name}^{e}" if e > 0 else f"{name}^({e})")
    return "·".join(parts)


def format_poly(p: MultiPoly) -> str:
    """Canonical text: sorted monomials, reduced fractions, ``·`` for products."""
    if p.is_zero():
        return "0"
    out = []
    for m, c in p.sorted_terms():
        sign = "-" if c < 0 else "+"
        a = abs(c)
        if m == ONE_MONO:
            body = format_coeff(a)
        elif a == 1:
            body = format_monomial(m)
        else:
            body = f"{format_coeff(a)}·{format_monomial(m)}"
        out.append((sign, body))
    text = ("-" if out[0][0] == "-" else "") + out[0][1]
    for sign, body in out[1:]:
        text += f" {sign} {body}"
    return text


def as_poly(x) -> MultiPoly:
    return MultiPoly.coerce(x)


def binomial_power(u: MultiPoly, v: MultiPoly, n: int) -> MultiPoly:
    """Expand ``(u - v)**n`` for ``n >= 0``."""
    out = MultiPoly()
    for k in range(n + 1):
        out = out + (u ** (n - k)) * (v ** k) * ((-1) ** k * comb(n, k))
    return out


# ---- named variables used throughout -------------------------------------

K = ("k", "k")
KAPPA = ("kappa", "κ")
W = ("w", "w")


def kvar() -> MultiPoly:
    return MultiPoly.var(K)


def kappavar() -> MultiPoly:
    return MultiPoly.var(KAPPA)


def xvar(root: tuple, q: int) -> Var:
    """Coordinate ``x_q^root`` on the truncated nilpotent group."""
    if len(root) == 1:
        name = f"x{q}"
    else:
        name = f"x{q}[{''.join(str(c) for c in root)}]"
    return ("x", tuple(root), q, name)


def is_xvar(v: Var) -> bool:
    return v[0] == "x"


def lamvar(label: int, p: int, i: int, rank: int) -> Var:
    """Weight component ``λ_p^i`` attached to insertion ``label`` (0 = unlabelled)."""
    name = f"λ{p}" if rank == 1 else f"λ{p}^{i}"
    if label:
        name += f"({label})"
    return ("lam", label, p, i, name)


def is_lamvar(v: Var) -> bool:
    return v[0] == "lam"


def rvar(i: int) -> Var:
    return ("r", i, f"r{i}")


def tvar(i: int) -> Var:
    return ("t", i, f"t{i}")


def zvar(a: int) -> Var:
    return ("z", a, f"z{a}")


# ---- bridge to sympy (used only for small linear solves and pretty output) --

def to_sympy(p: MultiPoly, symbols: dict | None = None):
    import sympy

    symbols = {} if symbols is None else symbols
    expr = sympy.Integer(0)
    for m, c in p.items():
        term = sympy.Rational(c.numerator, c.denominator)
        for v, e in m:
            if v not in symbols:
                symbols[v] = sympy.Symbol(str(v[-1]))
            term *= symbols[v] ** e
        expr += term
    return expr


def from_sympy(expr, symbols: dict) -> MultiPoly:
    """Inverse of :func:`to_sympy`; the denominator must be a monomial."""
    import sympy

    back = {s: v for v, s in symbols.items()}
    num, den = sympy.fraction(sympy.together(sympy.expand(expr)))
    gens = sorted(back, key=lambda s: s.name)
    if not gens:
        c = sympy.Rational(num / den)
        return MultiPoly.const(Fraction(int(c.p), int(c.q)))
    den_poly = MultiPoly.const(1)
    if den != 1:
        dp = sympy.Poly(den, *gens)
        if len(dp.terms()) != 1:
            raise ValueError(f"denominator {den} is not a monomial")
        (exps, c), = dp.terms()
        den_poly = MultiPoly.const(Fraction(int(c.p), int(c.q)))
        for s, e in zip(gens, exps):
            den_poly = den_poly * MultiPoly.var(back[s], e)
    out = MultiPoly()
    if num != 0:
        for exps, c in sympy.Poly(num, *gens).terms():
            term = MultiPoly.const(Fraction(int(c.p), int(c.q)))
            for s, e in zip(gens, exps):
                if e:
                    term = term * MultiPoly.var(back[s], e)
            out = out + term
    return out / den_poly
