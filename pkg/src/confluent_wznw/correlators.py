"""Correlators of screening currents and confluent primary fields.

The correlator factorizes into the boson part Ψ (a product of powers and
exponentials of inverse powers) and the βγ part ω (a rational function of the
insertion points).  ω is computed three ways: the Ward recursion, direct Wick
contraction, and for sl₂ a closed sum over index partitions.
"""

from __future__ import annotations

import cmath
import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial

from .diffreal import (
    DiffOp,
    compute_P,
    constant_term,
    jet_lift,
    screening_op,
)
from .lie import LieAlgebraData, TruncatedElement, UnsupportedAlgebraError
from .poly import MultiPoly, binomial_power, format_poly, is_xvar, tvar, zvar
from .verma import WeightTuple, matrix_element


class SingularConfigurationError(ValueError):
    pass


class ConvergenceError(ValueError):
    pass


# ---- configuration --------------------------------------------------------

@dataclass(frozen=True)
class PrimaryInsertion:
    """``P(γ)v_λ`` at one point; ``word`` is the f-word (``(root index, mode)`` pairs) if known."""

    lam: WeightTuple
    P: MultiPoly
    word: tuple | None = None

    @classmethod
    def from_word(cls, g: LieAlgebraData, lam: WeightTuple, word) -> "PrimaryInsertion":
        word = tuple((g.root_index(a) if isinstance(a, tuple) else a, p) for a, p in word)
        return cls(lam, compute_P(g, list(word), lam), word)

    @property
    def r(self) -> int:
        return self.lam.r


@dataclass(frozen=True)
class InsertionConfig:
    """Screenings ``(simple-root number i, 0-based)`` at ``t_1…t_m`` and primaries at ``z_1…z_n``."""

    g: LieAlgebraData
    screenings: tuple
    primaries: tuple
    kappa: object = None

    @property
    def m(self) -> int:
        return len(self.screenings)

    @property
    def n(self) -> int:
        return len(self.primaries)

    def t(self, i: int) -> MultiPoly:
        return MultiPoly.var(tvar(i + 1))

    def z(self, a: int) -> MultiPoly:
        return MultiPoly.var(zvar(a + 1))


# ---- rational functions with linear-factor denominators --------------------

def _point_key(v) -> tuple:
    return (0 if v[0] == "t" else 1, v[1])


def _normalize_factor(u, v, e: int):
    """Orient ``(u - v)`` canonically; return ``(pair, sign)``."""
    if _point_key(u) <= _point_key(v):
        return (u, v), 1
    return (v, u), (-1) ** e


class CorrelatorValue:
    """``Σ numerator / ∏ (u - v)^e``; keys are sorted tuples of ``((u, v), e)``."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        self.terms = {k: c for k, c in (terms or {}).items() if not c.is_zero()}

    @classmethod
    def constant(cls, c) -> "CorrelatorValue":
        return cls({(): MultiPoly.coerce(c)})

    @classmethod
    def monomial(cls, factors, coeff=1) -> "CorrelatorValue":
        """``coeff / ∏ (u - v)^e`` for ``factors = [(u_var, v_var, e), …]``."""
        den: dict = {}
        sign = 1
        for u, v, e in factors:
            if e == 0:
                continue
            if u == v:
                raise SingularConfigurationError(f"factor ({u[-1]} - {v[-1]}) vanishes identically")
            pair, s = _normalize_factor(u, v, e)
            sign *= s
            den[pair] = den.get(pair, 0) + e
        key = tuple(sorted(((p, e) for p, e in den.items() if e), key=_den_sort))
        return cls({key: MultiPoly.coerce(coeff) * sign})

    def __add__(self, other: "CorrelatorValue") -> "CorrelatorValue":
        terms = dict(self.terms)
        for k, c in other.terms.items():
            terms[k] = terms.get(k, MultiPoly()) + c
        return CorrelatorValue(terms)

    def __neg__(self):
        return CorrelatorValue({k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other: "CorrelatorValue") -> "CorrelatorValue":
        if not isinstance(other, CorrelatorValue):
            other = CorrelatorValue.constant(other)
        terms: dict = {}
        for ka, ca in self.terms.items():
            for kb, cb in other.terms.items():
                den = dict(ka)
                for p, e in kb:
                    den[p] = den.get(p, 0) + e
                key = tuple(sorted(den.items(), key=_den_sort))
                terms[key] = terms.get(key, MultiPoly()) + ca * cb
        return CorrelatorValue(terms)

    __rmul__ = __mul__

    def scale(self, c) -> "CorrelatorValue":
        c = MultiPoly.coerce(c)
        return CorrelatorValue({k: c * x for k, x in self.terms.items()})

    def is_zero(self) -> bool:
        return self.together()[0].is_zero()

    def together(self):
        """``(numerator polynomial, common denominator key)``."""
        common: dict = {}
        for key in self.terms:
            for p, e in key:
                common[p] = max(common.get(p, 0), e)
        num = MultiPoly()
        for key, c in self.terms.items():
            have = dict(key)
            extra = c
            for (u, v), e in common.items():
                d = e - have.get((u, v), 0)
                if d:
                    extra = extra * binomial_power(MultiPoly.var(u), MultiPoly.var(v), d)
            num = num + extra
        return num, tuple(sorted(common.items(), key=_den_sort))

    def __eq__(self, other):
        if not isinstance(other, CorrelatorValue):
            return NotImplemented
        return (self - other).is_zero()

    def __hash__(self):
        return hash(self.together())

    def evaluate(self, points: dict, params: dict | None = None) -> complex:
        """Numeric value; ``points`` maps point variables to numbers."""
        params = params or {}
        total = 0j
        for key, c in self.terms.items():
            val = complex(c.evaluate(params)) if c.variables() else complex(c.constant_value())
            for (u, v), e in key:
                val /= (points[u] - points[v]) ** e
            total += val
        return total

    def degree_in(self, var) -> int | None:
        """Upper bound on the total degree in ``var`` at infinity (None when zero)."""
        best = None
        for key, c in self.terms.items():
            d = c.degree(lambda x: x == var) - sum(e for p, e in key if var in p)
            best = d if best is None else max(best, d)
        return best

    def __str__(self):
        num, den = self.together()
        if num.is_zero():
            return "0"
        dens = "·".join(f"({u[-1]} - {v[-1]})" + (f"^{e}" if e != 1 else "") for (u, v), e in den)
        text = format_poly(num)
        return text if not dens else f"({text}) / ({dens})"

    __repr__ = __str__


def _den_sort(item):
    (u, v), e = item
    return (_point_key(u), _point_key(v))


# ---- Ψ ------------------------------------------------------------------------

def _phi_kernel(p: int, q: int) -> Fraction:
    """Coefficient of ``u^{-(p+q)}`` in ``⟨φ^{(p)}(z)φ^{(q)}(w)⟩``; ``(p, q) = (0, 0)`` means ``log u``."""
    return Fraction((-1) ** (p + 1) * comb(p + q, p), p + q)


@dataclass
class MasterFunctionValue:
    value: complex
    log_value: complex
    grad_t: list
    grad_z: list


def _numeric_weights(g: LieAlgebraData, lam: WeightTuple, params: dict) -> list:
    out = []
    for row in lam.components:
        out.append([complex(c.evaluate(params)) if c.variables() else float(c.constant_value())
                    for c in row])
    return out


def _pair_numeric(g: LieAlgebraData, a, b) -> complex:
    inv = g.cartan_inverse
    return sum(a[i] * b[j] * float(inv[i][j]) for i in range(g.rank) for j in range(g.rank))


def psi_terms(config: InsertionConfig, params: dict | None = None):
    """Factor data ``(i_kind, i, j_kind, j, log_coeff, {n: coeff of u^{-n}})`` for every pair of points."""
    g = config.g
    params = params or {}
    kappa = complex(config.kappa)
    charges = []
    for i in config.screenings:
        alpha = [float(x) for x in g.cartan[i]]
        charges.append(("t", i, [[-x for x in alpha]]))
    for lam in (p.lam for p in config.primaries):
        charges.append(("z", None, _numeric_weights(g, lam, params)))
    idx_t = iter(range(config.m))
    idx_z = iter(range(config.n))
    labels = [("t", next(idx_t)) if kind == "t" else ("z", next(idx_z)) for kind, _, _ in charges]
    out = []
    for A, B in itertools.combinations(range(len(charges)), 2):
        wa, wb = charges[A][2], charges[B][2]
        log_c = 0j
        inv_pows: dict = {}
        for p, ra in enumerate(wa):
            for q, rb in enumerate(wb):
                c = _pair_numeric(g, ra, rb) / kappa
                if c == 0:
                    continue
                if p == q == 0:
                    log_c += c
                else:
                    n = p + q
                    inv_pows[n] = inv_pows.get(n, 0) + c * float(_phi_kernel(p, q))
        out.append((labels[A], labels[B], log_c, inv_pows))
    return out


def psi_eval(config: InsertionConfig, t_values, z_values, params: dict | None = None) -> MasterFunctionValue:
    """Ψ at numeric points, principal branch for every power; analytic log-gradient."""
    pts = {("t", i): complex(v) for i, v in enumerate(t_values)}
    pts.update({("z", a): complex(v) for a, v in enumerate(z_values)})
    if len(pts) != config.m + config.n:
        raise ValueError("expected one numeric value per insertion point")
    if config.kappa is None:
        raise ValueError("κ must be numeric for Ψ")
    log_val = 0j
    grad = {k: 0j for k in pts}
    for a, b, log_c, inv_pows in psi_terms(config, params):
        u = pts[a] - pts[b]
        if u == 0:
            raise SingularConfigurationError(f"points {a[0]}{a[1] + 1} and {b[0]}{b[1] + 1} coincide")
        d = 0j
        if log_c:
            log_val += log_c * cmath.log(u)
            d += log_c / u
        for n, c in inv_pows.items():
            log_val += c * u ** (-n)
            d += -n * c * u ** (-n - 1)
        grad[a] += d
        grad[b] -= d
    return MasterFunctionValue(
        cmath.exp(log_val), log_val,
        [grad[("t", i)] for i in range(config.m)],
        [grad[("z", a)] for a in range(config.n)],
    )


# ---- ω by the Ward recursion ----------------------------------------------

def _screen_field(g: LieAlgebraData, i: int) -> DiffOp:
    return screening_op(g, g.simple_root_indices[i], 0, 0)


def omega_ward(config: InsertionConfig) -> CorrelatorValue:
    """Remove the first screening by its poles at the other screenings and at the primaries."""
    g = config.g
    fields = tuple(_screen_field(g, i) for i in config.screenings)
    points = tuple(tvar(i + 1) for i in range(config.m))
    polys = tuple(p.P for p in config.primaries)
    rs = tuple(p.r for p in config.primaries)
    zs = tuple(zvar(a + 1) for a in range(config.n))

    @lru_cache(maxsize=None)
    def rec(fields, points, polys) -> CorrelatorValue:
        if not fields:
            out = MultiPoly.const(1)
            for P in polys:
                out = out * constant_term(P)
            return CorrelatorValue.constant(out)
        V, t1 = fields[0], points[0]
        total = CorrelatorValue()
        for i in range(1, len(fields)):
            br = V.commutator(fields[i])
            if br.is_zero():
                continue
            new_fields = fields[1:i] + (br,) + fields[i + 1:]
            sub = rec(new_fields, points[1:], polys)
            total = total + sub * CorrelatorValue.monomial([(t1, points[i], 1)])
        for a, P in enumerate(polys):
            for p in range(rs[a] + 1):
                newP = jet_lift(g, V, p, rs[a]).apply(P)
                if newP.is_zero():
                    continue
                sub = rec(fields[1:], points[1:], polys[:a] + (newP,) + polys[a + 1:])
                total = total + sub * CorrelatorValue.monomial([(t1, zs[a], p + 1)])
        return total

    return rec(fields, points, polys)


# ---- ω by direct Wick contraction -----------------------------------------

def _gamma_letters(mono) -> list:
    """Expand ``x_q^α`` powers of a monomial into a list of ``(root, q)`` letters."""
    out = []
    for v, e in mono:
        if is_xvar(v):
            out.extend([(v[1], v[2])] * e)
    return out


def _split_x(P: MultiPoly) -> list:
    """``[(γ letters, coefficient)]`` with coefficients free of x."""
    out = []
    for xm, c in P.collect(is_xvar).items():
        out.append((_gamma_letters(xm), c))
    return out


def omega_wick(config: InsertionConfig) -> CorrelatorValue:
    """Sum over complete β-γ contraction patterns; no contraction within one point."""
    g = config.g
    m = config.m
    screen_terms = []
    for i in config.screenings:
        V = _screen_field(g, i)
        terms = []
        for v, coeff in V.vec.items():
            for letters, c in _split_x(coeff):
                terms.append((v[1], letters, c))
        screen_terms.append(terms)
    prim_terms = [_split_x(p.P) for p in config.primaries]
    total = CorrelatorValue()
    for choice in itertools.product(*screen_terms):
        # each screening brings one β of root choice[i][0] at t_i
        gam_s = [(root, 0, ("t", i)) for i, (_, letters, _) in enumerate(choice) for root, _ in letters]
        if len(gam_s) > m:
            continue
        coeff_s = MultiPoly.const(1)
        for _, _, c in choice:
            coeff_s = coeff_s * c
        for pchoice in itertools.product(*prim_terms):
            gam = list(gam_s)
            coeff = coeff_s
            for a, (letters, c) in enumerate(pchoice):
                gam.extend((root, q, ("z", a)) for root, q in letters)
                coeff = coeff * c
            if len(gam) != m:
                continue
            for perm in itertools.permutations(range(m)):
                factors = []
                ok = True
                for i, k in enumerate(perm):
                    root, q, (kind, j) = gam[k]
                    if root != choice[i][0] or (kind == "t" and j == i):
                        ok = False
                        break
                    other = tvar(j + 1) if kind == "t" else zvar(j + 1)
                    factors.append((tvar(i + 1), other, q + 1))
                if ok:
                    total = total + CorrelatorValue.monomial(factors, coeff)
    return total


# ---- sl₂ closed form ------------------------------------------------------

def index_partitions(m: int, n: int):
    """Ordered tuples ``(I_1, …, I_n)`` of disjoint increasing index tuples covering ``1…m``."""
    for assign in itertools.product(range(n), repeat=m):
        parts = [[] for _ in range(n)]
        for i, a in enumerate(assign):
            parts[a].append(i + 1)
        yield tuple(tuple(p) for p in parts)


def _closed_constant(g, prim: PrimaryInsertion, modes: tuple) -> MultiPoly:
    """``[S[p_1]⋯S[p_k] P]`` from the Verma module when the f-word is known."""
    if prim.word is not None:
        return matrix_element(g, list(reversed(modes)), [p for _, p in prim.word], prim.lam,
                              f_roots=[a for a, _ in prim.word])
    P = prim.P
    for p in reversed(modes):
        P = screening_op(g, 0, p, prim.r).apply(P)
    return constant_term(P)


def omega_sl2_closed(config: InsertionConfig, symmetrize: bool = True) -> CorrelatorValue:
    """``(1/m!) Σ_σ σ(Σ_Y ∏_a P(a, I_a))``; ``symmetrize=False`` drops the permutation average."""
    g = config.g
    if g.rank != 1:
        raise UnsupportedAlgebraError("the closed form is only available for sl2")
    m, n = config.m, config.n
    if n == 0:
        return CorrelatorValue.constant(1 if m == 0 else 0)

    def block(a: int, idx: tuple, tmap) -> CorrelatorValue:
        prim = config.primaries[a]
        out = CorrelatorValue()
        for modes in itertools.product(range(prim.r + 1), repeat=len(idx)):
            c = _closed_constant(g, prim, modes)
            if c.is_zero():
                continue
            factors = [(tvar(tmap[i]), zvar(a + 1), p + 1) for i, p in zip(idx, modes)]
            out = out + CorrelatorValue.monomial(factors, c)
        return out

    def y_sum(tmap) -> CorrelatorValue:
        total = CorrelatorValue()
        for parts in index_partitions(m, n):
            prod = CorrelatorValue.constant(1)
            for a, idx in enumerate(parts):
                prod = prod * block(a, idx, tmap)
                if not prod.terms:
                    break
            total = total + prod
        return total

    if not symmetrize:
        return y_sum({i: i for i in range(1, m + 1)})
    total = CorrelatorValue()
    for sigma in itertools.permutations(range(1, m + 1)):
        total = total + y_sum({i: sigma[i - 1] for i in range(1, m + 1)})
    return total.scale(Fraction(1, factorial(m)))


# ---- numeric integration ----------------------------------------------------

@dataclass(frozen=True)
class Segment:
    """Straight path from ``start`` to ``end`` (finite points)."""

    start: complex
    end: complex


@dataclass(frozen=True)
class Ray:
    """Half-line ``start + direction·s``, ``s ≥ 0``."""

    start: complex
    direction: complex = 1


@dataclass
class IntegrationResult:
    value: complex
    error: float
    diagnostics: list = field(default_factory=list)


def _mp_integrand(config: InsertionConfig, omega: CorrelatorValue, z_values, params):
    import mpmath

    terms = psi_terms(config, params)
    om = []
    for key, c in omega.terms.items():
        coeff = complex(c.evaluate(params)) if c.variables() else complex(c.constant_value())
        om.append((mpmath.mpc(coeff), key))
    zs = {zvar(a + 1): mpmath.mpc(v) for a, v in enumerate(z_values)}

    def value(ts):
        pts = {("t", i): t for i, t in enumerate(ts)}
        pts.update({("z", a): zs[zvar(a + 1)] for a in range(len(z_values))})
        log_val = mpmath.mpc(0)
        for a, b, log_c, inv in terms:
            u = pts[a] - pts[b]
            if u == 0:
                # only reached at a cycle end that rounding moved onto an insertion point;
                # the endpoint checks guarantee the integrand vanishes or is integrable there
                return mpmath.mpc(0)
            if log_c:
                log_val += mpmath.mpc(log_c) * mpmath.log(u)
            for n, c in inv.items():
                log_val += mpmath.mpc(c) * u ** (-n)
        varmap = dict(zs)
        varmap.update({tvar(i + 1): t for i, t in enumerate(ts)})
        w = mpmath.mpc(0)
        for c, key in om:
            v = c
            for (p, q), e in key:
                v /= (varmap[p] - varmap[q]) ** e
            w += v
        return mpmath.exp(log_val) * w

    return value


def _parametrize(cycle, parameterization: str):
    """Return ``(t(s), dt/ds, interval)``."""
    import mpmath

    if isinstance(cycle, Segment):
        a, b = mpmath.mpc(cycle.start), mpmath.mpc(cycle.end)
        if parameterization in ("linear", "auto", "rational", "exp"):
            return (lambda s: a + (b - a) * s), (lambda s: b - a), [0, 1]
        if parameterization == "cosine":
            return ((lambda v: a + (b - a) * (1 - mpmath.cos(mpmath.pi * v)) / 2),
                    (lambda v: (b - a) * mpmath.pi * mpmath.sin(mpmath.pi * v) / 2), [0, 1])
    elif isinstance(cycle, Ray):
        a, d = mpmath.mpc(cycle.start), mpmath.mpc(cycle.direction)
        if parameterization in ("rational", "auto"):
            return (lambda u: a + d * u / (1 - u)), (lambda u: d / (1 - u) ** 2), [0, 1]
        if parameterization == "exp":
            return (lambda v: a + d * mpmath.exp(v)), (lambda v: d * mpmath.exp(v)), [-mpmath.inf, mpmath.inf]
        if parameterization == "linear":
            return (lambda s: a + d * s), (lambda s: d), [0, mpmath.inf]
    raise ValueError(f"unknown cycle/parameterization: {cycle!r}, {parameterization!r}")


def _max_pole(omega: CorrelatorValue, tv, zv) -> int:
    best = 0
    for key in omega.terms:
        for (p, q), e in key:
            if {p, q} == {tv, zv}:
                best = max(best, e)
    return best


def _endpoint_diagnostics(config, omega, cycles, z_values, params):
    """Check every cycle end: local exponent at a primary point, decay at infinity.

    Returns the notes and the smallest margin ``Re(exponent) + 1`` over finite
    power-law ends (``None`` if there are none).
    """
    notes = []
    margin = None
    terms = psi_terms(config, params)
    for i, cyc in enumerate(cycles):
        ends = [(cyc.start, (cyc.end - cyc.start) if isinstance(cyc, Segment) else cyc.direction)]
        if isinstance(cyc, Segment):
            ends.append((cyc.end, cyc.start - cyc.end))
        for point, d in ends:
            for a, z in enumerate(z_values):
                if abs(complex(point) - complex(z)) > 1e-14:
                    continue
                (log_c, inv), = [(lc, iv) for A, B, lc, iv in terms if A == ("t", i) and B == ("z", a)] or [(0, {})]
                if inv:
                    n = max(inv)
                    lead = inv[n] * complex(d) ** (-n)
                    if lead.real >= 0:
                        raise ConvergenceError(
                            f"t{i + 1} at z{a + 1}: coefficient {lead:.6g} of s^-{n} does not damp "
                            f"along direction {complex(d):.6g}")
                    notes.append(f"t{i + 1} at z{a + 1}: exponential damping, Re = {lead.real:.6g}")
                else:
                    expo = log_c - _max_pole(omega, tvar(i + 1), zvar(a + 1))
                    if expo.real <= -1:
                        raise ConvergenceError(
                            f"t{i + 1} at z{a + 1}: endpoint exponent {expo:.6g} has real part ≤ -1")
                    notes.append(f"t{i + 1} at z{a + 1}: endpoint exponent {expo:.6g}")
                    gap = complex(expo).real + 1
                    margin = gap if margin is None else min(margin, gap)
        if isinstance(cyc, Ray):
            total = sum(lc for A, B, lc, _ in terms if ("t", i) in (A, B) and lc)
            # pairs where t_i is the second point contribute the same power at infinity
            deg = omega.degree_in(tvar(i + 1))
            expo = total + (deg if deg is not None else 0)
            if deg is not None and complex(expo).real >= -1:
                raise ConvergenceError(
                    f"t{i + 1} at infinity: exponent {complex(expo):.6g} has real part ≥ -1")
            notes.append(f"t{i + 1} at infinity: exponent {complex(expo):.6g}")
    return notes, margin


def integrate(config: InsertionConfig, cycles, z_values, tolerance: float = 1e-10,
              params: dict | None = None, parameterization: str = "auto",
              omega: CorrelatorValue | None = None) -> IntegrationResult:
    """``∫ Ψ·ω dt_1⋯dt_m`` over a product of segments/rays (m ≤ 2)."""
    import mpmath

    params = params or {}
    cycles = list(cycles)
    if len(cycles) != config.m:
        raise ValueError(f"need one cycle per screening ({config.m}), got {len(cycles)}")
    if config.m > 2:
        raise ValueError("quadrature is limited to m ≤ 2")
    if omega is None:
        omega = omega_ward(config)
    if config.m == 0:
        psi = psi_eval(config, [], z_values, params)
        w = omega.evaluate({zvar(a + 1): complex(z) for a, z in enumerate(z_values)}, params)
        return IntegrationResult(psi.value * w, 0.0, ["no screenings: Ψ·ω at the configuration"])
    notes, margin = _endpoint_diagnostics(config, omega, cycles, z_values, params)
    f = _mp_integrand(config, omega, z_values, params)
    paths = [_parametrize(c, parameterization) for c in cycles]
    digits = int(-mpmath.log10(tolerance))
    # nodes stop ~10^-dps short of an end, losing a piece of size ~10^(-dps·margin)
    dps = max(20, digits + 8, int(digits / min(margin or 1, 1)) + 8)
    with mpmath.workdps(dps):
        if config.m == 1:
            (t, dt, iv), = paths
            val, err = mpmath.quad(lambda s: f([t(s)]) * dt(s), iv, error=True, maxdegree=10)
        else:
            (t1, dt1, iv1), (t2, dt2, iv2) = paths
            val, err = mpmath.quad(lambda s, u: f([t1(s), t2(u)]) * dt1(s) * dt2(u), iv1, iv2,
                                   error=True, maxdegree=8)
    val, err = complex(val), float(err)
    if err > max(tolerance, tolerance * abs(val)):
        notes.append(f"error estimate {err:.3g} exceeds the requested tolerance")
    return IntegrationResult(val, err, notes)
