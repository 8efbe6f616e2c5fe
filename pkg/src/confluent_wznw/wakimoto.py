"""Wakimoto currents, screening currents, energy-momentum tensor and confluent primaries.

The currents are obtained from the mode-0 differential realization by the
substitution ``x^α ↦ γ^α(z)``, ``∂/∂x^α ↦ β_α(z)`` and ``λ^i ↦ a_i(z) = κ∂φ_i(z)``,
plus the anomaly term ``r_i ∂γ^{α_i}`` in ``F_i``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import comb

from .diffreal import DiffOp, realize, screening_op
from .fields import KAPPA_INV, Field, OPEResult, normal_ordered_product, ope
from .lie import LieAlgebraData, TruncatedElement
from .poly import (
    KAPPA,
    K,
    MultiPoly,
    W,
    from_sympy,
    is_lamvar,
    is_xvar,
    kappavar,
    kvar,
    rvar,
    to_sympy,
    xvar,
)
from .verma import WeightTuple


class MissingRCoefficientsError(ValueError):
    pass


def _a_field(g: LieAlgebraData, i: int) -> Field:
    return Field.generator(g, "p", i, 1, kappavar())


def field_from_diffop(g: LieAlgebraData, op: DiffOp) -> Field:
    """``:X^α(γ) β_α: + (affine with λ_0^i ↦ a_i)`` for a mode-0 operator."""
    out = Field(g)
    for v, coeff in op.vec.items():
        beta = Field.generator(g, "b", g.root_index(v[1]), 0)
        out = out + Field.from_polynomial(g, coeff).nprod(beta)
    for lm, coeff in op.affine.collect(is_lamvar).items():
        if not lm:
            out = out + Field.from_polynomial(g, coeff)
            continue
        if len(lm) != 1 or lm[0][1] != 1:
            raise ValueError("affine part is not linear in the weight")
        (v, _), = lm
        i = v[3] - 1
        out = out + Field.from_polynomial(g, coeff).nprod(_a_field(g, i))
    return out


def simple_vertex(g: LieAlgebraData, i: int, sign: int = -1) -> tuple:
    """Vertex exponent ``sign·(α_i, φ)`` in φ-coordinates."""
    return ((tuple(MultiPoly.const(sign if j == i else 0) for j in range(g.rank))),)


def weight_vertex(g: LieAlgebraData, lam: WeightTuple) -> tuple:
    """Exponent of ``v_λ = :exp(Σ_p (λ_p, ∂^pφ)/p!):`` in φ-coordinates."""
    return tuple(tuple(g.weight_to_simple(lam.components[p])) for p in range(lam.r + 1))


def primary_field(g: LieAlgebraData, P: MultiPoly, lam: WeightTuple) -> Field:
    """``Φ = P(γ) v_λ`` with ``x_q^α ↦ ∂^qγ^α/q!``."""
    return Field.from_polynomial(g, MultiPoly.coerce(P), weight_vertex(g, lam))


@dataclass
class Currents:
    g: LieAlgebraData
    E: list
    H: list
    F: list
    screening: list
    T: Field
    r: dict = field(default_factory=dict)

    def current(self, label) -> Field:
        """``'E1'``, ``'H2'``, ``'F1'``, ``'T'`` or ``('F', 0)`` (0-based); ``'E'`` means ``'E1'``."""
        if isinstance(label, tuple):
            kind, i = label
        else:
            label = label.strip()
            if label == "T":
                return self.T
            kind, i = label[0], int(label[1:] or 1) - 1
        return {"E": self.E, "H": self.H, "F": self.F}[kind][i]


def build_currents(g: LieAlgebraData, r_coeffs=None, symbolic_r: bool = False) -> Currents:
    """Free-field currents ``E_i, H_i, F_i``, screening currents ``s_i`` and ``T``.

    ``r_coeffs`` maps simple-root index (0-based) to the anomaly coefficient; use
    :func:`solve_r_coeffs` to obtain it, or ``symbolic_r=True`` to keep formal ``r_i``.
    """
    if r_coeffs is None:
        if not symbolic_r:
            raise MissingRCoefficientsError(
                "r coefficients missing: call solve_r_coeffs(g) or pass symbolic_r=True")
        r_coeffs = {i: MultiPoly.var(rvar(i + 1)) for i in range(g.rank)}
    lam0 = WeightTuple.symbolic(g, 0)
    E, H, F, S = [], [], [], []
    for i in range(g.rank):
        j = g.simple_root_indices[i]
        E.append(field_from_diffop(g, realize(g, TruncatedElement(("e", j), 0, 0), lam0)))
        H.append(field_from_diffop(g, realize(g, TruncatedElement(("h", i), 0, 0), lam0)))
        f = field_from_diffop(g, realize(g, TruncatedElement(("f", j), 0, 0), lam0))
        f = f + Field.generator(g, "g", j, 1, MultiPoly.coerce(r_coeffs[i]))
        F.append(f)
        s = field_from_diffop(g, screening_op(g, j, 0, 0))
        S.append(s.nprod(Field.vertex_operator(g, simple_vertex(g, i))))
    return Currents(g, E, H, F, S, free_field_T(g), dict(r_coeffs))


def free_field_T(g: LieAlgebraData) -> Field:
    """``Σ :β_α ∂γ^α: + κ/2 (∂φ, ∂φ) - (ρ, ∂²φ)``."""
    T = Field(g)
    for j in range(g.n_roots):
        T = T + Field(g, {(("b", j, 0), ("g", j, 1)): MultiPoly.const(1)})
    inv = g.cartan_inverse
    for i in range(g.rank):
        for k in range(g.rank):
            if inv[i][k]:
                key = tuple(sorted([("p", i, 1), ("p", k, 1)]))
                T = T + Field(g, {key: kappavar() * (inv[i][k] / 2)})
    for i, c in enumerate(g.rho):
        if c:
            # ∂²φ_i = 2·φ_i^{(2)}
            T = T + Field(g, {(("p", i, 2),): MultiPoly.const(-2 * c)})
    return T


def sugawara_T(cur: Currents) -> Field:
    """``(1/2κ) :Σ H_i H^i + Σ_α (α²/2)(E_α F_α + F_α E_α):`` for sl₂ only."""
    g = cur.g
    if g.rank != 1:
        raise ValueError("Sugawara form needs currents for every positive root; only sl2 is built")
    H, E, F = cur.H[0], cur.E[0], cur.F[0]
    total = normal_ordered_product(H, H).scale(Fraction(1, 2))
    total = total + normal_ordered_product(E, F) + normal_ordered_product(F, E)
    return total.scale(KAPPA_INV * Fraction(1, 2))


# ---- level relation and anomaly coefficients ------------------------------

@dataclass
class RSolution:
    r_level: dict  # r_i in terms of the level k
    r_kappa: dict  # r_i in terms of κ
    kappa_of_level: MultiPoly  # κ = k + h^∨
    equations: list
    residual: list

    def kappa_substitution(self) -> dict:
        """Map ``k ↦ κ - h^∨`` so that every identity can be checked as a polynomial in κ."""
        return {K: kappavar() - (self.kappa_of_level - kvar())}


def wakimoto_residuals(cur: Currents, level, pairs=("HH", "HE", "HF", "EF")) -> dict:
    """Residual ``lhs - rhs`` singular parts of the four defining OPE families."""
    g = cur.g
    level = MultiPoly.coerce(level)
    out = {}
    for i in range(g.rank):
        for j in range(g.rank):
            a = g.cartan[i][j]
            if "HH" in pairs:
                got = ope(cur.H[i], cur.H[j], order=-1)
                want = OPEResult(g, {-2: Field.one(g, level * a)}, -1)
                out[("HH", i, j)] = got - want
            if "HE" in pairs:
                got = ope(cur.H[i], cur.E[j], order=-1)
                want = OPEResult(g, {-1: cur.E[j].scale(a)}, -1)
                out[("HE", i, j)] = got - want
            if "HF" in pairs:
                got = ope(cur.H[i], cur.F[j], order=-1)
                want = OPEResult(g, {-1: cur.F[j].scale(-a)}, -1)
                out[("HF", i, j)] = got - want
            if "EF" in pairs:
                got = ope(cur.E[i], cur.F[j], order=-1)
                want = OPEResult(g, {-2: Field.one(g, level), -1: cur.H[i]} if i == j else {}, -1)
                out[("EF", i, j)] = got - want
    return out


def _equations(residuals: dict) -> list:
    eqs = []
    for res in residuals.values():
        for f in res.terms.values():
            for c in f.terms.values():
                if not c.is_zero():
                    eqs.append(c)
    return eqs


def solve_r_coeffs(g: LieAlgebraData) -> RSolution:
    """Solve for ``r_i`` (and the level) so the currents close into level-k sl-hat.

    The unknowns are ``r_1…r_l`` and the level ``k``; the equations are every
    coefficient of the residual singular parts of the HH, HE, HF, EF relations
    (all pairs for rank 1, diagonal EF for higher rank).
    """
    import sympy

    cur = build_currents(g, symbolic_r=True)
    pairs = ("HH", "HE", "HF", "EF")
    res = wakimoto_residuals(cur, kvar(), pairs)
    if g.rank > 1:
        res = {key: v for key, v in res.items() if key[0] != "EF" or key[1] == key[2]}
    eqs = _equations(res)
    symbols: dict = {}
    sym_eqs = [to_sympy(e, symbols) for e in eqs]
    unknown_vars = [rvar(i + 1) for i in range(g.rank)] + [K]
    for v in unknown_vars:
        symbols.setdefault(v, sympy.Symbol(v[-1]))
    unknowns = [symbols[v] for v in unknown_vars]
    sol = sympy.linsolve(sym_eqs, unknowns)
    if not sol:
        raise ArithmeticError("the anomaly system is inconsistent (Wick engine or convention bug)")
    (values,) = tuple(sol)
    if any(val.free_symbols & set(unknowns) for val in values):
        raise ArithmeticError("the anomaly system does not determine r uniquely")
    kappa_sym = symbols.setdefault(KAPPA, sympy.Symbol(KAPPA[-1]))
    level_sym = symbols[K]
    k_of_kappa = values[-1]
    kappa_of_k = sympy.solve(sympy.Eq(level_sym, k_of_kappa), kappa_sym)[0]
    r_kappa = {i: from_sympy(values[i], symbols) for i in range(g.rank)}
    r_level = {i: from_sympy(sympy.expand(values[i].subs(kappa_sym, kappa_of_k)), symbols)
               for i in range(g.rank)}
    kappa_of_level = from_sympy(kappa_of_k, symbols)
    subst = {rvar(i + 1): r_kappa[i] for i in range(g.rank)}
    subst[K] = from_sympy(k_of_kappa, symbols)
    residual = [e.subs(subst) for e in eqs]
    return RSolution(r_level, r_kappa, kappa_of_level, eqs, [e for e in residual if not e.is_zero()])


def solved_currents(g: LieAlgebraData):
    """Currents with the anomaly coefficients solved, expressed in κ; also the solution."""
    sol = solve_r_coeffs(g)
    return build_currents(g, sol.r_kappa), sol


# ---- mode action and confluent primaries ----------------------------------

def mode_action(cur: Currents, label, n: int, phi: Field) -> Field:
    """``X[n]Φ(w) = ∮ (z-w)^n X(z)Φ(w)``: the ``(z-w)^{-n-1}`` coefficient."""
    X = cur.current(label)
    return ope(X, phi, order=-n - 1).coefficient(-n - 1)


def act_word(cur: Currents, word, phi: Field) -> Field:
    """Apply ``[(label, mode), …]`` with the rightmost acting first."""
    for label, n in reversed(list(word)):
        phi = mode_action(cur, label, n, phi)
    return phi


# ---- T(z)Φ(w) -----------------------------------------------------------

def dk_vector_field(g: LieAlgebraData, r: int, k: int) -> DiffOp:
    """Vector field of the derivation ``d_k`` on the group coordinates: ``Σ q x_q^α ∂/∂x_{q+k}^α``."""
    vec = {}
    for root in g.positive_roots:
        for q in range(1, r - k + 1):
            vec[xvar(root, q + k)] = MultiPoly.var(xvar(root, q)) * q
    return DiffOp(vec)


def dk_vertex_field(g: LieAlgebraData, lam: WeightTuple, k: int) -> Field:
    """``D_k`` applied to ``v_λ`` divided by ``v_λ``: ``Σ_p p (λ_{p+k}, φ^{(p)})``."""
    out = Field(g)
    for p in range(1, lam.r - k + 1):
        c = g.weight_to_simple(lam.components[p + k])
        for i in range(g.rank):
            if not MultiPoly.coerce(c[i]).is_zero():
                out = out + Field.generator(g, "p", i, p, MultiPoly.coerce(c[i]) * p)
    return out


def dbar(g: LieAlgebraData, P: MultiPoly, lam: WeightTuple, k: int, dP: MultiPoly | None = None) -> Field:
    """``D̄_k Φ`` for ``Φ = P(γ)v_λ``; ``dP`` may supply ``⟨λ|d_k(Z)…|λ⟩`` from another route."""
    if dP is None:
        dP = dk_vector_field(g, lam.r, k).apply(P)
    vert = weight_vertex(g, lam)
    poly_part = Field.from_polynomial(g, dP, vert)
    vertex_part = Field.from_polynomial(g, P).nprod(dk_vertex_field(g, lam, k)).nprod(
        Field.vertex_operator(g, vert))
    return poly_part + vertex_part


def _rho_pair(g: LieAlgebraData, lam_p) -> MultiPoly:
    return sum((MultiPoly.coerce(lam_p[i]) * c for i, c in enumerate(g.rho)), MultiPoly())


@dataclass
class TPhiReport:
    ope: OPEResult
    predicted: OPEResult
    residual: OPEResult
    dbar: dict

    @property
    def ok(self) -> bool:
        return self.residual.is_zero()


def t_phi_prediction(g: LieAlgebraData, P: MultiPoly, lam: WeightTuple, dbar_fields=None) -> OPEResult:
    """Singular part of ``T(z)Φ(w)`` as assembled from D̄_k, ∂Φ and the scalar terms."""
    r = lam.r
    phi = primary_field(g, P, lam)
    terms: dict = {}

    def add(n, f):
        terms[n] = terms.get(n, Field(g)) + f

    dbar_fields = dbar_fields or {k: dbar(g, P, lam, k) for k in range(r)}
    for k in range(r):
        add(-k - 2, dbar_fields[k])
    add(-1, phi.derivative())
    for p in range(r + 1):
        for q in range(r + 1):
            c = g.pair(lam.components[p], lam.components[q])
            add(-p - q - 2, phi.scale(KAPPA_INV * MultiPoly.coerce(c) * Fraction(1, 2)))
        add(-p - 2, phi.scale(KAPPA_INV * _rho_pair(g, lam.components[p]) * (p + 1)))
    return OPEResult(g, terms, -1)


def t_phi_ope(cur_or_g, P: MultiPoly, lam: WeightTuple, dbar_fields=None) -> TPhiReport:
    """Compute ``T(z)Φ(w)`` by Wick's theorem and compare with the decomposition."""
    g = cur_or_g.g if isinstance(cur_or_g, Currents) else cur_or_g
    T = cur_or_g.T if isinstance(cur_or_g, Currents) else free_field_T(g)
    phi = primary_field(g, P, lam)
    got = ope(T, phi, order=-1)
    dbar_fields = dbar_fields or {k: dbar(g, P, lam, k) for k in range(lam.r)}
    pred = t_phi_prediction(g, P, lam, dbar_fields)
    return TPhiReport(got, pred, got - pred, dbar_fields)


def falling(a: int, n: int) -> int:
    out = 1
    for j in range(n):
        out *= a - j
    return out


def virasoro_weight(n: int, k: int, convention: str = "residue") -> Fraction:
    """Weight of ``w^{n-k}`` multiplying the ``(z-w)^{-k-2}`` coefficient in ``[L_n, Φ]``.

    ``'residue'``: ``C(n+1, k+1) = (n+1)_{k+1}/(k+1)!`` (the value of the
    contour integral, valid for all integers n).  ``'falling'``: the bare
    falling factorial ``(n+1)!/(n-k)!``, set to zero for ``k ≥ n+1``; the two
    agree for ``n ∈ {-1, 0}``.
    """
    if convention == "falling":
        if k >= n + 1:
            return Fraction(0)
        return Fraction(falling(n + 1, k + 1))
    if convention == "residue":
        return Fraction(falling(n + 1, k + 1), _fact(k + 1))
    raise ValueError(convention)


def _fact(n: int) -> int:
    out = 1
    for j in range(2, n + 1):
        out *= j
    return out


def virasoro_commutator(g: LieAlgebraData, n: int, P: MultiPoly, lam: WeightTuple,
                        convention: str = "residue") -> Field:
    """``[L_n, Φ(w)]`` assembled from the T(z)Φ(w) decomposition; ``w`` is a formal variable."""
    r = lam.r
    phi = primary_field(g, P, lam)
    wv = MultiPoly.var(W)
    out = phi.derivative().scale(wv ** (n + 1))
    for k in range(r):
        c = virasoro_weight(n, k, convention)
        if c:
            out = out + dbar(g, P, lam, k).scale(wv ** (n - k) * c)
    for k in range(2 * r + 1):
        c = virasoro_weight(n, k, convention)
        if not c:
            continue
        s = MultiPoly()
        for p in range(max(0, k - r), min(k, r) + 1):
            s = s + MultiPoly.coerce(g.pair(lam.components[p], lam.components[k - p]))
        out = out + phi.scale(KAPPA_INV * s * Fraction(1, 2) * c * wv ** (n - k))
    for k in range(r + 1):
        c = virasoro_weight(n, k, convention)
        if c:
            out = out + phi.scale(KAPPA_INV * _rho_pair(g, lam.components[k]) * (k + 1) * c * wv ** (n - k))
    return out


def virasoro_by_residue(g: LieAlgebraData, n: int, P: MultiPoly, lam: WeightTuple) -> Field:
    """``∮ z^{n+1} T(z)Φ(w)`` straight from the Wick OPE (independent of the decomposition)."""
    phi = primary_field(g, P, lam)
    res = ope(free_field_T(g), phi, order=-1)
    wv = MultiPoly.var(W)
    out = Field(g)
    for m, f in res.terms.items():
        j = -m - 1  # u^m = u^{-j-1}; z^{n+1} contributes C(n+1, j) w^{n+1-j} u^j
        c = Fraction(falling(n + 1, j), _fact(j))
        if c:
            out = out + f.scale(wv ** (n + 1 - j) * c)
    return out


# ---- screening-current checks ---------------------------------------------

def screening_residuals(cur: Currents) -> dict:
    """Residuals of the current/screening OPEs against the expected singular parts."""
    g = cur.g
    out = {}
    for i in range(g.rank):
        for j in range(g.rank):
            s = cur.screening[j]
            out[("E", i, j)] = ope(cur.E[i], s, order=-1)
            out[("H", i, j)] = ope(cur.H[i], s, order=-1)
            got = ope(cur.F[i], s, order=-1)
            if i == j:
                v = Field.vertex_operator(g, simple_vertex(g, j))
                # κ·(2/α_i²)·∂_w(v/(z-w)); α_i² = 2 in series A
                want = OPEResult(g, {-2: v.scale(kappavar()), -1: v.derivative().scale(kappavar())}, -1)
            else:
                want = OPEResult(g, {}, -1)
            out[("F", i, j)] = got - want
    for j in range(g.rank):
        s = cur.screening[j]
        got = ope(cur.T, s, order=-1)
        want = OPEResult(g, {-2: s, -1: s.derivative()}, -1)
        out[("T", j)] = got - want
    return out
