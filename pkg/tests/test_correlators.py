import cmath
import itertools
import random
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from confluent_wznw import (
    ConvergenceError,
    CorrelatorValue,
    InsertionConfig,
    PrimaryInsertion,
    Ray,
    Segment,
    SingularConfigurationError,
    UnsupportedAlgebraError,
    WeightTuple,
    index_partitions,
    integrate,
    omega_sl2_closed,
    omega_ward,
    omega_wick,
    psi_eval,
)
from confluent_wznw.poly import MultiPoly, tvar, xvar, zvar

from cases import confluent_closed_form, confluent_config, gauss_F, gauss_parameters, GAUSS_L2

T1, T2, Z1, Z2 = tvar(1), tvar(2), zvar(1), zvar(2)


def sym_primary(g, r, word, label=0):
    return PrimaryInsertion.from_word(g, WeightTuple.symbolic(g, r, label), word)


# ---- CorrelatorValue -------------------------------------------------------

def test_orientation_sign():
    a = CorrelatorValue.monomial([(Z1, T1, 1)])
    b = CorrelatorValue.monomial([(T1, Z1, 1)])
    assert a == -b
    assert CorrelatorValue.monomial([(Z1, T1, 2)]) == CorrelatorValue.monomial([(T1, Z1, 2)])


def test_partial_fractions_identity():
    # 1/((t-z1)(t-z2)) = (1/(z1-z2)) (1/(t-z1) - 1/(t-z2))
    lhs = CorrelatorValue.monomial([(T1, Z1, 1), (T1, Z2, 1)])
    rhs = (CorrelatorValue.monomial([(T1, Z1, 1)]) - CorrelatorValue.monomial([(T1, Z2, 1)])) \
        * CorrelatorValue.monomial([(Z1, Z2, 1)])
    assert lhs == rhs
    assert not lhs.is_zero()


def test_vanishing_factor_is_singular():
    with pytest.raises(SingularConfigurationError):
        CorrelatorValue.monomial([(T1, T1, 1)])


def test_evaluate_and_str():
    v = CorrelatorValue.monomial([(T1, Z1, 2)], 3)
    assert v.evaluate({T1: 2.0, Z1: 0.5}) == pytest.approx(3 / 2.25)
    assert str(v) == "(3) / ((t1 - z1)^2)"
    assert str(CorrelatorValue()) == "0"
    assert v.degree_in(T1) == -2


# ---- Ψ ------------------------------------------------------------------------

def test_psi_two_primaries(sl2):
    lam1 = WeightTuple.numeric([["1/2"]])
    lam2 = WeightTuple.numeric([["3/2"]])
    cfg = InsertionConfig(sl2, (), (PrimaryInsertion(lam1, MultiPoly.const(1)),
                                    PrimaryInsertion(lam2, MultiPoly.const(1))), 2)
    val = psi_eval(cfg, [], [2.0, 0.5])
    # (z1-z2)^{(λ1,λ2)/κ}, (λ1,λ2) = λ1λ2/2
    assert val.value == pytest.approx(1.5 ** (0.375 / 2))


def test_psi_screening_exponent(sl2):
    lam = WeightTuple.numeric([["2/5"]])
    cfg = InsertionConfig(sl2, (0, 0), (PrimaryInsertion(lam, MultiPoly.const(1)),), 3)
    v = psi_eval(cfg, [1.0, 3.0], [0.0])
    # t1 - t2 < 0, so the principal branch contributes e^{2πi/3}
    want = (-2.0 + 0j) ** (2 / 3) * 3.0 ** (-0.4 / 3)
    assert v.value == pytest.approx(want)


def test_psi_irregular_factor(sl2):
    lam = WeightTuple.numeric([["1"], ["2"]])
    cfg = InsertionConfig(sl2, (0,), (PrimaryInsertion(lam, MultiPoly.const(1)),), 4)
    t, z = 1.7, 0.2
    v = psi_eval(cfg, [t], [z])
    # (t-z)^{-λ0/κ} exp(λ1/(κ(t-z)))
    want = (t - z) ** (-1 / 4) * cmath.exp(2 / (4 * (t - z)))
    assert v.value == pytest.approx(want)


def test_psi_coincident_points(sl2):
    cfg = InsertionConfig(sl2, (0,), (PrimaryInsertion(WeightTuple.numeric([[1]]), MultiPoly.const(1)),), 3)
    with pytest.raises(SingularConfigurationError):
        psi_eval(cfg, [0.5], [0.5])


def test_psi_needs_numeric_kappa(sl2):
    cfg = InsertionConfig(sl2, (0,), (), None)
    with pytest.raises(ValueError):
        psi_eval(cfg, [1.0], [])


def test_psi_gradient_fd(sl3):
    lam = WeightTuple.numeric([["1/3", "2/7"], ["1/2", "-1/5"], ["1/4", "3/4"]])
    cfg = InsertionConfig(sl3, (0, 1), (PrimaryInsertion(lam, MultiPoly.const(1)),), "7/2")
    cfg = InsertionConfig(sl3, (0, 1), cfg.primaries, 3.5)
    pts = [1.3 + 0.4j, -0.7 + 1.1j, 0.2 - 0.3j]
    base = psi_eval(cfg, pts[:2], pts[2:])
    h = 1e-4
    for k in range(3):
        def logv(d):
            q = list(pts)
            q[k] += d
            return psi_eval(cfg, q[:2], q[2:]).log_value
        fd = (logv(-2 * h) - 8 * logv(-h) + 8 * logv(h) - logv(2 * h)) / (12 * h)
        grad = (base.grad_t + base.grad_z)[k]
        assert abs(fd - grad) < 1e-9 * max(1, abs(grad))


# ---- ω --------------------------------------------------------------------------

def test_no_screenings(sl2):
    cfg = InsertionConfig(sl2, (), (sym_primary(sl2, 1, []),))
    assert omega_ward(cfg) == CorrelatorValue.constant(1)
    cfg = InsertionConfig(sl2, (), (sym_primary(sl2, 1, [(0, 0)]),))
    assert omega_ward(cfg).is_zero()


def test_unmatched_gamma_vanishes(sl2):
    cfg = InsertionConfig(sl2, (0,), (sym_primary(sl2, 0, [(0, 0), (0, 0)]),))
    assert omega_ward(cfg).is_zero()
    assert omega_wick(cfg).is_zero()


def test_single_step(sl2):
    prim = sym_primary(sl2, 1, [(0, 1)])
    cfg = InsertionConfig(sl2, (0,), (prim,))
    lam1 = prim.lam.component(1, 1)
    # P = λ1·x0, so only the mode-0 pole survives
    assert prim.P == MultiPoly.var(xvar((1,), 0)) * lam1
    want = CorrelatorValue.monomial([(T1, Z1, 1)], lam1)
    assert omega_ward(cfg) == want
    assert omega_wick(cfg) == want
    assert omega_sl2_closed(cfg) == want


def test_two_screenings_r0(sl2):
    prim = sym_primary(sl2, 0, [(0, 0), (0, 0)])
    cfg = InsertionConfig(sl2, (0, 0), (prim,))
    l = prim.lam.component(0, 1)
    # [S S f f] = 2λ(λ-1); both t's attach to z
    want = CorrelatorValue.monomial([(T1, Z1, 1), (T2, Z1, 1)], l * (l - 1) * 2)
    assert omega_ward(cfg) == want
    assert omega_wick(cfg) == want
    assert omega_sl2_closed(cfg) == want


def test_closed_form_unsymmetrized_also_agrees(sl2):
    prims = (sym_primary(sl2, 1, [(0, 0), (0, 1)], 0), sym_primary(sl2, 0, [(0, 0)], 1))
    cfg = InsertionConfig(sl2, (0, 0, 0), prims)
    w = omega_ward(cfg)
    assert not w.is_zero()
    assert omega_sl2_closed(cfg, symmetrize=False) == w
    assert omega_sl2_closed(cfg) == w


def test_closed_form_is_sl2_only(sl3):
    cfg = InsertionConfig(sl3, (0,), (sym_primary(sl3, 0, [(0, 0)]),))
    with pytest.raises(UnsupportedAlgebraError):
        omega_sl2_closed(cfg)


def test_sl3_ward_matches_wick(sl3):
    f1, f2 = sl3.simple_root_indices
    prims = (sym_primary(sl3, 1, [(f1, 1)], 0), sym_primary(sl3, 1, [(f2, 0)], 1))
    cfg = InsertionConfig(sl3, (0, 1), prims)
    w = omega_ward(cfg)
    assert not w.is_zero()
    assert w == omega_wick(cfg)


def test_symmetric_in_equal_screenings(sl2):
    from confluent_wznw.poly import MultiPoly as MP

    prims = (sym_primary(sl2, 1, [(0, 0), (0, 1)]),)
    cfg = InsertionConfig(sl2, (0, 0), prims)
    w = omega_ward(cfg)
    swapped = CorrelatorValue()
    swap = {T1: T2, T2: T1}
    for key, c in w.terms.items():
        factors = [(swap.get(u, u), swap.get(v, v), e) for (u, v), e in key]
        swapped = swapped + CorrelatorValue.monomial(factors, c)
    assert swapped == w


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 4), st.integers(1, 3))
def test_index_partitions(m, n):
    parts = list(index_partitions(m, n))
    assert len(parts) == n ** m
    assert len(set(parts)) == len(parts)
    for p in parts:
        assert sorted(i for block in p for i in block) == list(range(1, m + 1))
        assert all(list(b) == sorted(b) for b in p)


# ---- integration ------------------------------------------------------------

def test_integrate_without_screenings(sl2):
    lam = WeightTuple.numeric([["1/2"]])
    prims = (PrimaryInsertion(lam, MultiPoly.const(1)), PrimaryInsertion(lam, MultiPoly.const(1)))
    cfg = InsertionConfig(sl2, (), prims, 2)
    res = integrate(cfg, [], [1.0, 0.0])
    assert res.value == pytest.approx(1.0)


def test_beta_integral_on_segment(sl2):
    """∫_0^1 t^{-λ1/κ}(t-1)^{-λ2/κ}·λ2/(t-1) dt against the Beta function."""
    l1, l2, k = Fraction(-3, 2), Fraction(-6, 5), 3
    p1 = PrimaryInsertion(WeightTuple.numeric([[l1]]), MultiPoly.const(1))
    p2 = PrimaryInsertion.from_word(sl2, WeightTuple.numeric([[l2]]), [(0, 0)])
    cfg = InsertionConfig(sl2, (0,), (p1, p2), k)
    res = integrate(cfg, [Segment(0, 1)], [0, 1], tolerance=1e-12)
    a, b = 1 - float(l1) / k, -float(l2) / k
    # (t-1)^{b-1} = e^{iπ(b-1)} (1-t)^{b-1} on the principal branch
    want = float(l2) * complex(mpmath.beta(a, b)) * cmath.exp(1j * cmath.pi * (b - 1))
    # screening-free prefactor (z1 - z2)^{(λ1,λ2)/κ} with z1 - z2 = -1
    want *= cmath.exp(1j * cmath.pi * float(l1 * l2 / 2) / k)
    assert res.value == pytest.approx(want, rel=1e-10)
    assert any("endpoint exponent" in n for n in res.diagnostics)


def test_gauss_reduction_value(sl2):
    a, b, c = gauss_parameters()
    want = GAUSS_L2 / b * mpmath.hyp2f1(a, b, c, 0.3)
    assert gauss_F(sl2, 0.3) == pytest.approx(complex(want), rel=1e-12)


def test_confluent_ray_closed_form(sl2):
    cfg = confluent_config(sl2)
    res = integrate(cfg, [Ray(0.4, 1)], [0.4], tolerance=1e-12)
    assert res.value == pytest.approx(confluent_closed_form(), rel=1e-9)
    assert any("damping" in n for n in res.diagnostics)


def test_undamped_direction_rejected(sl2):
    cfg = confluent_config(sl2)
    with pytest.raises(ConvergenceError):
        integrate(cfg, [Ray(0.4, -1)], [0.4])


def test_non_integrable_endpoint_rejected(sl2):
    p = PrimaryInsertion(WeightTuple.numeric([[6]]), MultiPoly.const(1))
    cfg = InsertionConfig(sl2, (0,), (p, p), 2)
    with pytest.raises(ConvergenceError):
        integrate(cfg, [Segment(0, 1)], [0, 1], omega=CorrelatorValue.constant(1))


def test_cycle_count_checked(sl2):
    cfg = InsertionConfig(sl2, (0,), (), 2)
    with pytest.raises(ValueError):
        integrate(cfg, [], [])
