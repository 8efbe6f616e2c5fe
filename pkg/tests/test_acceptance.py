"""Acceptance suite: one check per criterion, each printing a single PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -s`` or directly as a script.
"""

import cmath
import itertools
import random
import sys
import time
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from cases import confluent_closed_form, confluent_config, gauss_residual  # noqa: E402
from confluent_wznw import (  # noqa: E402
    InsertionConfig,
    PrimaryInsertion,
    Ray,
    TruncatedElement,
    WeightTuple,
    build_algebra,
    compute_P,
    integrate,
    matrix_element,
    mode_action,
    omega_sl2_closed,
    omega_ward,
    omega_wick,
    primary_field,
    psi_eval,
    realize,
    rep_check,
    screening_constant_term,
    solved_currents,
    t_phi_ope,
    truncated_basis,
    virasoro_by_residue,
    virasoro_commutator,
)
from confluent_wznw.poly import K, MultiPoly, xvar  # noqa: E402
from confluent_wznw.wakimoto import screening_residuals, wakimoto_residuals  # noqa: E402

SL2 = build_algebra("A", 1)
SL3 = build_algebra("A", 2)


def _rep_property():
    checked = 0
    for g in (SL2, SL3):
        for r in range(4):
            lam = WeightTuple.symbolic(g, r)
            basis = truncated_basis(g, r)
            for i, a in enumerate(basis):
                for b in basis[i + 1:]:
                    ok, disc = rep_check(g, a, b, lam)
                    checked += 1
                    if not ok:
                        return False, f"[{a}, {b}] at r={r}: {disc}"
    return True, f"{checked} generator pairs, sl2 and sl3, r ≤ 3"


def _wakimoto_ope():
    for g, pairs in ((SL2, ("HH", "HE", "HF", "EF")), (SL3, ("HH", "HE", "HF"))):
        cur, sol = solved_currents(g)
        res = wakimoto_residuals(cur, sol.kappa_substitution()[K], pairs)
        bad = [k for k, v in res.items() if not v.is_zero()]
        if bad:
            return False, f"{g.name}: nonzero residuals {bad}"
    return True, "sl2 HH/HE/HF/EF and sl3 HH/HE/HF exact in κ"


def _screening_ope():
    for g in (SL2, SL3):
        cur, _ = solved_currents(g)
        bad = [k for k, v in screening_residuals(cur).items() if not v.is_zero()]
        if bad:
            return False, f"{g.name}: {bad}"
    return True, "E·s, H·s regular; F·s and T·s singular parts exact (sl2, sl3)"


def _mode_action():
    g = SL2
    cur, _ = solved_currents(g)
    checks = 0
    for r in range(3):
        lam = WeightTuple.symbolic(g, r)
        for L in range(4):
            for modes in itertools.product(range(r + 1), repeat=L):
                P = compute_P(g, [(0, q) for q in modes], lam)
                phi = primary_field(g, P, lam)
                for label, kind in (("E", "e"), ("H", "h"), ("F", "f")):
                    for p in range(r + 1):
                        D = realize(g, TruncatedElement((kind, 0), p, r), lam).apply(P)
                        checks += 1
                        if mode_action(cur, label, p, phi) != primary_field(g, D, lam):
                            return False, f"{label}[{p}] on f-word {modes}, r={r}"
                    for n in range(r + 1, r + 4):
                        checks += 1
                        if not mode_action(cur, label, n, phi).is_zero():
                            return False, f"{label}[{n}] does not annihilate f-word {modes}, r={r}"
            # vacuum: e[p] kills, h[p] acts by λ_p
            v = primary_field(g, MultiPoly.const(1), lam)
            for p in range(r + 1):
                checks += 2
                if not mode_action(cur, "E", p, v).is_zero():
                    return False, f"E[{p}] on the vacuum, r={r}"
                if mode_action(cur, "H", p, v) != v.scale(lam.component(p, 1)):
                    return False, f"H[{p}] eigenvalue, r={r}"
    return True, f"{checks} mode checks, f-words ≤ 3, r ≤ 2"


def _t_phi():
    g = SL2
    checks = 0
    for r in range(3):
        lam = WeightTuple.symbolic(g, r)
        xs = [MultiPoly.var(xvar((1,), q)) for q in range(r + 1)]
        polys = [MultiPoly.const(1)] + xs + [a * b for i, a in enumerate(xs) for b in xs[i:]]
        for P in polys:
            checks += 1
            rep = t_phi_ope(g, P, lam)
            if not rep.ok:
                return False, f"decomposition residual for P={P}, r={r}: {rep.residual}"
            phi = primary_field(g, P, lam)
            if virasoro_commutator(g, -1, P, lam) != phi.derivative():
                return False, f"[L_-1, Φ] ≠ ∂Φ for P={P}, r={r}"
            n0 = virasoro_commutator(g, 0, P, lam, "falling")
            if n0 != virasoro_by_residue(g, 0, P, lam) or n0 != virasoro_commutator(g, 0, P, lam):
                return False, f"[L_0, Φ] weights for P={P}, r={r}"
    return True, f"{checks} primaries, deg P ≤ 2, r ≤ 2"


def _sl2_grid():
    words = {r: [w for L in range(3) for w in itertools.product(range(r + 1), repeat=L)] for r in range(3)}
    prims = {}
    for r in range(3):
        for label in range(2):
            lam = WeightTuple.symbolic(SL2, r, label)
            for w in words[r]:
                prims[(r, w, label)] = PrimaryInsertion.from_word(SL2, lam, [(0, q) for q in w])
    singles = [(r, w) for r in range(3) for w in words[r]]
    count = nonzero = 0
    for n in (1, 2):
        for combo in itertools.product(singles, repeat=n):
            insertions = tuple(prims[(r, w, a)] for a, (r, w) in enumerate(combo))
            for m in range(4):
                cfg = InsertionConfig(SL2, (0,) * m, insertions)
                w1, w2, w3 = omega_ward(cfg), omega_wick(cfg), omega_sl2_closed(cfg)
                count += 1
                if not (w1 == w2 == w3):
                    return False, count, nonzero, f"disagreement at m={m}, primaries {combo}"
                nonzero += not w1.is_zero()
    return True, count, nonzero, ""


def _balanced_letters(rng, screens):
    """f-letters whose roots add up to the screening roots (the only way ω can be nonzero)."""
    simple = [SL3.simple_root_indices[i] for i in screens]
    if len(screens) == 2 and set(screens) == {0, 1} and rng.random() < 0.5:
        return [SL3.root_index((1, 1))]
    return simple


def _sl3_random(seed=20240611, samples=60):
    rng = random.Random(seed)
    f_roots = list(range(SL3.n_roots))
    count = nonzero = 0
    while count < samples:
        m = rng.randint(1, 2)
        n = rng.randint(1, 2)
        screens = tuple(rng.randint(0, 1) for _ in range(m))
        rs = [rng.randint(0, 2) for _ in range(n)]
        words = [[] for _ in range(n)]
        if rng.random() < 0.75:
            for root in _balanced_letters(rng, screens):
                a = rng.randrange(n)
                words[a].append((root, rng.randint(0, rs[a])))
        else:
            for a in range(n):
                words[a] = [(rng.choice(f_roots), rng.randint(0, rs[a])) for _ in range(rng.randint(0, 2))]
        insertions = tuple(PrimaryInsertion.from_word(SL3, WeightTuple.symbolic(SL3, rs[a], a), words[a])
                           for a in range(n))
        cfg = InsertionConfig(SL3, screens, insertions)
        w1 = omega_ward(cfg)
        count += 1
        if w1 != omega_wick(cfg):
            return False, count, nonzero, f"screenings {screens}, words {words}"
        nonzero += not w1.is_zero()
    return True, count, nonzero, ""


def _correlators():
    ok, n2, nz2, why = _sl2_grid()
    if not ok:
        return False, f"sl2: {why}"
    ok, n3, nz3, why = _sl3_random()
    if not ok:
        return False, f"sl3: {why}"
    return True, f"sl2 grid {n2} configs ({nz2} nonzero), sl3 random {n3} configs ({nz3} nonzero)"


def _constant_terms():
    g = SL2
    checks = 0
    for r in range(3):
        lam = WeightTuple.symbolic(g, r)
        for k in range(4):
            for es in itertools.product(range(r + 1), repeat=k):
                for L in range(4):
                    for fs in itertools.product(range(r + 1), repeat=L):
                        ct = screening_constant_term(g, es, [(0, q) for q in fs], lam)
                        checks += 1
                        if ct != matrix_element(g, list(reversed(es)), list(fs), lam):
                            return False, f"e-modes {es}, f-modes {fs}, r={r}"
    return True, f"{checks} e-word/f-word pairs, r ≤ 2"


def _random_psi_config(rng):
    g = rng.choice((SL2, SL3))
    m, n = rng.randint(0, 2), rng.randint(1, 2)
    m = max(m, 2 - n)  # at least one pair of points
    prims = []
    for _ in range(n):
        r = rng.randint(0, 2)
        vals = [[round(rng.uniform(-2, 2), 3) for _ in range(g.rank)] for _ in range(r + 1)]
        prims.append(PrimaryInsertion(WeightTuple.numeric([[str(v) for v in row] for row in vals]),
                                      MultiPoly.const(1)))
    screens = tuple(rng.randrange(g.rank) for _ in range(m))
    kappa = rng.choice((-1, 1)) * rng.uniform(1.5, 5)
    return InsertionConfig(g, screens, tuple(prims), kappa)


def _separated_points(rng, count, min_dist=1.0, cut_margin=0.05):
    while True:
        pts = [complex(rng.uniform(-4, 4), rng.uniform(-4, 4)) for _ in range(count)]
        diffs = [a - b for a, b in itertools.combinations(pts, 2)]
        # keep every difference away from the log branch cut so the stencil stays on one sheet
        if all(abs(d) >= min_dist and abs(cmath.phase(d)) < cmath.pi - cut_margin for d in diffs):
            return pts


def _psi_gradient(samples=100, h=1e-3, seed=7):
    rng = random.Random(seed)
    worst = 0.0
    for _ in range(samples):
        cfg = _random_psi_config(rng)
        pts = _separated_points(rng, cfg.m + cfg.n)
        base = psi_eval(cfg, pts[:cfg.m], pts[cfg.m:])
        grad = base.grad_t + base.grad_z

        def logv(k, d):
            q = list(pts)
            q[k] += d
            return psi_eval(cfg, q[:cfg.m], q[cfg.m:]).log_value

        fd = [(logv(k, -2 * h) - 8 * logv(k, -h) + 8 * logv(k, h) - logv(k, 2 * h)) / (12 * h)
              for k in range(len(pts))]
        num = sum(abs(a - b) ** 2 for a, b in zip(fd, grad)) ** 0.5
        den = sum(abs(b) ** 2 for b in grad) ** 0.5
        worst = max(worst, num / den)
    return worst < 1e-8, f"{samples} configs, worst relative error {worst:.2e}"


def _hypergeometric():
    res = gauss_residual(SL2)
    if not res < 1e-6:
        return False, f"Gauss ODE residual {res:.2e}"
    cfg = confluent_config(SL2)
    ref = confluent_closed_form()
    values = [integrate(cfg, [Ray(0.4, 1)], [0.4], tolerance=1e-12, parameterization=p).value
              for p in ("rational", "exp", "linear")]
    values += [integrate(cfg, [Ray(0.4, cmath.exp(1j * a))], [0.4], tolerance=1e-12).value
               for a in (-0.3, 0.3)]
    spread = max(abs(v - values[0]) for v in values) / abs(values[0])
    off = abs(values[0] - ref) / abs(ref)
    ok = spread < 1e-5 and off < 1e-5
    return ok, f"Gauss ODE residual {res:.1e}; r=1 spread {spread:.1e}, vs closed form {off:.1e}"


CHECKS = [
    (1, "representation property", _rep_property),
    (2, "Wakimoto OPE relations", _wakimoto_ope),
    (3, "screening current OPEs", _screening_ope),
    (4, "mode action on primaries", _mode_action),
    (5, "T(z)Φ(w) and Virasoro action", _t_phi),
    (6, "correlator triple agreement", _correlators),
    (7, "constant terms vs matrix elements", _constant_terms),
    (8, "master-function gradient", _psi_gradient),
    (9, "hypergeometric reduction and confluent stability", _hypergeometric),
]


def run_check(number: int):
    _, title, fn = CHECKS[number - 1]
    start = time.perf_counter()
    ok, detail = fn()
    line = f"criterion {number} {title}: {'PASS' if ok else 'FAIL'} ({detail}; {time.perf_counter() - start:.1f}s)"
    return ok, line


@pytest.mark.parametrize("number", [c[0] for c in CHECKS], ids=[c[1].replace(" ", "_") for c in CHECKS])
def test_acceptance(number, capsys):
    ok, line = run_check(number)
    with capsys.disabled():
        print("\n" + line)
    assert ok, line


if __name__ == "__main__":
    results = [run_check(c[0]) for c in CHECKS]
    for _, line in results:
        print(line)
    sys.exit(0 if all(ok for ok, _ in results) else 1)
