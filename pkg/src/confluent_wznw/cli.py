"""Command-line entry point: ``confluent-wznw <command> [options]``.

Exit codes: 0 success, 1 a checked identity failed, 2 usage or config error,
3 unsupported input (e.g. an algebra outside series A).
"""

from __future__ import annotations

import argparse
import itertools
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction

from .correlators import (
    ConvergenceError,
    InsertionConfig,
    PrimaryInsertion,
    Ray,
    Segment,
    integrate,
    omega_sl2_closed,
    omega_ward,
    omega_wick,
)
from .diffreal import compute_P, realize
from .fields import Field, ope
from .lie import TruncatedElement, UnsupportedAlgebraError, parse_algebra, parse_element
from .poly import MultiPoly, format_poly, xvar
from .verma import WeightTuple, matrix_element
from .wakimoto import (
    MissingRCoefficientsError,
    mode_action,
    primary_field,
    solved_currents,
    t_phi_ope,
    virasoro_by_residue,
    virasoro_commutator,
)

EXIT_OK, EXIT_CHECK, EXIT_USAGE, EXIT_UNSUPPORTED = 0, 1, 2, 3
THREADS_ENV = "CONFLUENT_WZNW_THREADS"


class ConfigError(ValueError):
    pass


# ---- config files ---------------------------------------------------------

def read_config(path: str) -> dict:
    """Flat ``key = value`` lines; repeated keys accumulate into lists; ``#`` starts a comment."""
    out: dict = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
            key, value = (s.strip() for s in line.split("=", 1))
            out.setdefault(key.replace("-", "_"), []).append(value)
    return out


def _merge_config(args, list_keys=()) -> None:
    """Fill unset argparse attributes from ``--config``; flags win over the file."""
    if not getattr(args, "config", None):
        return
    data = read_config(args.config)
    for key, values in data.items():
        if not hasattr(args, key):
            raise ConfigError(f"unknown config key {key!r}")
        current = getattr(args, key)
        if key in list_keys:
            if not current:
                setattr(args, key, values)
        elif current is None or current == argparse.SUPPRESS:
            if len(values) > 1:
                raise ConfigError(f"config key {key!r} given more than once")
            setattr(args, key, values[0])


def _parse_number(text: str):
    text = text.strip()
    try:
        return Fraction(text)
    except ValueError:
        try:
            return complex(text.replace("i", "j"))
        except ValueError:
            raise ConfigError(f"not a number: {text!r}") from None


def parse_weights(g, r: int, text: str | None, label: int = 0) -> WeightTuple:
    """``'symbolic'`` (default) or ``'λ_0 ; λ_1 ; …'`` with comma-separated Dynkin labels."""
    if text is None or text.strip() in ("", "symbolic"):
        return WeightTuple.symbolic(g, r, label)
    rows = [row for row in text.split(";")]
    if len(rows) != r + 1:
        raise ConfigError(f"lambda: expected {r + 1} weights separated by ';', got {len(rows)}")
    values = []
    for row in rows:
        comps = [c for c in row.split(",")]
        if len(comps) != g.rank:
            raise ConfigError(f"lambda: each weight needs {g.rank} component(s), got {row!r}")
        values.append([_parse_number(c) for c in comps])
    if any(isinstance(v, complex) for row in values for v in row):
        raise ConfigError("lambda: weights must be rational")
    return WeightTuple.numeric(values)


def parse_word(g, r: int, text: str, kind: str = "f", field_name: str = "word") -> list:
    """Tokens separated by spaces/commas: a bare mode (first simple root) or ``f11[1]``-style letters."""
    letters = []
    for tok in text.replace(",", " ").split():
        if tok.lstrip("-").isdigit():
            letters.append((g.simple_root_indices[0], int(tok)))
            continue
        try:
            el = parse_element(g, tok, r)
        except ValueError as exc:
            raise ConfigError(f"{field_name}: {exc}") from None
        if el.key[0] != kind:
            raise ConfigError(f"{field_name}: {tok!r} is not an {kind}-letter")
        letters.append((el.key[1], el.mode))
    for _, p in letters:
        if not 0 <= p <= r:
            raise ConfigError(f"{field_name}: mode {p} outside 0..{r}")
    return letters


def parse_primary(g, text: str, label: int) -> PrimaryInsertion:
    """``'r=1 word=f[0],f[1] lambda=1;2'`` (fields separated by whitespace)."""
    fields = {}
    for part in text.split():
        if "=" not in part:
            raise ConfigError(f"primary: expected key=value, got {part!r}")
        k, v = part.split("=", 1)
        fields[k] = v
    unknown = set(fields) - {"r", "word", "lambda"}
    if unknown:
        raise ConfigError(f"primary: unknown field(s) {sorted(unknown)}")
    r = int(fields.get("r", "0"))
    lam = parse_weights(g, r, fields.get("lambda"), label)
    word = parse_word(g, r, fields.get("word", ""), field_name="primary word")
    return PrimaryInsertion.from_word(g, lam, word)


def parse_cycle(text: str):
    """``ray:start:direction`` or ``segment:start:end``."""
    parts = text.split(":")
    if len(parts) != 3 or parts[0] not in ("ray", "segment"):
        raise ConfigError(f"cycle: expected 'ray:start:direction' or 'segment:a:b', got {text!r}")
    a, b = (complex(_parse_number(p)) for p in parts[1:])
    return Ray(a, b) if parts[0] == "ray" else Segment(a, b)


# ---- output ---------------------------------------------------------------

def thread_count() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"{THREADS_ENV}: expected a positive integer, got {raw!r}") from None
    if n < 1:
        raise ConfigError(f"{THREADS_ENV}: expected a positive integer, got {raw!r}")
    return n


def emit(payload: dict, fmt: str, text_lines: list) -> str:
    if fmt == "json":
        return json.dumps(payload, ensure_ascii=False, sort_keys=True, indent=2)
    return "\n".join(text_lines)


def _complex_json(z: complex) -> list:
    return [z.real, z.imag]


# ---- commands -------------------------------------------------------------

def cmd_algebra(args):
    g = parse_algebra(args.algebra)
    data = json.loads(g.to_json())
    lines = [f"{k}: {data[k]}" for k in sorted(data)]
    return data, lines, EXIT_OK


def cmd_realize(args):
    g = parse_algebra(args.algebra)
    el = parse_element(g, args.element, args.r)
    op = realize(g, el, WeightTuple.symbolic(g, args.r))
    text = str(op)
    return {"algebra": g.name, "r": args.r, "element": args.element, "operator": text}, [text], EXIT_OK


def cmd_matrix_element(args):
    g = parse_algebra(args.algebra)
    lam = parse_weights(g, args.r, args.weights)
    e = parse_word(g, args.r, args.eword or "", "e", "eword")
    f = parse_word(g, args.r, args.fword or "", "f", "fword")
    val = matrix_element(g, [p for _, p in e], [p for _, p in f], lam,
                         e_roots=[a for a, _ in e], f_roots=[a for a, _ in f])
    text = format_poly(val)
    return {"algebra": g.name, "r": args.r, "value": text}, [text], EXIT_OK


def _named_field(g, cur, name: str) -> Field:
    name = name.strip()
    try:
        if name.startswith("s"):
            i = int(name[1:] or 1) - 1
            if not 0 <= i < g.rank:
                raise IndexError(i)
            return cur.screening[i]
        field = cur.current(name)
    except (KeyError, IndexError, ValueError):
        raise ConfigError(f"unknown field {name!r}; use E1, H1, F1, s1 or T") from None
    return field


def cmd_ope(args):
    g = parse_algebra(args.algebra)
    cur, sol = solved_currents(g)
    A = _named_field(g, cur, args.left)
    B = _named_field(g, cur, args.right)
    res = ope(A, B, order=args.order)
    lines = res.lines() or ["0"]
    payload = {
        "algebra": g.name,
        "left": args.left,
        "right": args.right,
        "order": args.order,
        "offset": format_poly(res.offset),
        "terms": {str(n): str(f) for n, f in sorted(res.terms.items())},
        "r_coefficients": {str(i + 1): format_poly(v) for i, v in sol.r_kappa.items()},
    }
    return payload, lines, EXIT_OK


def primary_suite(g, r: int, max_word: int = 3) -> dict:
    """Mode-action and T(z)Φ(w) checks for one truncation order; returns residual counts."""
    cur, _ = solved_currents(g)
    lam = WeightTuple.symbolic(g, r)
    fails: list = []
    n_mode = 0
    letters = [(a, p) for a in g.simple_root_indices for p in range(r + 1)]
    kinds = [("E", "e"), ("H", "h"), ("F", "f")]
    for L in range(max_word + 1):
        for word in itertools.product(letters, repeat=L):
            P = compute_P(g, list(word), lam)
            phi = primary_field(g, P, lam)
            for i in range(g.rank):
                root = g.simple_root_indices[i]
                for label, kind in kinds:
                    for p in range(r + 1):
                        idx = i if kind == "h" else root
                        D = realize(g, TruncatedElement((kind, idx), p, r), lam).apply(P)
                        got = mode_action(cur, (label, i), p, phi)
                        n_mode += 1
                        if got != primary_field(g, D, lam):
                            fails.append(f"{label}{i + 1}[{p}] on word {list(word)}")
                    for p in range(r + 1, r + 4):
                        n_mode += 1
                        if not mode_action(cur, (label, i), p, phi).is_zero():
                            fails.append(f"{label}{i + 1}[{p}] above truncation on word {list(word)}")
    n_t = 0
    xs = [MultiPoly.var(xvar(root, q)) for root in g.positive_roots for q in range(r + 1)]
    polys = [MultiPoly.const(1)] + xs + [a * b for i, a in enumerate(xs) for b in xs[i:]]
    for P in polys:
        n_t += 1
        rep = t_phi_ope(g, P, lam)
        if not rep.ok:
            fails.append(f"T(z)Φ(w) decomposition for P = {P}: {rep.residual}")
        phi = primary_field(g, P, lam)
        if virasoro_commutator(g, -1, P, lam) != phi.derivative():
            fails.append(f"[L_-1, Φ] for P = {P}")
        for n in range(-1, r + 2):
            if virasoro_commutator(g, n, P, lam) != virasoro_by_residue(g, n, P, lam):
                fails.append(f"[L_{n}, Φ] residue mismatch for P = {P}")
        if virasoro_commutator(g, 0, P, lam, "falling") != virasoro_by_residue(g, 0, P, lam):
            fails.append(f"[L_0, Φ] falling-factorial weights for P = {P}")
    return {"r": r, "mode_checks": n_mode, "tphi_checks": n_t, "failures": fails}


def cmd_primary_check(args):
    g = parse_algebra(args.algebra)
    with ThreadPoolExecutor(max_workers=thread_count()) as pool:
        reports = list(pool.map(lambda r: primary_suite(g, r, args.max_word), range(args.r + 1)))
    ok = all(not rep["failures"] for rep in reports)
    lines = []
    for rep in reports:
        status = "PASS" if not rep["failures"] else "FAIL"
        lines.append(f"r={rep['r']}: {status} mode-action checks={rep['mode_checks']} "
                     f"T-Phi checks={rep['tphi_checks']} failures={len(rep['failures'])}")
        lines.extend(f"  {f}" for f in rep["failures"])
    return {"algebra": g.name, "ok": ok, "suites": reports}, lines, EXIT_OK if ok else EXIT_CHECK


def _insertions(args, g, numeric_kappa=False):
    screens = []
    for s in args.screening or []:
        i = int(s) - 1
        if not 0 <= i < g.rank:
            raise ConfigError(f"screening: simple root {s} out of range 1..{g.rank}")
        screens.append(i)
    prims = [parse_primary(g, p, a + 1) for a, p in enumerate(args.primary or [])]
    kappa = None
    if numeric_kappa:
        if args.kappa is None:
            raise ConfigError("kappa: a numeric value is required")
        kappa = complex(_parse_number(str(args.kappa)))
    return InsertionConfig(g, tuple(screens), tuple(prims), kappa)


def cmd_correlator(args):
    g = parse_algebra(args.algebra)
    cfg = _insertions(args, g)
    methods = ["ward", "wick", "closed"] if args.method == "all" else [args.method]
    if "closed" in methods and g.rank != 1:
        if args.method == "closed":
            raise UnsupportedAlgebraError("the closed form is only available for sl2")
        methods.remove("closed")
    fns = {"ward": omega_ward, "wick": omega_wick, "closed": omega_sl2_closed}
    values = {m: fns[m](cfg) for m in methods}
    first = values[methods[0]]
    agree = all(v == first for v in values.values())
    payload = {"algebra": g.name, "omega": str(first), "methods": {m: str(v) for m, v in values.items()},
               "agree": agree}
    lines = [f"omega = {first}"]
    if len(methods) > 1:
        lines.append(f"methods {', '.join(methods)}: {'agree' if agree else 'DISAGREE'}")
    return payload, lines, EXIT_OK if agree else EXIT_CHECK


def cmd_integrate(args):
    g = parse_algebra(args.algebra)
    cfg = _insertions(args, g, numeric_kappa=True)
    zs = [complex(_parse_number(z)) for z in (args.z or [])]
    if len(zs) != cfg.n:
        raise ConfigError(f"z: expected {cfg.n} point(s), got {len(zs)}")
    cycles = [parse_cycle(c) for c in (args.cycle or [])]
    tol = float(args.tolerance)
    res = integrate(cfg, cycles, zs, tolerance=tol, parameterization=args.parameterization)
    payload = {"algebra": g.name, "value": _complex_json(res.value), "error": res.error,
               "diagnostics": res.diagnostics}
    lines = [f"value = {res.value.real:.15g} + {res.value.imag:.15g}i", f"error ≈ {res.error:.3g}"]
    lines += [f"  {d}" for d in res.diagnostics]
    return payload, lines, EXIT_OK


# ---- parser ---------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="confluent-wznw",
                                     description="Confluent primary fields via free-field realizations.")
    parser.add_argument("--format", choices=("text", "json"), default="text")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, r_default=0):
        p.add_argument("--algebra", default=None, help="A1, A2, …")
        p.add_argument("--r", type=int, default=r_default, help="truncation order")
        p.add_argument("--config", help="flat key = value file; repeated keys form lists")
        p.add_argument("--format", choices=("text", "json"), default=argparse.SUPPRESS)

    p = sub.add_parser("algebra", help="root data and Cartan matrix")
    common(p)
    p.set_defaults(fn=cmd_algebra)

    p = sub.add_parser("realize", help="differential operator of x[p]")
    common(p)
    p.add_argument("--element", required=False, help="e.g. f[1], h1[0], e11[2]")
    p.set_defaults(fn=cmd_realize)

    p = sub.add_parser("matrix-element", help="⟨λ| e-word f-word |λ⟩")
    common(p)
    p.add_argument("--eword", default=None, help="modes p_k … p_1 (written order) or letters")
    p.add_argument("--fword", default=None, help="modes q_1 … q_s or letters")
    p.add_argument("--weights", default=None, help="'symbolic' or 'λ_0 ; λ_1 ; …'")
    p.set_defaults(fn=cmd_matrix_element)

    p = sub.add_parser("ope", help="singular OPE of two named fields (E1, H1, F1, s1, T)")
    common(p)
    p.add_argument("--left", default=None)
    p.add_argument("--right", default=None)
    p.add_argument("--order", type=int, default=-1, help="keep (z-w)^n for n ≤ order")
    p.set_defaults(fn=cmd_ope)

    p = sub.add_parser("primary-check", help="mode-action and T(z)Φ(w) suites")
    common(p)
    p.add_argument("--max-word", dest="max_word", type=int, default=3)
    p.set_defaults(fn=cmd_primary_check)

    for name, fn, help_ in (("correlator", cmd_correlator, "βγ correlator ω"),
                            ("integrate", cmd_integrate, "quadrature of Ψ·ω")):
        p = sub.add_parser(name, help=help_)
        common(p)
        p.add_argument("--screening", action="append", help="simple-root number (repeatable)")
        p.add_argument("--primary", action="append",
                       help="'r=1 word=f[0],f[1] lambda=1;2' (repeatable)")
        if name == "correlator":
            p.add_argument("--method", choices=("ward", "wick", "closed", "all"), default=None)
        else:
            p.add_argument("--kappa", default=None)
            p.add_argument("--z", action="append", help="primary position (repeatable)")
            p.add_argument("--cycle", action="append", help="ray:start:direction or segment:a:b")
            p.add_argument("--tolerance", default=None)
            p.add_argument("--parameterization", default=None,
                           choices=("auto", "rational", "exp", "linear", "cosine"))
        p.set_defaults(fn=fn)
    return parser


_DEFAULTS = {"algebra": None, "method": "all", "tolerance": "1e-10", "parameterization": "auto",
             "order": -1}
_LIST_KEYS = ("screening", "primary", "z", "cycle")
_REQUIRED = {"realize": ("element",), "ope": ("left", "right")}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        _merge_config(args, _LIST_KEYS)
        for key, value in _DEFAULTS.items():
            if hasattr(args, key) and getattr(args, key) is None:
                setattr(args, key, value)
        if isinstance(args.r, str):
            args.r = int(args.r)
        if args.algebra is None:
            raise ConfigError("algebra: required (e.g. --algebra A1)")
        for key in _REQUIRED.get(args.command, ()):
            if getattr(args, key, None) is None:
                raise ConfigError(f"{key}: required for {args.command}")
        if args.r < 0:
            raise ConfigError("r: must be non-negative")
        payload, lines, code = args.fn(args)
    except UnsupportedAlgebraError as exc:
        print(f"error: unsupported input: {exc}", file=sys.stderr)
        return EXIT_UNSUPPORTED
    except (ConfigError, ConvergenceError, MissingRCoefficientsError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    payload = {"command": args.command, **payload}
    print(emit(payload, args.format, lines))
    return code


if __name__ == "__main__":
    sys.exit(main())
