"""Confluent Verma modules M(λ) of the truncated current algebra.

Vectors are stored in PBW form: ``{ordered tuple of f-letters: coefficient}``
applied to the highest-weight vector.  The relations used are
``e_α[p] v = 0`` and ``h[p] v = λ_p(h) v``; everything else is commutation.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .lie import LieAlgebraData, TruncatedElement, truncated_bracket
from .poly import MultiPoly, lamvar


@dataclass(frozen=True)
class WeightTuple:
    """Weights ``(λ_0, …, λ_r)``; ``components[p][i] = λ_p(h_{i+1})``."""

    rank: int
    components: tuple

    @property
    def r(self) -> int:
        return len(self.components) - 1

    @classmethod
    def symbolic(cls, g: LieAlgebraData, r: int, label: int = 0) -> "WeightTuple":
        comps = tuple(tuple(MultiPoly.var(lamvar(label, p, i + 1, g.rank)) for i in range(g.rank))
                      for p in range(r + 1))
        return cls(g.rank, comps)

    @classmethod
    def numeric(cls, values) -> "WeightTuple":
        """``values[p][i]``; plain numbers are kept exact when rational."""
        comps = []
        for row in values:
            if not hasattr(row, "__len__"):
                row = (row,)
            comps.append(tuple(MultiPoly.const(Fraction(v)) if not isinstance(v, MultiPoly) else v
                               for v in row))
        return cls(len(comps[0]), tuple(comps))

    def component(self, p: int, i: int):
        """``λ_p^i`` with 1-based ``i`` as in the literature."""
        return self.components[p][i - 1]

    def weight(self, p: int) -> tuple:
        return self.components[p]

    def variables(self) -> list:
        return sorted({v for row in self.components for c in row for v in c.variables()})

    def is_regular(self, g: LieAlgebraData) -> bool:
        """Regularity of the top weight: ``(λ_r, α) ≠ 0`` for every positive root.

        Only meaningful for numeric weights; symbolic weights are treated as
        generic and reported regular.  Never enforced by any computation here.
        """
        top = self.components[-1]
        if not all(c.is_constant() for c in top):
            return True
        return g.is_regular([c.constant_value() for c in top])

    def substitute(self, values: dict) -> "WeightTuple":
        return WeightTuple(self.rank, tuple(tuple(c.subs(values) for c in row)
                                            for row in self.components))


def f_order_key(g: LieAlgebraData, letter: TruncatedElement):
    """PBW order: root height, then root lex order, then mode ascending."""
    return (letter.key[1], letter.mode)


class VermaModule:
    """Left action of g_(r) on PBW monomials of M(λ), memoized."""

    def __init__(self, g: LieAlgebraData, lam: WeightTuple):
        self.g = g
        self.lam = lam
        self.r = lam.r
        self._cache: dict = {}

    def apply(self, y: TruncatedElement, mono: tuple) -> dict:
        key = (y, mono)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        out = self._apply(y, mono)
        self._cache[key] = out
        return out

    def _apply(self, y: TruncatedElement, mono: tuple) -> dict:
        g = self.g
        if y.r != self.r:
            raise ValueError(f"letter {y} does not belong to g_({self.r})")
        kind = y.key[0]
        if kind == "f" and (not mono or f_order_key(g, y) <= f_order_key(g, mono[0])):
            return {(y,) + mono: MultiPoly.const(1)}
        if not mono:
            if kind == "e":
                return {}
            return {(): self.lam.components[y.mode][y.key[1]]}
        first, rest = mono[0], mono[1:]
        out: dict = {}
        # y·first·rest = first·(y·rest) + [y, first]·rest
        for m, c in self.apply(y, rest).items():
            for m2, c2 in self.apply(first, m).items():
                _accumulate(out, m2, c * c2)
        for z, cz in truncated_bracket(g, y, first).items():
            for m, c in self.apply(z, rest).items():
                _accumulate(out, m, c * cz)
        return {m: c for m, c in out.items() if not c.is_zero()}

    def act(self, word, vector: dict | None = None) -> dict:
        """Apply ``word`` (leftmost letter acts last) to ``vector`` (default ``v_λ``)."""
        vec = {(): MultiPoly.const(1)} if vector is None else vector
        for y in reversed(list(word)):
            new: dict = {}
            for m, c in vec.items():
                for m2, c2 in self.apply(y, m).items():
                    _accumulate(new, m2, c * c2)
            vec = {m: c for m, c in new.items() if not c.is_zero()}
        return vec


def _accumulate(out: dict, key, value) -> None:
    cur = out.get(key)
    out[key] = value if cur is None else cur + value


_modules: dict = {}


def _module(g: LieAlgebraData, lam: WeightTuple) -> VermaModule:
    key = (g.name, lam)
    mod = _modules.get(key)
    if mod is None:
        if len(_modules) > 256:
            _modules.clear()
        mod = _modules[key] = VermaModule(g, lam)
    return mod


def normal_order(g: LieAlgebraData, word, lam: WeightTuple) -> dict:
    """Rewrite ``word · v_λ`` in PBW form ``{tuple of f-letters: coefficient}``."""
    return _module(g, lam).act(word)


def _letters(g, kind, modes, roots, r):
    out = []
    for idx, p in enumerate(modes):
        if isinstance(p, TruncatedElement):
            out.append(p)
            continue
        root = roots[idx] if roots is not None else 0
        if isinstance(root, tuple):
            root = g.root_index(root)
        out.append(TruncatedElement((kind, root), p, r))
    return out


def matrix_element(g: LieAlgebraData, eword, fword, lam: WeightTuple,
                   e_roots=None, f_roots=None) -> MultiPoly:
    """``⟨λ| e[p_k]⋯e[p_1] f[q_1]⋯f[q_s] |λ⟩``.

    ``eword`` lists the modes in the written (left-to-right) order
    ``p_k, …, p_1``; ``fword`` lists ``q_1, …, q_s``.  Roots default to the
    first simple root; pass root indices or simple-root coordinate tuples to
    override, or give :class:`TruncatedElement` letters directly.
    """
    r = lam.r
    word = _letters(g, "e", eword, e_roots, r) + _letters(g, "f", fword, f_roots, r)
    return normal_order(g, word, lam).get((), MultiPoly())


def vacuum_coefficient(g: LieAlgebraData, word, lam: WeightTuple) -> MultiPoly:
    """Coefficient of ``v_λ`` in ``word · v_λ`` for an arbitrary word."""
    return normal_order(g, word, lam).get((), MultiPoly())
