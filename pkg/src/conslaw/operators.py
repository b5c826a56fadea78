"""Linearization, adjoint, Euler operators and the trilinear boundary terms.

Coefficients of a linearization are grouped by *slot*.  In the default
("full") grouping a slot is a field and the multi-index runs over all
directions including t.  With ``split_t=True`` a slot is a pair
``(field, j)`` standing for the t-derivative ``D_t^j u`` and multi-indices
are spatial only; this is the grouping used by the trilinear expressions
and by the scalar treatment.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from itertools import product
from math import comb, factorial
from typing import Mapping, Sequence

from .errors import NotNormalForm
from .jet import DiffPoly, JetVar, PDESystem, Q, jet_atom

# ---------------------------------------------------------------------------
# multi-index helpers


def _ord(ms: tuple) -> int:
    """Number of distinct orderings of a multiset."""
    out = factorial(len(ms))
    for c in Counter(ms).values():
        out //= factorial(c)
    return out


def _remove_one(ms: tuple, d: int) -> tuple:
    i = ms.index(d)
    return ms[:i] + ms[i + 1:]


def _minus(big: tuple, small: tuple) -> tuple:
    c = Counter(big)
    c.subtract(small)
    return tuple(sorted(c.elements()))


def sub_multisets(ms: tuple):
    counts = sorted(Counter(ms).items())
    for choice in product(*(range(c + 1) for _, c in counts)):
        yield tuple(d for (d, _), k in zip(counts, choice) for _ in range(k))


def multiset_binom(big: tuple, small: tuple) -> int:
    cb, cs = Counter(big), Counter(small)
    out = 1
    for d, k in cs.items():
        out *= comb(cb[d], k)
    return out


def multisets_upto(n: int, order: int, start: int = 1):
    """All multisets over directions start..n of size <= order, by size."""
    dirs = range(start, n + 1)
    out = [()]
    frontier = [()]
    for _ in range(order):
        nxt = []
        for ms in frontier:
            lo = ms[-1] if ms else start
            for d in dirs:
                if d >= lo:
                    nxt.append(ms + (d,))
        out.extend(nxt)
        frontier = nxt
    return out


# ---------------------------------------------------------------------------
# linearization coefficients


def coefficients(F: DiffPoly, fields: Sequence[str], split_t: bool = False,
                 subs: Mapping | None = None) -> dict:
    """``{slot: {alpha: dF/du_slot,alpha}}`` for jets of the given fields.

    ``subs`` is applied to every coefficient (used to evaluate the
    linearization at a shifted argument such as ``u_lambda``).
    """
    out: dict = {}
    fset = set(fields)
    for j in F.jets():
        if j.field not in fset:
            continue
        c = F.diff(j)
        if subs:
            c = c.subs(subs)
        if c.is_zero():
            continue
        if split_t:
            slot, alpha = (j.field, j.t_order), j.xs
        else:
            slot, alpha = (j.field, 0), j.alpha
        out.setdefault(slot, {})[alpha] = c
    return out


def _slot_value(V: Mapping[str, DiffPoly], slot) -> DiffPoly:
    fieldname, j = slot
    return V[fieldname].Dmulti((0,) * j)


def lin_apply(F: DiffPoly, fields: Sequence[str], V: Mapping[str, DiffPoly],
              subs: Mapping | None = None) -> DiffPoly:
    """``L_F V = sum dF/du^rho_alpha D_alpha V^rho``."""
    acc = DiffPoly()
    for slot, row in coefficients(F, fields, subs=subs).items():
        v = V[slot[0]]
        for alpha, c in row.items():
            acc = acc + c * v.Dmulti(alpha)
    return acc


def adj_apply(Fs: Sequence[DiffPoly], fields: Sequence[str], W: Sequence[DiffPoly],
              target: str, subs: Mapping | None = None) -> DiffPoly:
    """``(L*_F W)_target = sum_sigma sum_alpha (-D)_alpha (dF^sigma/du^target_alpha W_sigma)``."""
    acc = DiffPoly()
    for F, w in zip(Fs, W):
        if w.is_zero():
            continue
        row = coefficients(F, fields, subs=subs).get((target, 0), {})
        for alpha, c in row.items():
            term = (c * w).Dmulti(alpha)
            acc = acc + term if len(alpha) % 2 == 0 else acc - term
    return acc


# ---------------------------------------------------------------------------
# test functions and operator matrices


@dataclass(frozen=True)
class TestFunction:
    """Fresh dependent variable(s) used as the argument of an operator."""

    __test__ = False  # not a pytest class

    name: str = "V"
    role: str = "V"

    def field_names(self, N: int) -> list[str]:
        if N == 1:
            return [self.name]
        return [f"{self.name}{i + 1}" for i in range(N)]

    def components(self, N: int) -> list[DiffPoly]:
        return [DiffPoly.jet(f) for f in self.field_names(N)]


@dataclass
class OperatorMatrix:
    """``coeff[sigma][rho][alpha] = dg^sigma / du^rho_alpha``."""

    fields: tuple
    coeff: list

    @classmethod
    def of(cls, F: Sequence[DiffPoly], fields: Sequence[str]) -> "OperatorMatrix":
        rows = []
        for f in F:
            co = coefficients(f, fields)
            rows.append([co.get((r, 0), {}) for r in fields])
        return cls(tuple(fields), rows)

    def entry(self, s: int, r: int) -> dict:
        return self.coeff[s][r]

    def max_order(self) -> int:
        return max((len(a) for row in self.coeff for e in row for a in e), default=0)


def _args(sys: PDESystem, V) -> list[DiffPoly]:
    if isinstance(V, TestFunction):
        return V.components(sys.N)
    if isinstance(V, DiffPoly):
        return [V]
    return list(V)


def linearize(sys: PDESystem, V=TestFunction("V")) -> tuple[list[DiffPoly], OperatorMatrix]:
    """``(L_g V)^sigma`` for every equation, plus the coefficient matrix."""
    args = dict(zip(sys.fields, _args(sys, V)))
    out = [lin_apply(g, sys.fields, args) for g in sys.g]
    return out, OperatorMatrix.of(sys.g, sys.fields)


def adjointize(sys: PDESystem, W=TestFunction("W", "W")) -> list[DiffPoly]:
    """``(L*_g W)_sigma`` for every field sigma."""
    args = _args(sys, W)
    return [adj_apply(sys.g, sys.fields, args, f) for f in sys.fields]


# ---------------------------------------------------------------------------
# Euler operators


def euler(e: DiffPoly, fieldname: str) -> DiffPoly:
    """Full Euler operator (all directions including t)."""
    acc = DiffPoly()
    for j in sorted(e.jets()):
        if j.field != fieldname:
            continue
        term = e.diff(j).Dmulti(j.alpha)
        acc = acc + term if j.order % 2 == 0 else acc - term
    return acc


def _scalar_order(form) -> int:
    if isinstance(form, PDESystem):
        if not form.is_scalar and not form.is_first_order:
            raise ValueError("restricted Euler operator needs first-order or scalar form")
        return form.orders[0]
    return int(form)


def restricted_euler(e: DiffPoly, fieldname: str, form=1) -> DiffPoly:
    """Restricted Euler operator: spatial total derivatives only, acting on
    the jets ``D_t^{N-1} u_I`` (``N = 1`` for first-order systems)."""
    N = _scalar_order(form)
    acc = DiffPoly()
    for j in sorted(e.jets()):
        if j.field != fieldname:
            continue
        if j.t_order > N - 1:
            raise NotNormalForm(f"{j} exceeds the t-order bound {N - 1}")
        if j.t_order != N - 1:
            continue
        term = e.diff(j).Dmulti(j.xs)
        acc = acc + term if len(j.xs) % 2 == 0 else acc - term
    return acc


def is_divergence(e: DiffPoly, fields: Sequence[str] | None = None) -> bool:
    names = set(fields) if fields is not None else e.fields()
    names |= e.fields()
    return all(euler(e, f).is_zero() for f in sorted(names))


# ---------------------------------------------------------------------------
# trilinear boundary expressions


def _field_map(fields, V) -> dict:
    if isinstance(V, Mapping):
        return dict(V)
    return dict(zip(fields, V))


def trilinear_S(V, W: Sequence[DiffPoly], F: Sequence[DiffPoly], i: int,
                fields: Sequence[str], subs: Mapping | None = None) -> DiffPoly:
    """Flux ``S^i[V, W; F]`` with ``W_s L_F V - V L*_F W = D_i S^i``.

    Closed form: for each coefficient ``c = dF^s/d(D_t^j u^r)_I`` and each
    split ``I = {i} + J + K`` the term
    ``(-1)^|J| ord(J) ord(K)/ord(I) D_J(W_s c) D_K(D_t^j V^r)``, where
    ``ord`` counts the distinct orderings of a multiset.
    """
    Vm = _field_map(fields, V)
    acc = DiffPoly()
    vcache: dict = {}
    for F_s, W_s in zip(F, W):
        if W_s.is_zero():
            continue
        for slot, row in coefficients(F_s, fields, split_t=True, subs=subs).items():
            for I, c in row.items():
                if i not in I:
                    continue
                rest = _remove_one(I, i)
                wc = W_s * c
                ord_I = _ord(I)
                for J in sub_multisets(rest):
                    K = _minus(rest, J)
                    key = (slot, K)
                    vk = vcache.get(key)
                    if vk is None:
                        vk = _slot_value(Vm, slot).Dmulti(K)
                        vcache[key] = vk
                    if vk.is_zero():
                        continue
                    w = Q((-1) ** len(J) * _ord(J) * _ord(K), ord_I)
                    acc = acc + w * wc.Dmulti(J) * vk
    return acc


def trilinear_S_constructive(V, W: Sequence[DiffPoly], F: Sequence[DiffPoly],
                             fields: Sequence[str], n: int,
                             subs: Mapping | None = None) -> list[DiffPoly]:
    """All fluxes ``[S^1..S^n]`` by peeling one derivative at a time off
    ``W_s c D_I V`` (integration by parts in sorted index order)."""
    Vm = _field_map(fields, V)
    S = [DiffPoly() for _ in range(n + 1)]
    for F_s, W_s in zip(F, W):
        for slot, row in coefficients(F_s, fields, split_t=True, subs=subs).items():
            v = _slot_value(Vm, slot)
            for I, c in row.items():
                A = W_s * c
                for r, d in enumerate(I):
                    S[d] = S[d] + A * v.Dmulti(I[r + 1:])
                    A = -A.D(d)
    return S[1:]


def helmholtz_defect(F: Sequence[DiffPoly], fields: Sequence[str],
                     V_name: str = "_V") -> list[DiffPoly]:
    """``(L_F - L*_F) V`` applied to a fresh test function, one entry per row."""
    tf = TestFunction(V_name)
    Vs = tf.components(len(fields))
    Vm = dict(zip(fields, Vs))
    out = []
    for s, F_s in enumerate(F):
        lhs = lin_apply(F_s, fields, Vm)
        rhs = adj_apply(F, fields, Vs, fields[s])
        out.append(lhs - rhs)
    return out


def jet_poly(fieldname: str, alpha: tuple = ()) -> DiffPoly:
    return DiffPoly.from_atom(jet_atom(fieldname, alpha))


__all__ = [
    "TestFunction", "OperatorMatrix", "linearize", "adjointize", "euler",
    "restricted_euler", "is_divergence", "trilinear_S",
    "trilinear_S_constructive", "helmholtz_defect", "coefficients",
    "lin_apply", "adj_apply", "multisets_upto", "sub_multisets",
    "multiset_binom", "JetVar",
]
