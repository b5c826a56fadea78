"""Multiplier determining systems: adjoint-symmetry equations plus the extra
Helmholtz-type conditions, candidate checks and polynomial-ansatz solving."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations_with_replacement
from typing import Callable, Sequence

from .errors import EmptyAnsatz
from .jet import (PAR, UNK, DiffPoly, JetVar, PDESystem, _mono_sort_key,
                  restrict_to_solutions, solution_Dt)
from .linalg import nullspace_poly, nullspace_rational
from .operators import _minus, coefficients, multiset_binom, multisets_upto

log = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# domain types


@dataclass(frozen=True)
class MultiplierSet:
    """Multiplier components ``Lambda_sigma`` aligned with ``fields``."""

    components: tuple
    fields: tuple
    order: int = -1

    def __post_init__(self):
        comps = tuple(self.components)
        object.__setattr__(self, "components", comps)
        object.__setattr__(self, "fields", tuple(self.fields))
        if self.order < 0:
            object.__setattr__(self, "order", max((c.max_order(spatial_only=True)
                                                   for c in comps), default=0))

    @classmethod
    def for_system(cls, sys: PDESystem, comps) -> "MultiplierSet":
        if isinstance(comps, MultiplierSet):
            return comps
        if isinstance(comps, DiffPoly):
            comps = [comps]
        comps = [c if isinstance(c, DiffPoly) else DiffPoly.const(c) for c in comps]
        if len(comps) != sys.N:
            raise ValueError(f"expected {sys.N} multiplier components, got {len(comps)}")
        order = max((c.max_order(spatial_only=sys.is_first_order) for c in comps), default=0)
        return cls(tuple(comps), sys.fields, max(order, 0))

    def __iter__(self):
        return iter(self.components)

    def __len__(self):
        return len(self.components)

    def __getitem__(self, k):
        return self.components[k]

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.components)


@dataclass
class CheckReport:
    adjoint_ok: bool
    extra_ok: bool
    residuals: list = field(default_factory=list)  # [(id, role, DiffPoly)]

    @property
    def ok(self) -> bool:
        return self.adjoint_ok and self.extra_ok


@dataclass
class AnsatzConfig:
    """Polynomial ansatz: jets of order <= ``order``, jet degree <= ``degree``,
    explicit (t, x) degree <= ``tx_degree``.  ``monomials`` overrides the
    generated basis."""

    order: int = 1
    degree: int = 2
    tx_degree: int = 0
    monomials: Sequence[DiffPoly] | None = None


@dataclass
class SymbolicTerm:
    """``coef * D_derivs( d Row_r / d(col slot)_alpha )`` in a placeholder equation."""

    coef: Fraction
    derivs: tuple
    row: int
    col: int
    alpha: tuple


@dataclass
class DeterminingSystem:
    adjoint_part: list
    extra_part: list
    unknown: list
    N: int
    n: int
    p: int
    identically_zero: list = field(default_factory=list)


def _check_bounds(sys: PDESystem, comps, what="multiplier"):
    for c in comps:
        sys.check_normal(c, what)


# ---------------------------------------------------------------------------
# solution-space derivatives


def sol_D(e: DiffPoly, alpha, sys: PDESystem) -> DiffPoly:
    """Total derivative along ``alpha`` on the solution space."""
    for d in sorted(alpha, reverse=True):
        e = e.D(d)
        if d == 0:
            e = restrict_to_solutions(e, sys)
    return e


def symmetry_equations(sys: PDESystem, eta) -> list[DiffPoly]:
    """Residuals ``D_t^{N_s} eta^s + (L_g eta)^s`` on the solution space."""
    eta = list(MultiplierSet.for_system(sys, eta))
    _check_bounds(sys, eta, "symmetry characteristic")
    out = []
    for s, g in enumerate(sys.g):
        acc = sol_D(eta[s], (0,) * sys.orders[s], sys)
        for slot, row in coefficients(g, sys.fields).items():
            e_r = eta[sys.fields.index(slot[0])]
            for alpha, c in row.items():
                acc = acc + c * sol_D(e_r, alpha, sys)
        out.append(restrict_to_solutions(acc, sys))
    return out


def adjoint_equations(sys: PDESystem, omega) -> list[DiffPoly]:
    """Residuals ``(-D_t)^{N_s} omega_s + (L*_g omega)_s`` on the solution space."""
    omega = list(MultiplierSet.for_system(sys, omega))
    _check_bounds(sys, omega, "adjoint symmetry")
    coeffs = [coefficients(g, sys.fields) for g in sys.g]
    out = []
    for s, f in enumerate(sys.fields):
        N_s = sys.orders[s]
        acc = sol_D(omega[s], (0,) * N_s, sys)
        if N_s % 2:
            acc = -acc
        for r, co in enumerate(coeffs):
            for alpha, c in co.get((f, 0), {}).items():
                term = sol_D(restrict_to_solutions(c * omega[r], sys), alpha, sys)
                acc = acc + term if len(alpha) % 2 == 0 else acc - term
        out.append(restrict_to_solutions(acc, sys))
    return out


def omega_chain(sys: PDESystem, lam) -> list[DiffPoly]:
    """``[Omega_0, ..., Omega_N]`` for a scalar CK equation of order N.

    ``Omega_q = -D_t Omega_{q-1} + L*_{N-q,g} Lambda`` where ``L_{k,g}`` is
    the spatial linearization with respect to the jets ``D_t^k u_I``; the
    last entry is the adjoint-symmetry residual.
    """
    if not sys.is_scalar:
        raise ValueError("omega_chain needs a scalar CK equation")
    if isinstance(lam, MultiplierSet):
        lam = lam[0]
    u = sys.fields[0]
    N = sys.orders[0]
    sys.check_normal(lam, "multiplier")
    co = coefficients(sys.g[0], sys.fields, split_t=True)
    chain = [lam]
    for q in range(1, N + 1):
        acc = -solution_Dt(chain[-1], sys)
        for I, c in co.get((u, N - q), {}).items():
            term = (c * lam).Dmulti(I)
            acc = acc + term if len(I) % 2 == 0 else acc - term
        chain.append(restrict_to_solutions(acc, sys))
    return chain


# ---------------------------------------------------------------------------
# extra (Helmholtz) equations


def _helmholtz_layout(sys: PDESystem, comps):
    """Rows, column slots and the transposition pairing of the operator whose
    self-adjointness is required."""
    if sys.is_first_order:
        rows = list(comps)
        cols = [(f, 0) for f in sys.fields]
        return rows, cols, (lambda r, c: (c, r))
    if sys.is_scalar:
        N = sys.orders[0]
        rows = omega_chain(sys, comps[0])[:N]
        cols = [(sys.fields[0], j) for j in range(N)]
        return rows, cols, (lambda r, c: (N - 1 - c, N - 1 - r))
    raise ValueError("convert mixed-order systems to first order before building "
                     "the determining system")


def helmholtz_residuals(rows: Sequence[DiffPoly], cols, transpose: Callable,
                        n: int, max_order: int | None = None):
    """Coefficients of ``D_beta`` in ``L - L*`` entry by entry.

    Entry ``(r, c)`` of ``L`` is ``sum_alpha dRow_r/d(col c)_alpha D_alpha``;
    entry ``(r, c)`` of ``L*`` is the formal adjoint of entry
    ``transpose(r, c)``.  Returns ``[(r, c, beta, residual)]``.
    """
    slots = {col: k for k, col in enumerate(cols)}
    co = []
    top = 0
    for row in rows:
        d = {}
        for j in row.jets():
            slot = (j.field, j.t_order)
            if slot in slots:
                d[(slots[slot], j.xs)] = row.diff(j)
                top = max(top, len(j.xs))
        co.append(d)
    if max_order is not None:
        top = max(top, max_order)
    betas = multisets_upto(n, top)
    out = []
    for r in range(len(rows)):
        for c in range(len(cols)):
            r2, c2 = transpose(r, c)
            for beta in betas:
                acc = co[r].get((c, beta), DiffPoly())
                for (cc, alpha), coef in co[r2].items():
                    if cc != c2 or len(alpha) < len(beta):
                        continue
                    rest = _minus(alpha, beta)
                    if len(rest) + len(beta) != len(alpha):
                        continue
                    term = coef.Dmulti(rest) * multiset_binom(alpha, beta)
                    acc = acc - term if len(alpha) % 2 == 0 else acc + term
                out.append((r, c, beta, acc))
    return out


def extra_equations(sys: PDESystem, lam) -> list[DiffPoly]:
    """Component equations of ``L_Lambda = L*_Lambda`` (scalar case: for the
    operator matrix of the Omega chain), each required to vanish."""
    lam = MultiplierSet.for_system(sys, lam)
    _check_bounds(sys, lam)
    rows, cols, tr = _helmholtz_layout(sys, list(lam))
    return [e for *_, e in helmholtz_residuals(rows, cols, tr, sys.n)]


def check_candidate(sys: PDESystem, lam) -> CheckReport:
    lam = MultiplierSet.for_system(sys, lam)
    _check_bounds(sys, lam)
    if sys.is_scalar and not sys.is_first_order:
        adj = [omega_chain(sys, lam[0])[-1]]
    else:
        adj = adjoint_equations(sys, lam)
    rows, cols, tr = _helmholtz_layout(sys, list(lam))
    extra = helmholtz_residuals(rows, cols, tr, sys.n)
    residuals = [(f"adjoint[{sys.fields[s]}]", "adjoint", e) for s, e in enumerate(adj)]
    for r, c, beta, e in extra:
        residuals.append((f"extra[{r},{c},{_beta_str(beta, sys)}]", "extra", e))
    return CheckReport(all(e.is_zero() for e in adj),
                       all(e.is_zero() for *_, e in extra), residuals)


def _beta_str(beta, sys: PDESystem) -> str:
    return "".join(sys.var_names[d] for d in beta) or "1"


def is_variational(sys: PDESystem) -> bool:
    """Scalar CK equation arises from an action: N even and g has a
    self-adjoint (full, including t) linearization."""
    if not sys.is_scalar:
        raise ValueError("is_variational expects a scalar CK equation")
    if sys.orders[0] % 2:
        return False
    u = sys.fields[0]
    co = coefficients(sys.g[0], [u])
    # full linearization: one slot, multi-indices over t and x
    d = co.get((u, 0), {})
    top = max((len(a) for a in d), default=0)
    for beta in multisets_upto(sys.n, top, start=0):
        acc = d.get(beta, DiffPoly())
        for alpha, c in d.items():
            if len(alpha) < len(beta):
                continue
            rest = _minus(alpha, beta)
            if len(rest) + len(beta) != len(alpha):
                continue
            term = c.Dmulti(rest) * multiset_binom(alpha, beta)
            acc = acc - term if len(alpha) % 2 == 0 else acc + term
        if not acc.is_zero():
            return False
    return True


# ---------------------------------------------------------------------------
# equation counts and symbolic (placeholder) form


def count_extra_equations(N: int, n: int, p: int) -> int:
    """Closed-form equation count as printed with the method."""
    if N < 1 or n < 1 or p < 1:
        raise ValueError("N, n, p must be >= 1")
    first = Fraction(N * N * _fact(n + p - 1), _fact(n) * _fact(p - 1))
    second = Fraction(N * (N - (-1) ** p), 2) * Fraction(_fact(n + p), _fact(n) * _fact(p))
    total = first + second
    assert total.denominator == 1
    return int(total)


def _fact(k: int) -> int:
    out = 1
    for i in range(2, k + 1):
        out *= i
    return out


def symbolic_extra_system(nrows: int, cols: int, transpose: Callable, n: int,
                          row_orders: Sequence[int]):
    """Extra equations for placeholder rows of the given spatial orders.

    Returns ``(components, zero)``: components are ``(r, c, beta, terms)``
    with ``terms`` a list of :class:`SymbolicTerm`; ``zero`` lists the
    ``(r, c, beta)`` labels that cancel identically.  Components equal up
    to sign to an earlier one are dropped.
    """
    comps = []
    zero = []
    seen = set()
    top = max(row_orders, default=0)
    for r in range(nrows):
        for c in range(cols):
            r2, c2 = transpose(r, c)
            for beta in multisets_upto(n, top):
                acc: dict = {}
                if len(beta) <= row_orders[r]:
                    acc[((), r, c, beta)] = Fraction(1)
                for alpha in multisets_upto(n, row_orders[r2]):
                    if len(alpha) < len(beta):
                        continue
                    rest = _minus(alpha, beta)
                    if len(rest) + len(beta) != len(alpha):
                        continue
                    key = (rest, r2, c2, alpha)
                    w = Fraction(multiset_binom(alpha, beta))
                    acc[key] = acc.get(key, 0) + (-w if len(alpha) % 2 == 0 else w)
                acc = {k: v for k, v in acc.items() if v}
                if not acc:
                    zero.append((r, c, beta))
                    continue
                canon = tuple(sorted(acc.items()))
                neg = tuple(sorted((k, -v) for k, v in acc.items()))
                if canon in seen or neg in seen:
                    continue
                seen.add(canon)
                terms = [SymbolicTerm(v, k[0], k[1], k[2], k[3]) for k, v in sorted(acc.items())]
                comps.append((r, c, beta, terms))
    return comps, zero


def symbolic_system_for(sys: PDESystem, p: int):
    """Placeholder extra system of a first-order or scalar system at order p."""
    if sys.is_first_order:
        N = sys.N
        return symbolic_extra_system(N, N, lambda r, c: (c, r), sys.n, [p] * N)
    if sys.is_scalar:
        N = sys.orders[0]
        orders = [p + sys.m * k for k in range(N)]
        return symbolic_extra_system(N, N, lambda r, c: (N - 1 - c, N - 1 - r),
                                     sys.n, orders)
    raise ValueError("mixed-order system: convert to first order first")


def generated_extra_count(N: int, n: int, p: int) -> tuple[int, list]:
    comps, zero = symbolic_extra_system(N, N, lambda r, c: (c, r), n, [p] * N)
    if zero:
        log.info("N=%d n=%d p=%d: %d identically-zero extra components: %s",
                 N, n, p, len(zero), zero)
    return len(comps), zero


def symbolic_term_str(t: SymbolicTerm, row_names, col_names, var_names) -> str:
    a = "".join(var_names[d] for d in t.alpha)
    core = f"d{row_names[t.row]}/d{col_names[t.col]}" + (f"[{a}]" if a else "")
    for d in reversed(t.derivs):
        core = f"D{var_names[d]}({core})"
    coef = t.coef
    if coef == 1:
        return core
    if coef == -1:
        return "-" + core
    return f"{coef}*{core}"


def symbolic_component_str(terms, row_names, col_names, var_names) -> str:
    parts = []
    for t in terms:
        s = symbolic_term_str(t, row_names, col_names, var_names)
        if parts and s.startswith("-"):
            parts.append(" - " + s[1:])
        elif parts:
            parts.append(" + " + s)
        else:
            parts.append(s)
    return "".join(parts)


# ---------------------------------------------------------------------------
# ansatz solving


def _ansatz_jets(sys: PDESystem, order: int) -> list[DiffPoly]:
    jets = []
    if sys.is_first_order:
        for f in sys.fields:
            for xs in multisets_upto(sys.n, order):
                jets.append(JetVar(f, 0, xs))
    else:
        for s, f in enumerate(sys.fields):
            for j in range(sys.orders[s]):
                if j > order:
                    break
                for xs in multisets_upto(sys.n, order - j):
                    jets.append(JetVar(f, j, xs))
    return [DiffPoly.from_atom(j.atom) for j in sorted(jets, key=lambda j: (j.order, j.t_order, j.xs, j.field))]


def _monomials(gens: list[DiffPoly], degree: int) -> list[DiffPoly]:
    out = [DiffPoly.const(1)]
    for d in range(1, degree + 1):
        for combo in combinations_with_replacement(range(len(gens)), d):
            m = DiffPoly.const(1)
            for k in combo:
                m = m * gens[k]
            out.append(m)
    return out


def ansatz_basis(sys: PDESystem, cfg: AnsatzConfig) -> list[DiffPoly]:
    if cfg.monomials is not None:
        basis = list(cfg.monomials)
    else:
        jet_monos = _monomials(_ansatz_jets(sys, cfg.order), cfg.degree)
        tx = _monomials([DiffPoly.indep(d) for d in range(sys.n + 1)], cfg.tx_degree)
        basis = [a * b for b in tx for a in jet_monos]
    seen = set()
    uniq = []
    for m in basis:
        if not m.is_zero() and m not in seen:
            seen.add(m)
            uniq.append(m)
    # leading (highest) monomial first
    uniq.sort(key=lambda m: _mono_sort_key(m.sorted_terms()[0][0]), reverse=True)
    return uniq


def _linear_rows(residuals: Sequence[DiffPoly], nunk: int, unk_atoms: dict):
    """Split residuals (linear in unknowns) over all jet/t/x monomials."""
    rows = []
    has_params = False
    for res in residuals:
        for _, inner in res.collect(keep_kinds=(UNK, PAR)).items():
            row: dict = {}
            for m, c in inner.terms.items():
                unk = None
                rest = []
                for k in range(0, len(m), 2):
                    if m[k] in unk_atoms:
                        if unk is not None or m[k + 1] != 1:
                            raise ValueError("ansatz residual is not linear in the unknowns")
                        unk = unk_atoms[m[k]]
                    else:
                        rest.extend(m[k:k + 2])
                if unk is None:
                    raise ValueError("ansatz residual has a term free of unknowns")
                if rest:
                    has_params = True
                row[unk] = row.get(unk, DiffPoly()) + DiffPoly({tuple(rest): c})
            rows.append(row)
    return rows, has_params


def solve_ansatz(sys: PDESystem, cfg: AnsatzConfig) -> list[MultiplierSet]:
    """Basis of all multipliers inside the ansatz space."""
    basis = ansatz_basis(sys, cfg)
    if not basis:
        raise EmptyAnsatz("ansatz has no monomials")
    N = sys.N
    unknowns = []
    comps = []
    idx = 0
    for s in range(N):
        acc = DiffPoly()
        for m in basis:
            c = DiffPoly.unknown(idx)
            unknowns.append((s, m))
            acc = acc + c * m
            idx += 1
        comps.append(acc)
    unk_atoms = {next(iter(DiffPoly.unknown(k).atoms())): k for k in range(idx)}
    report = check_candidate(sys, comps)
    residuals = [e for _, _, e in report.residuals if not e.is_zero()]
    rows, has_params = _linear_rows(residuals, idx, unk_atoms)
    if has_params:
        vecs = nullspace_poly(rows, idx)
    else:
        qrows = [{k: v.constant_value() for k, v in row.items()} for row in rows]
        vecs = [[DiffPoly.const(x) for x in v] for v in nullspace_rational(qrows, idx)]
    out = []
    for v in vecs:
        parts = [DiffPoly() for _ in range(N)]
        for k, coef in enumerate(v):
            if not coef.is_zero():
                s, m = unknowns[k]
                parts[s] = parts[s] + coef * m
        ms = MultiplierSet.for_system(sys, parts)
        chk = check_candidate(sys, ms)
        if not chk.ok:
            raise AssertionError("ansatz solution failed re-check")
        out.append(ms)
    return out


def build_determining_system(sys: PDESystem, p: int) -> DeterminingSystem:
    """Determining system with placeholder multipliers ``Lambda``.

    The adjoint part is given on a fresh test field standing for the
    multiplier, the extra part symbolically.
    """
    from .operators import TestFunction
    names = TestFunction("Lambda").field_names(sys.N)
    comps, zero = symbolic_system_for(sys, p)
    return DeterminingSystem(adjoint_part=names, extra_part=comps, unknown=names,
                             N=sys.N, n=sys.n, p=p, identically_zero=zero)


__all__ = [
    "MultiplierSet", "CheckReport", "AnsatzConfig", "DeterminingSystem",
    "symmetry_equations", "adjoint_equations", "extra_equations",
    "count_extra_equations", "omega_chain", "check_candidate", "solve_ansatz",
    "is_variational", "helmholtz_residuals", "symbolic_extra_system",
    "generated_extra_count", "symbolic_system_for", "build_determining_system",
    "sol_D",
]
