"""Conserved densities from multipliers by homotopy integration.

The integrand is built along ``u_lam = lam*u + (1 - lam)*base`` with ``lam``
an auxiliary symbol, so every lambda integral is an exact polynomial
antiderivative.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Sequence

from .determining import MultiplierSet, check_candidate, omega_chain
from .errors import NotAMultiplier, NotNormalForm, UnsupportedBase
from .jet import (AUX, IND, JET, UNK, DiffPoly, PDESystem, Point, Q, atom_key,
                  integrate_unit, intern, restrict_to_solutions)
from .operators import restricted_euler, trilinear_S

LAM = DiffPoly.aux("lam")
_LAM_ATOM = intern((AUX, "lam"))


@dataclass(frozen=True)
class HomotopyBase:
    """Base point of the homotopy: one function of (t, x) per field."""

    components: tuple = ()

    @classmethod
    def zero(cls, N: int) -> "HomotopyBase":
        return cls(tuple(DiffPoly() for _ in range(N)))

    @classmethod
    def of(cls, sys: PDESystem, base=None) -> "HomotopyBase":
        if base is None:
            return cls.zero(sys.N)
        if isinstance(base, HomotopyBase):
            comps = list(base.components)
        else:
            comps = [b if isinstance(b, DiffPoly) else DiffPoly.const(b) for b in base]
        if len(comps) != sys.N:
            raise UnsupportedBase(f"base needs {sys.N} components, got {len(comps)}")
        for c in comps:
            bad = [a for a in c.atoms() if atom_key(a)[0] in (JET, AUX, UNK)]
            if bad:
                raise UnsupportedBase("base must be a polynomial in t, x and parameters")
        return cls(tuple(comps))

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.components)

    def describe(self, var_names=None) -> list[str]:
        from .printing import to_dsl
        return [to_dsl(c, var_names) for c in self.components]


@dataclass
class DensityPair:
    phi_t: DiffPoly
    phi_x: tuple
    multiplier: MultiplierSet | None = None
    base: HomotopyBase | None = None

    def __post_init__(self):
        self.phi_x = tuple(self.phi_x)

    def __sub__(self, other: "DensityPair") -> "DensityPair":
        return DensityPair(self.phi_t - other.phi_t,
                           tuple(a - b for a, b in zip(self.phi_x, other.phi_x)))

    def is_zero(self) -> bool:
        return self.phi_t.is_zero() and all(p.is_zero() for p in self.phi_x)

    def subs(self, mapping) -> "DensityPair":
        return DensityPair(self.phi_t.subs(mapping), tuple(p.subs(mapping) for p in self.phi_x),
                           self.multiplier, self.base)


@dataclass
class TrivialDensity:
    """``phi_t += D_i theta^i``, ``phi_i += -D_t theta^i + D_j psi^{ij}``."""

    theta: tuple
    psi: tuple = ()

    def __post_init__(self):
        n = len(self.theta)
        if not self.psi:
            self.psi = tuple(tuple(DiffPoly() for _ in range(n)) for _ in range(n))
        for i in range(n):
            for j in range(n):
                if self.psi[i][j] != -self.psi[j][i]:
                    raise ValueError("psi must be antisymmetric")

    def apply(self, d: DensityPair, sys: PDESystem) -> DensityPair:
        n = len(self.theta)
        phi_t = d.phi_t
        phi_x = list(d.phi_x)
        for i, th in enumerate(self.theta):
            phi_t = phi_t + th.D(i + 1)
            phi_x[i] = phi_x[i] - restrict_to_solutions(th.D(0), sys)
            for j in range(n):
                phi_x[i] = phi_x[i] + self.psi[i][j].D(j + 1)
        return DensityPair(phi_t, tuple(phi_x), d.multiplier, d.base)


# ---------------------------------------------------------------------------
# homotopy ingredients


def _base_subs(exprs: Sequence[DiffPoly], sys: PDESystem, base: HomotopyBase, lam=None):
    """Substitution sending each field jet ``u_alpha`` to ``(u_lam)_alpha``
    (or to ``base_alpha`` when ``lam`` is None)."""
    atoms = set()
    for e in exprs:
        atoms |= e.atoms()
    mapping = {}
    for a in atoms:
        key = atom_key(a)
        if key[0] != JET or key[1] not in sys.fields:
            continue
        b = base.components[sys.fields.index(key[1])].Dmulti(key[2])
        if lam is None:
            mapping[a] = b
        else:
            mapping[a] = b + lam * (DiffPoly.from_atom(a) - b)
    return mapping


def _scale_indep(e: DiffPoly, n: int, lam: DiffPoly) -> DiffPoly:
    mapping = {}
    for a in e.atoms():
        key = atom_key(a)
        if key[0] == IND:
            mapping[a] = lam * DiffPoly.from_atom(a)
    return e.subs(mapping)


def source_term(sys: PDESystem, lam: MultiplierSet, base: HomotopyBase) -> DiffPoly:
    """``K(t, x) = sum (D_t^{N_s} base_s + g_s[base]) Lambda_s[base]``."""
    exprs = list(sys.g) + list(lam)
    sub = _base_subs(exprs, sys, base)
    K = DiffPoly()
    if sys.is_scalar and not sys.is_first_order:
        lam_list = [lam[0]]
    else:
        lam_list = list(lam)
    for s, g in enumerate(sys.g):
        b = base.components[s].Dmulti((0,) * sys.orders[s])
        K = K + (b + g.subs(sub)) * lam_list[s].subs(sub)
    if any(atom_key(a)[0] in (JET, UNK) for a in K.atoms()):
        raise UnsupportedBase("source term depends on jets")
    return K


def k_terms(sys: PDESystem, lam, base=None):
    """``(K, phi_t part, [phi_i parts])`` with ``F = int lam^n K(lam t, lam x)``,
    ``phi_t part = t F`` and ``phi_i part = x^i F``."""
    lam = MultiplierSet.for_system(sys, lam)
    base = HomotopyBase.of(sys, base)
    K = source_term(sys, lam, base)
    if K.is_zero():
        return K, DiffPoly(), [DiffPoly() for _ in range(sys.n)]
    F = integrate_unit(_scale_indep(K, sys.n, LAM) * LAM ** sys.n, LAM)
    return K, DiffPoly.indep(0) * F, [DiffPoly.indep(i) * F for i in range(1, sys.n + 1)]


def _require_multiplier(sys, lam, check):
    lam = MultiplierSet.for_system(sys, lam)
    if check:
        rep = check_candidate(sys, lam)
        if not rep.ok:
            failed = [rid for rid, _, e in rep.residuals if not e.is_zero()]
            raise NotAMultiplier("candidate fails " + ", ".join(failed[:5]))
    return lam


def build_densities(sys: PDESystem, lam, base=None, check: bool = True) -> DensityPair:
    """Densities of the conservation law with multiplier ``lam`` for a
    first-order CK system."""
    if not sys.is_first_order:
        if sys.is_scalar:
            return build_densities_scalar(sys, lam, base, check)
        raise ValueError("build_densities needs a first-order CK system")
    lam = _require_multiplier(sys, lam, check)
    base = HomotopyBase.of(sys, base)
    if lam.is_zero():
        return DensityPair(DiffPoly(), tuple(DiffPoly() for _ in range(sys.n)), lam, base)
    F = list(sys.fields)
    V = [DiffPoly.jet(f) - b for f, b in zip(F, base.components)]
    sub = _base_subs(list(sys.g) + list(lam), sys, base, LAM)
    lam_l = [c.subs(sub) for c in lam]
    W = [g.subs(sub) - LAM * g + (1 - LAM) * b.D(0)
         for g, b in zip(sys.g, base.components)]
    return _assemble(sys, lam, base, V, lam_l, W, [sum((v * w for v, w in zip(V, lam_l)), DiffPoly())], sub)


def _assemble(sys, lam, base, V, W_g, W_lam, t_parts, sub):
    phi_t = integrate_unit(sum(t_parts, DiffPoly()), LAM)
    phi_x = []
    for i in range(1, sys.n + 1):
        integrand = trilinear_S(V, W_g, sys.g, i, sys.fields, sub)
        integrand = integrand + trilinear_S(V, W_lam, list(lam.components if not
                                            (sys.is_scalar and not sys.is_first_order)
                                            else [lam[0]]), i, sys.fields, sub)
        phi_x.append(integrate_unit(integrand, LAM))
    _, kt, kx = k_terms(sys, lam, base)
    phi_t = phi_t + kt
    phi_x = [p + k for p, k in zip(phi_x, kx)]
    return DensityPair(phi_t, tuple(phi_x), lam, base)


def build_densities_scalar(sys: PDESystem, lam, base=None, check: bool = True) -> DensityPair:
    """Densities for a scalar CK equation of order N from its multiplier."""
    if not sys.is_scalar:
        raise ValueError("build_densities_scalar needs a scalar CK equation")
    if sys.is_first_order:
        return build_densities(sys, lam, base, check)
    lam = _require_multiplier(sys, lam, check)
    base = HomotopyBase.of(sys, base)
    if lam.is_zero():
        return DensityPair(DiffPoly(), tuple(DiffPoly() for _ in range(sys.n)), lam, base)
    N = sys.orders[0]
    u = sys.fields[0]
    b = base.components[0]
    chain = omega_chain(sys, lam[0])[:N]
    V = DiffPoly.jet(u) - b
    sub = _base_subs(list(sys.g) + chain, sys, base, LAM)
    chain_l = [c.subs(sub) for c in chain]
    t_part = DiffPoly()
    for j in range(N):
        t_part = t_part + V.Dmulti((0,) * (N - 1 - j)) * chain_l[j]
    g = sys.g[0]
    W = g.subs(sub) - LAM * g + (1 - LAM) * b.Dmulti((0,) * N)
    return _assemble(sys, lam, base, [V], [chain_l[0]], [W], [t_part], sub)


def build_offshell_densities(sys: PDESystem, lam, base=None) -> DensityPair:
    """Densities whose divergence equals ``(u_t + g) . Lambda`` identically
    (no restriction to solutions); first-order systems only."""
    if not sys.is_first_order:
        raise ValueError("off-shell densities are built for first-order systems")
    lam = _require_multiplier(sys, lam, True)
    base = HomotopyBase.of(sys, base)
    F = list(sys.fields)
    V = [DiffPoly.jet(f) - b for f, b in zip(F, base.components)]
    sub = _base_subs(list(sys.g) + list(lam), sys, base, LAM)
    lam_l = [c.subs(sub) for c in lam]
    W = [LAM * DiffPoly.jet(f, 1) + (1 - LAM) * b.D(0) + g.subs(sub)
         for f, g, b in zip(F, sys.g, base.components)]
    return _assemble(sys, lam, base, V, lam_l, W,
                     [sum((v * w for v, w in zip(V, lam_l)), DiffPoly())], sub)


def construct(sys: PDESystem, lam, base=None, check: bool = True) -> DensityPair:
    if sys.is_first_order:
        return build_densities(sys, lam, base, check)
    return build_densities_scalar(sys, lam, base, check)


# ---------------------------------------------------------------------------
# verification


def divergence(sys: PDESystem, d: DensityPair) -> DiffPoly:
    acc = d.phi_t.D(0)
    for i, p in enumerate(d.phi_x):
        acc = acc + p.D(i + 1)
    return acc


def verify_conservation(sys: PDESystem, d: DensityPair) -> DiffPoly:
    """``D_t phi_t + D_i phi_i`` on the solution space (zero iff conserved)."""
    return restrict_to_solutions(divergence(sys, d), sys)


def random_check(sys: PDESystem, d: DensityPair, points: int = 100, seed: int = 0,
                 bound: int = 1000) -> int:
    """Number of random points (out of ``points``) where the divergence fails
    to vanish.  Leading t-jets get the values the PDE forces on them, so this
    path is independent of symbolic restriction."""
    expr = divergence(sys, d)
    rules = sys.leading_atoms(expr)
    free = set(expr.atoms()) - set(rules)
    for r in rules.values():
        free |= r.atoms()
    order = sorted(free, key=lambda a: repr(atom_key(a)))
    rng = random.Random(seed)
    bad = 0
    for _ in range(points):
        vals = {a: Q(rng.randint(-bound, bound), rng.randint(1, bound)) for a in order}
        pt = Point(vals)
        for a, r in rules.items():
            vals[a] = r.eval(pt)
        if expr.eval(Point(vals)) != 0:
            bad += 1
    return bad


def offshell_residual(sys: PDESystem, lam, d: DensityPair) -> DiffPoly:
    """``(u_t + g) . Lambda - D_t phi_t - D_i phi_i`` without restriction."""
    lam = MultiplierSet.for_system(sys, lam)
    acc = DiffPoly()
    for s, f in enumerate(sys.fields):
        acc = acc + (DiffPoly.jet(f, sys.orders[s]) + sys.g[s]) * lam[s]
    return acc - divergence(sys, d)


def triviality_test(d: DensityPair, sys: PDESystem) -> MultiplierSet:
    """Restricted Euler image of ``phi_t``: zero iff the conservation law is
    trivial, otherwise its multiplier."""
    form = sys if (sys.is_scalar and not sys.is_first_order) else 1
    comps = [restricted_euler(d.phi_t, f, form) for f in sys.fields]
    return MultiplierSet(tuple(comps), sys.fields, 0)


def normalize_density(d: DensityPair, sys: PDESystem, max_steps: int = 200) -> DensityPair:
    """Strip trivial parts of ``phi_t`` by integrating by parts in x.

    A term ``R * u_{I}`` linear in its highest jet, with ``R`` of spatial
    order at most ``|I| - 2``, is replaced by ``-D_i(R) u_{I-i}``; the
    fluxes absorb the matching ``D_t`` part.
    """
    phi_t = d.phi_t
    phi_x = list(d.phi_x)
    for _ in range(max_steps):
        step = _ibp_candidate(phi_t, sys)
        if step is None:
            break
        i, theta = step
        phi_t = phi_t - theta.D(i)
        phi_x[i - 1] = phi_x[i - 1] + restrict_to_solutions(theta.D(0), sys)
    return DensityPair(phi_t, tuple(phi_x), d.multiplier, d.base)


def _ibp_candidate(e: DiffPoly, sys: PDESystem):
    best = None
    for j in sorted(e.jets(), key=lambda j: (len(j.xs), j.t_order), reverse=True):
        if j.field not in sys.fields or len(j.xs) < 2:
            continue
        if e.degree_in(j.atom) != 1:
            continue
        R = e.diff(j)
        if R.max_order(spatial_only=True) > len(j.xs) - 2:
            continue
        best = j
        break
    if best is None:
        return None
    R = e.diff(best)
    i = best.xs[-1]
    lower = DiffPoly.jet(best.field, best.t_order, best.xs[:-1])
    return i, R * lower


__all__ = [
    "DensityPair", "HomotopyBase", "TrivialDensity", "build_densities",
    "build_densities_scalar", "build_offshell_densities", "construct", "k_terms",
    "source_term", "verify_conservation", "random_check", "offshell_residual",
    "triviality_test", "normalize_density", "divergence", "LAM", "NotNormalForm",
]
