"""Differential polynomials over jet coordinates.

Every symbol (jet coordinate, independent variable, parameter, auxiliary
variable) is interned as an integer *atom*.  A :class:`DiffPoly` is an
immutable sparse map from monomials over atoms to exact rationals.

Independent variables are numbered by *direction*: direction 0 is the
distinguished CK variable (called ``t`` throughout), directions ``1..n``
are the remaining variables.  A jet coordinate of field ``u`` is keyed by
its multi-index ``alpha``, a sorted tuple of directions, so ``u_{xy}`` and
``u_{yx}`` are the same atom.
"""

from __future__ import annotations

import random
import threading
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Iterable, Mapping

import gmpy2

from . import kernels
from .errors import IncompletePoint, NotNormalForm

Q = gmpy2.mpq

JET, IND, PAR, AUX, UNK = 0, 1, 2, 3, 4

_lock = threading.Lock()
_atoms: list[tuple] = []
_ids: dict[tuple, int] = {}
_deriv_cache: dict[tuple[int, int], int | None] = {}


def to_q(value) -> "gmpy2.mpq":
    if isinstance(value, str):
        return Q(Fraction(value))
    return Q(value)


def intern(key: tuple) -> int:
    i = _ids.get(key)
    if i is not None:
        return i
    with _lock:
        i = _ids.get(key)
        if i is None:
            i = len(_atoms)
            _atoms.append(key)
            _ids[key] = i
        return i


def atom_key(atom: int) -> tuple:
    return _atoms[atom]


def jet_atom(fieldname: str, alpha: tuple = ()) -> int:
    return intern((JET, fieldname, tuple(sorted(alpha))))


def _derived_atom(atom: int, direction: int):
    """Image of an atom under D_direction: an atom id, -1 for one, None for zero."""
    ck = (atom, direction)
    if ck in _deriv_cache:
        return _deriv_cache[ck]
    key = _atoms[atom]
    if key[0] == JET:
        res = jet_atom(key[1], key[2] + (direction,))
    elif key[0] == IND:
        res = -1 if key[1] == direction else None
    else:
        res = None
    _deriv_cache[ck] = res
    return res


@dataclass(frozen=True, order=True)
class JetVar:
    """Jet coordinate ``u^sigma`` with ``t_order`` t-derivatives and spatial
    derivative multiset ``xs`` (directions 1..n, order-insensitive)."""

    field: str
    t_order: int = 0
    xs: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "xs", tuple(sorted(self.xs)))
        if self.t_order < 0 or any(d < 1 for d in self.xs):
            raise ValueError(f"invalid jet {self!r}")

    @property
    def alpha(self) -> tuple:
        return (0,) * self.t_order + self.xs

    @property
    def order(self) -> int:
        return self.t_order + len(self.xs)

    @classmethod
    def from_alpha(cls, fieldname: str, alpha) -> "JetVar":
        alpha = tuple(alpha)
        t = alpha.count(0)
        return cls(fieldname, t, tuple(d for d in alpha if d))

    @property
    def atom(self) -> int:
        return jet_atom(self.field, self.alpha)


def _jet_of(atom: int) -> JetVar | None:
    key = _atoms[atom]
    if key[0] != JET:
        return None
    return JetVar.from_alpha(key[1], key[2])


def _mono_sort_key(mono: tuple):
    jets = []
    rest = []
    jdeg = 0
    for k in range(0, len(mono), 2):
        key = _atoms[mono[k]]
        e = mono[k + 1]
        if key[0] == JET:
            alpha = key[2]
            jdeg += e
            jets.append((len(alpha), alpha.count(0), alpha, key[1], e))
        else:
            rest.append((-key[0], str(key[1:]), e))
    jets.sort(reverse=True)
    rest.sort(reverse=True)
    return (jdeg, tuple(jets), sum(r[2] for r in rest), tuple(rest))


class DiffPoly:
    """Canonical differential polynomial with exact rational coefficients."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: dict | None = None):
        self._terms = terms if terms is not None else {}
        self._hash = None

    # -- construction -------------------------------------------------
    @classmethod
    def const(cls, value) -> "DiffPoly":
        q = to_q(value)
        return cls({(): q} if q else {})

    @classmethod
    def from_atom(cls, atom: int) -> "DiffPoly":
        return cls({(atom, 1): Q(1)})

    @classmethod
    def jet(cls, fieldname: str, t_order: int = 0, xs: Iterable[int] = ()) -> "DiffPoly":
        return cls.from_atom(JetVar(fieldname, t_order, tuple(xs)).atom)

    @classmethod
    def indep(cls, direction: int) -> "DiffPoly":
        return cls.from_atom(intern((IND, direction)))

    @classmethod
    def param(cls, name: str) -> "DiffPoly":
        return cls.from_atom(intern((PAR, name)))

    @classmethod
    def aux(cls, name: str) -> "DiffPoly":
        return cls.from_atom(intern((AUX, name)))

    @classmethod
    def unknown(cls, index: int) -> "DiffPoly":
        return cls.from_atom(intern((UNK, index)))

    # -- introspection ------------------------------------------------
    @property
    def terms(self) -> Mapping[tuple, "gmpy2.mpq"]:
        return self._terms

    def is_zero(self) -> bool:
        return not self._terms

    def is_constant(self) -> bool:
        return all(not m for m in self._terms)

    def constant_value(self):
        return self._terms.get((), Q(0))

    def atoms(self) -> set[int]:
        out = set()
        for m in self._terms:
            out.update(m[::2])
        return out

    def jets(self) -> set[JetVar]:
        return {j for j in map(_jet_of, self.atoms()) if j is not None}

    def fields(self) -> set[str]:
        return {j.field for j in self.jets()}

    def max_t_order(self, fieldname: str | None = None) -> int:
        return max((j.t_order for j in self.jets()
                    if fieldname is None or j.field == fieldname), default=-1)

    def max_order(self, spatial_only: bool = False) -> int:
        return max((len(j.xs) if spatial_only else j.order for j in self.jets()),
                   default=-1)

    def degree_in(self, atom: int) -> int:
        deg = 0
        for m in self._terms:
            for k in range(0, len(m), 2):
                if m[k] == atom:
                    deg = max(deg, m[k + 1])
        return deg

    def total_degree(self, kinds=(JET,)) -> int:
        best = 0
        for m in self._terms:
            d = sum(m[k + 1] for k in range(0, len(m), 2) if _atoms[m[k]][0] in kinds)
            best = max(best, d)
        return best

    def sorted_terms(self):
        return sorted(self._terms.items(), key=lambda mc: _mono_sort_key(mc[0]),
                      reverse=True)

    # -- arithmetic ---------------------------------------------------
    @staticmethod
    def _coerce(other) -> "DiffPoly":
        if isinstance(other, DiffPoly):
            return other
        if isinstance(other, (int, Fraction, type(Q(0)))):
            return DiffPoly.const(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if not other._terms:
            return self
        if not self._terms:
            return other
        acc = dict(self._terms)
        kernels.poly_axpy(acc, other._terms, 1)
        return DiffPoly(acc)

    __radd__ = __add__

    def __neg__(self):
        return DiffPoly({m: -c for m, c in self._terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        acc = dict(self._terms)
        kernels.poly_axpy(acc, other._terms, -1)
        return DiffPoly(acc)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other - self

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, type(Q(0)))):
            q = to_q(other)
            if not q:
                return DiffPoly()
            return DiffPoly({m: c * q for m, c in self._terms.items()})
        if not isinstance(other, DiffPoly):
            return NotImplemented
        if not self._terms or not other._terms:
            return DiffPoly()
        return DiffPoly(kernels.poly_mul(self._terms, other._terms))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, DiffPoly):
            if not other.is_constant() or other.is_zero():
                from .errors import UnsupportedExpression
                raise UnsupportedExpression("division by a non-constant expression")
            other = other.constant_value()
        return self * (Q(1) / to_q(other))

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            from .errors import UnsupportedExpression
            raise UnsupportedExpression(f"non-integer or negative power {k!r}")
        result = DiffPoly.const(1)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def __eq__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self._terms == other._terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    def __repr__(self):
        from .printing import to_dsl
        return f"DiffPoly({to_dsl(self)!r})"

    def __str__(self):
        from .printing import to_dsl
        return to_dsl(self)

    # -- calculus -----------------------------------------------------
    def diff(self, var) -> "DiffPoly":
        """Formal partial derivative treating jet coordinates as independent."""
        atom = _as_atom(var)
        return DiffPoly(kernels.poly_diff(self._terms, atom))

    def D(self, direction: int) -> "DiffPoly":
        """Total derivative in the given direction (0 = t)."""
        dmap = {}
        for a in self.atoms():
            d = _derived_atom(a, direction)
            if d is not None:
                dmap[a] = d
        if not dmap:
            return DiffPoly()
        return DiffPoly(kernels.poly_derive(self._terms, dmap))

    def Dmulti(self, alpha: Iterable[int]) -> "DiffPoly":
        e = self
        for d in alpha:
            if e.is_zero():
                break
            e = e.D(d)
        return e

    def subs(self, mapping: Mapping[int, "DiffPoly"]) -> "DiffPoly":
        """Simultaneously substitute atoms by polynomials."""
        if not mapping:
            return self
        present = self.atoms() & mapping.keys()
        if not present:
            return self
        powers: dict[tuple[int, int], dict] = {}

        def power(a, e):
            key = (a, e)
            p = powers.get(key)
            if p is None:
                if e == 1:
                    p = mapping[a]._terms
                else:
                    p = kernels.poly_mul(power(a, e - 1), mapping[a]._terms)
                powers[key] = p
            return p

        acc: dict = {}
        for m, c in self._terms.items():
            kept = []
            factors = []
            for k in range(0, len(m), 2):
                if m[k] in present:
                    factors.append(power(m[k], m[k + 1]))
                else:
                    kept.append(m[k])
                    kept.append(m[k + 1])
            prod = {tuple(kept): c}
            for f in factors:
                if not prod:
                    break
                prod = kernels.poly_mul(prod, f)
            kernels.poly_axpy(acc, prod, 1)
        return DiffPoly(acc)

    def collect(self, keep_kinds=(UNK,)) -> dict[tuple, "DiffPoly"]:
        """Split into coefficients: map from the monomial in atoms *not* of
        ``keep_kinds`` to the polynomial in atoms of ``keep_kinds``."""
        out: dict[tuple, dict] = {}
        for m, c in self._terms.items():
            outer = []
            inner = []
            for k in range(0, len(m), 2):
                (inner if _atoms[m[k]][0] in keep_kinds else outer).extend(m[k:k + 2])
            out.setdefault(tuple(outer), {})[tuple(inner)] = c
        return {k: DiffPoly(v) for k, v in out.items()}

    def eval(self, point: "Point"):
        try:
            return Q(kernels.poly_eval(self._terms, point.values))
        except KeyError as exc:
            raise IncompletePoint(f"no value for {describe_atom(exc.args[0])}") from None


def _as_atom(var) -> int:
    if isinstance(var, int):
        return var
    if isinstance(var, JetVar):
        return var.atom
    if isinstance(var, DiffPoly):
        if len(var.terms) == 1:
            (m, c), = var.terms.items()
            if len(m) == 2 and m[1] == 1 and c == 1:
                return m[0]
        raise ValueError(f"{var!r} is not a single symbol")
    raise TypeError(f"cannot interpret {var!r} as a symbol")


def describe_atom(atom: int) -> str:
    key = _atoms[atom]
    if key[0] == JET:
        return repr(JetVar.from_alpha(key[1], key[2]))
    return {IND: "independent variable", PAR: "parameter", AUX: "auxiliary",
            UNK: "unknown coefficient"}[key[0]] + f" {key[1]!r}"


def partial_wrt(e: DiffPoly, v) -> DiffPoly:
    return e.diff(v)


def total_derivative(e: DiffPoly, direction: int) -> DiffPoly:
    return e.D(direction)


def canonicalize(expr) -> DiffPoly:
    """Canonical form of an expression tree built from DiffPoly leaves and
    nested tuples ``('+'|'-'|'*'|'^', a, b)`` / ``('neg', a)``."""
    if isinstance(expr, DiffPoly):
        return expr
    if isinstance(expr, (int, Fraction)) or isinstance(expr, type(Q(0))):
        return DiffPoly.const(expr)
    if isinstance(expr, str):
        return DiffPoly.const(to_q(expr))
    op, *args = expr
    if op == "neg":
        return -canonicalize(args[0])
    a = canonicalize(args[0])
    if op == "^":
        k = args[1]
        if isinstance(k, DiffPoly):
            if not k.is_constant() or k.constant_value().denominator != 1:
                from .errors import UnsupportedExpression
                raise UnsupportedExpression("non-integer power")
            k = int(k.constant_value())
        return a ** k
    b = canonicalize(args[1])
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    if op == "/":
        return a / b
    raise ValueError(f"unknown operator {op!r}")


@dataclass
class Point:
    """Exact assignment of rationals to atoms."""

    values: dict = dc_field(default_factory=dict)

    def __post_init__(self):
        self.values = {_as_atom(k): to_q(v) for k, v in self.values.items()}

    def __getitem__(self, var):
        return self.values[_as_atom(var)]


def eval_at(e: DiffPoly, point: Point):
    return e.eval(point)


def random_point(e, seed=0, bound: int = 1000, rng: random.Random | None = None) -> Point:
    """Random rational point covering every atom of ``e`` (a DiffPoly or an
    iterable of them).  Atoms are visited in a deterministic order."""
    polys = [e] if isinstance(e, DiffPoly) else list(e)
    atoms = set()
    for p in polys:
        atoms |= p.atoms()
    rng = rng or random.Random(seed)
    vals = {}
    for a in sorted(atoms, key=lambda a: repr(_atoms[a])):
        vals[a] = Q(rng.randint(-bound, bound), rng.randint(1, bound))
    return Point(vals)


def integrate_unit(e: DiffPoly, var) -> DiffPoly:
    """Exact integral of a polynomial in ``var`` over [0, 1]."""
    atom = _as_atom(var)
    acc: dict = {}
    for m, c in e.terms.items():
        k_exp = 0
        rest = []
        for k in range(0, len(m), 2):
            if m[k] == atom:
                k_exp = m[k + 1]
            else:
                rest.extend(m[k:k + 2])
        kernels.poly_axpy(acc, {tuple(rest): c}, Q(1, k_exp + 1))
    return DiffPoly(acc)


# ---------------------------------------------------------------------------
# PDE systems in CK form

@dataclass(frozen=True, eq=False)
class PDESystem:
    """PDE system ``D_t^{N_s} u^s + g^s = 0`` in CK form.

    ``orders[s]`` is the CK order of field ``s``; all ones is the
    first-order form, a single field of order N is the scalar form.
    """

    fields: tuple
    g: tuple
    orders: tuple
    n: int
    params: tuple = ()
    var_names: tuple = ()
    name: str = "system"
    _rules: dict = dc_field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "fields", tuple(self.fields))
        object.__setattr__(self, "g", tuple(self.g))
        object.__setattr__(self, "orders", tuple(self.orders))
        object.__setattr__(self, "params", tuple(self.params))
        if not self.var_names:
            object.__setattr__(self, "var_names", default_var_names(self.n))
        if not (len(self.fields) == len(self.g) == len(self.orders)):
            raise ValueError("fields, g and orders must have equal length")

    @property
    def N(self) -> int:
        return len(self.fields)

    @property
    def is_first_order(self) -> bool:
        return all(k == 1 for k in self.orders)

    @property
    def is_scalar(self) -> bool:
        return len(self.fields) == 1

    @property
    def scalar_order(self) -> int:
        return self.orders[0]

    @property
    def form(self) -> str:
        if self.is_first_order:
            return "FirstOrderCK"
        if self.is_scalar:
            return f"ScalarCK({self.orders[0]})"
        return "MixedCK(" + ",".join(map(str, self.orders)) + ")"

    @property
    def m(self) -> int:
        return max((len(j.xs) for gi in self.g for j in gi.jets()), default=0)

    def order_of(self, fieldname: str) -> int:
        return self.orders[self.fields.index(fieldname)]

    def field_jet(self, s: int, t_order: int = 0, xs=()) -> DiffPoly:
        return DiffPoly.jet(self.fields[s], t_order, xs)

    def check_normal(self, e: DiffPoly, what: str = "expression"):
        for j in e.jets():
            if j.field in self.fields and j.t_order >= self.order_of(j.field):
                raise NotNormalForm(f"{what} contains the eliminated jet {j}")

    # -- solution-space restriction -----------------------------------
    def _rule(self, s: int, k: int, xs: tuple) -> DiffPoly:
        key = (s, k, xs)
        r = self._rules.get(key)
        if r is not None:
            return r
        if xs:
            r = self._rule(s, k, xs[:-1]).D(xs[-1])
        elif k == self.orders[s]:
            r = -self.g[s]
        else:
            r = restrict_to_solutions(self._rule(s, k - 1, ()).D(0), self)
        self._rules[key] = r
        return r

    def leading_atoms(self, e: DiffPoly) -> dict[int, DiffPoly]:
        sub = {}
        for a in e.atoms():
            key = _atoms[a]
            if key[0] != JET or key[1] not in self.fields:
                continue
            s = self.fields.index(key[1])
            alpha = key[2]
            k = alpha.count(0)
            if k >= self.orders[s]:
                sub[a] = self._rule(s, k, tuple(d for d in alpha if d))
        return sub


def default_var_names(n: int) -> tuple:
    if n <= 3:
        return ("t", "x", "y", "z")[: n + 1]
    return ("t",) + tuple(f"x{i}" for i in range(1, n + 1))


def restrict_to_solutions(e: DiffPoly, sys: PDESystem) -> DiffPoly:
    """Eliminate every leading t-derivative (and consequences) using the PDE."""
    sub = sys.leading_atoms(e)
    if not sub:
        return e
    return e.subs(sub)


def solution_Dt(e: DiffPoly, sys: PDESystem) -> DiffPoly:
    """Total t-derivative on the solution space."""
    return restrict_to_solutions(e.D(0), sys)


def multi_D(e: DiffPoly, alpha: Iterable[int]) -> DiffPoly:
    return e.Dmulti(alpha)
