"""Exact nullspace computations.

Rational matrices go through plain Gauss-Jordan elimination.  Matrices
whose entries are polynomials in symbolic parameters are reduced over the
field of rational functions in those parameters, then each basis vector is
cleared of denominators and common factors.  Pivots are assumed nonzero for
generic parameter values.
"""

from __future__ import annotations

from .jet import DiffPoly, Q

# ---------------------------------------------------------------------------
# rationals


def rref(rows: list[list], ncols: int):
    """Reduced row echelon form in place; returns the pivot columns."""
    pivots = []
    r = 0
    for c in range(ncols):
        piv = next((k for k in range(r, len(rows)) if rows[k][c]), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = 1 / rows[r][c]
        rows[r] = [x * inv for x in rows[r]]
        for k in range(len(rows)):
            if k != r and rows[k][c]:
                f = rows[k][c]
                rows[k] = [a - f * b for a, b in zip(rows[k], rows[r])]
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    del rows[r:]
    return pivots


def nullspace_rational(rows: list[dict], ncols: int) -> list[list]:
    """Basis of ``{x : sum_c row[c] x_c = 0 for every row}`` in RREF."""
    dense = [[Q(row.get(c, 0)) for c in range(ncols)] for row in rows]
    dense = [r for r in dense if any(r)]
    pivots = rref(dense, ncols)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        v = [Q(0)] * ncols
        v[f] = Q(1)
        for r, p in enumerate(pivots):
            v[p] = -dense[r][f]
        basis.append(v)
    if basis:
        rref(basis, ncols)
    return basis


# ---------------------------------------------------------------------------
# entries polynomial in parameters


def _to_sympy(e: DiffPoly, gens: list, index: dict):
    import sympy
    acc = sympy.Integer(0)
    for m, c in e.terms.items():
        term = sympy.Rational(int(c.numerator), int(c.denominator))
        for k in range(0, len(m), 2):
            term *= gens[index[m[k]]] ** m[k + 1]
        acc += term
    return acc


def _from_sympy(poly, atoms: list) -> DiffPoly:
    terms = {}
    for exps, c in poly.terms():
        if not c:
            continue
        mono = []
        for a, e in sorted(zip(atoms, exps)):
            if e:
                mono += [a, e]
        terms[tuple(mono)] = Q(int(c.numerator), int(c.denominator))
    return DiffPoly(terms)


def nullspace_poly(rows: list[dict], ncols: int) -> list[list[DiffPoly]]:
    """Nullspace over the rational functions in the parameters, returned
    with polynomial entries free of common factors.

    Reduction treats the parameters as generic: a pivot that vanishes only
    for special parameter values is still used.
    """
    from functools import reduce

    from sympy import Poly, symbols
    from sympy.polys.domains import QQ
    from sympy.polys.matrices import DomainMatrix

    atoms = sorted({a for row in rows for v in row.values() for a in v.atoms()})
    if not atoms:
        qrows = [{c: v.constant_value() for c, v in row.items()} for row in rows]
        return [[DiffPoly.const(x) for x in v] for v in nullspace_rational(qrows, ncols)]
    gens = list(symbols(f"p0:{len(atoms)}"))
    index = {a: k for k, a in enumerate(atoms)}
    K = QQ.frac_field(*gens)
    dense = [[K.from_sympy(_to_sympy(row[c], gens, index)) if c in row else K.zero
              for c in range(ncols)] for row in rows if row]
    if not dense:
        dense = [[K.zero] * ncols]
    M = DomainMatrix(dense, (len(dense), ncols), K)
    basis = M.nullspace().to_Matrix().tolist()
    # rows of the nullspace matrix are basis vectors
    out = []
    for vec in basis:
        nums, dens = [], []
        for x in vec:
            num, den = x.as_numer_denom()
            nums.append(Poly(num, *gens))
            dens.append(Poly(den, *gens))
        scale = reduce(lambda a, b: a.lcm(b), dens)
        polys = [n * scale.exquo(d) for n, d in zip(nums, dens)]
        content = reduce(lambda a, b: a.gcd(b), [p for p in polys if not p.is_zero])
        polys = [p.exquo(content) if not p.is_zero else p for p in polys]
        out.append([_from_sympy(p, atoms) for p in polys])
    out.sort(key=lambda v: [k for k, x in enumerate(v) if not x.is_zero()])
    return [_primitive(v) for v in out]


def _primitive(vec: list[DiffPoly]) -> list[DiffPoly]:
    """Scale so the first nonzero entry has leading coefficient 1."""
    for x in vec:
        if not x.is_zero():
            lead = x.sorted_terms()[0][1]
            inv = Q(1) / lead
            return [y * inv for y in vec]
    return vec
