"""Render differential polynomials in the input DSL syntax."""

from __future__ import annotations

from collections import Counter

from .jet import AUX, IND, JET, PAR, UNK, DiffPoly, atom_key, default_var_names


def _names_for(e: DiffPoly, var_names):
    if var_names:
        return tuple(var_names)
    top = 0
    for a in e.atoms():
        key = atom_key(a)
        if key[0] == JET and key[2]:
            top = max(top, max(key[2]))
        elif key[0] == IND:
            top = max(top, key[1])
    return default_var_names(top)


def jet_str(fieldname: str, alpha: tuple, var_names) -> str:
    s = fieldname
    counts = Counter(alpha)
    for d in sorted(counts, reverse=True):
        c = counts[d]
        s = f"d{var_names[d]}({s})" if c == 1 else f"d{var_names[d]}({s},{c})"
    return s


def atom_str(atom: int, var_names) -> str:
    key = atom_key(atom)
    kind = key[0]
    if kind == JET:
        return jet_str(key[1], key[2], var_names)
    if kind == IND:
        return var_names[key[1]]
    if kind in (PAR, AUX):
        return key[1]
    if kind == UNK:
        return f"c{key[1]}"
    raise ValueError(key)


def _q_str(q) -> str:
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


_RANK = {PAR: 0, AUX: 1, UNK: 2, IND: 3, JET: 4}


def _factor_key(atom: int):
    key = atom_key(atom)
    if key[0] == JET:
        return (_RANK[JET], key[1], len(key[2]), key[2])
    return (_RANK[key[0]], str(key[1]))


def to_dsl(e: DiffPoly, var_names=None) -> str:
    if e.is_zero():
        return "0"
    names = _names_for(e, var_names)
    parts = []
    for mono, c in e.sorted_terms():
        factors = []
        pairs = sorted(zip(mono[::2], mono[1::2]), key=lambda ae: _factor_key(ae[0]))
        for a, k in pairs:
            s = atom_str(a, names)
            factors.append(s if k == 1 else f"{s}^{k}")
        neg = c < 0
        mag = -c if neg else c
        if not factors:
            body = _q_str(mag)
        elif mag == 1:
            body = "*".join(factors)
        else:
            body = _q_str(mag) + "*" + "*".join(factors)
        if not parts:
            parts.append(("-" if neg else "") + body)
        else:
            parts.append((" - " if neg else " + ") + body)
    return "".join(parts)
