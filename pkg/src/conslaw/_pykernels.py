"""Pure-Python sparse polynomial kernels.

A monomial is a flat tuple ``(a0, e0, a1, e1, ...)`` of atom ids and
positive exponents sorted by atom id; ``()`` is the unit monomial.  A
polynomial is a ``dict`` mapping monomials to nonzero rational
coefficients.  The compiled module ``_ckernels`` exports the same
functions with identical semantics.
"""

BACKEND = "python"


def mono_mul(a, b):
    if not a:
        return b
    if not b:
        return a
    out = []
    i = j = 0
    la, lb = len(a), len(b)
    while i < la and j < lb:
        x, y = a[i], b[j]
        if x < y:
            out.append(x)
            out.append(a[i + 1])
            i += 2
        elif y < x:
            out.append(y)
            out.append(b[j + 1])
            j += 2
        else:
            out.append(x)
            out.append(a[i + 1] + b[j + 1])
            i += 2
            j += 2
    if i < la:
        out.extend(a[i:])
    if j < lb:
        out.extend(b[j:])
    return tuple(out)


def poly_mul(p, q):
    if len(p) > len(q):
        p, q = q, p
    out = {}
    get = out.get
    for ma, ca in p.items():
        for mb, cb in q.items():
            m = mono_mul(ma, mb)
            c = get(m)
            if c is None:
                out[m] = ca * cb
            else:
                out[m] = c + ca * cb
    return {m: c for m, c in out.items() if c}


def poly_axpy(acc, q, scale):
    """acc += scale * q, in place; zero entries are removed."""
    for m, c in q.items():
        v = acc.get(m)
        if v is None:
            acc[m] = c * scale
        else:
            v = v + c * scale
            if v:
                acc[m] = v
            else:
                del acc[m]
    return acc


def poly_mul_mono(p, mono, scale):
    """scale * mono * p"""
    return {mono_mul(m, mono): c * scale for m, c in p.items()}


def poly_diff(p, atom):
    out = {}
    for m, c in p.items():
        n = len(m)
        for k in range(0, n, 2):
            if m[k] == atom:
                e = m[k + 1]
                if e == 1:
                    nm = m[:k] + m[k + 2:]
                else:
                    nm = m[:k + 1] + (e - 1,) + m[k + 2:]
                out[nm] = c * e
                break
            if m[k] > atom:
                break
    return out


def poly_derive(p, dmap):
    """Apply the derivation sending atom ``a`` to atom ``dmap[a]``.

    ``dmap[a] == -1`` means the image is the constant 1; atoms absent
    from ``dmap`` are constants of the derivation.
    """
    out = {}
    get = out.get
    for m, c in p.items():
        n = len(m)
        for k in range(0, n, 2):
            a = m[k]
            d = dmap.get(a)
            if d is None:
                continue
            e = m[k + 1]
            if e == 1:
                rest = m[:k] + m[k + 2:]
            else:
                rest = m[:k + 1] + (e - 1,) + m[k + 2:]
            if d >= 0:
                rest = mono_mul(rest, (d, 1))
            v = get(rest)
            if v is None:
                out[rest] = c * e
            else:
                out[rest] = v + c * e
    return {m: c for m, c in out.items() if c}


def poly_eval(p, values):
    total = 0
    for m, c in p.items():
        v = c
        for k in range(0, len(m), 2):
            v = v * values[m[k]] ** m[k + 1]
        total = total + v
    return total
