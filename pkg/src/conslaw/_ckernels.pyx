# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled sparse polynomial kernels; see ``_pykernels`` for the contract."""

from cpython.tuple cimport PyTuple_New, PyTuple_SET_ITEM, PyTuple_GET_SIZE, PyTuple_GET_ITEM
from cpython.ref cimport Py_INCREF

BACKEND = "cython"


cdef tuple _mono_mul(tuple a, tuple b):
    cdef Py_ssize_t la = PyTuple_GET_SIZE(a)
    cdef Py_ssize_t lb = PyTuple_GET_SIZE(b)
    if la == 0:
        return b
    if lb == 0:
        return a
    cdef long buf[256]
    cdef long *out = buf
    cdef Py_ssize_t i = 0, j = 0, k = 0
    cdef long x, y
    if la + lb > 256:
        return _mono_mul_slow(a, b)
    while i < la and j < lb:
        x = <long>a[i]
        y = <long>b[j]
        if x < y:
            out[k] = x
            out[k + 1] = <long>a[i + 1]
            i += 2
        elif y < x:
            out[k] = y
            out[k + 1] = <long>b[j + 1]
            j += 2
        else:
            out[k] = x
            out[k + 1] = <long>a[i + 1] + <long>b[j + 1]
            i += 2
            j += 2
        k += 2
    while i < la:
        out[k] = <long>a[i]
        i += 1
        k += 1
    while j < lb:
        out[k] = <long>b[j]
        j += 1
        k += 1
    cdef tuple res = PyTuple_New(k)
    cdef object item
    cdef Py_ssize_t r
    for r in range(k):
        item = out[r]
        Py_INCREF(item)
        PyTuple_SET_ITEM(res, r, item)
    return res


cdef tuple _mono_mul_slow(tuple a, tuple b):
    res = []
    cdef Py_ssize_t i = 0, j = 0
    cdef Py_ssize_t la = len(a), lb = len(b)
    while i < la and j < lb:
        x, y = a[i], b[j]
        if x < y:
            res += [x, a[i + 1]]
            i += 2
        elif y < x:
            res += [y, b[j + 1]]
            j += 2
        else:
            res += [x, a[i + 1] + b[j + 1]]
            i += 2
            j += 2
    res.extend(a[i:])
    res.extend(b[j:])
    return tuple(res)


def mono_mul(tuple a, tuple b):
    return _mono_mul(a, b)


def poly_mul(dict p, dict q):
    if len(p) > len(q):
        p, q = q, p
    cdef dict out = {}
    cdef tuple ma, mb, m
    cdef object ca, cb, c
    for ma, ca in p.items():
        for mb, cb in q.items():
            m = _mono_mul(ma, mb)
            c = out.get(m)
            if c is None:
                out[m] = ca * cb
            else:
                out[m] = c + ca * cb
    return {m: c for m, c in out.items() if c}


def poly_axpy(dict acc, dict q, scale):
    cdef tuple m
    cdef object c, v
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


def poly_mul_mono(dict p, tuple mono, scale):
    cdef tuple m
    return {_mono_mul(m, mono): c * scale for m, c in p.items()}


def poly_diff(dict p, long atom):
    cdef dict out = {}
    cdef tuple m, nm
    cdef Py_ssize_t k, n
    cdef long a, e
    for m, c in p.items():
        n = PyTuple_GET_SIZE(m)
        k = 0
        while k < n:
            a = <long>m[k]
            if a == atom:
                e = <long>m[k + 1]
                if e == 1:
                    nm = m[:k] + m[k + 2:]
                else:
                    nm = m[:k + 1] + (e - 1,) + m[k + 2:]
                out[nm] = c * e
                break
            if a > atom:
                break
            k += 2
    return out


def poly_derive(dict p, dict dmap):
    cdef dict out = {}
    cdef tuple m, rest
    cdef Py_ssize_t k, n
    cdef long e, d
    cdef object dobj, v
    for m, c in p.items():
        n = PyTuple_GET_SIZE(m)
        k = 0
        while k < n:
            dobj = dmap.get(m[k])
            if dobj is None:
                k += 2
                continue
            d = <long>dobj
            e = <long>m[k + 1]
            if e == 1:
                rest = m[:k] + m[k + 2:]
            else:
                rest = m[:k + 1] + (e - 1,) + m[k + 2:]
            if d >= 0:
                rest = _mono_mul(rest, (d, 1))
            v = out.get(rest)
            if v is None:
                out[rest] = c * e
            else:
                out[rest] = v + c * e
            k += 2
    return {m: c for m, c in out.items() if c}


def poly_eval(dict p, dict values):
    total = 0
    cdef tuple m
    cdef Py_ssize_t k, n
    for m, c in p.items():
        v = c
        n = PyTuple_GET_SIZE(m)
        k = 0
        while k < n:
            v = v * values[m[k]] ** m[k + 1]
            k += 2
        total = total + v
    return total
