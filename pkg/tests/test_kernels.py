import random

import gmpy2
import pytest
import sympy

from conslaw import kernels

BACKENDS = kernels.available_backends()
Q = gmpy2.mpq
SYMS = sympy.symbols("a0:6")


def rand_mono(rng, atoms=6, maxlen=3):
    chosen = sorted(rng.sample(range(atoms), rng.randint(0, maxlen)))
    out = []
    for a in chosen:
        out += [a, rng.randint(1, 3)]
    return tuple(out)


def rand_poly(rng, terms=5):
    p = {}
    for _ in range(terms):
        c = Q(rng.randint(-9, 9), rng.randint(1, 5))
        if c:
            p[rand_mono(rng)] = c
    return p


def to_sympy(p):
    acc = sympy.Integer(0)
    for m, c in p.items():
        t = sympy.Rational(int(c.numerator), int(c.denominator))
        for k in range(0, len(m), 2):
            t *= SYMS[m[k]] ** m[k + 1]
        acc += t
    return sympy.expand(acc)


@pytest.fixture(params=BACKENDS, ids=lambda m: m.BACKEND)
def kern(request):
    return request.param


def test_selected_backend_is_listed():
    assert kernels.BACKEND in {m.BACKEND for m in BACKENDS}


def test_mono_mul_merges_exponents(kern):
    assert kern.mono_mul((1, 2, 4, 1), (0, 1, 4, 2)) == (0, 1, 1, 2, 4, 3)
    assert kern.mono_mul((), (3, 1)) == (3, 1)
    assert kern.mono_mul((3, 1), ()) == (3, 1)


def test_mono_mul_long_monomials(kern):
    a = tuple(x for k in range(0, 400, 2) for x in (k, 1))
    b = tuple(x for k in range(1, 400, 2) for x in (k, 2))
    m = kern.mono_mul(a, b)
    assert len(m) == 800
    assert m[:4] == (0, 1, 1, 2)


@pytest.mark.parametrize("seed", range(20))
def test_poly_mul_matches_sympy(kern, seed):
    rng = random.Random(seed)
    p, q = rand_poly(rng), rand_poly(rng)
    assert sympy.expand(to_sympy(kern.poly_mul(p, q)) - to_sympy(p) * to_sympy(q)) == 0


@pytest.mark.parametrize("seed", range(20))
def test_poly_diff_matches_sympy(kern, seed):
    rng = random.Random(seed)
    p = rand_poly(rng)
    a = rng.randrange(6)
    assert sympy.expand(to_sympy(kern.poly_diff(p, a)) - sympy.diff(to_sympy(p), SYMS[a])) == 0


@pytest.mark.parametrize("seed", range(20))
def test_poly_derive_is_a_derivation(kern, seed):
    # derivation a_k -> a_{k+1} on atoms 0..4, a_5 -> 1
    rng = random.Random(seed)
    p = rand_poly(rng)
    dmap = {k: k + 1 for k in range(5)}
    dmap[5] = -1
    expr = to_sympy(p)
    want = sum(sympy.diff(expr, SYMS[k]) * (SYMS[k + 1] if k < 5 else 1) for k in range(6))
    assert sympy.expand(to_sympy(kern.poly_derive(p, dmap)) - want) == 0


def test_poly_axpy_cancels_in_place(kern):
    acc = {(0, 1): Q(2), (): Q(1)}
    kern.poly_axpy(acc, {(0, 1): Q(1)}, Q(-2))
    assert acc == {(): Q(1)}


def test_poly_mul_mono(kern):
    assert kern.poly_mul_mono({(0, 1): Q(3)}, (0, 1, 2, 1), Q(1, 3)) == {(0, 2, 2, 1): Q(1)}


def test_poly_eval(kern):
    p = {(0, 1, 1, 1): Q(1), (): Q(-1, 2)}
    assert kern.poly_eval(p, {0: Q(2), 1: Q(3)}) == Q(11, 2)
    with pytest.raises(KeyError):
        kern.poly_eval(p, {0: Q(2)})


@pytest.mark.parametrize("seed", range(10))
def test_backends_agree(seed):
    rng = random.Random(seed)
    p, q = rand_poly(rng, 8), rand_poly(rng, 8)
    results = [(m.poly_mul(p, q), m.poly_diff(p, 2), m.poly_derive(q, {1: 2, 3: -1}))
               for m in BACKENDS]
    assert all(r == results[0] for r in results)
