import random

from conslaw import DiffPoly, JetVar
from conslaw.operators import multisets_upto

PDE_DIR = __import__("pathlib").Path(__file__).resolve().parent.parent / "pde"


def random_poly(rng: random.Random, fields=("u",), n=1, order=2, degree=2,
                terms=4, t_order=0, with_tx=False, coef_bound=5) -> DiffPoly:
    """Random differential polynomial with small integer coefficients.

    Jets carry up to ``t_order`` t-derivatives and spatial order ``order``.
    """
    gens = []
    for f in fields:
        for j in range(t_order + 1):
            for xs in multisets_upto(n, order):
                gens.append(DiffPoly.jet(f, j, xs))
    if with_tx:
        gens += [DiffPoly.indep(d) for d in range(n + 1)]
    acc = DiffPoly()
    for _ in range(terms):
        m = DiffPoly.const(rng.randint(-coef_bound, coef_bound) or 1)
        for _ in range(rng.randint(0, degree)):
            m = m * rng.choice(gens)
        acc = acc + m
    return acc


def random_tx_poly(rng: random.Random, n=1, degree=2, terms=3) -> DiffPoly:
    gens = [DiffPoly.indep(d) for d in range(n + 1)]
    acc = DiffPoly()
    for _ in range(terms):
        m = DiffPoly.const(rng.randint(-5, 5) or 1)
        for _ in range(rng.randint(0, degree)):
            m = m * rng.choice(gens)
        acc = acc + m
    return acc


def jet(f="u", t=0, xs=()):
    return DiffPoly.jet(f, t, xs)


def pde(name):
    from conslaw import load
    return load(PDE_DIR / f"{name}.pde")[0]


__all__ = ["random_poly", "random_tx_poly", "jet", "pde", "JetVar", "PDE_DIR"]
