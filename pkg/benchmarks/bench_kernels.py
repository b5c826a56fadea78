"""Compare the compiled and pure-Python polynomial kernels.

Kernel timings call both backend modules directly on the same inputs.  The
end-to-end timings run a multiplier classification in a subprocess, once per
backend, selected through CONSLAW_PURE_PYTHON.

    python benchmarks/bench_kernels.py [--repeat 5]
"""

import argparse
import os
import random
import subprocess
import sys
import timeit
from pathlib import Path

from conslaw import DiffPoly
from conslaw.jet import _derived_atom
from conslaw.kernels import available_backends

ROOT = Path(__file__).resolve().parent.parent


def sample_poly(rng, terms, degree):
    gens = [DiffPoly.jet("u", 0, (1,) * k) for k in range(5)] + [DiffPoly.indep(1)]
    acc = DiffPoly()
    for _ in range(terms):
        m = DiffPoly.const(rng.randint(-9, 9) or 1)
        for _ in range(rng.randint(1, degree)):
            m = m * rng.choice(gens)
        acc = acc + m
    return acc


def kernel_cases(rng):
    p, q = sample_poly(rng, 60, 5), sample_poly(rng, 60, 5)
    big = p * q
    dmap = {a: d for a in big.atoms() if (d := _derived_atom(a, 1)) is not None}
    values = {a: rng.randint(-50, 50) for a in big.atoms()}
    a = next(iter(big.atoms()))
    return {
        "poly_mul": lambda k: k.poly_mul(p.terms, q.terms),
        "poly_derive": lambda k: k.poly_derive(big.terms, dmap),
        "poly_diff": lambda k: k.poly_diff(big.terms, a),
        "poly_eval": lambda k: k.poly_eval(big.terms, values),
    }


def end_to_end(pure: bool, repeat: int) -> float:
    env = dict(os.environ, CONSLAW_PURE_PYTHON="1" if pure else "0")
    code = ("import time\n"
            "from conslaw import load, solve_ansatz, AnsatzConfig\n"
            f"sys_ = load({str(ROOT / 'pde' / 'kdv.pde')!r})[0]\n"
            "best = float('inf')\n"
            f"for _ in range({repeat}):\n"
            "    s = time.perf_counter()\n"
            "    solve_ansatz(sys_, AnsatzConfig(order=3, degree=3, tx_degree=1))\n"
            "    best = min(best, time.perf_counter() - s)\n"
            "print(best)\n")
    out = subprocess.run([sys.executable, "-c", code], env=env, check=True,
                         capture_output=True, text=True).stdout
    return float(out)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args()

    mods = available_backends()
    cases = kernel_cases(random.Random(args.seed))
    print(f"{'kernel':<14}" + "".join(f"{m.BACKEND:>12}" for m in mods)
          + ("     speedup" if len(mods) > 1 else ""))
    for name, fn in cases.items():
        times = []
        for m in mods:
            number = 20
            times.append(min(timeit.repeat(lambda: fn(m), number=number,
                                           repeat=args.repeat)) / number)
        row = f"{name:<14}" + "".join(f"{t * 1e3:>10.3f}ms" for t in times)
        if len(times) > 1:
            row += f"{times[0] / times[1]:>11.2f}x"
        print(row)

    print("\nKdV classification (order 3, degree 3, t/x degree 1), best of "
          f"{args.repeat}:")
    py = end_to_end(True, args.repeat)
    print(f"  python  {py:.3f}s")
    if len(mods) > 1:
        cy = end_to_end(False, args.repeat)
        print(f"  cython  {cy:.3f}s  ({py / cy:.2f}x)")


if __name__ == "__main__":
    main()
