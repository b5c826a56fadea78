"""``conslaw`` command line: determining systems, multiplier checks and
solving, density construction and verification."""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
import time

from .density import (DensityPair, HomotopyBase, construct, normalize_density,
                      random_check, triviality_test, verify_conservation)
from .determining import (AnsatzConfig, MultiplierSet, check_candidate,
                          count_extra_equations, solve_ansatz,
                          symbolic_component_str, symbolic_system_for)
from .errors import ConslawError, NotAMultiplier, UnsupportedBase
from .frontend import load, parse_expression, parse_expression_list, to_first_order
from .jet import DiffPoly, PDESystem
from .operators import TestFunction, adj_apply, lin_apply
from .printing import to_dsl

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2

log = logging.getLogger("conslaw")


def fingerprint(sys: PDESystem) -> str:
    text = "|".join([",".join(sys.var_names), ",".join(sys.fields),
                     ",".join(map(str, sys.orders)), ",".join(sys.params)]
                    + [to_dsl(g, sys.var_names) for g in sys.g])
    return hashlib.sha256(text.encode()).hexdigest()[:16]


class Report:
    def __init__(self, sys: PDESystem, command: str, params: dict):
        self.sys = sys
        self.data = {
            "system": sys.name,
            "fingerprint": fingerprint(sys),
            "form": sys.form,
            "command": command,
            "params": params,
            "equations": [],
            "multipliers": [],
            "densities": [],
            "counts": {},
            "notes": [],
        }
        self.lines = [f"system {sys.name} [{sys.form}] {self.data['fingerprint']}"]

    def p(self, e: DiffPoly) -> str:
        return to_dsl(e, self.sys.var_names)

    def equation(self, eid: str, text: str, role: str):
        self.data["equations"].append({"id": eid, "lhs_printed": text, "role": role})
        self.lines.append(f"  {eid} [{role}]: {text} = 0")

    def note(self, text: str):
        self.data["notes"].append(text)
        self.lines.append(f"  note: {text}")

    def text(self, line: str):
        self.lines.append(line)

    def render(self, emit: str) -> str:
        if emit == "json":
            return json.dumps(self.data, indent=2, sort_keys=False) + "\n"
        return "\n".join(self.lines) + "\n"


# ---------------------------------------------------------------------------
# helpers


def _working_system(sys: PDESystem, rep: Report) -> PDESystem:
    if sys.is_first_order or sys.is_scalar:
        return sys
    fo, _ = to_first_order(sys)
    rep.note(f"mixed orders converted to first order; fields {', '.join(fo.fields)}")
    rep.data["form"] = fo.form
    rep.sys = fo
    return fo


def _ansatz(args) -> AnsatzConfig:
    return AnsatzConfig(order=args.order, degree=args.deg, tx_degree=args.txdeg)


def _ansatz_params(args) -> dict:
    return {"order": args.order, "deg": args.deg, "txdeg": args.txdeg}


def _multipliers_from_args(sys: PDESystem, args, rep: Report) -> list[MultiplierSet]:
    if args.from_solve:
        return solve_ansatz(sys, _ansatz(args))
    if not args.multiplier:
        raise ConslawError("give --multiplier or --from-solve")
    out = []
    for text in args.multiplier:
        comps = parse_expression_list(text, sys)
        out.append(MultiplierSet.for_system(sys, comps))
    return out


def _base(sys: PDESystem, text: str) -> HomotopyBase:
    if text in (None, "", "zero"):
        return HomotopyBase.zero(sys.N)
    return HomotopyBase.of(sys, parse_expression_list(text, sys))


def _multiplier_entry(rep: Report, ms: MultiplierSet) -> list[str]:
    comps = [rep.p(c) for c in ms]
    rep.data["multipliers"].append(comps)
    return comps


# ---------------------------------------------------------------------------
# commands


def cmd_determining(sys: PDESystem, args, rep: Report) -> int:
    sys = _working_system(sys, rep)
    V = TestFunction("V").components(sys.N)
    W = TestFunction("Lambda").components(sys.N)
    Vm = dict(zip(sys.fields, V))
    for s, g in enumerate(sys.g):
        lhs = V[s].Dmulti((0,) * sys.orders[s]) + lin_apply(g, sys.fields, Vm)
        rep.equation(f"lin[{sys.fields[s]}]", rep.p(lhs), "linearization")
    for s, f in enumerate(sys.fields):
        N_s = sys.orders[s]
        lhs = W[s].Dmulti((0,) * N_s) * (-1) ** N_s + adj_apply(sys.g, sys.fields, W, f)
        rep.equation(f"adj[{f}]", rep.p(lhs), "adjoint")
    comps, zero = symbolic_system_for(sys, args.order)
    if sys.is_first_order:
        rows = TestFunction("Lambda").field_names(sys.N)
        cols = list(sys.fields)
    else:
        rows = [f"Omega{k}" for k in range(sys.orders[0])]
        cols = [rep.p(DiffPoly.jet(sys.fields[0], j)) for j in range(sys.orders[0])]
    for r, c, beta, terms in comps:
        b = "".join(sys.var_names[d] for d in beta) or "1"
        rep.equation(f"extra[{r},{c},{b}]",
                     symbolic_component_str(terms, rows, cols, sys.var_names), "extra")
    if zero:
        rep.note(f"{len(zero)} extra components vanish identically")
    N = sys.N if sys.is_first_order else sys.orders[0]
    try:
        formula = count_extra_equations(N, sys.n, args.order)
    except ValueError:
        formula = None
    rep.data["counts"] = {"generated": len(comps), "formula": formula}
    rep.text(f"  counts: generated {len(comps)}, formula {formula}")
    return EXIT_OK


def cmd_check(sys: PDESystem, args, rep: Report) -> int:
    sys = _working_system(sys, rep)
    ok_all = True
    for ms in _multipliers_from_args(sys, args, rep):
        comps = _multiplier_entry(rep, ms)
        report = check_candidate(sys, ms)
        rep.text(f"  multiplier ({', '.join(comps)})")
        for rid, role, e in report.residuals:
            if not e.is_zero():
                rep.equation(rid, rep.p(e), role)
        rep.text(f"  adjoint: {'PASS' if report.adjoint_ok else 'FAIL'}")
        rep.text(f"  extra: {'PASS' if report.extra_ok else 'FAIL'}")
        rep.data.setdefault("checks", []).append(
            {"adjoint": report.adjoint_ok, "extra": report.extra_ok})
        ok_all &= report.ok
    return EXIT_OK if ok_all else EXIT_FAIL


def cmd_solve(sys: PDESystem, args, rep: Report) -> int:
    sys = _working_system(sys, rep)
    basis = solve_ansatz(sys, _ansatz(args))
    rep.text(f"  {len(basis)} multiplier(s)")
    for k, ms in enumerate(basis):
        comps = _multiplier_entry(rep, ms)
        rep.text(f"  [{k}] " + ", ".join(comps))
    rep.data["counts"] = {"multipliers": len(basis)}
    return EXIT_OK


def _density_entry(rep: Report, sys: PDESystem, d: DensityPair, args) -> bool:
    res = verify_conservation(sys, d)
    bad = random_check(sys, d, points=args.points, seed=args.seed, bound=args.bound)
    recovered = triviality_test(d, sys)
    entry = {
        "phi_t": rep.p(d.phi_t),
        "phi_x": [rep.p(p) for p in d.phi_x],
        "residual": rep.p(res),
        "random_points_failed": bad,
        "recovered_multiplier": [rep.p(c) for c in recovered],
        "trivial": recovered.is_zero(),
    }
    rep.data["densities"].append(entry)
    rep.text(f"    Phi_{sys.var_names[0]} = {entry['phi_t']}")
    for name, p in zip(sys.var_names[1:], entry["phi_x"]):
        rep.text(f"    Phi_{name} = {p}")
    rep.text(f"    residual: {entry['residual']}  ({bad}/{args.points} random points fail)")
    rep.text(f"    recovered multiplier: {', '.join(entry['recovered_multiplier'])}"
             + ("  [trivial]" if entry["trivial"] else ""))
    return res.is_zero() and bad == 0


def cmd_construct(sys: PDESystem, args, rep: Report) -> int:
    sys = _working_system(sys, rep)
    base = _base(sys, args.base)
    ok = True
    for ms in _multipliers_from_args(sys, args, rep):
        comps = _multiplier_entry(rep, ms)
        rep.text(f"  multiplier ({', '.join(comps)})")
        d = construct(sys, ms, base)
        if args.normalize:
            d = normalize_density(d, sys)
        ok &= _density_entry(rep, sys, d, args)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_verify(sys: PDESystem, args, rep: Report) -> int:
    sys = _working_system(sys, rep)
    if args.phi_t is None or args.phi_x is None:
        raise ConslawError("verify needs --phi-t and --phi-x")
    phi_t = parse_expression(args.phi_t, sys)
    phi_x = parse_expression_list(args.phi_x, sys)
    if len(phi_x) != sys.n:
        raise ConslawError(f"--phi-x needs {sys.n} expressions")
    sys.check_normal(phi_t, "density")
    for p in phi_x:
        sys.check_normal(p, "flux")
    ok = _density_entry(rep, sys, DensityPair(phi_t, tuple(phi_x)), args)
    return EXIT_OK if ok else EXIT_FAIL


COMMANDS = {
    "determining": cmd_determining,
    "check": cmd_check,
    "solve": cmd_solve,
    "construct": cmd_construct,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="conslaw", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("file", help="PDE description in the conslaw DSL")
        p.add_argument("--emit", choices=("text", "json"), default="text")
        p.add_argument("--out", help="write the report here instead of stdout")
        p.add_argument("--timing", action="store_true", help="include wall-clock time")
        p.add_argument("-v", "--verbose", action="store_true")

    def ansatz(p, order=1):
        p.add_argument("--order", type=int, default=order, help="spatial jet order of the ansatz")
        p.add_argument("--deg", type=int, default=2, help="degree in jet variables")
        p.add_argument("--txdeg", type=int, default=0, help="degree in t and x")

    def sampling(p):
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--points", type=int, default=100)
        p.add_argument("--bound", type=int, default=1000)

    p = sub.add_parser("determining", help="print the determining system")
    common(p)
    p.add_argument("--order", type=int, default=1, help="multiplier order p")

    p = sub.add_parser("check", help="check candidate multipliers")
    common(p)
    p.add_argument("--multiplier", action="append", default=[],
                   help="comma-separated components; repeat for several")
    p.set_defaults(from_solve=False)

    p = sub.add_parser("solve", help="all multipliers in a polynomial ansatz")
    common(p)
    ansatz(p)

    p = sub.add_parser("construct", help="conserved densities from multipliers")
    common(p)
    ansatz(p)
    sampling(p)
    p.add_argument("--multiplier", action="append", default=[])
    p.add_argument("--from-solve", action="store_true")
    p.add_argument("--base", default="zero", help="'zero' or comma-separated functions of t, x")
    p.add_argument("--normalize", action="store_true",
                   help="integrate obvious trivial parts by parts")

    p = sub.add_parser("verify", help="verify a given density pair")
    common(p)
    sampling(p)
    p.add_argument("--phi-t", dest="phi_t")
    p.add_argument("--phi-x", dest="phi_x", help="comma-separated fluxes")
    return ap


def _params(args) -> dict:
    skip = {"file", "emit", "out", "command", "timing", "verbose"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    start = time.perf_counter()
    try:
        sys_, _ = load(args.file)
    except OSError as exc:
        print(f"conslaw: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ConslawError as exc:
        print(f"conslaw: {args.file}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    rep = Report(sys_, args.command, _params(args))
    try:
        code = COMMANDS[args.command](sys_, args, rep)
    except (NotAMultiplier, UnsupportedBase) as exc:
        print(f"conslaw: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (ConslawError, ValueError) as exc:
        print(f"conslaw: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if args.timing:
        rep.data["timing_s"] = round(time.perf_counter() - start, 3)
        rep.text(f"  time: {rep.data['timing_s']} s")
    out = rep.render(args.emit)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(out)
    else:
        sys.stdout.write(out)
    return code


if __name__ == "__main__":
    raise SystemExit(main())
