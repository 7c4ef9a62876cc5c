"""Command line entry point: ``sasakilift {list,verify,deform,fit}``.

Exit codes: 0 everything passed, 1 some entry failed, 2 bad input.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import deform as D
from .catalog import CatalogError, catalog
from .report import emit_report

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _cmd_list(args) -> int:
    for e in catalog():
        params = ", ".join(f"{k}={v}" for k, v in e.defaults.items())
        print(f"{e.name:20s} [{params}]  {e.notes}")
    return EXIT_OK


def _scenario_from_args(args):
    from .scenario import Scenario, load_scenario

    if args.scenario:
        sc = load_scenario(args.scenario)
        # flags given explicitly override the file
        for attr in ("points", "seed", "output", "format"):
            v = getattr(args, attr if attr != "output" else "out")
            if v is not None:
                setattr(sc, attr, v)
        if args.suites:
            sc = Scenario(sc.manifold, sc.params, tuple(args.suites.split(",")), sc.points, sc.seed,
                          sc.tolerances, sc.homothety_grid, sc.output, sc.format)
        if args.tol is not None:
            sc.tolerances["default"] = args.tol
        Scenario.__post_init__(sc)
        return sc
    if not args.manifold:
        raise ValueError("give --scenario FILE or --manifold NAME")
    params = {}
    if args.n is not None:
        params["n"] = args.n
    if args.lam is not None:
        params["lam"] = args.lam
    tol = {} if args.tol is None else {"default": args.tol}
    suites = tuple(args.suites.split(",")) if args.suites else ("all",)
    return Scenario(args.manifold, params, suites, args.points if args.points is not None else 50,
                    args.seed if args.seed is not None else 0, tol, output=args.out,
                    format=args.format or "json")


def _cmd_verify(args) -> int:
    from .scenario import run_scenario

    sc = _scenario_from_args(args)
    rep = run_scenario(sc, timestamp=not args.no_timestamp)
    doc = emit_report(rep, sc.format)
    if sc.output:
        try:
            with open(sc.output, "w") as fh:
                fh.write(doc)
        except OSError as exc:
            raise ValueError(f"cannot write report: {exc}") from None
        s = rep.summary
        print(f"{rep.meta['manifold']}: {s['passed']}/{s['total']} passed, {s['failed']} failed -> {sc.output}")
        for e in rep.failures():
            print(f"  FAIL {e.label}: residual {e.residual:.3e} >= {e.tolerance:.1e}")
    else:
        sys.stdout.write(doc)
    return EXIT_OK if rep.ok else EXIT_FAIL


def _cmd_deform(args) -> int:
    hp = D.HomothetyParams(args.alpha, args.beta)
    out = {"alpha": hp.alpha, "beta": hp.beta, "c": hp.c, "ratio": hp.ratio, "form": args.form,
           "source": [args.lam, args.C1, args.C2]}
    out["deformed"] = list(D.soliton_constants_map(args.lam, args.C1, args.C2, args.n, hp, args.form))
    if args.detwist:
        r = D.detwist_solve(args.lam, args.C1, args.C2, args.n, target=args.detwist, form=args.form)
        out["detwist"] = {
            "success": r.success,
            "message": r.message,
            "alpha": r.params.alpha if r.params else None,
            "beta": r.params.beta if r.params else None,
            "alpha_over_beta2": r.alpha_over_beta2,
            "constants": list(r.constants) if r.constants else None,
            "residual": r.residual,
        }
    print(json.dumps(out, indent=2))
    return EXIT_OK


def _cmd_fit(args) -> int:
    from .catalog import lookup
    from .lift import build_lift
    from .soliton import classify, constants_finding

    params = {"n": args.n}
    if args.lam is not None:
        params["lam"] = args.lam
    entry = lookup(args.manifold, **params)
    if entry.soliton is None:
        raise ValueError(f"{args.manifold} has no soliton datum")
    ls = build_lift(entry.ks)
    Q = ls.chart.sample_points(args.points, args.seed)
    fit, finding = constants_finding(ls, entry.soliton, Q)
    v = finding.values
    print(f"base      {entry.label}, lambda = {entry.soliton.lam:g}")
    print(f"fitted    (lambda', C1, C2) = ({fit.lam:.12g}, {fit.C1:.12g}, {fit.C2:.12g})  "
          f"residual {fit.residual:.3e}  class {classify(fit.C1).label}"
          + ("" if v["C1_determined"] else "  [C1 undetermined: X = 0]"))
    for name in ("stated", "slot_derived"):
        t = v[f"{name}_triple"]
        print(f"{name:9s} (lambda', C1, C2) = ({t[0]:g}, {t[1]:g}, {t[2]:g})  residual {v[f'{name}_residual']:.3e}")
    print(f"best match: {v['winner']}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="sasakilift", description="Sasakian lifts of Kähler charts: identity verification")
    sub = p.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    sub.add_parser("list", help="list catalog manifolds").set_defaults(func=_cmd_list)

    v = sub.add_parser("verify", help="run verification suites")
    v.add_argument("--scenario", help="scenario TOML file")
    v.add_argument("--manifold", help="catalog name (see `list`)")
    v.add_argument("--n", type=int, help="complex dimension of the base")
    v.add_argument("--lam", type=float, help="soliton constant (gaussian)")
    v.add_argument("--points", type=int)
    v.add_argument("--seed", type=int)
    v.add_argument("--tol", type=float, help="default tolerance")
    v.add_argument("--suites", help="comma separated suites, or 'all'")
    v.add_argument("--out", help="write the report here instead of stdout")
    v.add_argument("--format", choices=("json", "text"))
    v.add_argument("--no-timestamp", action="store_true", help="omit meta.timestamp")
    v.set_defaults(func=_cmd_verify)

    d = sub.add_parser("deform", help="constants map of a D-homothety")
    d.add_argument("--alpha", type=float, required=True)
    d.add_argument("--beta", type=float, required=True)
    d.add_argument("--lam", type=float, default=0.0)
    d.add_argument("--C1", type=float, default=0.0)
    d.add_argument("--C2", type=float, default=0.0)
    d.add_argument("--n", type=int, default=1)
    d.add_argument("--form", choices=D.FORMS, default="derived")
    d.add_argument("--detwist", choices=("C1", "joint"), help="also search for a twist-removing homothety")
    d.set_defaults(func=_cmd_deform)

    f = sub.add_parser("fit", help="fit the twisted soliton constants of a lifted soliton")
    f.add_argument("--manifold", default="gaussian")
    f.add_argument("--n", type=int, default=1)
    f.add_argument("--lam", type=float)
    f.add_argument("--points", type=int, default=20)
    f.add_argument("--seed", type=int, default=0)
    f.set_defaults(func=_cmd_fit)
    return p


def main(argv=None) -> int:
    from .scenario import ScenarioError

    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ScenarioError, CatalogError, ValueError) as exc:
        print(f"sasakilift: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
