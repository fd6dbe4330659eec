"""Command-line interface.

Every subcommand writes one JSON report (sorted keys) to ``--out`` or stdout
containing the tool version, an echo of the configuration and the provenance
of the weights that were used.  Exit codes: 0 pass, 1 verification failure,
2 usage, input or resource error.
"""

import argparse
import json
import sys
from dataclasses import asdict, dataclass

from . import __version__
from .errors import CapExceededError, MissingWeightError, PoissonInputError, WeightTableError
from .symbols import load_poisson, parse_polynomial, set_degree_cap
from .uncertainty import stderr_of, value_of, within

FLOOR = 1e-12        # absolute slack for float rounding in numeric mode


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    subcommand: str
    poisson: str = None
    order: int = 1
    weights: str = None
    samples: int = 10 ** 6
    seed: int = 0
    tolerance: float = 5.0
    out: str = None
    mode: str = "exact"

    def __post_init__(self):
        if self.order < 1:
            raise UsageError("--order must be at least 1")
        if self.samples < 1:
            raise UsageError("--samples must be at least 1")
        if not self.tolerance > 0:
            raise UsageError("--tolerance must be positive")
        if self.seed < 0 or self.seed >= 2 ** 64:
            raise UsageError("--seed must be an unsigned 64-bit integer")


def _config(args):
    return RunConfig(args.command, getattr(args, "poisson", None), getattr(args, "order", 1) or 1,
                     getattr(args, "weights", None), args.samples, args.seed, args.tolerance,
                     args.out, args.mode)


def _emit(report, args, config):
    report = dict(report)
    report["version"] = __version__
    report["config"] = asdict(config)
    text = json.dumps(report, sort_keys=True, indent=1) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _weights(args):
    from .weights import WeightTable, literature_table, mc_estimator
    if args.mode == "numeric":
        est = mc_estimator(args.samples, args.seed, args.threads)
        table = WeightTable(estimator=est)
        if args.weights:
            table.merge(WeightTable.load(args.weights))
        return table
    if args.weights:
        return WeightTable.load(args.weights)
    return literature_table()


def _check_mixed(table, args):
    if table.mixed() and not args.allow_mixed:
        raise UsageError("computation mixes exact table weights with estimates; pass --allow-mixed to accept")


def _provenance(table):
    return table.provenance()


def _poisson(args):
    if not args.poisson:
        raise UsageError("--poisson is required")
    try:
        return load_poisson(args.poisson, check_jacobi=not args.no_jacobi_check)
    except PoissonInputError as exc:
        raise PoissonInputError(f"{args.poisson}: {exc}") from None


def _summary(symbols, k):
    """Max residual, max |value|/stderr, exact-zero flag and pass flag over symbols."""
    norm, ratio, ok, zero = 0.0, 0.0, True, True
    for s in symbols:
        for c in s.terms.values():
            zero = False
            v = abs(float(value_of(c)))
            se = stderr_of(c)
            norm = max(norm, v)
            ratio = max(ratio, v / se if se else (float("inf") if v > FLOOR else 0.0))
            ok = ok and within(c, k, FLOOR)
    return {"max_residual": norm, "max_ratio": ratio, "exact_zero": zero, "pass": ok}


# ---------------------------------------------------------------------------
# subcommands


def cmd_enum(args):
    from .graphs import classify, graph_count, iter_graphs
    n, m = args.n, args.m
    total = graph_count(n, m)
    report = {"n": n, "m": m, "total": total}
    if args.count_only and not (args.trees or args.connected):
        report["count"] = total
        return report, 0
    if total > args.cap:
        raise CapExceededError(f"|G_{{{n},{m}}}| = {total} exceeds --cap {args.cap}")
    ids = []
    for g in iter_graphs(n, m):
        c = classify(g)
        if args.trees and not c.tree:
            continue
        if args.connected and not c.connected:
            continue
        ids.append(g.graph_id())
    report["count"] = len(ids)
    if not args.count_only:
        report["graphs"] = ids
    return report, 0


def cmd_weights(args):
    from .graphs import enumerate_connected, enumerate_trees, parse_graph_id
    from .weights import WeightTable, mc_estimator
    if args.graph:
        graphs = [parse_graph_id(args.graph)]
    elif args.all_trees:
        graphs = enumerate_trees(args.all_trees, 2)
    elif args.all_connected:
        graphs = enumerate_connected(args.all_connected, 2)
    else:
        raise UsageError("give a graph id, --all-trees N or --all-connected N")
    for g in graphs:
        if g.m != 2:
            raise UsageError(f"weights are defined for graphs of type (n, 2), got {g.graph_id()}")
    table = WeightTable.load(args.weights) if args.weights else WeightTable()
    fresh = WeightTable(estimator=mc_estimator(args.samples, args.seed, args.threads,
                                               quadrature_n1=not args.no_quadrature))
    rows = []
    for g in graphs:
        cur = table.get(g)
        if cur is not None and cur.exact:
            rows.append(cur.to_json())
            continue
        e = fresh.estimate(g)
        table.add(e)
        rows.append(e.to_json())
    if args.weights:
        table.save(args.weights)
    return {"estimates": rows, "table": args.weights, "entries": len(table)}, 0


def _series_source(args, table):
    from .genfun import GradedSeries, build_S
    if getattr(args, "series", None):
        with open(args.series, encoding="utf-8") as fh:
            try:
                doc = json.load(fh)
            except json.JSONDecodeError as exc:
                raise UsageError(f"{args.series}: line {exc.lineno}: {exc.msg}") from None
        return GradedSeries.from_json(doc.get("series", doc))
    return build_S(_poisson(args), args.order, table)


def cmd_genfun(args):
    table = _weights(args)
    S = _series_source(args, table)
    _check_mixed(table, args)
    return {"series": S.to_json(numeric=args.mode == "numeric"), "orders": S.N,
            "weights": _provenance(table)}, 0


def cmd_verify_sga(args):
    from .genfun import sga_residual
    table = _weights(args)
    S = _series_source(args, table)
    if S.N < args.order:
        raise UsageError(f"series has order {S.N}, cannot verify order {args.order}")
    _check_mixed(table, args)
    rows = []
    for n in range(1, args.order + 1):
        r = sga_residual(S, n)
        rows.append(dict(order=n, **_summary([r.symbol], args.tolerance)))
    ok = all(r["pass"] for r in rows)
    return {"residuals": rows, "pass": ok, "weights": _provenance(table)}, 0 if ok else 1


def cmd_groupoid(args):
    from .genfun import build_S
    from .groupoid import axiom_check, bracket_identity_residual, inversion_lemmas, poisson_map_residual
    table = _weights(args)
    N = args.order
    S = build_S(_poisson(args), N, table)
    _check_mixed(table, args)
    rows = []
    for a in axiom_check(S, N) + inversion_lemmas(S, N):
        rows.append(dict(name=a.name, **_summary(a.residual, args.tolerance)))
    rows.append(dict(name="poisson map", **_summary(poisson_map_residual(S, N), args.tolerance)))
    rows.append(dict(name="bracket identity", **_summary(bracket_identity_residual(S, N), args.tolerance)))
    ok = all(r["pass"] for r in rows)
    return {"order": N, "checks": rows, "pass": ok, "weights": _provenance(table)}, 0 if ok else 1


def cmd_cbh(args):
    from .cbh import compare_with_genfun, from_linear_poisson
    from .genfun import build_S
    table = _weights(args)
    alpha = _poisson(args)
    if not alpha.is_linear() and alpha.entries:
        raise UsageError("cbh needs a linear Poisson structure")
    S = build_S(alpha, args.order, table)
    _check_mixed(table, args)
    rows = []
    for r in compare_with_genfun(S, from_linear_poisson(alpha), args.order):
        rows.append(dict(order=r["order"], **_summary([r["residual"]], args.tolerance)))
    ok = all(r["pass"] for r in rows)
    return {"comparison": rows, "pass": ok, "weights": _provenance(table)}, 0 if ok else 1


def cmd_star(args):
    from .star import associativity_residual, star_product
    table = _weights(args)
    alpha = _poisson(args)
    d = alpha.d
    try:
        f, g = parse_polynomial(args.f, d), parse_polynomial(args.g, d)
        k = parse_polynomial(args.k, d) if args.k else f
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    N = args.order
    prod = star_product(f, g, alpha, N, table)
    assoc = associativity_residual(f, g, k, alpha, N, table)
    _check_mixed(table, args)
    summary = _summary([assoc], args.tolerance)
    return {"product": prod.to_json(numeric=args.mode == "numeric"), "product_text": prod.pretty(),
            "associativity": dict(order=N, **summary), "pass": summary["pass"],
            "weights": _provenance(table)}, 0 if summary["pass"] else 1


# ---------------------------------------------------------------------------


def _common(p, poisson=True):
    if poisson:
        p.add_argument("--poisson", help="Poisson structure document (.json or .toml)")
        p.add_argument("--no-jacobi-check", action="store_true", help="accept structures failing Jacobi")
    p.add_argument("--order", type=int, default=1, help="truncation order N")
    p.add_argument("--weights", help="weight table (JSON)")
    p.add_argument("--mode", choices=("exact", "numeric"), default="exact",
                   help="exact: table weights only; numeric: estimate missing weights")
    p.add_argument("--allow-mixed", action="store_true", help="allow exact and estimated weights together")


def build_parser():
    ap = argparse.ArgumentParser(prog="formalgroupoid", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    base = argparse.ArgumentParser(add_help=False)
    base.add_argument("--samples", type=int, default=10 ** 6)
    base.add_argument("--seed", type=int, default=0)
    base.add_argument("--tolerance", type=float, default=5.0, help="multiple of the propagated stderr")
    base.add_argument("--out", help="report path (default stdout)")
    base.add_argument("--cap", type=int, default=10 ** 7, help="enumeration cap")
    base.add_argument("--threads", type=int, default=1)
    base.add_argument("--degree-cap", type=int, default=24)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("enum", parents=[base], help="list Kontsevich graphs")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--count-only", action="store_true")
    p.add_argument("--trees", action="store_true")
    p.add_argument("--connected", action="store_true")
    p.set_defaults(func=cmd_enum, mode="exact")

    p = sub.add_parser("weights", parents=[base], help="estimate weights and merge them into a table")
    p.add_argument("graph", nargs="?", help="graph id, e.g. 'K 1 2 :(g1,g2)'")
    p.add_argument("--all-trees", type=int, metavar="N")
    p.add_argument("--all-connected", type=int, metavar="N")
    p.add_argument("--weights", help="table to merge into (created if absent)")
    p.add_argument("--no-quadrature", action="store_true", help="use MC also for n = 1")
    p.set_defaults(func=cmd_weights, mode="numeric")

    for name, func, hlp in (("genfun", cmd_genfun, "build S_1..S_N"),
                            ("verify-sga", cmd_verify_sga, "perturbative SGA residuals"),
                            ("groupoid", cmd_groupoid, "groupoid axioms and Poisson identities"),
                            ("cbh", cmd_cbh, "compare with the CBH series"),
                            ("star", cmd_star, "star product and associativity")):
        p = sub.add_parser(name, parents=[base], help=hlp)
        _common(p)
        p.set_defaults(func=func)
        if name == "verify-sga":
            p.add_argument("--series", help="series JSON produced by genfun")
        if name == "star":
            p.add_argument("--f", required=True, help="polynomial in x1..xd")
            p.add_argument("--g", required=True)
            p.add_argument("--k", help="third polynomial for the associativity check (default f)")
    return ap


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.command == "weights" and args.weights and not _exists(args.weights):
        _touch_table(args.weights)
    try:
        config = _config(args)
        set_degree_cap(args.degree_cap)
        report, code = args.func(args)
        _emit(report, args, config)
        return code
    except (UsageError, PoissonInputError, WeightTableError, CapExceededError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except MissingWeightError as exc:
        print(f"error: {exc} (use --mode numeric or a fuller --weights table)", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def _exists(path):
    import os
    return os.path.exists(path)


def _touch_table(path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("[]\n")


if __name__ == "__main__":
    sys.exit(main())
