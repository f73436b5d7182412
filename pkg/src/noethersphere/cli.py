"""Command-line front end.

Exit codes: 0 all checks pass, 1 a verification failed, 2 usage or input
parse errors.  All randomness is driven by --seed (default 42), echoed in
the output.  NOETHER_CATALOG_DIR overrides the bundled catalog.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import report as report_mod
from .catalog import CatalogError, classify_metric, load_catalog, verify_catalog
from .catalog.determining_ref import compare_with_reference
from .expr import ParseError, canonical, compile_fn, substitute, to_latex, to_text
from .noether import (
    ClosureError,
    GeneratorError,
    commutator_table,
    determining_system,
    first_integral,
    parse_generator_file,
    verify_symmetry,
)
from .numeric import (
    DomainExitError,
    IntegrationError,
    STATE_VARS,
    conservation_drift,
    integrate_geodesic,
    random_initial_state,
)
from .spacetime import LambdaBranch, Metric, MetricError, curvature, parse_metric_file

USAGE_ERROR = 2


class CliError(Exception):
    def __init__(self, message: str, code: int = USAGE_ERROR):
        super().__init__(message)
        self.code = code


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help()
        return USAGE_ERROR
    try:
        return args.handler(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (MetricError, GeneratorError, ParseError, CatalogError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="noethersphere",
        description="Verify symmetry classes of spherically symmetric static spacetimes.",
    )
    parser.set_defaults(command=None)
    sub = parser.add_subparsers(dest="command")

    def common(p, metric=False, gen=False):
        p.add_argument("--seed", type=int, default=42)
        p.add_argument("--format", choices=("text", "structured", "latex"), default="text")
        p.add_argument("--out", type=Path, default=None)
        if metric:
            p.add_argument("--metric", type=Path, required=False)
        if gen:
            p.add_argument("--gen", type=Path, action="append", default=[])

    p = sub.add_parser("catalog-verify", help="verify catalog entries")
    p.add_argument("--class", dest="class_filter", choices=("I", "II", "III", "IV", "V", "VI"))
    p.add_argument("--case", type=int, default=None)
    p.add_argument("--tol", type=float, default=1e-10, help="integrator tolerance for drift checks")
    common(p)
    p.set_defaults(handler=cmd_catalog_verify)

    p = sub.add_parser("residual", help="check the invariance condition for generators")
    common(p, metric=True, gen=True)
    p.set_defaults(handler=cmd_residual)

    p = sub.add_parser("determining", help="print the determining PDE system")
    p.add_argument("--lambda", dest="branch", choices=("r2", "unit"), default="r2")
    common(p)
    p.set_defaults(handler=cmd_determining)

    p = sub.add_parser("integral", help="first integrals of generators")
    common(p, metric=True, gen=True)
    p.set_defaults(handler=cmd_integral)

    p = sub.add_parser("brackets", help="commutator table of a generator basis")
    p.add_argument("--class", dest="class_filter", choices=("I", "II", "III", "IV", "V", "VI"))
    p.add_argument("--case", type=int, default=None)
    common(p, metric=True, gen=True)
    p.set_defaults(handler=cmd_brackets)

    p = sub.add_parser("curvature", help="curvature report for a metric")
    p.add_argument("--class", dest="class_filter", choices=("I", "II", "III", "IV", "V", "VI"))
    p.add_argument("--case", type=int, default=None)
    common(p, metric=True)
    p.set_defaults(handler=cmd_curvature)

    p = sub.add_parser("geodesic", help="integrate a geodesic and export the trajectory")
    p.add_argument("--init", type=str, default=None,
                   help="comma-separated t,r,theta,phi,td,rd,thetad,phid")
    p.add_argument("--length", type=float, default=10.0)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--no-plot", action="store_true", help="skip the figure next to --out")
    common(p, metric=True)
    p.set_defaults(handler=cmd_geodesic)

    p = sub.add_parser("classify", help="classify a metric by its verified symmetries")
    common(p, metric=True)
    p.set_defaults(handler=cmd_classify)
    return parser


def _emit(args, text: str) -> None:
    if args.out:
        args.out.write_text(text)
    else:
        sys.stdout.write(text)


def _require_metric(args) -> Metric:
    if not getattr(args, "metric", None):
        raise CliError("--metric <path> is required")
    return parse_metric_file(args.metric)


def _load_generators(args):
    gens = []
    for path in args.gen:
        gens.extend(parse_generator_file(path))
    if not gens:
        raise CliError("at least one --gen <path> is required")
    return gens


def _entries(args):
    entries = load_catalog()
    if getattr(args, "class_filter", None):
        entries = [e for e in entries if e.class_id == args.class_filter]
    if getattr(args, "case", None) is not None:
        entries = [e for e in entries if e.case == args.case]
    if not entries:
        raise CliError("no catalog entries match the filter")
    return entries


# ---------------------------------------------------------------------------


def cmd_catalog_verify(args) -> int:
    entries = _entries(args)
    report = verify_catalog(entries, seed=args.seed, integrator_tol=args.tol)
    if args.format == "structured":
        _emit(args, report_mod.to_structured(report_mod.catalog_to_dict(report)))
    else:
        _emit(args, report_mod.render_catalog_text(report))
    return 0 if report.passed else 1


def cmd_residual(args) -> int:
    m = _require_metric(args)
    gens = _load_generators(args)
    ok = True
    lines = [f"metric {m.name or args.metric}   seed {args.seed}"]
    payload = []
    for g in gens:
        v = verify_symmetry(m, g, seed=args.seed)
        status = v.decision.status
        verified = v.verified
        ok = ok and verified
        line = f"  {g.name:<6} {'ok' if verified else 'FAIL'}  residual {status} ({v.stage})"
        if v.decision.witness is not None and not verified:
            pt = ", ".join(f"{k}={x:.4g}" for k, x in sorted(v.decision.witness.items()))
            line += f"\n      witness: {pt} -> {v.decision.witness_value:.4g}"
        lines.append(line)
        payload.append({
            "generator": g.name, "verified": verified, "status": status,
            "stage": v.stage, "max_abs": v.decision.max_abs,
            "witness": v.decision.witness, "witness_value": v.decision.witness_value,
        })
    if args.format == "structured":
        _emit(args, report_mod.to_structured(
            {"schema": report_mod.SCHEMA, "seed": args.seed, "residuals": payload}))
    else:
        _emit(args, "\n".join(lines) + "\n")
    return 0 if ok else 1


def cmd_determining(args) -> int:
    ds = determining_system(LambdaBranch(args.branch))
    cmp = compare_with_reference(ds)
    if args.format == "latex":
        body = ds.as_latex()
    elif args.format == "structured":
        eqs = [{"monomials": [mn.label() for mn in monos], "equation": to_text(eq)}
               for eq, monos in ds.nonredundant()]
        body = report_mod.to_structured({
            "schema": report_mod.SCHEMA, "branch": args.branch, "count": len(eqs),
            "equations": eqs,
            "reference_matched": cmp.matched, "reference_unmatched": cmp.discrepancies,
        })
        _emit(args, body)
        return 0
    else:
        body = ds.as_text()
    body += "\n" + cmp.as_text()
    _emit(args, body)
    return 0


def cmd_integral(args) -> int:
    m = _require_metric(args)
    gens = _load_generators(args)
    render = to_latex if args.format == "latex" else to_text
    lines = []
    payload = []
    for g in gens:
        fi = first_integral(m, g)
        v = verify_symmetry(m, g, seed=args.seed)
        note = "" if v.verified else "   [warning: generator did not verify]"
        lines.append(f"I[{g.name}] = {render(fi.expr)}{note}")
        payload.append({"generator": g.name, "integral": to_text(fi.expr), "verified": v.verified})
    if args.format == "structured":
        _emit(args, report_mod.to_structured(
            {"schema": report_mod.SCHEMA, "seed": args.seed, "integrals": payload}))
    else:
        _emit(args, "\n".join(lines) + "\n")
    return 0


def cmd_brackets(args) -> int:
    if args.class_filter:
        entry = _entries(args)[0]
        basis, metric, label = entry.generators, entry.metric, entry.entry_id
    else:
        basis = _load_generators(args)
        metric = parse_metric_file(args.metric) if args.metric else None
        label = "custom basis"
    try:
        table = commutator_table(basis, metric=metric, seed=args.seed)
    except ClosureError as exc:
        print(f"closure violation: {exc}", file=sys.stderr)
        return 1
    lines = [f"commutator table for {label} (seed {args.seed}, jacobi {table.jacobi_max:.2e})"]
    payload = []
    for (i, j), coeffs in sorted(table.constants.items()):
        combo = " + ".join(f"{c:+.6g}*{table.basis[k]}" for k, c in sorted(coeffs.items())) or "0"
        lines.append(f"  [{table.basis[i]},{table.basis[j]}] = {combo}   ({table.certified[(i, j)]})")
        payload.append({"i": table.basis[i], "j": table.basis[j],
                        "coefficients": {table.basis[k]: c for k, c in coeffs.items()},
                        "certified": table.certified[(i, j)]})
    if args.format == "structured":
        _emit(args, report_mod.to_structured(
            {"schema": report_mod.SCHEMA, "seed": args.seed, "basis": table.basis,
             "jacobi_max": table.jacobi_max, "brackets": payload}))
    else:
        _emit(args, "\n".join(lines) + "\n")
    return 0


def cmd_curvature(args) -> int:
    if args.class_filter:
        m = _entries(args)[0].metric
    else:
        m = _require_metric(args)
    rep = curvature(m)
    render = to_latex if args.format == "latex" else to_text
    lines = [f"curvature of {m.name or 'metric'}"]
    lines.append(f"  R_scalar = {render(rep.ricci_scalar)}")
    for (i, j), e in sorted(rep.ricci.items()):
        lines.append(f"  R_{i}{j} = {render(e)}")
    for idx, e in sorted(rep.riemann.items()):
        lines.append(f"  R_{''.join(map(str, idx))} = {render(e)}")
    if args.format == "structured":
        payload = {
            "schema": report_mod.SCHEMA,
            "metric": m.name,
            "ricci_scalar": to_text(rep.ricci_scalar),
            "ricci": {f"{i}{j}": to_text(e) for (i, j), e in rep.ricci.items()},
            "riemann": {"".join(map(str, idx)): to_text(e) for idx, e in rep.riemann.items()},
        }
        _emit(args, report_mod.to_structured(payload))
    else:
        _emit(args, "\n".join(lines) + "\n")
    return 0


def cmd_geodesic(args) -> int:
    m = _require_metric(args)
    if args.init:
        try:
            init = np.array([float(x) for x in args.init.split(",")], dtype=float)
        except ValueError as exc:
            raise CliError(f"bad --init: {exc}")
        if init.shape != (8,):
            raise CliError("--init needs 8 comma-separated values")
    else:
        rng = np.random.default_rng(args.seed)
        init = random_initial_state(m, rng)
    try:
        tr = integrate_geodesic(m, init, args.length, tol=args.tol, seed=args.seed)
    except DomainExitError as exc:
        print(f"domain exit: {exc} (last valid s = {exc.last_s:.6g})", file=sys.stderr)
        return 1
    except IntegrationError as exc:
        raise CliError(str(exc))
    from .noether import generator

    universal = [
        generator("X0", eta0="1"),
        generator("X1", eta3="1"),
        generator("X2", eta2="cos(phi)", eta3="-cot(theta)*sin(phi)"),
        generator("X3", eta2="sin(phi)", eta3="cot(theta)*cos(phi)"),
        generator("Y0", xi="1"),
    ]
    drift_lines = []
    curves = []
    for g in universal:
        fi = first_integral(m, g)
        rep = conservation_drift(tr, fi.expr, name=g.name)
        drift_lines.append(f"  drift {g.name:<3} {rep.relative_drift:.3e} (I0 = {rep.initial:+.6g})")
        expr = substitute(canonical(fi.expr), m.exact_params())
        fn = compile_fn(expr, ("s",) + STATE_VARS)
        curves.append((g.name, np.array([fn(s, *row) for s, row in zip(tr.s, tr.states)])))
    text = tr.export_text()
    if args.out:
        args.out.write_text(text)
        print(f"trajectory written to {args.out} ({len(tr.s)} samples, "
              f"{tr.steps} steps, {tr.rejected} rejected)")
        if not args.no_plot:
            from .plots import render_trajectory_figure

            fig_path = args.out.with_suffix(".png")
            render_trajectory_figure(tr, curves, fig_path)
            print(f"figure written to {fig_path}")
    else:
        sys.stdout.write(text)
    print(f"seed {args.seed}  tol {args.tol:g}")
    print("\n".join(drift_lines))
    return 0


def cmd_classify(args) -> int:
    m = _require_metric(args)
    entries = load_catalog()
    result = classify_metric(m, entries, seed=args.seed)
    if args.format == "structured":
        _emit(args, report_mod.to_structured({
            "schema": report_mod.SCHEMA, "seed": args.seed,
            "class": result.class_label, "dimension": result.dimension,
            "matched_entry": result.matched_entry, "per_entry": result.per_entry,
        }))
    else:
        matched = f" (entry {result.matched_entry})" if result.matched_entry else ""
        _emit(args, f"class {result.class_label}, {result.dimension} verified symmetries{matched}\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
