"""Report rendering: human-ordered text and a stable structured format.

The structured format is versioned JSON with sorted keys; identical inputs
and seed produce byte-identical output (wall-clock timings are therefore
text-only).
"""

from __future__ import annotations

import json
from typing import Any

from .catalog.verify import CatalogVerification, EntryVerification

SCHEMA = "noethersphere-report/1"


def entry_to_dict(v: EntryVerification) -> dict[str, Any]:
    out: dict[str, Any] = {
        "entry": v.entry_id,
        "seed": v.seed,
        "pass": v.passed,
        "dimension": {"expected": v.dimension_expected, "verified": v.dimension_verified},
        "generators": [
            {
                "name": g.name,
                "residual": g.residual_status,
                "stage": g.stage,
                "max_abs": g.max_abs,
                "witness": g.witness,
                "killing_candidate": g.killing_candidate,
                "is_killing": g.is_killing,
                "ok": g.ok,
            }
            for g in v.generators
        ],
        "integrals": [
            {
                "generator": c.generator,
                "factor": c.factor,
                "offset": c.offset,
                "fit_residual": c.fit_residual,
                "ok": c.ok,
            }
            for c in v.integrals
        ],
        "commutators": {
            "ok": v.commutators.ok,
            "jacobi_max": v.commutators.jacobi_max,
            "mismatches": v.commutators.mismatches,
            "certified_numeric": v.commutators.certified_numeric,
            "error": v.commutators.error,
        },
        "conservation": [
            {"generator": d.generator, "max_drift": d.max_drift,
             "trajectories": d.trajectories, "ok": d.ok}
            for d in v.drifts
        ],
        "notes": v.notes,
    }
    if v.curvature is not None:
        out["curvature"] = {
            "ok": v.curvature.ok,
            "ricci_sign": v.curvature.ricci_sign,
            "riemann_sign": v.curvature.riemann_sign,
            "fd_max_error": v.curvature.fd_max_error,
            "components": [
                {
                    "label": c.label,
                    "matches_reference": c.matches,
                    "engine": c.engine_value,
                    "reference": c.reference_value,
                    "finite_difference": c.fd_value,
                }
                for c in v.curvature.components
            ],
            "discrepancies": v.curvature.discrepancies,
        }
    return out


def catalog_to_dict(report: CatalogVerification) -> dict[str, Any]:
    return {
        "schema": SCHEMA,
        "seed": report.seed,
        "pass": report.passed,
        "dimension_histogram": report.dimension_histogram(),
        "entries": [entry_to_dict(e) for e in report.entries],
    }


def to_structured(data: dict[str, Any]) -> str:
    return json.dumps(data, sort_keys=True, indent=2) + "\n"


def render_entry_text(v: EntryVerification, verbose: bool = False) -> str:
    lines = [f"entry {v.entry_id}: {'PASS' if v.passed else 'FAIL'} "
             f"(dimension {v.dimension_verified}/{v.dimension_expected}, "
             f"seed {v.seed}, {v.elapsed:.2f}s)"]
    for g in v.generators:
        kill = ""
        if g.killing_candidate:
            kill = " killing" if g.is_killing else " NOT-KILLING"
        mark = "ok" if g.ok else "FAIL"
        detail = g.residual_status if g.residual_status != "zero" else "symbolic zero"
        lines.append(f"  gen {g.name:<4} {mark:<4} {detail}{kill}")
        if g.witness is not None and not g.ok:
            pt = ", ".join(f"{k}={x:.4g}" for k, x in sorted(g.witness.items()))
            lines.append(f"        witness: {pt}")
    for c in v.integrals:
        mark = "ok" if c.ok else "FAIL"
        lines.append(
            f"  int {c.generator:<4} {mark:<4} factor {c.factor:+.6g}"
            + (f" offset {c.offset:+.6g}" if c.offset else "")
            + f" (fit {c.fit_residual:.2e})"
        )
    cm = v.commutators
    lines.append(f"  commutators: {'ok' if cm.ok else 'FAIL'} (jacobi {cm.jacobi_max:.2e})")
    for msg in cm.mismatches:
        lines.append(f"    mismatch: {msg}")
    if cm.error:
        lines.append(f"    error: {cm.error}")
    for d in v.drifts:
        mark = "ok" if d.ok else "FAIL"
        lines.append(f"  drift {d.generator:<4} {mark:<4} {d.max_drift:.3e} over {d.trajectories} geodesics")
    if v.curvature is not None:
        cv = v.curvature
        lines.append(f"  curvature: {'ok' if cv.ok else 'FAIL'} "
                     f"(signs ricci {cv.ricci_sign:+d} riemann {cv.riemann_sign:+d}, "
                     f"oracle max err {cv.fd_max_error:.2e})")
        for comp in cv.components:
            mark = "match" if comp.matches else "DIFFERS"
            lines.append(f"    {comp.label:<8} {mark}  engine {comp.engine_value:+.6g}  "
                         f"reference {comp.reference_value:+.6g}")
        for msg in cv.discrepancies:
            lines.append(f"    note: {msg}")
    for note in v.notes:
        lines.append(f"  note: {note}")
    return "\n".join(lines)


def render_catalog_text(report: CatalogVerification) -> str:
    blocks = [render_entry_text(e) for e in report.entries]
    hist = report.dimension_histogram()
    summary = ", ".join(f"{k}: {v}" for k, v in hist.items())
    blocks.append(f"dimension histogram: {{{summary}}}")
    blocks.append(f"overall: {'PASS' if report.passed else 'FAIL'}")
    return "\n\n".join(blocks) + "\n"
