"""Entry-by-entry verification: residuals, Killing split, first integrals,
commutator tables, conservation drift and curvature comparisons."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from ..expr import (
    compile_fn,
    eval_numeric,
    free_symbols,
    stable_seed,
    substitute,
)
from ..noether import (
    ClosureError,
    Generator,
    commutator_table,
    first_integral,
    verify_symmetry,
)
from ..numeric import (
    FDCurvature,
    IntegrationError,
    STATE_VARS,
    conservation_drift,
    integrate_geodesic,
    random_initial_state,
)
from ..spacetime import COORDS, MetricError, curvature, killing_check
from .entries import CatalogEntry

DRIFT_TOL = 1e-6
RATIO_TOL = 1e-9
JACOBI_TOL = 1e-9
COMMUTATOR_TOL = 1e-9
FD_ORACLE_TOL = 1e-4


@dataclass
class GeneratorCheck:
    name: str
    residual_status: str          # zero | numeric-zero | failed
    stage: str
    max_abs: float
    witness: dict | None
    killing_candidate: bool
    is_killing: bool | None

    @property
    def ok(self) -> bool:
        return self.residual_status in ("zero", "numeric-zero") and (
            not self.killing_candidate or bool(self.is_killing)
        )


@dataclass
class IntegralCheck:
    generator: str
    factor: float
    offset: float
    fit_residual: float
    ok: bool


@dataclass
class CommutatorCheck:
    ok: bool
    jacobi_max: float = math.inf
    mismatches: list[str] = field(default_factory=list)
    certified_numeric: list[str] = field(default_factory=list)
    error: str = ""


@dataclass
class DriftCheck:
    generator: str
    max_drift: float
    trajectories: int

    @property
    def ok(self) -> bool:
        return self.max_drift <= DRIFT_TOL


@dataclass
class CurvatureComponentCheck:
    label: str
    matches: bool
    engine_value: float
    reference_value: float
    fd_value: float | None = None


@dataclass
class CurvatureCheck:
    ok: bool
    ricci_sign: int = 1
    riemann_sign: int = 1
    components: list[CurvatureComponentCheck] = field(default_factory=list)
    discrepancies: list[str] = field(default_factory=list)
    fd_max_error: float = 0.0
    notes: list[str] = field(default_factory=list)


@dataclass
class EntryVerification:
    entry_id: str
    seed: int
    generators: list[GeneratorCheck]
    dimension_expected: int
    dimension_verified: int
    integrals: list[IntegralCheck]
    commutators: CommutatorCheck
    drifts: list[DriftCheck]
    curvature: CurvatureCheck | None
    notes: list[str]
    elapsed: float = 0.0

    @property
    def passed(self) -> bool:
        return (
            all(g.ok for g in self.generators)
            and self.dimension_verified == self.dimension_expected
            and all(i.ok for i in self.integrals)
            and self.commutators.ok
            and all(d.ok for d in self.drifts)
            and (self.curvature is None or self.curvature.ok)
        )


@dataclass
class CatalogVerification:
    seed: int
    entries: list[EntryVerification]

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.entries)

    def dimension_histogram(self) -> dict[str, int]:
        dims: dict[str, int] = {}
        for e in self.entries:
            cls = e.entry_id.split("/")[0]
            dims.setdefault(cls, e.dimension_verified)
        return dims


def verify_entry(entry: CatalogEntry, seed: int = 42, drift_trajectories: int = 5,
                 integrator_tol: float = 1e-10, affine_length: float = 10.0) -> EntryVerification:
    start = time.perf_counter()
    m = entry.metric
    gen_checks = [_check_generator(entry, g, seed) for g in entry.generators]
    dimension_verified = sum(1 for c in gen_checks if c.residual_status in ("zero", "numeric-zero"))
    integral_checks, integral_exprs = _check_integrals(entry, seed)
    comm_check = _check_commutators(entry, seed)
    drift_checks = _check_drifts(entry, integral_exprs, seed, drift_trajectories,
                                 integrator_tol, affine_length)
    curv_check = _check_curvature(entry, seed) if not entry.curvature_ref.empty() else None
    return EntryVerification(
        entry_id=entry.entry_id,
        seed=seed,
        generators=gen_checks,
        dimension_expected=entry.expected_dimension,
        dimension_verified=dimension_verified,
        integrals=integral_checks,
        commutators=comm_check,
        drifts=drift_checks,
        curvature=curv_check,
        notes=list(entry.notes),
        elapsed=time.perf_counter() - start,
    )


def verify_catalog(entries: list[CatalogEntry], seed: int = 42, **kwargs) -> CatalogVerification:
    return CatalogVerification(seed=seed, entries=[verify_entry(e, seed=seed, **kwargs) for e in entries])


# ---------------------------------------------------------------------------


def _check_generator(entry: CatalogEntry, g: Generator, seed: int) -> GeneratorCheck:
    v = verify_symmetry(entry.metric, g, seed=stable_seed(seed, entry.entry_id))
    if v.decision.status == "zero":
        status = "zero"
    elif v.decision.numerically_zero:
        status = "numeric-zero"
    else:
        status = "failed"
    candidate = g in entry.killing_candidates()
    is_k: bool | None = None
    if candidate:
        is_k = killing_check(entry.metric, g, seed=stable_seed(seed, entry.entry_id, "killing")).is_killing
    return GeneratorCheck(
        name=g.name,
        residual_status=status,
        stage=v.stage,
        max_abs=v.decision.max_abs,
        witness=v.decision.witness,
        killing_candidate=candidate,
        is_killing=is_k,
    )


def _check_integrals(entry: CatalogEntry, seed: int):
    checks: list[IntegralCheck] = []
    exprs: dict[str, object] = {}
    m = entry.metric
    rng = np.random.default_rng(stable_seed(seed, entry.entry_id, "integrals"))
    lo, hi = m.sample_domains()["r"]
    for g in entry.generators:
        fi = first_integral(m, g)
        exprs[g.name] = fi.expr
        ref = entry.expected_integrals.get(g.name)
        if ref is None:
            continue
        engine = substitute(fi.expr, m.exact_params())
        reference = substitute(ref, m.exact_params())
        f_eng = compile_fn(engine, ("s",) + STATE_VARS)
        f_ref = compile_fn(reference, ("s",) + STATE_VARS)
        rows, ivals, rvals = [], [], []
        attempts = 0
        while len(rows) < 20 and attempts < 400:
            attempts += 1
            pt = [rng.uniform(0.1, 2.0), rng.uniform(-1.0, 1.0), rng.uniform(lo, hi),
                  rng.uniform(0.4, math.pi - 0.4), rng.uniform(0.0, 2 * math.pi),
                  *rng.uniform(-1.0, 1.0, size=4)]
            try:
                iv, rv = f_eng(*pt), f_ref(*pt)
            except (ArithmeticError, ValueError):
                continue
            rows.append([rv, 1.0])
            ivals.append(iv)
            rvals.append(rv)
        a = np.array(rows)
        y = np.array(ivals)
        coeff, *_ = np.linalg.lstsq(a, y, rcond=None)
        factor, offset = float(coeff[0]), float(coeff[1])
        scale = max(1.0, float(np.max(np.abs(y))))
        fit = float(np.max(np.abs(a @ coeff - y))) / scale
        if abs(offset) < RATIO_TOL * scale:
            offset = 0.0
        ok = fit <= RATIO_TOL and abs(factor) > 1e-9
        checks.append(IntegralCheck(generator=g.name, factor=factor, offset=offset,
                                    fit_residual=fit, ok=ok))
    return checks, exprs


def _check_commutators(entry: CatalogEntry, seed: int) -> CommutatorCheck:
    try:
        table = commutator_table(entry.generators, metric=entry.metric,
                                 seed=stable_seed(seed, entry.entry_id, "brackets"))
    except ClosureError as exc:
        return CommutatorCheck(ok=False, error=str(exc))
    names = table.basis
    index = {n: i for i, n in enumerate(names)}
    mismatches: list[str] = []
    listed_pairs = set()
    for a, b, combo in entry.expected_commutators:
        i, j = index[a], index[b]
        listed_pairs.add((min(i, j), max(i, j)))
        expected = {index[k]: _const_value(c, entry) for k, c in combo.items()}
        for k in range(len(names)):
            got = table.constant(i, j, k)
            want = expected.get(k, 0.0)
            if abs(got - want) > COMMUTATOR_TOL:
                mismatches.append(f"[{a},{b}]: coefficient of {names[k]} is {got:.6g}, reference {want:.6g}")
    if entry.commutators_complete:
        for (i, j), coeffs in table.constants.items():
            if (i, j) not in listed_pairs and any(abs(c) > COMMUTATOR_TOL for c in coeffs.values()):
                mismatches.append(f"[{names[i]},{names[j]}] unexpectedly nonzero: {coeffs}")
    numeric = [f"[{names[i]},{names[j]}]" for (i, j), s in table.certified.items() if s == "numeric"]
    ok = not mismatches and table.jacobi_max < JACOBI_TOL
    return CommutatorCheck(ok=ok, jacobi_max=table.jacobi_max, mismatches=mismatches,
                           certified_numeric=numeric)


def _const_value(coeff_expr, entry: CatalogEntry) -> float:
    bound = substitute(coeff_expr, entry.metric.exact_params())
    return eval_numeric(bound, {})


def _check_drifts(entry: CatalogEntry, integral_exprs, seed: int, n_traj: int,
                  tol: float, length: float) -> list[DriftCheck]:
    m = entry.metric
    worst: dict[str, float] = {name: 0.0 for name in integral_exprs}
    count = 0
    rng = np.random.default_rng(stable_seed(seed, entry.entry_id, "drift"))
    attempts = 0
    while count < n_traj and attempts < 60:
        attempts += 1
        init = random_initial_state(m, rng, length=length)
        try:
            tr = integrate_geodesic(m, init, length, tol=tol, seed=seed)
        except (IntegrationError, MetricError):
            continue
        count += 1
        for name, expr in integral_exprs.items():
            rep = conservation_drift(tr, expr, name=name)
            worst[name] = max(worst[name], rep.relative_drift)
    return [DriftCheck(generator=name, max_drift=w, trajectories=count)
            for name, w in worst.items()]


def _check_curvature(entry: CatalogEntry, seed: int) -> CurvatureCheck:
    m = entry.metric
    ref = entry.curvature_ref
    report = curvature(m)
    fd = FDCurvature(m)
    rng = np.random.default_rng(stable_seed(seed, entry.entry_id, "curvature"))
    points = fd.sample_points(rng, 20)
    out = CurvatureCheck(ok=True)

    idx = {c: i for i, c in enumerate(COORDS)}
    exact = m.exact_params()

    def value_at(e, x) -> float:
        bound = substitute(e, exact)
        names = free_symbols(bound)
        binding = {"r": x[1], "theta": x[2], "t": x[0], "phi": x[3]}
        return eval_numeric(bound, {k: binding[k] for k in names})

    # structural claims -----------------------------------------------------
    if ref.vacuum:
        if report.ricci:
            out.ok = False
            out.discrepancies.append("Ricci tensor is not symbolically zero")
        fd_max = max(float(np.max(np.abs(fd.ricci_at(x)))) for x in points)
        out.fd_max_error = max(out.fd_max_error, fd_max)
        if fd_max > FD_ORACLE_TOL:
            out.ok = False
            out.discrepancies.append(f"finite-difference Ricci reaches {fd_max:.3g}")
    if ref.scalar_abs is not None:
        want = abs(_const_value(ref.scalar_abs, entry))
        for x in points:
            engine = abs(value_at(report.ricci_scalar, x))
            fd_val = abs(fd.ricci_scalar_at(x))
            if abs(engine - want) > 1e-9 * max(1.0, want):
                out.ok = False
                out.discrepancies.append(f"|scalar| engine {engine:.9g} != reference {want:.9g}")
                break
            out.fd_max_error = max(out.fd_max_error, abs(fd_val - want))
        if out.fd_max_error > FD_ORACLE_TOL:
            out.ok = False
            out.discrepancies.append("finite-difference oracle disagrees with |scalar| claim")

    if not ref.has_components():
        return out

    # component comparison up to one global sign per tensor family ----------
    sample = points[:6]
    engine_ricci = {k: [value_at(v, x) for x in sample] for k, v in report.ricci.items()}
    ref_ricci = {k: [value_at(v, x) for x in sample] for k, v in ref.ricci.items()}
    if set(engine_ricci) != set(ref_ricci):
        out.ok = False
        out.discrepancies.append(
            f"nonzero Ricci sets differ: engine {sorted(engine_ricci)}, reference {sorted(ref_ricci)}"
        )
    out.ricci_sign = _family_sign(engine_ricci, ref_ricci)
    scalar_vals = [value_at(report.ricci_scalar, x) for x in sample]
    for key in sorted(set(engine_ricci) & set(ref_ricci)):
        match = _component_match(engine_ricci[key], ref_ricci[key], out.ricci_sign)
        fd_vals = [float(fd.ricci_at(x)[key[0], key[1]]) for x in sample]
        out.components.append(CurvatureComponentCheck(
            label=f"R_{key[0]}{key[1]}", matches=match,
            engine_value=engine_ricci[key][0], reference_value=ref_ricci[key][0],
            fd_value=fd_vals[0],
        ))
        fd_err = max(abs(a - b) for a, b in zip(engine_ricci[key], fd_vals))
        out.fd_max_error = max(out.fd_max_error, fd_err)
        if not match:
            out.discrepancies.append(
                f"R_{key[0]}{key[1]}: engine {engine_ricci[key][0]:.6g} vs reference "
                f"{ref_ricci[key][0]:.6g} (sign {out.ricci_sign}); finite differences side "
                f"with the engine to {fd_err:.2g}"
            )
        if fd_err > FD_ORACLE_TOL:
            out.ok = False
            out.discrepancies.append(f"R_{key[0]}{key[1]}: engine disagrees with the oracle by {fd_err:.3g}")
    if ref.scalar is not None:
        ref_scalar_vals = [value_at(ref.scalar, x) for x in sample]
        match = _component_match(scalar_vals, ref_scalar_vals, out.ricci_sign)
        fd_scalar = [fd.ricci_scalar_at(x) for x in sample]
        fd_err = max(abs(a - b) for a, b in zip(scalar_vals, fd_scalar))
        out.fd_max_error = max(out.fd_max_error, fd_err)
        out.components.append(CurvatureComponentCheck(
            label="R_scalar", matches=match,
            engine_value=scalar_vals[0], reference_value=ref_scalar_vals[0], fd_value=fd_scalar[0],
        ))
        if not match:
            out.discrepancies.append(
                f"R_scalar: engine {scalar_vals[0]:.6g} vs reference {ref_scalar_vals[0]:.6g} "
                f"(sign {out.ricci_sign}); finite differences side with the engine to {fd_err:.2g}"
            )
        if fd_err > FD_ORACLE_TOL:
            out.ok = False
            out.discrepancies.append(f"R_scalar: engine disagrees with the oracle by {fd_err:.3g}")
    engine_riem = {k: [value_at(v, x) for x in sample] for k, v in report.riemann.items()}
    ref_riem = {k: [value_at(v, x) for x in sample] for k, v in ref.riemann.items()}
    if set(engine_riem) != set(ref_riem):
        out.ok = False
        out.discrepancies.append(
            f"nonzero Riemann sets differ: engine {sorted(engine_riem)}, reference {sorted(ref_riem)}"
        )
    out.riemann_sign = _family_sign(engine_riem, ref_riem)
    for key in sorted(set(engine_riem) & set(ref_riem)):
        match = _component_match(engine_riem[key], ref_riem[key], out.riemann_sign)
        label = "R_" + "".join(str(i) for i in key)
        fd_vals = [float(fd.riemann_lowered_at(x)[key]) for x in sample]
        fd_err = max(abs(a - b) for a, b in zip(engine_riem[key], fd_vals))
        out.fd_max_error = max(out.fd_max_error, fd_err)
        out.components.append(CurvatureComponentCheck(
            label=label, matches=match,
            engine_value=engine_riem[key][0], reference_value=ref_riem[key][0], fd_value=fd_vals[0],
        ))
        if not match:
            out.discrepancies.append(
                f"{label}: engine {engine_riem[key][0]:.6g} vs reference {ref_riem[key][0]:.6g} "
                f"(sign {out.riemann_sign})"
            )
        if fd_err > FD_ORACLE_TOL:
            out.ok = False
            out.discrepancies.append(f"{label}: engine disagrees with the oracle by {fd_err:.3g}")
    return out


def _family_sign(engine: dict, reference: dict, tol: float = 1e-7) -> int:
    """Pick the global sign that matches the most components."""
    votes = {1: 0, -1: 0}
    for key in set(engine) & set(reference):
        for s in (1, -1):
            if _component_match(engine[key], reference[key], s, tol):
                votes[s] += 1
    return 1 if votes[1] >= votes[-1] else -1


def _component_match(engine_vals, ref_vals, sign: int, tol: float = 1e-7) -> bool:
    return all(abs(e - sign * r) <= tol * max(1.0, abs(e), abs(r))
               for e, r in zip(engine_vals, ref_vals))
