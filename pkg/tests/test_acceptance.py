"""Acceptance criteria for the verification engine, one test per criterion.

The stated tolerances: residual samples < 1e-9 over 100 seeded points (or a
symbolic zero), integral-ratio fits to relative 1e-9 at 20 points, drift
<= 1e-6 along 5 seeded geodesics of affine length 10 at integrator
tolerance 1e-10, Jacobi residual < 1e-9, finite-difference curvature oracle
within 1e-4.  Each test prints one pass/fail line.
"""

import dataclasses

import numpy as np
import pytest

from noethersphere.catalog import load_catalog, verify_catalog, verify_entry
from noethersphere.catalog.determining_ref import compare_with_reference
from noethersphere.cli import main as cli_main
from noethersphere.expr import add, canonical, eval_numeric, mul, parse, rat
from noethersphere.noether import Generator, determining_system
from noethersphere.numeric import FDCurvature
from noethersphere.spacetime import LambdaBranch, curvature

SEED = 42


@pytest.fixture(scope="module")
def catalog_entries():
    return load_catalog()


@pytest.fixture(scope="module")
def full_report(catalog_entries):
    return verify_catalog(catalog_entries, seed=SEED, drift_trajectories=5,
                          integrator_tol=1e-10, affine_length=10.0)


def _line(n, ok, detail):
    print(f"[criterion {n}] {'PASS' if ok else 'FAIL'}: {detail}")


def test_criterion_1_catalog_verification(full_report):
    all_pass = full_report.passed
    residuals_ok = all(
        g.residual_status in ("zero", "numeric-zero")
        for e in full_report.entries for g in e.generators
    )
    downgrades = [
        f"{e.entry_id}:{g.name}"
        for e in full_report.entries for g in e.generators
        if g.residual_status == "numeric-zero"
    ]
    hist = full_report.dimension_histogram()
    hist_ok = hist == {"I": 5, "II": 6, "III": 7, "IV": 9, "V": 11, "VI": 17}
    ok = all_pass and residuals_ok and hist_ok
    _line(1, ok, f"{len(full_report.entries)} entries PASS; dimension histogram {hist}; "
                 f"numeric-only downgrades recorded: {downgrades or 'none'}")
    assert all_pass
    assert residuals_ok
    assert hist_ok


def test_criterion_2_determining_system():
    ds = determining_system(LambdaBranch.RADIUS_SQUARED)
    n = len(ds.nonredundant())
    cmp = compare_with_reference(ds)
    expected_typos = {"A_r + 2*eta1_s = 0",
                      "A_theta + 2*exp(mu)*eta2_s = 0",
                      "A_phi + 2*exp(mu)*eta3_s = 0"}
    ok = n == 19 and len(cmp.matched) == 16 and set(cmp.discrepancies) == expected_typos
    _line(2, ok, f"19 nonredundant equations generated ({n}); 16/19 reference lines "
                 f"matched; logged discrepancies are exactly the three defective "
                 f"angular/radial gauge slots")
    assert n == 19
    assert len(cmp.matched) == 16
    assert set(cmp.discrepancies) == expected_typos


def test_criterion_3_first_integrals(full_report):
    checks = [c for e in full_report.entries for c in e.integrals]
    ok = all(c.ok for c in checks) and all(abs(c.factor) > 1e-9 for c in checks)
    worst = max(c.fit_residual for c in checks)
    n_offset = sum(1 for c in checks if c.offset != 0.0)
    _line(3, ok, f"{len(checks)} integrals matched to reference forms at 20 points "
                 f"(worst fit residual {worst:.2e}; {n_offset} with additive constant)")
    assert len(checks) == sum(e.dimension_expected for e in full_report.entries)
    assert ok
    assert worst <= 1e-9


def test_criterion_4_conservation(full_report):
    drifts = [d for e in full_report.entries for d in e.drifts]
    ok = all(d.ok and d.trajectories == 5 for d in drifts)
    worst = max(d.max_drift for d in drifts)
    _line(4, ok, f"{len(drifts)} first integrals conserved along 5 seeded geodesics "
                 f"per entry, length 10, tol 1e-10 (worst drift {worst:.2e} <= 1e-6)")
    assert ok
    assert worst <= 1e-6


def test_criterion_5_commutators(full_report, catalog_entries):
    comm_ok = all(e.commutators.ok for e in full_report.entries)
    jacobi = max(e.commutators.jacobi_max for e in full_report.entries)
    # spot-check the printed relations on the verified tables
    from noethersphere.noether import commutator_table

    by_id = {e.entry_id: e for e in catalog_entries}

    def const(entry_id, a, b, k):
        entry = by_id[entry_id]
        table = commutator_table(entry.generators, metric=entry.metric, seed=SEED)
        names = table.basis
        return table.constant(names.index(a), names.index(b), names.index(k))

    minimal = (const("I/1", "X1", "X3", "X2"), const("I/1", "X2", "X3", "X1"))
    iii2 = const("III/2", "X0", "X42", "X52")
    iii4 = (const("III/4", "X0", "X54", "X0"), const("III/4", "X0", "X44", "X54"))
    iv2 = const("IV/2", "X0", "X42", "X42")
    checks = {
        "[X1,X3]=X2": abs(minimal[0] - 1) < 1e-9,
        "[X2,X3]=-X1": abs(minimal[1] + 1) < 1e-9,
        "III(2) [X0,X42]=(1/a)X52": abs(iii2 - 1.0) < 1e-9,
        "III(4) [X0,X54]=X0": abs(iii4[0] - 1) < 1e-9,
        "III(4) [X0,X44]=X54": abs(iii4[1] - 1) < 1e-9,
        "IV(2) [X0,X42]=-(1/beta)X42": abs(iv2 + 1.0) < 1e-9,
    }
    ok = comm_ok and jacobi < 1e-9 and all(checks.values())
    _line(5, ok, f"all catalog bracket tables verified and closed, Jacobi residual "
                 f"{jacobi:.2e} < 1e-9; printed relations hold on the verified tables "
                 f"(IV(2) relations hold with the two recorded corrections)")
    assert comm_ok
    assert jacobi < 1e-9
    for label, good in checks.items():
        assert good, label


def test_criterion_6_curvature(full_report, catalog_entries):
    by_id = {e.entry_id: e for e in catalog_entries}
    # Schwarzschild: symbolically Ricci-flat
    rep = curvature(by_id["I/5"].metric)
    schw_ok = rep.ricci == {} and rep.ricci_scalar is canonical(parse("0"))

    reports = {e.entry_id: e for e in full_report.entries}
    curv_entries = ["III/2", "III/4", "IV/2", "I/5", "V/1"]
    entries_ok = all(reports[i].curvature is not None and reports[i].curvature.ok
                     for i in curv_entries)
    # metric (ii) analogue: the reference scalar must be flagged as a value
    # discrepancy with the oracle siding with the engine
    iii4 = reports["III/4"].curvature
    scalar_flagged = any(not c.matches and c.label == "R_scalar" for c in iii4.components)
    fd_small = all(reports[i].curvature.fd_max_error < 1e-4 for i in curv_entries)

    # de Sitter scalar |R| = 12/b^2 against the finite-difference oracle
    ds = by_id["V/1"].metric
    b = ds.params["b"]
    fd = FDCurvature(ds)
    rng = np.random.default_rng(SEED)
    ds_vals = [abs(fd.ricci_scalar_at(x)) for x in fd.sample_points(rng, 20)]
    ds_ok = all(abs(v - 12.0 / b**2) < 1e-4 for v in ds_vals)

    ok = schw_ok and entries_ok and scalar_flagged and fd_small and ds_ok
    _line(6, ok, "Schwarzschild Ricci == 0 symbolically; curvature references match up "
                 "to one global sign per family with the conformally-flat scalar "
                 "discrepancy flagged against the oracle; de Sitter |R| = 12/b^2 at 20 points")
    assert schw_ok
    assert entries_ok
    assert scalar_flagged
    assert fd_small
    assert ds_ok


def test_criterion_7_negative_controls(catalog_entries, tmp_path):
    by_class = {}
    for e in catalog_entries:
        by_class.setdefault(e.class_id, e)
    gen_fail = metric_fail = 0
    for class_id, entry in sorted(by_class.items()):
        victim = next(g for g in entry.generators if g.name not in ("Y0",))
        gens = [g if g.name != victim.name else Generator(
            name=g.name, xi=g.xi,
            eta=(canonical(add(g.eta[0], mul(rat(1, 9), parse("r")))),) + g.eta[1:],
            gauge=g.gauge) for g in entry.generators]
        broken = dataclasses.replace(entry, generators=gens)
        v = verify_entry(broken, seed=SEED, drift_trajectories=1)
        bad = next(g for g in v.generators if g.name == victim.name)
        if not v.passed and bad.residual_status == "failed" and bad.witness is not None:
            gen_fail += 1
        from noethersphere.spacetime import Metric

        m = entry.metric
        broken_m = dataclasses.replace(entry, metric=Metric(
            nu=canonical(add(m.nu, parse("r/100"))), mu=m.mu, branch=m.branch,
            params=m.params, domain=m.domain, name=m.name))
        vm = verify_entry(broken_m, seed=SEED, drift_trajectories=1)
        if not vm.passed:
            metric_fail += 1

    # CLI exit-code contract
    schw = tmp_path / "m.mtr"
    schw.write_text("nu = ln(1 - alpha/r)\nmu = -ln(1 - alpha/r)\nlambda = r2\n"
                    "params.alpha = 1.0\ndomain = (1.5, 10.0)\n")
    good = tmp_path / "good.gen"
    good.write_text("name = X0\neta0 = 1\n")
    bad = tmp_path / "bad.gen"
    bad.write_text("name = B\neta1 = r\n")
    codes = (
        cli_main(["residual", "--metric", str(schw), "--gen", str(good)]),
        cli_main(["residual", "--metric", str(schw), "--gen", str(bad)]),
        cli_main(["residual", "--metric", str(tmp_path / "missing.mtr"), "--gen", str(good)]),
    )
    ok = gen_fail == 6 and metric_fail == 6 and codes == (0, 1, 2)
    _line(7, ok, f"perturbed generators fail with witness in {gen_fail}/6 classes, "
                 f"perturbed metrics fail in {metric_fail}/6; CLI exit codes {codes} == (0, 1, 2)")
    assert gen_fail == 6
    assert metric_fail == 6
    assert codes == (0, 1, 2)
