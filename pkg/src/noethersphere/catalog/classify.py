"""Classify a metric by matching it against the catalog templates and
counting which catalog generator patterns verify on it."""
from __future__ import annotations
from dataclasses import dataclass, field
import numpy as np
from ..expr import canonical, compile_fn, free_symbols, is_zero, stable_seed, substitute
from ..noether import noether_residual
from ..spacetime import Metric, MetricError
from .entries import CatalogEntry
@dataclass
class ClassificationResult:
    class_label: str
    dimension: int
    matched_entry: str | None
    per_entry: dict[str, int] = field(default_factory=dict)
def classify_metric(m: Metric, entries: list[CatalogEntry], seed: int = 42) -> ClassificationResult:
    """Best-matching class of a metric within the ansatz.
    For every catalog entry whose profile templates unify with the metric
    (parameters taken from the metric file, falling back to the entry's
    defaults) each generator pattern is screened numerically against the
    invariance condition; the entry with the most verified generators wins.
    Only the five universal generators verifying means "class I (minimal)".
    """
    _require_ansatz(m)
    per_entry: dict[str, int] = {}
    best = ("I (minimal)", 5, None)
    for entry in entries:
        params = {**entry.metric.params, **m.params}
        trial = Metric(nu=entry.metric.nu, mu=entry.metric.mu, branch=entry.metric.branch,
                       params=params, domain=m.domain, name=entry.entry_id)
        if trial.branch is not m.branch or not _profiles_match(m, trial, seed):
            continue
        count = _count_verified(m, entry, params, seed)
        per_entry[entry.entry_id] = count
        if count == entry.expected_dimension and (count > best[1] or best[2] is None):
            best = (entry.class_id, count, entry.entry_id)
    return ClassificationResult(class_label=best[0], dimension=best[1],
                                matched_entry=best[2], per_entry=per_entry)
def _require_ansatz(m: Metric) -> None:
    for label, e in (("nu", m.nu), ("mu", m.mu)):
        bad = free_symbols(canonical(e)) - {"r"} - set(m.params)
        if bad:
            raise MetricError(f"metric outside the static spherically symmetric ansatz: "
                              f"{label} depends on {sorted(bad)}")
def _profiles_match(m: Metric, trial: Metric, seed: int) -> bool:
    rng = np.random.default_rng(stable_seed(seed, "classify", trial.name))
    lo, hi = m.sample_domains()["r"]
    for label in ("nu", "mu"):
        target = substitute(getattr(m, label), m.exact_params())
        template = substitute(getattr(trial, label), trial.exact_params())
        if free_symbols(target) - {"r"} or free_symbols(template) - {"r"}:
            return False
        f_t = compile_fn(target, ("r",))
        f_m = compile_fn(template, ("r",))
        hits = 0
        for _ in range(24):
            r = rng.uniform(lo, hi)
            try:
                a, b = f_t(r), f_m(r)
            except (ArithmeticError, ValueError):
                continue
            if abs(a - b) > 1e-9 * max(1.0, abs(a), abs(b)):
                return False
            hits += 1
        if hits < 10:
            return False
    return True
def _count_verified(m: Metric, entry: CatalogEntry, params: dict[str, float], seed: int) -> int:
    concrete = Metric(nu=m.nu, mu=m.mu, branch=m.branch, params=params,
                      domain=m.domain, name=m.name)
    count = 0
    for g in entry.generators:
        residual = substitute(noether_residual(concrete, g), concrete.exact_params())
        dec = is_zero(residual, seed=stable_seed(seed, "classify", entry.entry_id, g.name),
                      domains=concrete.sample_domains(), n=60)
        if dec.accepted:
            count += 1
    return count
