"""Two-tier zero testing: canonical rewrite, then seeded numeric sampling.

A complete trig/exp simplifier is out of scope, so expressions the rewriter
cannot kill are sampled at 100 random non-singular points.  The verdict is
``zero`` only for an exact rewrite to 0; sampling can return ``nonzero``
with a witness, or ``undecided`` with the sample statistics (all samples
below 1e-9 is the "numerically zero" downgrade recorded by verification
reports, never silently promoted to ``zero``).
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .evaluate import EvalError, eval_numeric
from .nodes import Expr, PARAMETERS, VELOCITIES, free_symbols
from .simplify import ZERO, canonical, cleared_numerator

NONZERO_THRESHOLD = 1e-6
ZERO_THRESHOLD = 1e-9

# Sampling domains; r is overridden by the metric's declared regular
# interval wherever a metric is in play.
DEFAULT_DOMAINS: dict[str, tuple[float, float]] = {
    "s": (0.1, 2.0),
    "t": (-1.0, 1.0),
    "r": (0.5, 2.0),
    "theta": (0.3, math.pi - 0.3),
    "phi": (0.0, 2.0 * math.pi),
    **{v: (-1.0, 1.0) for v in VELOCITIES},
    **{p: (0.5, 2.0) for p in PARAMETERS},
}


def stable_seed(*parts) -> int:
    """Deterministic 64-bit seed derived from string/int labels."""
    digest = hashlib.sha256("|".join(str(p) for p in parts).encode()).digest()
    return int.from_bytes(digest[:8], "big")


@dataclass
class ZeroDecision:
    status: str  # "zero" | "nonzero" | "undecided"
    seed: int | None = None
    n_samples: int = 0
    max_abs: float = 0.0
    witness: dict[str, float] | None = None
    witness_value: float | None = None
    symbolic: bool = False
    note: str = ""

    @property
    def numerically_zero(self) -> bool:
        """True when every sample stayed below the zero threshold."""
        return self.status == "undecided" and self.n_samples > 0 and self.max_abs < ZERO_THRESHOLD

    @property
    def accepted(self) -> bool:
        """Verification acceptance: exact zero, or the recorded downgrade."""
        return self.status == "zero" or self.numerically_zero


def sample_point(
    rng: np.random.Generator,
    names: frozenset[str] | set[str],
    domains: Mapping[str, tuple[float, float]] | None = None,
) -> dict[str, float]:
    out = {}
    for name in sorted(names):
        lo, hi = (domains or {}).get(name) or DEFAULT_DOMAINS[name]
        out[name] = float(rng.uniform(lo, hi))
    return out


def is_zero(
    e: Expr,
    seed: int = 0,
    domains: Mapping[str, tuple[float, float]] | None = None,
    n: int = 100,
    symbolic: bool = True,
) -> ZeroDecision:
    if symbolic:
        c = canonical(e)
        if c is ZERO:
            return ZeroDecision(status="zero", symbolic=True)
        if cleared_numerator(c) is ZERO:
            return ZeroDecision(status="zero", symbolic=True, note="after clearing denominators")
    else:
        c = e
    names = free_symbols(c)
    if not names:
        # constant but not the zero node: evaluate once
        v = eval_numeric(c, {})
        if abs(v) >= NONZERO_THRESHOLD:
            return ZeroDecision(status="nonzero", witness={}, witness_value=v, n_samples=1, max_abs=abs(v))
        return ZeroDecision(status="undecided", n_samples=1, max_abs=abs(v))
    rng = np.random.default_rng(seed)
    max_abs = 0.0
    taken = 0
    attempts = 0
    while taken < n and attempts < 50 * n:
        attempts += 1
        point = sample_point(rng, names, domains)
        try:
            v = eval_numeric(c, point)
        except EvalError:
            continue
        taken += 1
        if abs(v) >= NONZERO_THRESHOLD:
            return ZeroDecision(
                status="nonzero", seed=seed, n_samples=taken, max_abs=abs(v),
                witness=point, witness_value=v,
            )
        max_abs = max(max_abs, abs(v))
    if taken == 0:
        return ZeroDecision(status="undecided", seed=seed, note="no regular sample points found")
    return ZeroDecision(status="undecided", seed=seed, n_samples=taken, max_abs=max_abs)
