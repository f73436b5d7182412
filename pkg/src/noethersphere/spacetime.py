"""Spherically symmetric static metrics: Lagrangian, curvature, isometries.

The metric ansatz is ``ds^2 = e^nu(r) dt^2 - e^mu(r) dr^2 - e^lambda dOmega^2``
with the angular factor either ``r^2`` or exactly 1 (the constant absorbed
into the solid-angle element).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from .expr import (
    Expr,
    ParseError,
    ZeroDecision,
    canonical,
    compile_fn,
    differentiate,
    free_symbols,
    func,
    is_zero,
    mul,
    parse,
    pow_,
    rat,
    sym,
    add,
    neg,
    ZERO,
    ONE,
)

COORDS = ("t", "r", "theta", "phi")
VELS = ("td", "rd", "thetad", "phid")


class MetricError(ValueError):
    pass


class LambdaBranch(enum.Enum):
    RADIUS_SQUARED = "r2"
    UNIT = "unit"


@dataclass(frozen=True)
class Metric:
    """Profile functions nu(r), mu(r), the angular branch, parameter values
    and the open r-interval on which all components are regular.
    """

    nu: Expr
    mu: Expr
    branch: LambdaBranch
    params: dict[str, float] = field(default_factory=dict)
    domain: tuple[float, float] = (0.5, 2.0)
    name: str = ""

    def __post_init__(self):
        for label, e in (("nu", self.nu), ("mu", self.mu)):
            extra = free_symbols(e) - {"r"} - set(self.params) - {"alpha", "beta", "a", "b", "p"}
            if extra:
                raise MetricError(f"{label} may depend only on r and parameters, got {sorted(extra)}")
        if not self.domain[0] < self.domain[1]:
            raise MetricError(f"empty domain {self.domain}")

    def e_nu(self) -> Expr:
        return canonical(func("exp", self.nu))

    def e_mu(self) -> Expr:
        return canonical(func("exp", self.mu))

    def e_lambda(self) -> Expr:
        if self.branch is LambdaBranch.RADIUS_SQUARED:
            return canonical(pow_(sym("r"), 2))
        return ONE

    def components(self) -> dict[str, Expr]:
        """Diagonal metric components in (+,-,-,-) signature."""
        sin2 = pow_(func("sin", sym("theta")), 2)
        return {
            "t": self.e_nu(),
            "r": canonical(neg(self.e_mu())),
            "theta": canonical(neg(self.e_lambda())),
            "phi": canonical(neg(mul(self.e_lambda(), sin2))),
        }

    def param_bindings(self) -> dict[str, float]:
        return dict(self.params)

    def exact_params(self) -> dict[str, Expr]:
        """Parameter values as exact rationals for symbolic substitution."""
        return {k: rat(Fraction(v).limit_denominator(10**9)) for k, v in self.params.items()}

    def sample_domains(self, standoff: float = 0.05) -> dict[str, tuple[float, float]]:
        lo, hi = self.domain
        pad = standoff * (hi - lo)
        return {"r": (lo + pad, hi - pad)}

    def validate(self, seed: int = 0, n: int = 100) -> None:
        """Check e^nu > 0, e^mu > 0 and angular regularity on the domain."""
        rng = np.random.default_rng(seed)
        lo, hi = self.sample_domains()["r"]
        enu = compile_fn(canonical(self.nu), ("r",) + tuple(self.params))
        emu = compile_fn(canonical(self.mu), ("r",) + tuple(self.params))
        vals = [self.params[k] for k in self.params]
        for _ in range(n):
            r = rng.uniform(lo, hi)
            for label, f in (("nu", enu), ("mu", emu)):
                try:
                    v = f(r, *vals)
                except (ArithmeticError, ValueError) as exc:
                    raise MetricError(f"{label} singular at r={r:.6g}: {exc}") from exc
                if not math.isfinite(v):
                    raise MetricError(f"{label} not finite at r={r:.6g}")


def parse_metric_file(path: str | Path) -> Metric:
    """Key-value metric format: ``nu``/``mu`` (DSL), ``lambda`` (r2|unit),
    ``params.<name>``, ``domain = (lo, hi)``.  Errors cite line numbers.
    """
    path = Path(path)
    return parse_metric_text(path.read_text(), name=path.stem)


def parse_metric_text(text: str, name: str = "") -> Metric:
    values: dict[str, Expr] = {}
    branch: LambdaBranch | None = None
    params: dict[str, float] = {}
    domain: tuple[float, float] | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise MetricError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        try:
            if key in ("nu", "mu"):
                values[key] = parse(value)
            elif key == "lambda":
                branch = LambdaBranch(value)
            elif key.startswith("params."):
                params[key[len("params."):]] = float(value)
            elif key == "domain":
                inner = value.strip("()[] ")
                lo, hi = (float(x) for x in inner.split(","))
                domain = (lo, hi)
            elif key == "name":
                name = value
            else:
                raise MetricError(f"line {lineno}: unknown key {key!r}")
        except (ParseError, ValueError) as exc:
            raise MetricError(f"line {lineno}: {exc}") from exc
    missing = {"nu", "mu"} - set(values)
    if missing or branch is None or domain is None:
        need = sorted(missing) + (["lambda"] if branch is None else []) + (["domain"] if domain is None else [])
        raise MetricError(f"metric file incomplete, missing: {', '.join(need)}")
    return Metric(nu=canonical(values["nu"]), mu=canonical(values["mu"]),
                  branch=branch, params=params, domain=domain, name=name)


def metric_to_text(m: Metric) -> str:
    from .expr import to_text

    lines = [f"name = {m.name}" if m.name else None,
             f"nu = {to_text(m.nu)}",
             f"mu = {to_text(m.mu)}",
             f"lambda = {m.branch.value}"]
    lines += [f"params.{k} = {v!r}" for k, v in sorted(m.params.items())]
    lines.append(f"domain = ({m.domain[0]!r}, {m.domain[1]!r})")
    return "\n".join(l for l in lines if l) + "\n"


# ---------------------------------------------------------------------------
# Lagrangian and connection


def lagrangian(m: Metric) -> Expr:
    """Geodesic Lagrangian e^nu td^2 - e^mu rd^2 - e^lam (thetad^2 + sin^2 theta phid^2)."""
    sin2 = pow_(func("sin", sym("theta")), 2)
    return canonical(add(
        mul(m.e_nu(), pow_(sym("td"), 2)),
        neg(mul(m.e_mu(), pow_(sym("rd"), 2))),
        neg(mul(m.e_lambda(), add(pow_(sym("thetad"), 2), mul(sin2, pow_(sym("phid"), 2))))),
    ))


def christoffel(m: Metric) -> dict[tuple[str, str, str], Expr]:
    """All Levi-Civita connection components Gamma^a_{bc} with b <= c in the
    coordinate order (t, r, theta, phi); zeros included.
    """
    g = m.components()
    out: dict[tuple[str, str, str], Expr] = {}
    for a in COORDS:
        inv = canonical(pow_(g[a], -1))
        for i, b in enumerate(COORDS):
            for c in COORDS[i:]:
                term = add(
                    _dg(g, a, c, b),
                    _dg(g, a, b, c),
                    neg(_dg(g, b, c, a)),
                )
                out[(a, b, c)] = canonical(mul(rat(Fraction(1, 2)), inv, term))
    return out


def _dg(g: dict[str, Expr], i: str, j: str, by: str) -> Expr:
    # derivative of g_ij (diagonal) with respect to coordinate `by`
    if i != j:
        return ZERO
    return differentiate(g[i], by)


@dataclass
class CurvatureReport:
    """Nonzero curvature data in the convention
    R^a_{bcd} = d_c Gamma^a_{bd} - d_d Gamma^a_{bc} + Gamma^a_{ce} Gamma^e_{bd}
    - Gamma^a_{de} Gamma^e_{bc}, Ricci R_{bd} = R^a_{bad}, R = g^{bd} R_{bd}.
    """

    metric: Metric
    ricci: dict[tuple[int, int], Expr]
    riemann: dict[tuple[int, int, int, int], Expr]
    ricci_scalar: Expr

    def nonzero_ricci_indices(self) -> set[tuple[int, int]]:
        return set(self.ricci)

    def nonzero_riemann_indices(self) -> set[tuple[int, int, int, int]]:
        return set(self.riemann)


def riemann_mixed(m: Metric) -> dict[tuple[str, str, str, str], Expr]:
    """All components R^a_{bcd} with c < d (the last pair is antisymmetric
    and vanishes for c == d)."""
    gamma = christoffel(m)

    def G(a: str, b: str, c: str) -> Expr:
        return gamma[(a, b, c)] if (a, b, c) in gamma else gamma[(a, c, b)]

    rmixed: dict[tuple[str, str, str, str], Expr] = {}
    for a in COORDS:
        for b in COORDS:
            for ci, c in enumerate(COORDS):
                for d in COORDS[ci + 1:]:
                    term = add(
                        differentiate(G(a, b, d), c),
                        neg(differentiate(G(a, b, c), d)),
                        *[mul(G(a, c, e), G(e, b, d)) for e in COORDS],
                        *[neg(mul(G(a, d, e), G(e, b, c))) for e in COORDS],
                    )
                    rmixed[(a, b, c, d)] = canonical(term)
    return rmixed


def curvature(m: Metric) -> CurvatureReport:
    g = m.components()
    rmixed = riemann_mixed(m)

    def RM(a, b, c, d) -> Expr:
        if (a, b, c, d) in rmixed:
            return rmixed[(a, b, c, d)]
        if (a, b, d, c) in rmixed:
            return canonical(neg(rmixed[(a, b, d, c)]))
        return ZERO  # c == d

    idx = {name: i for i, name in enumerate(COORDS)}
    riemann: dict[tuple[int, int, int, int], Expr] = {}
    seen: set[tuple[int, int, int, int]] = set()
    for ai, a in enumerate(COORDS):
        for b in COORDS[ai + 1:]:
            for ci, c in enumerate(COORDS):
                for d in COORDS[ci + 1:]:
                    ia, ib, ic, id_ = idx[a], idx[b], idx[c], idx[d]
                    if (ic, id_) < (ia, ib) or (ia, ib, ic, id_) in seen:
                        continue
                    seen.add((ia, ib, ic, id_))
                    low = canonical(mul(g[a], RM(a, b, c, d)))
                    if low is not ZERO:
                        riemann[(ia, ib, ic, id_)] = low
    ricci: dict[tuple[int, int], Expr] = {}
    for bi, b in enumerate(COORDS):
        for d in COORDS[bi:]:
            total = add(*[RM(a, b, a, d) for a in COORDS])
            val = canonical(total)
            if val is not ZERO:
                ricci[(idx[b], idx[d])] = val
    scalar = canonical(add(*[
        mul(pow_(g[b], -1), ricci.get((idx[b], idx[b]), ZERO)) for b in COORDS
    ]))
    return CurvatureReport(metric=m, ricci=ricci, riemann=riemann, ricci_scalar=scalar)


# ---------------------------------------------------------------------------
# Killing equations


@dataclass
class KillingResult:
    is_killing: bool
    components: dict[tuple[str, str], ZeroDecision]
    reason: str = ""

    @property
    def witness(self):
        for dec in self.components.values():
            if dec.status == "nonzero":
                return dec.witness
        return None


def killing_check(m: Metric, gen, seed: int = 0) -> KillingResult:
    """Evaluate the ten Killing equations (L_v g)_{ab} = 0 for a generator
    with no d/ds part, no gauge and no s-dependence.  Raises MetricError for
    a malformed candidate.
    """
    if canonical(gen.xi) is not ZERO:
        raise MetricError(f"{gen.name}: Killing candidate must have xi = 0")
    if canonical(gen.gauge) is not ZERO:
        raise MetricError(f"{gen.name}: Killing candidate must have zero gauge")
    if any("s" in free_symbols(canonical(c)) for c in gen.eta):
        raise MetricError(f"{gen.name}: Killing candidate must be s-independent")
    g = m.components()
    v = dict(zip(COORDS, gen.eta))
    decisions: dict[tuple[str, str], ZeroDecision] = {}
    ok = True
    domains = m.sample_domains()
    exact = m.exact_params()
    for i, a in enumerate(COORDS):
        for b in COORDS[i:]:
            lie = add(
                *[mul(v[c], differentiate(g[a], c)) for c in COORDS if a == b],
                mul(g[b], differentiate(v[b], a)),
                mul(g[a], differentiate(v[a], b)),
            )
            dec = _staged_is_zero(lie, exact, seed=seed, domains=domains, label=f"{a}{b}")
            decisions[(a, b)] = dec
            ok = ok and dec.accepted
    return KillingResult(is_killing=ok, components=decisions)


def _staged_is_zero(e: Expr, exact_params: dict[str, Expr], seed: int, domains, label: str = "") -> ZeroDecision:
    """Symbolic zero first with free parameters, then with exact parameter
    values substituted, then seeded numeric sampling.
    """
    from .expr import cleared_numerator, stable_seed, substitute

    c = canonical(e)
    if c is ZERO or cleared_numerator(c) is ZERO:
        return ZeroDecision(status="zero", symbolic=True)
    bound = substitute(c, exact_params) if exact_params else c
    return is_zero(bound, seed=stable_seed(seed, label), domains=domains)


# ---------------------------------------------------------------------------
# compiled geodesic right-hand side

THETA_STANDOFF = 1e-6


class GeodesicSystem:
    """Christoffel symbols of a metric compiled to numeric functions of
    (r, theta); evaluates the geodesic equation right-hand side."""

    def __init__(self, m: Metric):
        self.metric = m
        gamma = christoffel(m)
        exact = m.exact_params()
        self._fns: list[tuple[int, int, int, object]] = []
        from .expr import substitute

        for (a, b, c), e in gamma.items():
            bound = substitute(e, exact) if exact else canonical(e)
            if bound is ZERO:
                continue
            fn = compile_fn(bound, ("r", "theta"))
            ia, ib, ic = COORDS.index(a), COORDS.index(b), COORDS.index(c)
            self._fns.append((ia, ib, ic, fn))

    def rhs(self, state, check: bool = True) -> np.ndarray:
        """d/ds of (t, r, theta, phi, td, rd, thetad, phid)."""
        t, r, theta, phi, td, rd, thetad, phid = state
        if check:
            lo, hi = self.metric.domain
            if not lo < r < hi:
                raise MetricError(f"r={r:.6g} outside domain ({lo:.6g}, {hi:.6g})")
            if min(theta % math.pi, math.pi - theta % math.pi) < THETA_STANDOFF:
                raise MetricError(f"theta={theta:.6g} too close to coordinate axis")
        u = (td, rd, thetad, phid)
        acc = [0.0, 0.0, 0.0, 0.0]
        for ia, ib, ic, fn in self._fns:
            val = fn(r, theta) * u[ib] * u[ic]
            if ib != ic:
                val *= 2.0
            acc[ia] -= val
        return np.array([td, rd, thetad, phid, *acc], dtype=float)


_system_cache: dict[int, GeodesicSystem] = {}


def geodesic_system(m: Metric) -> GeodesicSystem:
    key = id(m)
    if key not in _system_cache:
        _system_cache[key] = GeodesicSystem(m)
    return _system_cache[key]


def geodesic_rhs(m: Metric, state) -> np.ndarray:
    """Geodesic equation right-hand side (velocities, -Gamma^a_{bc} u^b u^c)
    at an 8-vector state (t, r, theta, phi, td, rd, thetad, phid)."""
    return geodesic_system(m).rhs(state)
