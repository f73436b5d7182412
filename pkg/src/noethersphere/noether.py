"""Point-symmetry machinery: prolongation, the invariance condition,
determining equations, first integrals and Lie-algebra structure."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from .expr import (
    Expr,
    ParseError,
    VelocityMonomial,
    ZeroDecision,
    add,
    canonical,
    cleared_numerator,
    collect_velocity_monomials,
    differentiate,
    eval_numeric,
    has_velocities,
    is_zero,
    mul,
    neg,
    parse,
    rat,
    replace_unknowns,
    stable_seed,
    strip_invertible,
    substitute,
    sym,
    to_latex,
    to_text,
    unknown,
    sample_point,
    ZERO,
)
from .spacetime import COORDS, VELS, LambdaBranch, Metric, lagrangian

VARS5 = ("s", "t", "r", "theta", "phi")


class GeneratorError(ValueError):
    pass


@dataclass(frozen=True)
class Generator:
    """A candidate point symmetry: xi d/ds + eta^i d/du^i with gauge A."""

    name: str
    xi: Expr
    eta: tuple[Expr, Expr, Expr, Expr]
    gauge: Expr

    def __post_init__(self):
        for label, e in self.fields().items():
            if has_velocities(e):
                raise GeneratorError(f"{self.name}: {label} contains velocity symbols")

    def fields(self) -> dict[str, Expr]:
        return {"xi": self.xi, "eta0": self.eta[0], "eta1": self.eta[1],
                "eta2": self.eta[2], "eta3": self.eta[3], "gauge": self.gauge}

    def vector(self) -> tuple[Expr, ...]:
        """Components over (s, t, r, theta, phi)."""
        return (self.xi, *self.eta)

    def is_trivial(self) -> bool:
        return all(canonical(c) is ZERO for c in self.vector())

    def scaled(self, factor) -> "Generator":
        f = rat(factor) if not isinstance(factor, Expr) else factor
        return Generator(
            name=f"{factor}*{self.name}",
            xi=canonical(mul(f, self.xi)),
            eta=tuple(canonical(mul(f, e)) for e in self.eta),
            gauge=canonical(mul(f, self.gauge)),
        )


def generator(name: str, xi="0", eta0="0", eta1="0", eta2="0", eta3="0", gauge="0") -> Generator:
    """Convenience constructor from DSL strings or expressions."""
    def conv(x):
        return canonical(parse(x) if isinstance(x, str) else x)

    return Generator(name=name, xi=conv(xi),
                     eta=(conv(eta0), conv(eta1), conv(eta2), conv(eta3)),
                     gauge=conv(gauge))


def parse_generator_records(text: str) -> list[Generator]:
    """Parse one or more generator records from key-value text.  Keys:
    ``name``, ``xi``, ``eta0``..``eta3``, ``gauge``; omitted fields are 0.
    A ``name`` key starts a new record.  Errors cite line numbers.
    """
    records: list[dict[str, str]] = []
    current: dict[str, str] | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise GeneratorError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key == "name":
            current = {"name": value}
            records.append(current)
            continue
        if current is None:
            raise GeneratorError(f"line {lineno}: field {key!r} before any 'name ='")
        if key not in ("xi", "eta0", "eta1", "eta2", "eta3", "gauge"):
            raise GeneratorError(f"line {lineno}: unknown key {key!r}")
        try:
            parse(value)
        except ParseError as exc:
            raise GeneratorError(f"line {lineno}: {exc}") from exc
        current[key] = value
    if not records:
        raise GeneratorError("no generator records found")
    return [generator(**rec) for rec in records]


def parse_generator_file(path: str | Path) -> list[Generator]:
    return parse_generator_records(Path(path).read_text())


def generator_to_text(g: Generator) -> str:
    lines = [f"name = {g.name}"]
    for key, e in g.fields().items():
        if canonical(e) is not ZERO:
            lines.append(f"{key} = {to_text(canonical(e))}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# total derivative, prolongation, invariance residual


def total_derivative(e: Expr) -> Expr:
    """D = d_s + td d_t + rd d_r + thetad d_theta + phid d_phi."""
    parts = [differentiate(e, "s")]
    for coord, vel in zip(COORDS, VELS):
        parts.append(mul(sym(vel), differentiate(e, coord)))
    return canonical(add(*parts))


def prolong(g: Generator) -> tuple[Expr, Expr, Expr, Expr]:
    """First-prolongation velocity coefficients D(eta^i) - u^i_dot D(xi)."""
    dxi = total_derivative(g.xi)
    return tuple(
        canonical(add(total_derivative(e), neg(mul(sym(vel), dxi))))
        for e, vel in zip(g.eta, VELS)
    )


def noether_residual(m: Metric, g: Generator) -> Expr:
    """X^(1) L + D(xi) L - D(A), fully expanded.  Zero iff g is a symmetry."""
    L = lagrangian(m)
    eta_s = prolong(g)
    parts = [mul(g.xi, differentiate(L, "s"))]
    parts += [mul(e, differentiate(L, c)) for e, c in zip(g.eta, COORDS)]
    parts += [mul(es, differentiate(L, v)) for es, v in zip(eta_s, VELS)]
    parts.append(mul(total_derivative(g.xi), L))
    parts.append(neg(total_derivative(g.gauge)))
    return canonical(add(*parts))


@dataclass
class SymmetryVerification:
    generator: str
    decision: ZeroDecision
    stage: str  # "symbolic" | "symbolic-exact-params" | "numeric"

    @property
    def verified(self) -> bool:
        return self.decision.accepted

    @property
    def symbolic(self) -> bool:
        return self.decision.status == "zero"


def verify_symmetry(m: Metric, g: Generator, seed: int = 0) -> SymmetryVerification:
    """Check the invariance condition, first symbolically with free
    parameters, then with the metric's exact parameter values, finally by
    seeded sampling on the metric domain (recorded as a downgrade).
    """
    residual = noether_residual(m, g)
    if residual is ZERO or cleared_numerator(residual) is ZERO:
        return SymmetryVerification(g.name, ZeroDecision(status="zero", symbolic=True), "symbolic")
    bound = substitute(residual, m.exact_params())
    if bound is ZERO or cleared_numerator(bound) is ZERO:
        return SymmetryVerification(
            g.name, ZeroDecision(status="zero", symbolic=True, note="with exact parameter values"),
            "symbolic-exact-params",
        )
    dec = is_zero(bound, seed=stable_seed(seed, m.name, g.name), domains=m.sample_domains())
    return SymmetryVerification(g.name, dec, "numeric")


# ---------------------------------------------------------------------------
# determining system


@dataclass
class DeterminingSystem:
    """Velocity-monomial coefficients of the invariance residual for the
    symbolic metric family nu(r), mu(r) on a fixed angular branch.
    """

    branch: LambdaBranch
    equations: dict[VelocityMonomial, Expr]          # raw coefficients
    normalized: dict[VelocityMonomial, Expr]         # up to invertible factor

    def nonredundant(self) -> list[tuple[Expr, list[VelocityMonomial]]]:
        """Distinct equations with the monomials that produce them, in a
        fixed order (by lowest producing monomial)."""
        groups: dict[Expr, list[VelocityMonomial]] = {}
        for mono, eq in self.normalized.items():
            groups.setdefault(eq, []).append(mono)
        out = [(eq, sorted(monos)) for eq, monos in groups.items()]
        out.sort(key=lambda item: item[1][0])
        return out

    def as_text(self) -> str:
        lines = []
        for eq, monos in self.nonredundant():
            labels = ", ".join(mn.label() for mn in monos)
            lines.append(f"[{labels}]  {to_text(eq)} = 0")
        return "\n".join(lines) + "\n"

    def as_latex(self) -> str:
        lines = []
        for eq, monos in self.nonredundant():
            labels = ", ".join(_monomial_latex(mn) for mn in monos)
            lines.append(rf"{labels}:\quad {to_latex(eq)} = 0 \\")
        return "\n".join(lines) + "\n"


def _monomial_latex(mn: VelocityMonomial) -> str:
    names = (r"\dot t", r"\dot r", r"\dot\theta", r"\dot\phi")
    parts = [f"{n}^{{{k}}}" if k > 1 else n for n, k in zip(names, mn) if k]
    return " ".join(parts) if parts else "1"


def family_metric(branch: LambdaBranch) -> Metric:
    """Metric with opaque profile functions nu(r), mu(r)."""
    return Metric(nu=unknown("nu"), mu=unknown("mu"), branch=branch,
                  params={}, domain=(0.5, 2.0), name=f"family-{branch.value}")


def family_generator() -> Generator:
    return Generator(
        name="family",
        xi=unknown("xi"),
        eta=(unknown("eta0"), unknown("eta1"), unknown("eta2"), unknown("eta3")),
        gauge=unknown("A"),
    )


def determining_system(branch: LambdaBranch = LambdaBranch.RADIUS_SQUARED) -> DeterminingSystem:
    """Generate the determining PDE system from first principles: build the
    invariance residual with all coefficients unknown, then compare velocity
    monomial coefficients.
    """
    residual = noether_residual(family_metric(branch), family_generator())
    raw = collect_velocity_monomials(residual)
    raw = {mn: eq for mn, eq in raw.items() if eq is not ZERO}
    normalized = {mn: strip_invertible(eq) for mn, eq in raw.items()}
    return DeterminingSystem(branch=branch, equations=raw, normalized=normalized)


def substitute_into_system(
    ds: DeterminingSystem, g: Generator, metric: Metric | None = None,
) -> dict[VelocityMonomial, Expr]:
    """Substitute a concrete generator (and optionally a concrete metric)
    into every determining equation; returns monomial -> residual.
    """
    fields = dict(zip(("xi", "eta0", "eta1", "eta2", "eta3"), (g.xi, *g.eta)))
    fields["A"] = g.gauge
    if metric is not None:
        fields["nu"] = metric.nu
        fields["mu"] = metric.mu
    return {mn: replace_unknowns(eq, fields) for mn, eq in ds.equations.items()}


# ---------------------------------------------------------------------------
# first integrals


@dataclass
class FirstIntegral:
    expr: Expr
    source: str
    note: str = ""

    def __post_init__(self):
        mono = collect_velocity_monomials(self.expr)
        if any(mn.degree > 2 for mn in mono):
            raise GeneratorError(f"first integral of {self.source} has velocity degree > 2")


def first_integral(m: Metric, g: Generator) -> FirstIntegral:
    """Noether's theorem: I = A - (xi L + (eta^i - xi u^i_dot) dL/du^i_dot)."""
    L = lagrangian(m)
    inner = [mul(g.xi, L)]
    for e, vel in zip(g.eta, VELS):
        inner.append(mul(add(e, neg(mul(g.xi, sym(vel)))), differentiate(L, vel)))
    expr = canonical(add(g.gauge, neg(add(*inner))))
    return FirstIntegral(expr=expr, source=g.name)


# ---------------------------------------------------------------------------
# Lie algebra


def lie_bracket(g1: Generator, g2: Generator) -> Generator:
    """Componentwise commutator over (s, t, r, theta, phi); bracket gauge
    is set to 0 (structure constants live on the vector parts)."""
    v1, v2 = g1.vector(), g2.vector()
    comps = []
    for a in range(5):
        term = add(
            *[mul(v1[b], differentiate(v2[a], VARS5[b])) for b in range(5)],
            *[neg(mul(v2[b], differentiate(v1[a], VARS5[b]))) for b in range(5)],
        )
        comps.append(canonical(term))
    return Generator(name=f"[{g1.name},{g2.name}]", xi=comps[0],
                     eta=tuple(comps[1:]), gauge=ZERO)


class ClosureError(RuntimeError):
    pass


@dataclass
class CommutatorTable:
    basis: list[str]
    constants: dict[tuple[int, int], dict[int, float]]   # (i, j) i<j -> {k: c}
    certified: dict[tuple[int, int], str]                # "symbolic" | "numeric"
    jacobi_max: float

    def constant(self, i: int, j: int, k: int) -> float:
        if i == j:
            return 0.0
        sign = 1.0 if i < j else -1.0
        return sign * self.constants.get((min(i, j), max(i, j)), {}).get(k, 0.0)


def commutator_table(
    basis: list[Generator],
    metric: Metric | None = None,
    seed: int = 0,
    tol: float = 1e-9,
) -> CommutatorTable:
    """Expand every bracket in the basis.  Constants are solved from point
    samples and then certified symbolically via the zero test; a bracket
    that leaves the span raises :class:`ClosureError` naming the pair.
    """
    rng = np.random.default_rng(stable_seed(seed, "commutators"))
    domains = dict((metric.sample_domains() if metric else {}))
    params = metric.exact_params() if metric else {}
    n = len(basis)
    npoints = max(5, (5 * n) // 4 + 2)
    needed = frozenset(VARS5)
    points = [sample_point(rng, needed, domains) for _ in range(npoints)]

    def column(g: Generator) -> np.ndarray:
        vals = []
        comps = [substitute(c, params) for c in g.vector()]
        for pt in points:
            for comp in comps:
                vals.append(eval_numeric(comp, pt))
        return np.array(vals)

    matrix = np.column_stack([column(g) for g in basis])
    rank = np.linalg.matrix_rank(matrix, tol=1e-8)
    if rank < n:
        raise ClosureError(f"basis is linearly dependent (rank {rank} < {n})")

    constants: dict[tuple[int, int], dict[int, float]] = {}
    certified: dict[tuple[int, int], str] = {}
    for i in range(n):
        for j in range(i + 1, n):
            bracket = lie_bracket(basis[i], basis[j])
            target = column(bracket)
            coeffs, res, *_ = np.linalg.lstsq(matrix, target, rcond=None)
            fit = matrix @ coeffs - target
            scale = max(1.0, float(np.max(np.abs(target))))
            if float(np.max(np.abs(fit))) > 1e-6 * scale:
                raise ClosureError(
                    f"[{basis[i].name},{basis[j].name}] leaves the basis span "
                    f"(fit residual {float(np.max(np.abs(fit))):.3g})"
                )
            snapped = {k: _snap(c) for k, c in enumerate(coeffs) if abs(c) > 1e-8}
            status = _certify_bracket(bracket, basis, snapped, params, domains, seed=stable_seed(seed, i, j))
            constants[(i, j)] = {k: float(c) for k, c in snapped.items()}
            certified[(i, j)] = status
    jac = _jacobi_residual(constants, n)
    return CommutatorTable(basis=[g.name for g in basis], constants=constants,
                           certified=certified, jacobi_max=jac)


def _snap(c: float) -> Fraction | float:
    f = Fraction(c).limit_denominator(1000)
    return f if abs(float(f) - c) < 1e-9 else c


def _certify_bracket(bracket, basis, snapped, params, domains, seed) -> str:
    symbolic = True
    for a in range(5):
        combo = add(*[mul(rat(c) if isinstance(c, Fraction) else rat(Fraction(c).limit_denominator(10**12)),
                          basis[k].vector()[a]) for k, c in snapped.items()]) if snapped else ZERO
        diff = substitute(add(bracket.vector()[a], neg(combo)), params)
        if diff is ZERO or cleared_numerator(diff) is ZERO:
            continue
        dec = is_zero(diff, seed=stable_seed(seed, a), domains=domains)
        if dec.status == "nonzero":
            raise ClosureError(f"{bracket.name}: component {VARS5[a]} mismatch after fit")
        symbolic = False
    return "symbolic" if symbolic else "numeric"


def _jacobi_residual(constants: dict[tuple[int, int], dict[int, float]], n: int) -> float:
    def c(i, j, k):
        if i == j:
            return 0.0
        sign = 1.0 if i < j else -1.0
        return sign * constants.get((min(i, j), max(i, j)), {}).get(k, 0.0)

    worst = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(j + 1, n):
                for m_ in range(n):
                    total = 0.0
                    for e in range(n):
                        total += c(j, k, e) * c(i, e, m_)
                        total += c(k, i, e) * c(j, e, m_)
                        total += c(i, j, e) * c(k, e, m_)
                    worst = max(worst, abs(total))
    return worst
