"""Catalog storage: one directory per class, one subdirectory per case,
holding ``metric.mtr``, ``generators.gen`` and ``expected.txt``.

``expected.txt`` keys:

* ``dimension`` - symmetry-algebra dimension of the entry;
* ``integral.<GEN>`` - reference first integral, matched against the
  engine's Noether integral up to one constant factor plus an additive
  constant (both recorded);
* ``commutator.<A>.<B>`` - reference bracket as a combination of basis
  names, e.g. ``X2`` or ``-1*X1 + 1/a*X52``; ``0`` for an explicit zero;
* ``commutators_complete`` - when true, every unlisted pair must vanish;
* ``curvature.*`` - reference curvature values (see CurvatureReference);
* ``note`` - free-text remarks (corrections, normalisation records).
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from ..expr import Expr, ParseError, canonical, parse
from ..noether import Generator, parse_generator_file
from ..spacetime import Metric, MetricError, parse_metric_file

CLASS_IDS = ("I", "II", "III", "IV", "V", "VI")


class CatalogError(ValueError):
    pass


@dataclass
class CurvatureReference:
    """Published curvature values to compare against (up to one global sign
    per tensor family), plus structural claims."""

    scalar: Expr | None = None
    ricci: dict[tuple[int, int], Expr] = field(default_factory=dict)
    riemann: dict[tuple[int, int, int, int], Expr] = field(default_factory=dict)
    vacuum: bool = False
    scalar_abs: Expr | None = None

    def has_components(self) -> bool:
        return self.scalar is not None or bool(self.ricci) or bool(self.riemann)

    def empty(self) -> bool:
        return not (self.has_components() or self.vacuum or self.scalar_abs is not None)


@dataclass
class CatalogEntry:
    class_id: str
    case: int
    metric: Metric
    generators: list[Generator]
    expected_dimension: int
    expected_integrals: dict[str, Expr]
    expected_commutators: list[tuple[str, str, dict[str, Expr]]]
    commutators_complete: bool
    curvature_ref: CurvatureReference
    notes: list[str]

    @property
    def entry_id(self) -> str:
        return f"{self.class_id}/{self.case}"

    def generator(self, name: str) -> Generator:
        for g in self.generators:
            if g.name == name:
                return g
        raise CatalogError(f"{self.entry_id}: no generator named {name!r}")

    def killing_candidates(self) -> list[Generator]:
        from ..expr import ZERO, free_symbols

        out = []
        for g in self.generators:
            if canonical(g.xi) is ZERO and canonical(g.gauge) is ZERO and all(
                "s" not in free_symbols(canonical(c)) for c in g.eta
            ):
                out.append(g)
        return out


def catalog_root() -> Path:
    """Bundled data directory, overridable via NOETHER_CATALOG_DIR."""
    override = os.environ.get("NOETHER_CATALOG_DIR")
    if override:
        return Path(override)
    return Path(resources.files("noethersphere.catalog") / "data")


def load_catalog(root: str | Path | None = None) -> list[CatalogEntry]:
    base = Path(root) if root is not None else catalog_root()
    if not base.is_dir():
        raise CatalogError(f"catalog directory {base} does not exist")
    entries: list[CatalogEntry] = []
    for class_id in CLASS_IDS:
        class_dir = base / class_id
        if not class_dir.is_dir():
            continue
        for case_dir in sorted(class_dir.iterdir(), key=lambda p: p.name):
            if case_dir.is_dir():
                entries.append(load_entry(class_id, case_dir))
    if not entries:
        raise CatalogError(f"no catalog entries under {base}")
    return entries


def load_entry(class_id: str, case_dir: Path) -> CatalogEntry:
    try:
        case = int(case_dir.name)
    except ValueError:
        raise CatalogError(f"case directory {case_dir} is not numbered") from None
    where = f"{class_id}/{case}"
    try:
        metric = parse_metric_file(case_dir / "metric.mtr")
        generators = parse_generator_file(case_dir / "generators.gen")
    except (MetricError, ParseError, OSError) as exc:
        raise CatalogError(f"{where}: {exc}") from exc
    expected = _parse_expected(case_dir / "expected.txt", where)
    names = [g.name for g in generators]
    if len(set(names)) != len(names):
        raise CatalogError(f"{where}: duplicate generator names")
    for gen_name in expected["integrals"]:
        if gen_name not in names:
            raise CatalogError(f"{where}: integral for unknown generator {gen_name!r}")
    entry = CatalogEntry(
        class_id=class_id,
        case=case,
        metric=metric,
        generators=generators,
        expected_dimension=expected["dimension"],
        expected_integrals=expected["integrals"],
        expected_commutators=expected["commutators"],
        commutators_complete=expected["complete"],
        curvature_ref=expected["curvature"],
        notes=expected["notes"],
    )
    if entry.expected_dimension != len(generators):
        raise CatalogError(
            f"{where}: generator count {len(generators)} != expected dimension {entry.expected_dimension}"
        )
    _require_minimal_five(entry)
    return entry


_MINIMAL = ("Y0", "X0", "X1", "X2", "X3")


def _require_minimal_five(entry: CatalogEntry) -> None:
    missing = [n for n in _MINIMAL if n not in {g.name for g in entry.generators}]
    if missing:
        raise CatalogError(f"{entry.entry_id}: missing minimal generators {missing}")


def _parse_expected(path: Path, where: str) -> dict:
    out = {
        "dimension": None,
        "integrals": {},
        "commutators": [],
        "complete": False,
        "curvature": CurvatureReference(),
        "notes": [],
    }
    try:
        text = path.read_text()
    except OSError as exc:
        raise CatalogError(f"{where}: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise CatalogError(f"{where}:{lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        try:
            _apply_expected_key(out, key, value)
        except (ParseError, ValueError) as exc:
            raise CatalogError(f"{where}:{lineno}: {exc}") from exc
    if out["dimension"] is None:
        raise CatalogError(f"{where}: expected.txt missing 'dimension'")
    return out


def _apply_expected_key(out: dict, key: str, value: str) -> None:
    if key == "dimension":
        out["dimension"] = int(value)
    elif key == "commutators_complete":
        out["complete"] = value.lower() in ("true", "yes", "1")
    elif key == "note":
        out["notes"].append(value)
    elif key.startswith("integral."):
        out["integrals"][key[len("integral."):]] = canonical(parse(value))
    elif key.startswith("commutator."):
        _, a, b = key.split(".")
        out["commutators"].append((a, b, _parse_combination(value)))
    elif key == "curvature.vacuum":
        out["curvature"].vacuum = value.lower() in ("true", "yes", "1")
    elif key == "curvature.scalar":
        out["curvature"].scalar = canonical(parse(value))
    elif key == "curvature.scalar_abs":
        out["curvature"].scalar_abs = canonical(parse(value))
    elif key.startswith("curvature.ricci."):
        idx = key.rsplit(".", 1)[1]
        if len(idx) != 2:
            raise ValueError(f"bad Ricci index {idx!r}")
        out["curvature"].ricci[(int(idx[0]), int(idx[1]))] = canonical(parse(value))
    elif key.startswith("curvature.riemann."):
        idx = key.rsplit(".", 1)[1]
        if len(idx) != 4:
            raise ValueError(f"bad Riemann index {idx!r}")
        out["curvature"].riemann[tuple(int(c) for c in idx)] = canonical(parse(value))
    else:
        raise ValueError(f"unknown key {key!r}")


def _parse_combination(value: str) -> dict[str, Expr]:
    """Parse ``c1*NAME1 + c2*NAME2`` (or ``NAME``, ``-NAME``, ``0``)."""
    value = value.strip()
    out: dict[str, Expr] = {}
    if value == "0":
        return out
    for piece in _split_terms(value):
        piece = piece.strip()
        sign = ""
        if piece.startswith("-"):
            sign = "-"
            piece = piece[1:].strip()
        if "*" in piece:
            coeff_text, _, name = piece.rpartition("*")
            coeff = canonical(parse(f"{sign}({coeff_text})"))
        else:
            name = piece
            coeff = canonical(parse(sign + "1"))
        name = name.strip()
        if not name or name[0] not in "XYGPK":
            raise ValueError(f"bad generator name {name!r} in combination")
        out[name] = coeff
    return out


def _split_terms(value: str) -> list[str]:
    terms, depth, start = [], 0, 0
    for i, ch in enumerate(value):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch == "+" and depth == 0 and i > start:
            terms.append(value[start:i])
            start = i + 1
    terms.append(value[start:])
    return terms
