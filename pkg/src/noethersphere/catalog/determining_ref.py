"""Comparison of the generated determining system against the bundled
reference listing (which preserves the source's defective slots)."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from ..expr import parse, strip_invertible
from ..noether import DeterminingSystem
from .entries import catalog_root


@dataclass
class DeterminingComparison:
    n_generated: int
    matched: list[str] = field(default_factory=list)       # reference lines matched
    discrepancies: list[str] = field(default_factory=list)  # reference lines unmatched

    @property
    def n_reference(self) -> int:
        return len(self.matched) + len(self.discrepancies)

    def as_text(self) -> str:
        lines = [f"generated equations: {self.n_generated}",
                 f"reference lines matched: {len(self.matched)}/{self.n_reference}"]
        for line in self.discrepancies:
            lines.append(f"  unmatched reference equation: {line}")
        return "\n".join(lines) + "\n"


def load_reference_lines(path: str | Path | None = None) -> list[str]:
    ref = Path(path) if path else catalog_root() / "determining_reference.txt"
    out = []
    for raw in ref.read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            out.append(line)
    return out


def compare_with_reference(ds: DeterminingSystem, path: str | Path | None = None) -> DeterminingComparison:
    """Match each reference equation against a generated one up to an
    overall invertible factor; unmatched lines are the logged discrepancy
    list (the source's typo slots are expected there).
    """
    generated = {strip_invertible(eq) for eq, _ in ds.nonredundant()}
    cmp = DeterminingComparison(n_generated=len(generated))
    for line in load_reference_lines(path):
        lhs = line.rsplit("=", 1)[0].strip()
        normal = strip_invertible(parse(lhs, allow_unknowns=True))
        if normal in generated:
            cmp.matched.append(line)
        else:
            cmp.discrepancies.append(line)
    return cmp
