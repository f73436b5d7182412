"""Machine-readable catalog of the six symmetry classes and its harness."""

from .entries import CatalogEntry, CatalogError, CurvatureReference, load_catalog, catalog_root
from .verify import (
    CatalogVerification,
    EntryVerification,
    verify_catalog,
    verify_entry,
)
from .classify import ClassificationResult, classify_metric

__all__ = [
    "CatalogEntry",
    "CatalogError",
    "CurvatureReference",
    "CatalogVerification",
    "ClassificationResult",
    "EntryVerification",
    "catalog_root",
    "classify_metric",
    "load_catalog",
    "verify_catalog",
    "verify_entry",
]
