"""Publication metadata catalog: ingestion, faceted image search in
canonical proceedings order, and per-year/venue statistics."""

from figharvest.catalog.core import (
    VENUES,
    Catalog,
    CatalogConfig,
    CatalogError,
    ImageRecord,
    ImageType,
    IngestReport,
    PaperRecord,
    Query,
    TermMode,
    ingest,
    load_catalog,
    save_catalog,
)

__all__ = [
    "VENUES",
    "Catalog",
    "CatalogConfig",
    "CatalogError",
    "ImageRecord",
    "ImageType",
    "IngestReport",
    "PaperRecord",
    "Query",
    "TermMode",
    "ingest",
    "load_catalog",
    "save_catalog",
]
