"""Deterministic pseudo-page generator.

Composes page rasters from a categorized asset pool and emits
pixel-accurate ground-truth labels for the pasted regions.
"""

from figharvest.synth.assets import (
    CATEGORIES,
    DEFAULT_CATEGORY_WEIGHTS,
    Asset,
    AssetPool,
    class_for_category,
    generate_demo_pool,
    load_asset_pool,
)
from figharvest.synth.compose import (
    ComposedPage,
    CorpusManifest,
    PageSpec,
    PageTemplate,
    compose_corpus,
    compose_page,
)

__all__ = [
    "CATEGORIES",
    "DEFAULT_CATEGORY_WEIGHTS",
    "Asset",
    "AssetPool",
    "class_for_category",
    "generate_demo_pool",
    "load_asset_pool",
    "ComposedPage",
    "CorpusManifest",
    "PageSpec",
    "PageTemplate",
    "compose_corpus",
    "compose_page",
]
