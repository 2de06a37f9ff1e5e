import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from figharvest.geometry import BBox
from figharvest.labels import LabelClass, RegionLabel
from figharvest.synth import PageSpec, compose_corpus, generate_demo_pool, load_asset_pool


@pytest.fixture(scope="session")
def demo_pool(tmp_path_factory):
    """A small deterministic asset pool shared across the suite."""
    root = tmp_path_factory.mktemp("assets")
    manifest = generate_demo_pool(root, per_category=2, seed=11)
    return load_asset_pool(manifest)


@pytest.fixture(scope="session")
def small_corpus(tmp_path_factory, demo_pool):
    """An 8-page composed corpus with its manifest, built once."""
    out = tmp_path_factory.mktemp("corpus")
    spec = PageSpec(seed=21)
    manifest = compose_corpus(8, spec, demo_pool, out)
    return out, manifest


def unit_box(x: float, y: float) -> BBox:
    return BBox(x, y, x + 1.0, y + 1.0)


def make_label(i: int, x: float, y: float, cls=LabelClass.FIGURE) -> RegionLabel:
    return RegionLabel(label_id=f"g{i:04d}", bbox=unit_box(x, y), cls=cls)
