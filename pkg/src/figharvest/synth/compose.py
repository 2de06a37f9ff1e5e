"""Page and corpus composition.

A page is a white raster onto which assets are pasted by greedy column
flow with rejection sampling, then synthetic gray-bar text fills the
leftover column space. Captions render beneath assets but are never
labeled; labels cover exactly the pasted figure/table rectangles.
Everything is a pure function of (spec, pool), so identical inputs give
byte-identical rasters and label files.
"""

import hashlib
import json
from collections import Counter
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Any, Mapping, Optional, Union

import numpy as np
from PIL import Image, ImageDraw

from figharvest.geometry import BBox
from figharvest.interchange import write_labels_file
from figharvest.labels import LabelClass, LabelSource, PageLabels, RegionLabel
from figharvest.synth.assets import (
    CATEGORIES,
    DEFAULT_CATEGORY_WEIGHTS,
    AssetPool,
    class_for_category,
)

PathLike = Union[str, Path]

MIN_RENDER_PX = 64
PLACE_RETRIES = 50
CAPTION_GAP = 10
CAPTION_HEIGHT = 12
KEEPOUT = 12
TEXT_LINE_HEIGHT = 11
TEXT_LINE_PITCH = 21


class PageTemplate(str, Enum):
    SINGLE_COLUMN = "single_column"
    DOUBLE_COLUMN = "double_column"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True, slots=True)
class PageSpec:
    """Recipe for one page.

    template None means each page draws its own from
    double_column_fraction, which is how a corpus gets its column mix.
    """

    template: Optional[PageTemplate] = None
    page_width: int = 1275
    page_height: int = 1650
    margin_top: int = 112
    margin_bottom: int = 112
    margin_left: int = 112
    margin_right: int = 112
    column_gap: int = 36
    seed: int = 0
    min_assets: int = 1
    max_assets: int = 4
    caption_probability: float = 0.9
    double_column_fraction: float = 0.6
    category_weights: Optional[Mapping[str, float]] = None

    def __post_init__(self) -> None:
        content_w = self.page_width - self.margin_left - self.margin_right
        content_h = self.page_height - self.margin_top - self.margin_bottom
        if content_w <= 0 or content_h <= 0:
            raise ValueError("margins leave no content area")
        if self.template != PageTemplate.SINGLE_COLUMN and self.column_gap >= content_w:
            raise ValueError("column_gap must be smaller than the content width")
        if not 0.0 <= self.caption_probability <= 1.0:
            raise ValueError(f"caption_probability must be in [0, 1], got {self.caption_probability}")
        if not 0.0 <= self.double_column_fraction <= 1.0:
            raise ValueError(f"double_column_fraction must be in [0, 1], got {self.double_column_fraction}")
        if not 0 <= self.min_assets <= self.max_assets:
            raise ValueError(f"need 0 <= min_assets <= max_assets, got "
                             f"{self.min_assets}..{self.max_assets}")
        if self.category_weights is not None:
            for name, value in self.category_weights.items():
                if name not in CATEGORIES:
                    raise ValueError(f"unknown category in weights: {name!r}")
                if value < 0:
                    raise ValueError(f"negative weight for {name!r}")

    def effective_weights(self) -> dict[str, float]:
        weights = dict(DEFAULT_CATEGORY_WEIGHTS)
        if self.category_weights is not None:
            weights.update(self.category_weights)
        return weights

    @property
    def content_box(self) -> tuple[int, int, int, int]:
        return (self.margin_left, self.margin_top,
                self.page_width - self.margin_right,
                self.page_height - self.margin_bottom)


@dataclass(slots=True)
class ComposedPage:
    image: Image.Image
    labels: list[RegionLabel]
    template: PageTemplate
    placed_categories: list[str]
    dropped_assets: int


def _columns(spec: PageSpec, template: PageTemplate) -> list[tuple[int, int]]:
    x0, _, x1, _ = spec.content_box
    if template == PageTemplate.SINGLE_COLUMN:
        return [(x0, x1)]
    half = (x1 - x0 - spec.column_gap) // 2
    return [(x0, x0 + half), (x1 - half, x1)]


def _overlaps(rect: tuple[int, int, int, int],
              occupied: list[tuple[int, int, int, int]], pad: int) -> bool:
    rx0, ry0, rx1, ry1 = rect
    for ox0, oy0, ox1, oy1 in occupied:
        if rx0 < ox1 + pad and ox0 < rx1 + pad and ry0 < oy1 + pad and oy0 < ry1 + pad:
            return True
    return False


def _fill_text(draw: ImageDraw.ImageDraw, spec: PageSpec, template: PageTemplate,
               occupied: list[tuple[int, int, int, int]],
               rng: np.random.Generator) -> None:
    """Render gray word bars into every free column interval."""
    _, y0, _, y1 = spec.content_box
    for col_x0, col_x1 in _columns(spec, template):
        blocks = sorted(
            (max(y0, oy0 - KEEPOUT), min(y1, oy1 + KEEPOUT))
            for ox0, oy0, ox1, oy1 in occupied
            if ox1 > col_x0 and ox0 < col_x1
        )
        free: list[tuple[int, int]] = []
        cursor = y0
        for b0, b1 in blocks:
            if b0 > cursor:
                free.append((cursor, b0))
            cursor = max(cursor, b1)
        if cursor < y1:
            free.append((cursor, y1))
        # Word gap 10 with inclusive draw coords leaves 9 clear pixels,
        # one more than the baseline detector's default merge distance,
        # so text never fuses into figure-sized blobs.
        for f0, f1 in free:
            y = f0 + 2
            while y + TEXT_LINE_HEIGHT <= f1:
                x = col_x0
                while x + 18 < col_x1:
                    word = int(rng.integers(16, 72))
                    word = min(word, col_x1 - x)
                    draw.rectangle([x, y, x + word, y + TEXT_LINE_HEIGHT], fill=85)
                    x += word + 10
                y += TEXT_LINE_PITCH


def compose_page(spec: PageSpec, pool: AssetPool) -> ComposedPage:
    """Compose one page; never fails on crowding, just drops assets.

    Placement is greedy: each asset rerolls column, scale, and position
    up to PLACE_RETRIES times looking for a spot that keeps KEEPOUT
    clearance from everything already placed (captions included), so
    emitted labels never overlap.
    """
    rng = np.random.default_rng(spec.seed)
    template = spec.template
    if template is None:
        template = (PageTemplate.DOUBLE_COLUMN
                    if rng.random() < spec.double_column_fraction
                    else PageTemplate.SINGLE_COLUMN)
    columns = _columns(spec, template)
    _, content_y0, _, content_y1 = spec.content_box
    content_h = content_y1 - content_y0

    if spec.max_assets > spec.min_assets:
        n_assets = int(rng.integers(spec.min_assets, spec.max_assets + 1))
    else:
        n_assets = spec.min_assets

    image = Image.new("L", (spec.page_width, spec.page_height), 255)
    draw = ImageDraw.Draw(image)
    labels: list[RegionLabel] = []
    occupied: list[tuple[int, int, int, int]] = []
    placed_categories: list[str] = []
    dropped = 0

    if n_assets > 0:
        by_category = pool.by_category
        weights = spec.effective_weights()
        names = [c for c in CATEGORIES if weights.get(c, 0.0) > 0 and by_category.get(c)]
        if not names:
            raise ValueError("no placeable assets: every positively-weighted "
                             "category is missing from the pool")
        probs = np.array([weights[c] for c in names], dtype=np.float64)
        probs /= probs.sum()
        chosen = rng.choice(len(names), size=n_assets, p=probs)

        for pick in chosen:
            category = names[int(pick)]
            candidates = by_category[category]
            asset = candidates[int(rng.integers(len(candidates)))]
            has_caption = bool(rng.random() < spec.caption_probability)

            # Full-width renders on a single-column page rarely leave room
            # for a second asset, so scale down harder there.
            if template == PageTemplate.SINGLE_COLUMN:
                scale_lo, scale_hi = 0.38, 0.72
            else:
                scale_lo, scale_hi = 0.65, 1.0

            placed_rect = None
            size = None
            for _ in range(PLACE_RETRIES):
                col_x0, col_x1 = columns[int(rng.integers(len(columns)))]
                col_w = col_x1 - col_x0
                target_w = int(col_w * float(rng.uniform(scale_lo, scale_hi)))
                target_h = max(1, round(target_w * asset.pixel_height / asset.pixel_width))
                if min(target_w, target_h) < MIN_RENDER_PX:
                    scale = MIN_RENDER_PX / min(target_w, target_h)
                    target_w = min(col_w, round(target_w * scale))
                    target_h = max(1, round(target_w * asset.pixel_height / asset.pixel_width))
                reserve = target_h + (CAPTION_GAP + CAPTION_HEIGHT if has_caption else 0)
                if target_w > col_w or reserve > content_h:
                    continue
                x = col_x0 + int(rng.integers(0, col_w - target_w + 1))
                y = content_y0 + int(rng.integers(0, content_h - reserve + 1))
                rect = (x, y, x + target_w, y + reserve)
                if not _overlaps(rect, occupied, KEEPOUT):
                    placed_rect = rect
                    size = (target_w, target_h)
                    break
            if placed_rect is None:
                dropped += 1
                continue

            x, y, _, _ = placed_rect
            target_w, target_h = size
            content = pool.load_image(asset).resize((target_w, target_h),
                                                    Image.Resampling.LANCZOS)
            image.paste(content, (x, y))
            if has_caption:
                # Width-capped so a caption bar always stays below the
                # baseline detector's area floor.
                bar_w = min(290, int(target_w * float(rng.uniform(0.5, 0.9))))
                bar_x = x + (target_w - bar_w) // 2
                bar_y = y + target_h + CAPTION_GAP
                draw.rectangle([bar_x, bar_y, bar_x + bar_w, bar_y + CAPTION_HEIGHT],
                               fill=50)
            occupied.append(placed_rect)
            placed_categories.append(category)
            cls = class_for_category(category)
            if cls is not None:
                labels.append(RegionLabel(
                    label_id=f"r{len(labels):03d}",
                    bbox=BBox(float(x), float(y), float(x + target_w), float(y + target_h)),
                    cls=cls,
                    source=LabelSource.HUMAN,
                    category=category,
                ))

    _fill_text(draw, spec, template, occupied, rng)
    return ComposedPage(image=image, labels=labels, template=template,
                        placed_categories=placed_categories, dropped_assets=dropped)


@dataclass(slots=True)
class CorpusManifest:
    n_pages: int
    base_seed: int
    page_width: int
    page_height: int
    category_totals: dict[str, int]
    class_totals: dict[str, int]
    dropped_assets: int
    labels_file: str
    pages_dir: str
    labels_digest: str
    page_digests: dict[str, str]

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "n_pages": self.n_pages,
            "base_seed": self.base_seed,
            "page_width": self.page_width,
            "page_height": self.page_height,
            "category_totals": dict(self.category_totals),
            "class_totals": dict(self.class_totals),
            "dropped_assets": self.dropped_assets,
            "labels_file": self.labels_file,
            "pages_dir": self.pages_dir,
            "labels_digest": self.labels_digest,
            "page_digests": dict(self.page_digests),
        }

    @classmethod
    def from_json_dict(cls, data: Mapping[str, Any]) -> "CorpusManifest":
        return cls(
            n_pages=int(data["n_pages"]),
            base_seed=int(data["base_seed"]),
            page_width=int(data["page_width"]),
            page_height=int(data["page_height"]),
            category_totals=dict(data["category_totals"]),
            class_totals=dict(data["class_totals"]),
            dropped_assets=int(data["dropped_assets"]),
            labels_file=str(data["labels_file"]),
            pages_dir=str(data["pages_dir"]),
            labels_digest=str(data["labels_digest"]),
            page_digests=dict(data["page_digests"]),
        )

    @classmethod
    def load(cls, path: PathLike) -> "CorpusManifest":
        return cls.from_json_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def compose_corpus(n_pages: int, spec_template: PageSpec, pool: AssetPool,
                   out_dir: PathLike) -> CorpusManifest:
    """Write n_pages rasters, one labels file, and a manifest.

    Page i uses seed base_seed + i, so pages are independent and any
    single page is reproducible on its own.
    """
    if n_pages < 1:
        raise ValueError(f"n_pages must be >= 1, got {n_pages}")
    out = Path(out_dir)
    pages_dir = out / "pages"
    pages_dir.mkdir(parents=True, exist_ok=True)

    all_labels: list[PageLabels] = []
    category_totals: Counter[str] = Counter()
    class_totals: Counter[str] = Counter()
    page_digests: dict[str, str] = {}
    dropped = 0

    for i in range(n_pages):
        spec_i = replace(spec_template, seed=spec_template.seed + i)
        page = compose_page(spec_i, pool)
        page_id = f"page{i:05d}"
        raster_path = pages_dir / f"{page_id}.png"
        page.image.save(raster_path)
        page_digests[page_id] = _sha256(raster_path)
        all_labels.append(PageLabels(page_id=page_id, labels=page.labels))
        category_totals.update(page.placed_categories)
        class_totals.update(lab.cls.value for lab in page.labels)
        dropped += page.dropped_assets

    labels_path = out / "labels.jsonl"
    write_labels_file(labels_path, all_labels)

    manifest = CorpusManifest(
        n_pages=n_pages,
        base_seed=spec_template.seed,
        page_width=spec_template.page_width,
        page_height=spec_template.page_height,
        category_totals={c: category_totals.get(c, 0) for c in CATEGORIES},
        class_totals={c.value: class_totals.get(c.value, 0) for c in LabelClass},
        dropped_assets=dropped,
        labels_file="labels.jsonl",
        pages_dir="pages",
        labels_digest=_sha256(labels_path),
        page_digests=page_digests,
    )
    (out / "manifest.json").write_text(
        json.dumps(manifest.to_json_dict(), indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )
    return manifest
