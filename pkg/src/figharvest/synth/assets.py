"""Asset pool: categorized source images that get pasted onto pages.

Twelve fixed categories; one maps to the table class, one to unlabeled
text, the rest are figures. A small built-in generator draws schematic
stand-in assets per category so the pipeline runs without any external
image collection.
"""

import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

import numpy as np
from PIL import Image, ImageDraw

from figharvest.interchange import iter_jsonl
from figharvest.labels import LabelClass

PathLike = Union[str, Path]

CATEGORIES = (
    "Table",
    "Area and circles",
    "Bars",
    "Bullets and equations",
    "Line chart",
    "Maps",
    "Matrix and parallel coordinates",
    "Multiple types",
    "Photos",
    "Point-based",
    "Scientific data visualization",
    "Tree and Networks",
)

DEFAULT_CATEGORY_WEIGHTS = {
    "Table": 232.0,
    "Area and circles": 148.0,
    "Bars": 362.0,
    "Bullets and equations": 380.0,
    "Line chart": 330.0,
    "Maps": 268.0,
    "Matrix and parallel coordinates": 62.0,
    "Multiple types": 460.0,
    "Photos": 120.0,
    "Point-based": 120.0,
    "Scientific data visualization": 262.0,
    "Tree and Networks": 134.0,
}


def class_for_category(category: str) -> Optional[LabelClass]:
    """Label class a pasted asset of this category produces.

    Table assets are tables, text assets (bullets/equations) produce no
    region label at all, everything else is a figure.
    """
    if category not in CATEGORIES:
        raise ValueError(f"unknown category {category!r}")
    if category == "Table":
        return LabelClass.TABLE
    if category == "Bullets and equations":
        return None
    return LabelClass.FIGURE


@dataclass(frozen=True, slots=True)
class Asset:
    id: str
    category: str
    path: Path
    pixel_width: int
    pixel_height: int


@dataclass(slots=True)
class AssetPool:
    assets: list[Asset] = field(default_factory=list)
    _cache: dict[Path, Image.Image] = field(default_factory=dict, repr=False)

    def __len__(self) -> int:
        return len(self.assets)

    @property
    def by_category(self) -> dict[str, list[Asset]]:
        out: dict[str, list[Asset]] = {}
        for a in self.assets:
            out.setdefault(a.category, []).append(a)
        return out

    def category_counts(self) -> dict[str, int]:
        counts = {c: 0 for c in CATEGORIES}
        for a in self.assets:
            counts[a.category] += 1
        return counts

    def load_image(self, asset: Asset) -> Image.Image:
        """Grayscale image content, cached across pastes."""
        img = self._cache.get(asset.path)
        if img is None:
            with Image.open(asset.path) as fh:
                img = fh.convert("L")
            self._cache[asset.path] = img
        return img


def load_asset_pool(manifest: PathLike) -> AssetPool:
    """Read a line-delimited {id, category, path} manifest into a pool.

    Relative asset paths resolve against the manifest's directory.
    """
    manifest = Path(manifest)
    base = manifest.parent
    assets: list[Asset] = []
    seen_ids: set[str] = set()
    for line_no, rec in iter_jsonl(manifest):
        ctx = f"{manifest}:{line_no}"
        for key in ("id", "category", "path"):
            if key not in rec:
                raise ValueError(f"{ctx}: missing field '{key}'")
        category = str(rec["category"])
        if category not in CATEGORIES:
            raise ValueError(f"{ctx}: unknown category {category!r} for asset {rec['id']!r}")
        asset_id = str(rec["id"])
        if asset_id in seen_ids:
            raise ValueError(f"{ctx}: duplicate asset id {asset_id!r}")
        seen_ids.add(asset_id)
        path = Path(rec["path"])
        if not path.is_absolute():
            path = base / path
        if not path.is_file():
            raise FileNotFoundError(f"{ctx}: asset file not found: {path}")
        with Image.open(path) as img:
            width, height = img.size
        assets.append(Asset(id=asset_id, category=category, path=path,
                            pixel_width=width, pixel_height=height))
    if not assets:
        raise ValueError(f"{manifest}: empty asset pool")
    return AssetPool(assets=assets)


def _slug(category: str) -> str:
    return re.sub(r"[^a-z0-9]+", "_", category.lower()).strip("_")


def _draw_table(img: Image.Image, rng: np.random.Generator) -> None:
    w, h = img.size
    d = ImageDraw.Draw(img)
    rows = int(rng.integers(4, 9))
    cols = int(rng.integers(3, 6))
    d.rectangle([0, 0, w - 1, h - 1], outline=0, width=2)
    d.rectangle([0, 0, w - 1, h // rows], fill=200)
    for r in range(1, rows):
        y = r * h // rows
        d.line([(0, y), (w - 1, y)], fill=0, width=1)
    for c in range(1, cols):
        x = c * w // cols
        d.line([(x, 0), (x, h - 1)], fill=0, width=1)
    cw = w // cols
    for r in range(rows):
        for c in range(cols):
            x0 = c * cw + 8
            y0 = r * (h // rows) + (h // rows) // 3
            bar_w = int(rng.integers(cw // 4, max(cw // 4 + 1, cw - 16)))
            d.rectangle([x0, y0, x0 + bar_w, y0 + 6], fill=90)


def _draw_area(img: Image.Image, rng: np.random.Generator) -> None:
    w, h = img.size
    d = ImageDraw.Draw(img)
    xs = np.linspace(0, w - 1, 12)
    ys = h - 10 - rng.integers(10, h - 30, size=12)
    pts = [(0, h - 1)] + [(float(x), float(y)) for x, y in zip(xs, ys)] + [(w - 1, h - 1)]
    d.polygon(pts, fill=150, outline=40)
    for _ in range(int(rng.integers(2, 5))):
        cx, cy = int(rng.integers(20, w - 20)), int(rng.integers(20, h - 20))
        r = int(rng.integers(8, 24))
        d.ellipse([cx - r, cy - r, cx + r, cy + r], outline=0, width=2)


def _draw_bars(img: Image.Image, rng: np.random.Generator) -> None:
    w, h = img.size
    d = ImageDraw.Draw(img)
    n = int(rng.integers(5, 11))
    bw = max(4, w // (n * 2))
    d.line([(4, h - 6), (w - 4, h - 6)], fill=0, width=2)
    d.line([(6, 4), (6, h - 4)], fill=0, width=2)
    for i in range(n):
        bh = int(rng.integers(h // 6, h - 20))
        x0 = 10 + i * 2 * bw
        d.rectangle([x0, h - 8 - bh, x0 + bw, h - 8], fill=int(rng.integers(40, 140)))


def _draw_text_block(img: Image.Image, rng: np.random.Generator) -> None:
    w, h = img.size
    d = ImageDraw.Draw(img)
    y = 6
    while y + 10 < h:
        x = 6
        if rng.random() < 0.4:
            d.ellipse([x, y + 2, x + 6, y + 8], fill=0)
            x += 14
        while x + 16 < w:
            word = int(rng.integers(14, 52))
            word = min(word, w - x - 6)
            d.rectangle([x, y, x + word, y + 9], fill=70)
            x += word + 8
        y += 18


def _draw_line_chart(img: Image.Image, rng: np.random.Generator) -> None:
    w, h = img.size
    d = ImageDraw.Draw(img)
    d.line([(6, h - 8), (w - 4, h - 8)], fill=0, width=2)
    d.line([(8, 4), (8, h - 6)], fill=0, width=2)
    for _ in range(int(rng.integers(1, 4))):
        xs = np.linspace(12, w - 8, 16)
        ys = rng.integers(8, h - 16, size=16)
        d.line([(float(x), float(y)) for x, y in zip(xs, ys)],
               fill=int(rng.integers(0, 110)), width=2)


def _draw_map(img: Image.Image, rng: np.random.Generator) -> None:
    w, h = img.size
    d = ImageDraw.Draw(img)
    cx, cy = w / 2, h / 2
    n = 14
    angles = np.linspace(0, 2 * np.pi, n, endpoint=False)
    radii = rng.uniform(0.25, 0.48, size=n)
    pts = [(cx + float(np.cos(a)) * r * w, cy + float(np.sin(a)) * r * h)
           for a, r in zip(angles, radii)]
    d.polygon(pts, fill=180, outline=30)
    for _ in range(int(rng.integers(3, 8))):
        x, y = int(rng.integers(10, w - 10)), int(rng.integers(10, h - 10))
        d.ellipse([x - 3, y - 3, x + 3, y + 3], fill=0)


def _draw_matrix(img: Image.Image, rng: np.random.Generator) -> None:
    w, h = img.size
    d = ImageDraw.Draw(img)
    if rng.random() < 0.5:
        n = int(rng.integers(5, 9))
        cw, ch = w // n, h // n
        for r in range(n):
            for c in range(n):
                d.rectangle([c * cw, r * ch, (c + 1) * cw - 2, (r + 1) * ch - 2],
                            fill=int(rng.integers(60, 230)))
    else:
        axes = int(rng.integers(4, 7))
        xs = np.linspace(10, w - 10, axes)
        for x in xs:
            d.line([(float(x), 6), (float(x), h - 6)], fill=0, width=2)
        for _ in range(int(rng.integers(6, 14))):
            ys = rng.integers(10, h - 10, size=axes)
            d.line([(float(x), float(y)) for x, y in zip(xs, ys)],
                   fill=int(rng.integers(60, 160)), width=1)


def _draw_multiple(img: Image.Image, rng: np.random.Generator) -> None:
    w, h = img.size
    top_left = Image.new("L", (max(8, w // 2 - 4), max(8, h // 2 - 4)), 255)
    _draw_bars(top_left, rng)
    img.paste(top_left, (0, 0))
    top_right = Image.new("L", (max(8, w - w // 2 - 4), max(8, h // 2 - 4)), 255)
    _draw_line_chart(top_right, rng)
    img.paste(top_right, (w // 2 + 4, 0))
    bottom = Image.new("L", (max(8, w - 8), max(8, h - h // 2 - 8)), 255)
    _draw_scatter(bottom, rng)
    img.paste(bottom, (4, h // 2 + 4))


def _draw_photo(img: Image.Image, rng: np.random.Generator) -> None:
    w, h = img.size
    noise = rng.integers(40, 210, size=(max(1, h // 4), max(1, w // 4)), dtype=np.uint8)
    block = Image.fromarray(noise, mode="L").resize((w, h), Image.Resampling.BILINEAR)
    img.paste(block, (0, 0))
    ImageDraw.Draw(img).rectangle([0, 0, w - 1, h - 1], outline=0, width=2)


def _draw_scatter(img: Image.Image, rng: np.random.Generator) -> None:
    w, h = img.size
    d = ImageDraw.Draw(img)
    d.line([(6, h - 8), (w - 4, h - 8)], fill=0, width=2)
    d.line([(8, 4), (8, h - 6)], fill=0, width=2)
    for _ in range(int(rng.integers(30, 90))):
        x, y = int(rng.integers(12, w - 8)), int(rng.integers(6, h - 12))
        d.ellipse([x - 2, y - 2, x + 2, y + 2], fill=int(rng.integers(0, 120)))


def _draw_scivis(img: Image.Image, rng: np.random.Generator) -> None:
    w, h = img.size
    d = ImageDraw.Draw(img)
    cx, cy = w / 2, h / 2
    for k in range(int(rng.integers(4, 8)), 0, -1):
        rx = w * 0.45 * k / 8 + float(rng.uniform(-6, 6))
        ry = h * 0.45 * k / 8 + float(rng.uniform(-6, 6))
        d.ellipse([cx - rx, cy - ry, cx + rx, cy + ry],
                  fill=int(40 + 24 * k), outline=20)


def _draw_tree(img: Image.Image, rng: np.random.Generator) -> None:
    w, h = img.size
    d = ImageDraw.Draw(img)
    n = int(rng.integers(7, 15))
    xs = rng.integers(12, w - 12, size=n)
    ys = rng.integers(12, h - 12, size=n)
    for i in range(1, n):
        j = int(rng.integers(0, i))
        d.line([(int(xs[i]), int(ys[i])), (int(xs[j]), int(ys[j]))], fill=80, width=1)
    for i in range(n):
        x, y = int(xs[i]), int(ys[i])
        d.ellipse([x - 6, y - 6, x + 6, y + 6], fill=200, outline=0)


_PAINTERS = {
    "Table": _draw_table,
    "Area and circles": _draw_area,
    "Bars": _draw_bars,
    "Bullets and equations": _draw_text_block,
    "Line chart": _draw_line_chart,
    "Maps": _draw_map,
    "Matrix and parallel coordinates": _draw_matrix,
    "Multiple types": _draw_multiple,
    "Photos": _draw_photo,
    "Point-based": _draw_scatter,
    "Scientific data visualization": _draw_scivis,
    "Tree and Networks": _draw_tree,
}


def generate_demo_pool(out_dir: PathLike, per_category: int = 3, seed: int = 0) -> Path:
    """Draw schematic stand-in assets for all 12 categories.

    Writes PNGs plus a manifest.jsonl into out_dir and returns the
    manifest path. Deterministic for a fixed seed.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    records = []
    for category in CATEGORIES:
        for k in range(per_category):
            w = int(rng.integers(360, 561))
            h = int(rng.integers(260, 421))
            img = Image.new("L", (w, h), 255)
            _PAINTERS[category](img, rng)
            name = f"{_slug(category)}_{k}.png"
            img.save(out_dir / name)
            records.append({"id": f"{_slug(category)}_{k}", "category": category,
                            "path": name})
    manifest = out_dir / "manifest.jsonl"
    with manifest.open("w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec) + "\n")
    return manifest
