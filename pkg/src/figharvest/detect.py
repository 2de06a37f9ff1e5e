"""Detector boundary: external adapters and a built-in baseline.

External detectors run as subprocesses over page rasters and hand back
predictions files; their output is schema-validated here. The baseline
is a deliberately simple ink-blob detector so the pipeline works end to
end with no ML dependency: threshold, connected components, proximity
merge, area filter.
"""

import shlex
import subprocess
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Union

import numpy as np
from PIL import Image

from figharvest.geometry import BBox
from figharvest.interchange import (
    InterchangeError,
    Prediction,
    PredictionSet,
    read_predictions_file,
)
from figharvest.kernels import label_components
from figharvest.labels import LabelClass

PathLike = Union[str, Path]


class AdapterError(ValueError):
    """External detector failed or produced invalid output."""


@dataclass(frozen=True, slots=True)
class BaselineConfig:
    """Tuning for the rule-based baseline, at 150 dpi scale."""

    ink_threshold: int = 250
    merge_distance: int = 8
    min_area: int = 4096

    def __post_init__(self) -> None:
        if not 1 <= self.ink_threshold <= 255:
            raise ValueError(f"ink_threshold must be in [1, 255], got {self.ink_threshold}")
        if self.merge_distance < 0:
            raise ValueError(f"merge_distance must be >= 0, got {self.merge_distance}")
        if self.min_area < 1:
            raise ValueError(f"min_area must be >= 1, got {self.min_area}")


def _merge_boxes(boxes: np.ndarray, counts: np.ndarray,
                 distance: int) -> tuple[np.ndarray, np.ndarray]:
    """Transitively merge boxes whose rectangle gap is <= distance.

    Gap is measured per axis between box edges (0 when projections
    overlap); two boxes are neighbors when both gaps fit.
    """
    n = len(boxes)
    if n <= 1:
        return boxes, counts
    x0, y0, x1, y1 = boxes[:, 0], boxes[:, 1], boxes[:, 2], boxes[:, 3]
    gap_x = np.maximum(x0[None, :] - x1[:, None], x0[:, None] - x1[None, :])
    gap_y = np.maximum(y0[None, :] - y1[:, None], y0[:, None] - y1[None, :])
    adjacent = (np.maximum(gap_x, 0) <= distance) & (np.maximum(gap_y, 0) <= distance)

    parent = np.arange(n)

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    src, dst = np.nonzero(np.triu(adjacent, k=1))
    for a, b in zip(src.tolist(), dst.tolist()):
        ra, rb = find(a), find(b)
        if ra != rb:
            if ra < rb:
                parent[rb] = ra
            else:
                parent[ra] = rb

    groups: dict[int, int] = {}
    merged = []
    merged_counts = []
    for i in range(n):
        root = find(i)
        slot = groups.get(root)
        if slot is None:
            groups[root] = len(merged)
            merged.append(boxes[i].copy())
            merged_counts.append(int(counts[i]))
        else:
            mb = merged[slot]
            mb[0] = min(mb[0], boxes[i, 0])
            mb[1] = min(mb[1], boxes[i, 1])
            mb[2] = max(mb[2], boxes[i, 2])
            mb[3] = max(mb[3], boxes[i, 3])
            merged_counts[slot] += int(counts[i])
    return np.array(merged, dtype=np.int64), np.array(merged_counts, dtype=np.int64)


def _load_gray(raster: Union[PathLike, Image.Image, np.ndarray]) -> np.ndarray:
    if isinstance(raster, np.ndarray):
        if raster.ndim != 2:
            raise ValueError(f"raster array must be 2D, got shape {raster.shape}")
        return raster.astype(np.uint8, copy=False)
    if isinstance(raster, Image.Image):
        return np.asarray(raster.convert("L"))
    path = Path(raster)
    try:
        with Image.open(path) as img:
            return np.asarray(img.convert("L"))
    except FileNotFoundError:
        raise
    except OSError as exc:
        raise OSError(f"unreadable raster {path}: {exc}") from exc


def baseline_detect(raster: Union[PathLike, Image.Image, np.ndarray],
                    cfg: Optional[BaselineConfig] = None) -> list[Prediction]:
    """Detect ink regions on one page.

    Every merged region above the area floor becomes a figure prediction
    (the baseline cannot tell tables apart) with confidence = fill ratio
    of ink pixels inside the region's box. Output is sorted by position.
    """
    cfg = cfg or BaselineConfig()
    gray = _load_gray(raster)
    mask = gray < cfg.ink_threshold
    boxes, counts = label_components(mask)
    if len(boxes) == 0:
        return []
    boxes, counts = _merge_boxes(boxes, counts, cfg.merge_distance)
    preds = []
    for box, ink in zip(boxes.tolist(), counts.tolist()):
        bx0, by0, bx1, by1 = box
        area = (bx1 - bx0) * (by1 - by0)
        if area < cfg.min_area:
            continue
        preds.append(Prediction(
            bbox=BBox(float(bx0), float(by0), float(bx1), float(by1)),
            cls=LabelClass.FIGURE,
            confidence=min(1.0, ink / area),
        ))
    preds.sort(key=lambda p: (p.bbox.y_min, p.bbox.x_min, p.bbox.y_max, p.bbox.x_max))
    return preds


def list_pages(pages_dir: PathLike) -> list[tuple[str, Path]]:
    """(page_id, raster path) pairs for every PNG in a corpus directory.

    Accepts either the corpus root (with a pages/ subdirectory) or the
    raster directory itself.
    """
    root = Path(pages_dir)
    if not root.is_dir():
        raise FileNotFoundError(f"pages directory not found: {root}")
    if (root / "pages").is_dir():
        root = root / "pages"
    entries = sorted(p for p in root.iterdir() if p.suffix.lower() == ".png")
    if not entries:
        raise FileNotFoundError(f"no page rasters (*.png) under {root}")
    return [(p.stem, p) for p in entries]


def detect_corpus(pages_dir: PathLike, cfg: Optional[BaselineConfig] = None,
                  workers: int = 1) -> dict[str, PredictionSet]:
    """Run the baseline over every page of a corpus."""
    cfg = cfg or BaselineConfig()
    pages = list_pages(pages_dir)

    def run_one(item: tuple[str, Path]) -> tuple[str, PredictionSet]:
        page_id, path = item
        return page_id, PredictionSet(
            page_id=page_id,
            detector_id="baseline",
            predictions=baseline_detect(path, cfg),
        )

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = dict(pool.map(run_one, pages))
    else:
        results = dict(run_one(item) for item in pages)
    return {pid: results[pid] for pid, _ in pages}


def _page_size(path: Path) -> tuple[int, int]:
    with Image.open(path) as img:
        return img.size


def validate_predictions(pred_pages: dict[str, PredictionSet],
                         page_sizes: dict[str, tuple[int, int]]) -> None:
    """Check every predicted box lies within its page bounds."""
    for page_id, pset in pred_pages.items():
        size = page_sizes.get(page_id)
        if size is None:
            raise AdapterError(f"predictions for unknown page '{page_id}'")
        width, height = size
        for i, pred in enumerate(pset.predictions):
            if not pred.bbox.within_page(width, height):
                raise AdapterError(
                    f"page '{page_id}' prediction[{i}]: bbox "
                    f"({pred.bbox.x_min}, {pred.bbox.y_min}, {pred.bbox.x_max}, "
                    f"{pred.bbox.y_max}) outside page bounds {width}x{height}")


def run_adapter(command_template: str, pages_dir: PathLike,
                workers: int = 1) -> dict[str, PredictionSet]:
    """Invoke an external detector once per page and collect its output.

    The template must contain {page} and {out} placeholders; each
    invocation gets a raster path and a scratch output path, which must
    come back as a valid predictions file for that page. Pages the
    adapter stays silent on become empty prediction sets.
    """
    if "{page}" not in command_template or "{out}" not in command_template:
        raise AdapterError("command template must contain {page} and {out} placeholders")
    pages = list_pages(pages_dir)
    sizes = {pid: _page_size(path) for pid, path in pages}
    merged: dict[str, PredictionSet] = {
        pid: PredictionSet(page_id=pid, detector_id="adapter") for pid, _ in pages
    }

    def run_one(item: tuple[str, Path]) -> dict[str, PredictionSet]:
        page_id, raster = item
        with tempfile.TemporaryDirectory(prefix="figharvest-adapter-") as scratch:
            out_path = Path(scratch) / f"{page_id}.jsonl"
            cmd = [part.replace("{page}", str(raster)).replace("{out}", str(out_path))
                   for part in shlex.split(command_template)]
            proc = subprocess.run(cmd, capture_output=True, text=True)
            if proc.returncode != 0:
                raise AdapterError(
                    f"adapter failed on page '{page_id}' (exit {proc.returncode}): "
                    f"{proc.stderr.strip() or proc.stdout.strip() or 'no output'}")
            if not out_path.is_file():
                raise AdapterError(f"adapter produced no output file for page '{page_id}'")
            try:
                return read_predictions_file(out_path)
            except InterchangeError as exc:
                raise AdapterError(f"adapter output for page '{page_id}': {exc}") from exc

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outputs = list(pool.map(run_one, pages))
    else:
        outputs = [run_one(item) for item in pages]

    for chunk in outputs:
        for page_id, pset in chunk.items():
            if page_id not in merged:
                raise AdapterError(f"adapter emitted predictions for unknown page '{page_id}'")
            target = merged[page_id]
            if target.predictions:
                target.predictions.extend(pset.predictions)
                if pset.detector_id not in target.detector_id.split("+"):
                    target.detector_id += f"+{pset.detector_id}"
            else:
                merged[page_id] = pset
    validate_predictions(merged, sizes)
    return merged
