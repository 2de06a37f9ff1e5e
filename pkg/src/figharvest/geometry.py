"""Axis-aligned rectangle arithmetic: areas, IoU, and exact union-area IoU.

Coordinates are real-valued page pixels, origin top-left, y growing
downward. Degenerate boxes are unconstructible; every function below can
therefore divide by areas without guarding against zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

__all__ = ["BBox", "area", "intersection_area", "iou", "union_iou"]


@dataclass(frozen=True, slots=True)
class BBox:
    """Axis-aligned rectangle with strictly positive width and height."""

    x_min: float
    y_min: float
    x_max: float
    y_max: float

    def __post_init__(self):
        coords = {}
        for name in ("x_min", "y_min", "x_max", "y_max"):
            value = getattr(self, name)
            try:
                value = float(value)
            except (TypeError, ValueError):
                raise ValueError(f"bbox {name} is not a number: {value!r}") from None
            if not math.isfinite(value) or value < 0:
                raise ValueError(f"bbox {name} must be finite and >= 0, got {value!r}")
            coords[name] = value
        if coords["x_max"] <= coords["x_min"] or coords["y_max"] <= coords["y_min"]:
            raise ValueError(
                "bbox must have positive width and height: "
                f"({coords['x_min']}, {coords['y_min']}, {coords['x_max']}, {coords['y_max']})"
            )
        for name, value in coords.items():
            object.__setattr__(self, name, value)

    @property
    def width(self) -> float:
        return self.x_max - self.x_min

    @property
    def height(self) -> float:
        return self.y_max - self.y_min

    @property
    def area(self) -> float:
        return self.width * self.height

    def translated(self, dx: float, dy: float) -> "BBox":
        return BBox(self.x_min + dx, self.y_min + dy, self.x_max + dx, self.y_max + dy)

    def within_page(self, page_width: float, page_height: float) -> bool:
        return 0 <= self.x_min and 0 <= self.y_min and self.x_max <= page_width and self.y_max <= page_height

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.x_min, self.y_min, self.x_max, self.y_max)


def area(b: BBox) -> float:
    """Area of a box; strictly positive by construction."""
    return b.area


def intersection_area(a: BBox, b: BBox) -> float:
    """Overlap area of two boxes, 0.0 when disjoint or merely touching."""
    ox = min(a.x_max, b.x_max) - max(a.x_min, b.x_min)
    if ox <= 0:
        return 0.0
    oy = min(a.y_max, b.y_max) - max(a.y_min, b.y_min)
    if oy <= 0:
        return 0.0
    return ox * oy


def iou(a: BBox, b: BBox) -> float:
    """Intersection over union of two boxes, in [0, 1]; 1.0 iff a == b."""
    inter = intersection_area(a, b)
    if inter == 0.0:
        return 0.0
    return inter / (a.area + b.area - inter)


def union_iou(parts: Iterable[BBox], target: BBox) -> float:
    """IoU between the union of ``parts`` and ``target``, computed exactly.

    Union areas come from coordinate compression over the distinct x and y
    coordinates of all boxes, so overlapping parts are never double counted.
    Lets a region that was detected as several boxes be credited jointly.
    """
    boxes = list(parts)
    if not boxes:
        raise ValueError("empty region set")

    xs = sorted({b.x_min for b in boxes} | {b.x_max for b in boxes} | {target.x_min, target.x_max})
    ys = sorted({b.y_min for b in boxes} | {b.y_max for b in boxes} | {target.y_min, target.y_max})
    xs_arr = np.asarray(xs, dtype=np.float64)
    ys_arr = np.asarray(ys, dtype=np.float64)

    covered = np.zeros((len(ys) - 1, len(xs) - 1), dtype=bool)
    for b in boxes:
        i0 = int(np.searchsorted(xs_arr, b.x_min))
        i1 = int(np.searchsorted(xs_arr, b.x_max))
        j0 = int(np.searchsorted(ys_arr, b.y_min))
        j1 = int(np.searchsorted(ys_arr, b.y_max))
        covered[j0:j1, i0:i1] = True

    cell_areas = np.outer(np.diff(ys_arr), np.diff(xs_arr))
    parts_area = float(cell_areas[covered].sum())

    ti0 = int(np.searchsorted(xs_arr, target.x_min))
    ti1 = int(np.searchsorted(xs_arr, target.x_max))
    tj0 = int(np.searchsorted(ys_arr, target.y_min))
    tj1 = int(np.searchsorted(ys_arr, target.y_max))
    in_target = covered[tj0:tj1, ti0:ti1]
    inter = float(cell_areas[tj0:tj1, ti0:ti1][in_target].sum())

    union = parts_area + target.area - inter
    return inter / union
