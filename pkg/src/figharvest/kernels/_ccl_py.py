"""Pure-Python connected-component labeling over binary masks.

Fallback for the compiled extension. Same algorithm family: horizontal
runs are extracted with numpy, then merged across adjacent rows with
union-find (8-connectivity). Component output order is raster order of
each component's first run, which both backends must reproduce bit for
bit.
"""

from __future__ import annotations

import numpy as np


def label_components(mask: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Find 8-connected components of the nonzero pixels of a 2D mask.

    Returns (boxes, counts): boxes is an (n, 4) int64 array of
    [x_min, y_min, x_max, y_max] with exclusive max edges, counts the
    per-component pixel totals. Components are ordered by first
    appearance in raster scan order.
    """
    mask = np.ascontiguousarray(mask)
    if mask.ndim != 2:
        raise ValueError(f"mask must be 2D, got shape {mask.shape}")
    height, width = mask.shape
    if height == 0 or width == 0:
        return np.zeros((0, 4), dtype=np.int64), np.zeros(0, dtype=np.int64)

    padded = np.zeros((height, width + 2), dtype=np.int8)
    padded[:, 1:-1] = mask != 0
    edges = np.diff(padded, axis=1)
    start_rows, start_cols = np.nonzero(edges == 1)
    _, end_cols = np.nonzero(edges == -1)
    n_runs = len(start_cols)
    if n_runs == 0:
        return np.zeros((0, 4), dtype=np.int64), np.zeros(0, dtype=np.int64)

    # Slice boundaries of each row's runs within the flat run arrays.
    row_ptr = np.searchsorted(start_rows, np.arange(height + 1))

    parent = list(range(n_runs))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    starts = start_cols.tolist()
    ends = end_cols.tolist()
    ptr = row_ptr.tolist()

    for row in range(1, height):
        prev_lo, prev_hi = ptr[row - 1], ptr[row]
        cur_lo, cur_hi = ptr[row], ptr[row + 1]
        if prev_lo == prev_hi or cur_lo == cur_hi:
            continue
        p = prev_lo
        for cur in range(cur_lo, cur_hi):
            c0 = starts[cur]
            c1 = ends[cur]
            # 8-connectivity: runs touch if their column spans are within
            # one pixel, i.e. prev_start <= c1 and c0 <= prev_end.
            while p < prev_hi and ends[p] < c0:
                p += 1
            k = p
            while k < prev_hi and starts[k] <= c1:
                ra, rb = find(k), find(cur)
                if ra != rb:
                    if ra < rb:
                        parent[rb] = ra
                    else:
                        parent[ra] = rb
                k += 1

    # Collect per-root extents; roots keyed by smallest run index so the
    # output order is raster order of first appearance.
    root_index: dict[int, int] = {}
    boxes: list[list[int]] = []
    counts: list[int] = []
    for run in range(n_runs):
        root = find(run)
        idx = root_index.get(root)
        row = int(start_rows[run])
        c0, c1 = starts[run], ends[run]
        if idx is None:
            root_index[root] = len(boxes)
            boxes.append([c0, row, c1, row + 1])
            counts.append(c1 - c0)
        else:
            box = boxes[idx]
            if c0 < box[0]:
                box[0] = c0
            if c1 > box[2]:
                box[2] = c1
            if row + 1 > box[3]:
                box[3] = row + 1
            counts[idx] += c1 - c0

    return np.asarray(boxes, dtype=np.int64), np.asarray(counts, dtype=np.int64)
