"""Compare the compiled and pure connected-component backends.

Runs both on page-sized masks (sparse rectangles, dense text-like noise,
and a worst-case checkerboard) and prints per-backend timings plus the
speedup. Fails loudly if the two backends ever disagree.

Usage: python3 benchmarks/bench_kernels.py [--repeats N]
"""

import argparse
import time

import numpy as np

from figharvest.kernels import BACKEND
from figharvest.kernels._ccl_py import label_components as label_pure

try:
    from figharvest.kernels._ccl import label_components as label_compiled
except ImportError:
    label_compiled = None


def make_masks(rng: np.random.Generator) -> dict[str, np.ndarray]:
    h, w = 1650, 1275
    sparse = np.zeros((h, w), dtype=np.uint8)
    for _ in range(12):
        y = int(rng.integers(0, h - 300))
        x = int(rng.integers(0, w - 300))
        sparse[y:y + int(rng.integers(80, 300)), x:x + int(rng.integers(80, 300))] = 1

    text = np.zeros((h, w), dtype=np.uint8)
    for row in range(120, h - 120, 21):
        col = 120
        while col < w - 200:
            width = int(rng.integers(16, 72))
            text[row:row + 11, col:col + width] = 1
            col += width + 10

    checker = np.indices((h, w)).sum(axis=0) % 2
    checker = checker.astype(np.uint8)

    noise = (rng.random((h, w)) < 0.35).astype(np.uint8)
    return {"sparse_rects": sparse, "text_lines": text,
            "checkerboard": checker, "noise_35pct": noise}


def bench(fn, mask: np.ndarray, repeats: int) -> float:
    fn(mask)
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(mask)
        best = min(best, time.perf_counter() - t0)
    return best


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    if label_compiled is None:
        print("compiled backend not available; nothing to compare")
        return 1

    rng = np.random.default_rng(0)
    masks = make_masks(rng)
    print(f"active backend at import time: {BACKEND}")
    print(f"{'mask':>14}  {'components':>10}  {'compiled':>10}  {'pure':>10}  {'speedup':>8}")
    for name, mask in masks.items():
        boxes_c, counts_c = label_compiled(mask)
        boxes_p, counts_p = label_pure(mask)
        if not (np.array_equal(boxes_c, boxes_p) and np.array_equal(counts_c, counts_p)):
            print(f"{name}: BACKEND MISMATCH")
            return 1
        t_c = bench(label_compiled, mask, args.repeats)
        t_p = bench(label_pure, mask, args.repeats)
        print(f"{name:>14}  {len(boxes_c):>10}  {t_c * 1e3:>8.2f}ms  {t_p * 1e3:>8.2f}ms  {t_p / t_c:>7.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
