"""Detection grading.

Matches predictions to ground truth per page at an IoU threshold, with
optional composite credit when several boxes jointly cover one region,
then aggregates precision / recall / F1, a manual-effort estimate, and
fine-tune rates.

Matching is greedy in descending IoU order. Greedy can fall short of the
optimal assignment on adversarial layouts, so on small pages (at most 6
boxes per side, composite credit off) every page is cross-checked against
an exhaustive maximum-matching oracle and any gap is recorded in the
report rather than silently accepted.
"""

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Mapping, Optional, Sequence, Union

from figharvest.geometry import intersection_area, iou, union_iou
from figharvest.interchange import Prediction, PredictionSet
from figharvest.labels import PageLabels, RegionLabel

_ORACLE_MAX_BOXES = 6


@dataclass(frozen=True, slots=True)
class EvalConfig:
    """Knobs for the matcher.

    class_strict: a prediction with enough overlap but the wrong class is
    a class error, not a match. exact_tolerance: matches below this IoU
    still need a human touch-up and count toward the fine-tune rate.
    """

    iou_threshold: float = 0.8
    allow_multibox: bool = True
    class_strict: bool = True
    exact_tolerance: float = 0.995

    def __post_init__(self) -> None:
        if not 0.0 < self.iou_threshold <= 1.0:
            raise ValueError(f"iou_threshold must be in (0, 1], got {self.iou_threshold}")
        if not 0.0 < self.exact_tolerance <= 1.0:
            raise ValueError(f"exact_tolerance must be in (0, 1], got {self.exact_tolerance}")


@dataclass(frozen=True, slots=True)
class Match:
    """One credited ground-truth region and the prediction(s) covering it."""

    gt_id: str
    pred_ids: tuple[int, ...]
    iou: float
    multibox: bool = False


@dataclass(frozen=True, slots=True)
class ClassError:
    """Prediction with sufficient IoU on a region of the other class."""

    gt_id: str
    pred_id: int
    iou: float


@dataclass(slots=True)
class PageMatchResult:
    matches: list[Match] = field(default_factory=list)
    false_positives: list[int] = field(default_factory=list)
    false_negatives: list[str] = field(default_factory=list)
    class_errors: list[ClassError] = field(default_factory=list)
    n_gts: int = 0
    n_preds: int = 0
    divergence: Optional[dict[str, int]] = None

    def to_record(self) -> dict[str, Any]:
        rec: dict[str, Any] = {
            "matches": [
                {"gt_id": m.gt_id, "pred_ids": list(m.pred_ids),
                 "iou": m.iou, "multibox": m.multibox}
                for m in self.matches
            ],
            "false_positives": list(self.false_positives),
            "false_negatives": list(self.false_negatives),
            "class_errors": [
                {"gt_id": c.gt_id, "pred_id": c.pred_id, "iou": c.iou}
                for c in self.class_errors
            ],
            "n_gts": self.n_gts,
            "n_preds": self.n_preds,
        }
        if self.divergence is not None:
            rec["divergence"] = dict(self.divergence)
        return rec


def _max_bipartite_tp(adjacency: Sequence[Sequence[int]], n_preds: int) -> int:
    """Size of a maximum matching (Kuhn's augmenting paths)."""
    owner = [-1] * n_preds

    def try_augment(gi: int, seen: list[bool]) -> bool:
        for pi in adjacency[gi]:
            if not seen[pi]:
                seen[pi] = True
                if owner[pi] < 0 or try_augment(owner[pi], seen):
                    owner[pi] = gi
                    return True
        return False

    total = 0
    for gi in range(len(adjacency)):
        if try_augment(gi, [False] * n_preds):
            total += 1
    return total


def match_page(gts: Sequence[RegionLabel], preds: Sequence[Prediction],
               cfg: EvalConfig) -> PageMatchResult:
    """Partition one page's boxes into matches, FPs, FNs, and class errors.

    Phases: (1) greedy one-to-one matching over same-class pairs in
    descending IoU order; (2) composite credit for unmatched regions
    jointly covered by leftover same-class predictions; (3) class-error
    pairing of leftover cross-class pairs above the threshold. Whatever
    remains is a false positive or false negative.
    """
    thr = cfg.iou_threshold
    n_g, n_p = len(gts), len(preds)
    iou_grid = [[iou(g.bbox, p.bbox) for p in preds] for g in gts]

    def class_ok(gi: int, pi: int) -> bool:
        return (not cfg.class_strict) or gts[gi].cls == preds[pi].cls

    candidates = sorted(
        ((iou_grid[gi][pi], gi, pi)
         for gi in range(n_g) for pi in range(n_p)
         if iou_grid[gi][pi] >= thr and class_ok(gi, pi)),
        key=lambda t: (-t[0], t[1], t[2]),
    )
    gt_used = [False] * n_g
    pred_used = [False] * n_p
    matches: list[Match] = []
    for value, gi, pi in candidates:
        if not gt_used[gi] and not pred_used[pi]:
            gt_used[gi] = True
            pred_used[pi] = True
            matches.append(Match(gt_id=gts[gi].label_id, pred_ids=(pi,), iou=value))

    divergence = None
    if not cfg.allow_multibox and n_g <= _ORACLE_MAX_BOXES and n_p <= _ORACLE_MAX_BOXES:
        adjacency = [
            [pi for pi in range(n_p) if iou_grid[gi][pi] >= thr and class_ok(gi, pi)]
            for gi in range(n_g)
        ]
        optimal = _max_bipartite_tp(adjacency, n_p)
        if optimal != len(matches):
            divergence = {"greedy_tp": len(matches), "optimal_tp": optimal,
                          "n_gts": n_g, "n_preds": n_p}

    if cfg.allow_multibox:
        for gi in range(n_g):
            if gt_used[gi]:
                continue
            parts = [pi for pi in range(n_p)
                     if not pred_used[pi] and class_ok(gi, pi)
                     and intersection_area(gts[gi].bbox, preds[pi].bbox) > 0.0]
            if not parts:
                continue
            composite = union_iou([preds[pi].bbox for pi in parts], gts[gi].bbox)
            if composite >= thr:
                gt_used[gi] = True
                for pi in parts:
                    pred_used[pi] = True
                matches.append(Match(gt_id=gts[gi].label_id, pred_ids=tuple(parts),
                                     iou=composite, multibox=True))

    class_errors: list[ClassError] = []
    if cfg.class_strict:
        ce_candidates = sorted(
            ((iou_grid[gi][pi], gi, pi)
             for gi in range(n_g) for pi in range(n_p)
             if not gt_used[gi] and not pred_used[pi]
             and iou_grid[gi][pi] >= thr and gts[gi].cls != preds[pi].cls),
            key=lambda t: (-t[0], t[1], t[2]),
        )
        gt_ce = [False] * n_g
        for value, gi, pi in ce_candidates:
            if not gt_ce[gi] and not pred_used[pi]:
                gt_ce[gi] = True
                pred_used[pi] = True
                class_errors.append(ClassError(gt_id=gts[gi].label_id, pred_id=pi,
                                               iou=value))

    return PageMatchResult(
        matches=matches,
        false_positives=[pi for pi in range(n_p) if not pred_used[pi]],
        false_negatives=[gts[gi].label_id for gi in range(n_g) if not gt_used[gi]],
        class_errors=class_errors,
        n_gts=n_g,
        n_preds=n_p,
        divergence=divergence,
    )


@dataclass(slots=True)
class MatchReport:
    """Corpus-level matching outcome plus derived metrics.

    Box-granularity fields carry the headline names; page-granularity
    variants are suffixed, since add/remove effort and fine-tuning can be
    counted per box or per page and the two read very differently.
    """

    config: EvalConfig
    pages: dict[str, PageMatchResult]
    tp: int
    fp: int
    fn: int
    class_error_count: int
    precision: float
    recall: float
    f1: float
    undefined: frozenset[str]
    effort_percent: float
    fine_tune_rate: float
    effort_pages_percent: float
    fine_tune_rate_pages: float
    divergences: list[dict[str, Any]]

    def summary_line(self) -> str:
        return (f"P={self.precision:.2f} R={self.recall:.2f} "
                f"F1={self.f1:.2f} effort={_trim(self.effort_percent)}%")

    def to_json_dict(self, include_pages: bool = True) -> dict[str, Any]:
        out: dict[str, Any] = {
            "config": {
                "iou_threshold": self.config.iou_threshold,
                "allow_multibox": self.config.allow_multibox,
                "class_strict": self.config.class_strict,
                "exact_tolerance": self.config.exact_tolerance,
            },
            "counts": {
                "tp": self.tp, "fp": self.fp, "fn": self.fn,
                "class_errors": self.class_error_count,
                "pages": len(self.pages),
            },
            "metrics": {
                "precision": self.precision,
                "recall": self.recall,
                "f1": self.f1,
                "undefined": sorted(self.undefined),
            },
            "effort": {
                "percent_boxes": self.effort_percent,
                "percent_pages": self.effort_pages_percent,
            },
            "fine_tune": {
                "rate_boxes": self.fine_tune_rate,
                "rate_pages": self.fine_tune_rate_pages,
            },
            "divergences": list(self.divergences),
        }
        if include_pages:
            out["pages"] = {pid: pm.to_record() for pid, pm in self.pages.items()}
        return out

    def write_json(self, path: Union[str, Path], include_pages: bool = True) -> None:
        Path(path).write_text(
            json.dumps(self.to_json_dict(include_pages), indent=2, sort_keys=True) + "\n",
            encoding="utf-8",
        )


def _trim(value: float) -> str:
    """Render 22.0 as '22' but keep real fractions."""
    if value == int(value):
        return str(int(value))
    return f"{value:.2f}"


def _counts(pages: Mapping[str, PageMatchResult]) -> tuple[int, int, int, int]:
    tp = sum(len(pm.matches) for pm in pages.values())
    fp = sum(len(pm.false_positives) for pm in pages.values())
    fn = sum(len(pm.false_negatives) for pm in pages.values())
    ce = sum(len(pm.class_errors) for pm in pages.values())
    return tp, fp, fn, ce


def metrics(report: "MatchReport") -> tuple[float, float, float]:
    """Recompute (precision, recall, f1) from the per-page match lists."""
    tp, fp, fn, _ = _counts(report.pages)
    p, r, f1, _ = _prf(tp, fp, fn)
    return p, r, f1


def _prf(tp: int, fp: int, fn: int) -> tuple[float, float, float, frozenset[str]]:
    undefined = set()
    if tp + fp > 0:
        p = tp / (tp + fp)
    else:
        p = 0.0
        undefined.add("precision")
    if tp + fn > 0:
        r = tp / (tp + fn)
    else:
        r = 0.0
        undefined.add("recall")
    if p + r > 0:
        f1 = 2 * p * r / (p + r)
    else:
        f1 = 0.0
        undefined.add("f1")
    return p, r, f1, frozenset(undefined)


def effort_estimate(report: "MatchReport", relabel_only: bool = False) -> float:
    """Manual correction effort in percentage points.

    False-negative rate (boxes to add) plus false-positive rate (boxes to
    remove). By default a class error costs one removal plus one
    addition; with relabel_only=True it is a single in-place relabel and
    drops out of both rates.
    """
    tp, fp, fn, ce = _counts(report.pages)
    total_gt = tp + fn
    total_pred = tp + fp + ce
    if relabel_only:
        add_n, remove_n = fn - ce, fp
    else:
        add_n, remove_n = fn, fp + ce
    add_rate = (100.0 * add_n) / total_gt if total_gt > 0 else 0.0
    remove_rate = (100.0 * remove_n) / total_pred if total_pred > 0 else 0.0
    return add_rate + remove_rate


def fine_tune_rate(report: "MatchReport",
                   exact_tolerance: Optional[float] = None) -> float:
    """Fraction of matched regions whose IoU is below the exact cutoff."""
    tol = report.config.exact_tolerance if exact_tolerance is None else exact_tolerance
    matched = 0
    needs_touch = 0
    for pm in report.pages.values():
        for m in pm.matches:
            matched += 1
            if m.iou < tol:
                needs_touch += 1
    return needs_touch / matched if matched > 0 else 0.0


def aggregate(page_results: Mapping[str, PageMatchResult],
              cfg: EvalConfig) -> MatchReport:
    """Fold per-page results into a MatchReport with all derived metrics."""
    pages = dict(page_results)
    tp, fp, fn, ce = _counts(pages)
    p, r, f1, undefined = _prf(tp, fp, fn)

    n_pages = len(pages)
    touched = sum(1 for pm in pages.values()
                  if pm.false_positives or pm.false_negatives or pm.class_errors)
    tol = cfg.exact_tolerance
    tuned_pages = sum(1 for pm in pages.values()
                      if any(m.iou < tol for m in pm.matches))

    divergences = [
        {"page_id": pid, **pm.divergence}
        for pid, pm in pages.items() if pm.divergence is not None
    ]

    report = MatchReport(
        config=cfg,
        pages=pages,
        tp=tp, fp=fp, fn=fn, class_error_count=ce,
        precision=p, recall=r, f1=f1, undefined=undefined,
        effort_percent=0.0,
        fine_tune_rate=0.0,
        effort_pages_percent=(100.0 * touched) / n_pages if n_pages else 0.0,
        fine_tune_rate_pages=tuned_pages / n_pages if n_pages else 0.0,
        divergences=divergences,
    )
    report.effort_percent = effort_estimate(report)
    report.fine_tune_rate = fine_tune_rate(report)
    return report


def evaluate(gt_pages: Mapping[str, PageLabels],
             pred_pages: Mapping[str, PredictionSet],
             cfg: Optional[EvalConfig] = None) -> MatchReport:
    """Match every ground-truth page against its predictions and aggregate.

    Pages without predictions count their regions as false negatives.
    Predictions for pages absent from the ground truth are a validation
    error: the detector claims pages the corpus does not have.
    """
    cfg = cfg or EvalConfig()
    unknown = [pid for pid in pred_pages if pid not in gt_pages]
    if unknown:
        raise ValueError(
            f"predictions reference unknown page_ids: {', '.join(sorted(unknown)[:5])}"
            + (" ..." if len(unknown) > 5 else ""))
    results: dict[str, PageMatchResult] = {}
    for page_id, gt in gt_pages.items():
        pred_set = pred_pages.get(page_id)
        preds: list[Prediction] = pred_set.predictions if pred_set else []
        results[page_id] = match_page(gt.labels, preds, cfg)
    return aggregate(results, cfg)
