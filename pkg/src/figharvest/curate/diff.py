"""Machine-vs-curated label comparison.

Greedy descending-IoU pairing, then each pair lands in exactly one
bucket: exact, fine_tuned, region_error, or class_error; unpaired
machine labels are false positives, unpaired curated labels false
negatives. Together the six buckets partition both label sets.
"""

from collections import Counter
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping, Optional, Sequence

from figharvest.curate.session import CurationSession
from figharvest.evaluation import EvalConfig
from figharvest.geometry import iou
from figharvest.labels import RegionLabel


@dataclass(slots=True)
class ErrorBreakdown:
    """Pair lists are (machine_id, curated_id, iou) triples."""

    exact: list[tuple[str, str, float]] = field(default_factory=list)
    fine_tuned: list[tuple[str, str, float]] = field(default_factory=list)
    region_error: list[tuple[str, str, float]] = field(default_factory=list)
    class_error: list[tuple[str, str, float]] = field(default_factory=list)
    false_positive: list[str] = field(default_factory=list)
    false_negative: list[str] = field(default_factory=list)

    BUCKETS = ("exact", "fine_tuned", "region_error", "class_error",
               "false_positive", "false_negative")

    def counts(self) -> dict[str, int]:
        return {name: len(getattr(self, name)) for name in self.BUCKETS}

    @property
    def total_machine(self) -> int:
        return (len(self.exact) + len(self.fine_tuned) + len(self.region_error)
                + len(self.class_error) + len(self.false_positive))

    @property
    def total_curated(self) -> int:
        return (len(self.exact) + len(self.fine_tuned) + len(self.region_error)
                + len(self.class_error) + len(self.false_negative))

    def extend(self, other: "ErrorBreakdown") -> None:
        for name in self.BUCKETS:
            getattr(self, name).extend(getattr(other, name))

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "counts": self.counts(),
            "pairs": {
                name: [{"machine_id": m, "curated_id": c, "iou": v}
                       for m, c, v in getattr(self, name)]
                for name in ("exact", "fine_tuned", "region_error", "class_error")
            },
            "false_positive": list(self.false_positive),
            "false_negative": list(self.false_negative),
        }


def diff_labels(machine: Sequence[RegionLabel], curated: Sequence[RegionLabel],
                cfg: Optional[EvalConfig] = None) -> ErrorBreakdown:
    """Classify one page's machine labels against its curated labels."""
    cfg = cfg or EvalConfig()
    out = ErrorBreakdown()
    pairs = []
    for mi, m in enumerate(machine):
        for ci, c in enumerate(curated):
            value = iou(m.bbox, c.bbox)
            if value > 0.0:
                pairs.append((value, mi, ci))
    pairs.sort(key=lambda t: (-t[0], t[1], t[2]))
    m_used = [False] * len(machine)
    c_used = [False] * len(curated)
    for value, mi, ci in pairs:
        if m_used[mi] or c_used[ci]:
            continue
        m_used[mi] = True
        c_used[ci] = True
        entry = (machine[mi].label_id, curated[ci].label_id, value)
        same_class = machine[mi].cls == curated[ci].cls
        if value >= cfg.iou_threshold:
            if not same_class:
                out.class_error.append(entry)
            elif value >= cfg.exact_tolerance:
                out.exact.append(entry)
            else:
                out.fine_tuned.append(entry)
        else:
            out.region_error.append(entry)
    out.false_positive.extend(m.label_id for mi, m in enumerate(machine) if not m_used[mi])
    out.false_negative.extend(c.label_id for ci, c in enumerate(curated) if not c_used[ci])
    return out


def diff_pages(machine: Mapping[str, Sequence[RegionLabel]],
               curated: Mapping[str, Sequence[RegionLabel]],
               cfg: Optional[EvalConfig] = None) -> dict[str, ErrorBreakdown]:
    """Per-page diffs; both maps must cover the same page set."""
    if set(machine) != set(curated):
        only_m = sorted(set(machine) - set(curated))[:3]
        only_c = sorted(set(curated) - set(machine))[:3]
        raise ValueError(f"page sets differ (machine-only {only_m}, curated-only {only_c})")
    return {pid: diff_labels(machine[pid], curated[pid], cfg) for pid in machine}


@dataclass(slots=True)
class SessionStats:
    """Corpus-wide aggregate over sessions, at both granularities."""

    n_sessions: int
    n_pages: int
    histogram: dict[str, int]
    effort_percent: float
    effort_pages_percent: float
    fine_tune_rate: float
    fine_tune_rate_pages: float
    per_actor_ops: dict[str, int]
    status_counts: dict[str, int]

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "n_sessions": self.n_sessions,
            "n_pages": self.n_pages,
            "histogram": dict(self.histogram),
            "effort": {
                "percent_boxes": self.effort_percent,
                "percent_pages": self.effort_pages_percent,
            },
            "fine_tune": {
                "rate_boxes": self.fine_tune_rate,
                "rate_pages": self.fine_tune_rate_pages,
            },
            "per_actor_ops": dict(self.per_actor_ops),
            "status_counts": dict(self.status_counts),
        }


def breakdown_effort(breakdown: ErrorBreakdown, relabel_only: bool = False) -> float:
    """Add-rate plus remove-rate, in percentage points, curated as truth."""
    fn = len(breakdown.false_negative)
    fp = len(breakdown.false_positive)
    ce = len(breakdown.class_error)
    if relabel_only:
        add_n, remove_n = fn, fp
    else:
        add_n, remove_n = fn + ce, fp + ce
    total_c = breakdown.total_curated
    total_m = breakdown.total_machine
    add_rate = (100.0 * add_n) / total_c if total_c > 0 else 0.0
    remove_rate = (100.0 * remove_n) / total_m if total_m > 0 else 0.0
    return add_rate + remove_rate


def session_stats(sessions: Iterable[CurationSession],
                  cfg: Optional[EvalConfig] = None) -> SessionStats:
    """Diff every session's base against its current labels and aggregate."""
    cfg = cfg or EvalConfig()
    merged = ErrorBreakdown()
    n_sessions = 0
    n_pages = 0
    touched_pages = 0
    tuned_pages = 0
    per_actor: Counter[str] = Counter()
    status_counts: Counter[str] = Counter()

    for session in sessions:
        n_sessions += 1
        status_counts[session.status.value] += 1
        per_actor.update(op.actor for op in session.log)
        current = session.current_labels()
        for page_id, base_labels in session.base.items():
            n_pages += 1
            bd = diff_labels(base_labels, current.get(page_id, []), cfg)
            if bd.false_positive or bd.false_negative or bd.region_error or bd.class_error:
                touched_pages += 1
            if bd.fine_tuned:
                tuned_pages += 1
            merged.extend(bd)

    matched = len(merged.exact) + len(merged.fine_tuned)
    return SessionStats(
        n_sessions=n_sessions,
        n_pages=n_pages,
        histogram=merged.counts(),
        effort_percent=breakdown_effort(merged),
        effort_pages_percent=(100.0 * touched_pages) / n_pages if n_pages else 0.0,
        fine_tune_rate=len(merged.fine_tuned) / matched if matched else 0.0,
        fine_tune_rate_pages=tuned_pages / n_pages if n_pages else 0.0,
        per_actor_ops=dict(per_actor),
        status_counts=dict(status_counts),
    )
