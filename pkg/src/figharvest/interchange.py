"""Pipeline-wide interchange formats.

Two line-delimited JSON schemas travel between stages:

labels file (ground truth or curated output), one page per line:
    {"page_id": str, "labels": [{"x_min", "y_min", "x_max", "y_max", "class"}]}

predictions file (detector output), one page per line:
    {"page_id": str, "detector_id": str,
     "predictions": [{"x_min", "y_min", "x_max", "y_max", "class", "confidence"}]}

Readers are lenient about extra keys, strict about the declared ones, and
report malformed input with file path and line number.
"""

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Iterator, Union

from figharvest.geometry import BBox
from figharvest.labels import LabelClass, LabelSource, PageLabels, RegionLabel

PathLike = Union[str, Path]


class InterchangeError(ValueError):
    """Malformed interchange data, with file/line context when known."""


@dataclass(frozen=True, slots=True)
class Prediction:
    """One detector output box."""

    bbox: BBox
    cls: LabelClass
    confidence: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence must be in [0, 1], got {self.confidence}")

    def to_record(self) -> dict[str, Any]:
        return {
            "x_min": self.bbox.x_min,
            "y_min": self.bbox.y_min,
            "x_max": self.bbox.x_max,
            "y_max": self.bbox.y_max,
            "class": self.cls.value,
            "confidence": self.confidence,
        }


@dataclass(slots=True)
class PredictionSet:
    """All predictions one detector produced for one page."""

    page_id: str
    detector_id: str
    predictions: list[Prediction] = field(default_factory=list)


def iter_jsonl(path: PathLike) -> Iterator[tuple[int, dict[str, Any]]]:
    """Yield (line_number, record) for each non-blank line of a JSONL file."""
    path = Path(path)
    with path.open("r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise InterchangeError(f"{path}:{line_no}: invalid JSON: {exc}") from exc
            if not isinstance(obj, dict):
                raise InterchangeError(f"{path}:{line_no}: expected an object, got {type(obj).__name__}")
            yield line_no, obj


def write_jsonl(path: PathLike, records: Iterable[dict[str, Any]]) -> None:
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec, separators=(", ", ": "), sort_keys=True))
            fh.write("\n")


def _require(rec: dict[str, Any], key: str, ctx: str) -> Any:
    if key not in rec:
        raise InterchangeError(f"{ctx}: missing field '{key}'")
    return rec[key]


def _parse_bbox(rec: dict[str, Any], ctx: str) -> BBox:
    vals = []
    for key in ("x_min", "y_min", "x_max", "y_max"):
        v = _require(rec, key, ctx)
        if not isinstance(v, (int, float)) or isinstance(v, bool):
            raise InterchangeError(f"{ctx}: field '{key}' must be a number, got {v!r}")
        vals.append(float(v))
    try:
        return BBox(*vals)
    except ValueError as exc:
        raise InterchangeError(f"{ctx}: invalid bbox: {exc}") from exc


def _parse_class(rec: dict[str, Any], ctx: str) -> LabelClass:
    raw = _require(rec, "class", ctx)
    try:
        return LabelClass(raw)
    except ValueError:
        raise InterchangeError(f"{ctx}: field 'class' must be one of "
                               f"{[c.value for c in LabelClass]}, got {raw!r}") from None


def read_labels_file(path: PathLike, source: LabelSource = LabelSource.HUMAN) -> dict[str, PageLabels]:
    """Load a labels file into {page_id: PageLabels}, in file order.

    Interchange labels carry no ids, so each gets a deterministic one of
    the form g0000, g0001, ... in page order.
    """
    pages: dict[str, PageLabels] = {}
    for line_no, rec in iter_jsonl(path):
        ctx = f"{Path(path)}:{line_no}"
        page_id = str(_require(rec, "page_id", ctx))
        if page_id in pages:
            raise InterchangeError(f"{ctx}: duplicate page_id '{page_id}'")
        raw_labels = _require(rec, "labels", ctx)
        if not isinstance(raw_labels, list):
            raise InterchangeError(f"{ctx}: field 'labels' must be a list")
        labels = []
        for i, lab in enumerate(raw_labels):
            lab_ctx = f"{ctx}: page '{page_id}' label[{i}]"
            if not isinstance(lab, dict):
                raise InterchangeError(f"{lab_ctx}: expected an object")
            labels.append(RegionLabel(
                label_id=f"g{i:04d}",
                bbox=_parse_bbox(lab, lab_ctx),
                cls=_parse_class(lab, lab_ctx),
                source=source,
                category=lab.get("category"),
            ))
        pages[page_id] = PageLabels(page_id=page_id, labels=labels)
    return pages


def write_labels_file(path: PathLike, pages: Iterable[PageLabels]) -> None:
    """Write pages in the canonical labels-file schema.

    Only the five declared keys are emitted per label; ids, sources, and
    categories are session-store concerns and stay out of the interchange.
    """
    def records() -> Iterator[dict[str, Any]]:
        for page in pages:
            yield {
                "page_id": page.page_id,
                "labels": [
                    {
                        "x_min": lab.bbox.x_min,
                        "y_min": lab.bbox.y_min,
                        "x_max": lab.bbox.x_max,
                        "y_max": lab.bbox.y_max,
                        "class": lab.cls.value,
                    }
                    for lab in page.labels
                ],
            }

    write_jsonl(path, records())


def read_predictions_file(path: PathLike) -> dict[str, PredictionSet]:
    """Load a predictions file into {page_id: PredictionSet}, in file order.

    Multiple lines for one page_id (e.g. two detectors) are merged; the
    detector_id of the merged set joins the distinct ids with '+'.
    """
    pages: dict[str, PredictionSet] = {}
    detector_ids: dict[str, list[str]] = {}
    for line_no, rec in iter_jsonl(path):
        ctx = f"{Path(path)}:{line_no}"
        page_id = str(_require(rec, "page_id", ctx))
        detector_id = str(_require(rec, "detector_id", ctx))
        raw_preds = _require(rec, "predictions", ctx)
        if not isinstance(raw_preds, list):
            raise InterchangeError(f"{ctx}: field 'predictions' must be a list")
        preds = []
        for i, p in enumerate(raw_preds):
            p_ctx = f"{ctx}: page '{page_id}' prediction[{i}]"
            if not isinstance(p, dict):
                raise InterchangeError(f"{p_ctx}: expected an object")
            conf = _require(p, "confidence", p_ctx)
            if not isinstance(conf, (int, float)) or isinstance(conf, bool):
                raise InterchangeError(f"{p_ctx}: field 'confidence' must be a number, got {conf!r}")
            try:
                pred = Prediction(bbox=_parse_bbox(p, p_ctx), cls=_parse_class(p, p_ctx),
                                  confidence=float(conf))
            except ValueError as exc:
                raise InterchangeError(f"{p_ctx}: {exc}") from exc
            preds.append(pred)
        if page_id in pages:
            pages[page_id].predictions.extend(preds)
            if detector_id not in detector_ids[page_id]:
                detector_ids[page_id].append(detector_id)
                pages[page_id].detector_id = "+".join(detector_ids[page_id])
        else:
            pages[page_id] = PredictionSet(page_id=page_id, detector_id=detector_id,
                                           predictions=preds)
            detector_ids[page_id] = [detector_id]
    return pages


def write_predictions_file(path: PathLike, sets: Iterable[PredictionSet]) -> None:
    def records() -> Iterator[dict[str, Any]]:
        for ps in sets:
            yield {
                "page_id": ps.page_id,
                "detector_id": ps.detector_id,
                "predictions": [p.to_record() for p in ps.predictions],
            }

    write_jsonl(path, records())


def labels_as_predictions(pages: Iterable[PageLabels],
                          detector_id: str = "identity") -> list[PredictionSet]:
    """Recast ground-truth labels as confidence-1.0 predictions."""
    return [
        PredictionSet(
            page_id=page.page_id,
            detector_id=detector_id,
            predictions=[Prediction(bbox=lab.bbox, cls=lab.cls, confidence=1.0)
                         for lab in page.labels],
        )
        for page in pages
    ]
