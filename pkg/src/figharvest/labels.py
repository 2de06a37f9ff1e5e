"""Region labels: the classed bounding boxes attached to a page."""

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Optional

from figharvest.geometry import BBox


class LabelClass(str, Enum):
    FIGURE = "figure"
    TABLE = "table"

    def __str__(self) -> str:
        return self.value


class LabelSource(str, Enum):
    MACHINE = "machine"
    HUMAN = "human"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True, slots=True)
class RegionLabel:
    """One labeled region on a page.

    label_id is opaque and unique within its page. category carries the
    source asset category for synthetic ground truth, when known.
    """

    label_id: str
    bbox: BBox
    cls: LabelClass
    source: LabelSource = LabelSource.HUMAN
    category: Optional[str] = None

    def moved(self, dx: float, dy: float) -> "RegionLabel":
        return replace(self, bbox=self.bbox.translated(dx, dy))

    def resized(self, bbox: BBox) -> "RegionLabel":
        return replace(self, bbox=bbox)

    def relabeled(self, cls: LabelClass) -> "RegionLabel":
        return replace(self, cls=cls)

    def to_record(self) -> dict[str, Any]:
        rec: dict[str, Any] = {
            "label_id": self.label_id,
            "x_min": self.bbox.x_min,
            "y_min": self.bbox.y_min,
            "x_max": self.bbox.x_max,
            "y_max": self.bbox.y_max,
            "class": self.cls.value,
            "source": self.source.value,
        }
        if self.category is not None:
            rec["category"] = self.category
        return rec

    @classmethod
    def from_record(cls, rec: dict[str, Any]) -> "RegionLabel":
        return cls(
            label_id=str(rec["label_id"]),
            bbox=BBox(rec["x_min"], rec["y_min"], rec["x_max"], rec["y_max"]),
            cls=LabelClass(rec["class"]),
            source=LabelSource(rec.get("source", "human")),
            category=rec.get("category"),
        )


@dataclass(slots=True)
class PageLabels:
    """All labels of one page, keyed by page_id."""

    page_id: str
    labels: list[RegionLabel] = field(default_factory=list)

    def by_id(self) -> dict[str, RegionLabel]:
        return {lab.label_id: lab for lab in self.labels}
