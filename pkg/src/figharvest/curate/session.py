"""Event-sourced curation sessions.

A session starts from machine labels and accumulates an append-only log
of human edits. The materialized label state is always the left fold of
the log over the base labels; undo appends the inverse op rather than
truncating, so the audit trail is complete. A session is locked once a
second, distinct actor verifies it.
"""

import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Iterator, Optional, Union

from figharvest.geometry import BBox
from figharvest.labels import LabelClass, LabelSource, RegionLabel

PathLike = Union[str, Path]

SNAPSHOT_EVERY = 200


class EditError(ValueError):
    """Rejected edit: locked session, bad reference, bounds, or sequence."""


class SessionStatus(str, Enum):
    UNREVIEWED = "unreviewed"
    PASS1_DONE = "pass1_done"
    VERIFIED = "verified"

    def __str__(self) -> str:
        return self.value


class EditKind(str, Enum):
    ADD = "add"
    REMOVE = "remove"
    MOVE = "move"
    RESIZE = "resize"
    RELABEL = "relabel"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True, slots=True)
class EditOp:
    """One edit. Payload fields are kind-specific; unused ones stay None."""

    kind: EditKind
    page_id: str
    actor: str
    sequence: int
    label: Optional[RegionLabel] = None
    label_id: Optional[str] = None
    dx: float = 0.0
    dy: float = 0.0
    bbox: Optional[BBox] = None
    cls: Optional[LabelClass] = None

    def target_id(self) -> str:
        if self.kind == EditKind.ADD:
            assert self.label is not None
            return self.label.label_id
        assert self.label_id is not None
        return self.label_id

    def to_record(self) -> dict[str, Any]:
        rec: dict[str, Any] = {
            "kind": self.kind.value,
            "page_id": self.page_id,
            "actor": self.actor,
            "sequence": self.sequence,
        }
        if self.kind == EditKind.ADD:
            rec["label"] = self.label.to_record()
            return rec
        rec["label_id"] = self.label_id
        if self.kind == EditKind.MOVE:
            rec["dx"] = self.dx
            rec["dy"] = self.dy
        elif self.kind == EditKind.RESIZE:
            rec["bbox"] = [self.bbox.x_min, self.bbox.y_min, self.bbox.x_max, self.bbox.y_max]
        elif self.kind == EditKind.RELABEL:
            rec["class"] = self.cls.value
        return rec

    @classmethod
    def from_record(cls, rec: dict[str, Any]) -> "EditOp":
        kind = EditKind(rec["kind"])
        common = dict(kind=kind, page_id=str(rec["page_id"]), actor=str(rec["actor"]),
                      sequence=int(rec["sequence"]))
        if kind == EditKind.ADD:
            return cls(label=RegionLabel.from_record(rec["label"]), **common)
        label_id = str(rec["label_id"])
        if kind == EditKind.MOVE:
            return cls(label_id=label_id, dx=float(rec["dx"]), dy=float(rec["dy"]), **common)
        if kind == EditKind.RESIZE:
            return cls(label_id=label_id, bbox=BBox(*rec["bbox"]), **common)
        if kind == EditKind.RELABEL:
            return cls(label_id=label_id, cls=LabelClass(rec["class"]), **common)
        return cls(label_id=label_id, **common)


def _apply_to_state(state: dict[str, dict[str, RegionLabel]], op: EditOp,
                    page_size: tuple[int, int]) -> None:
    """Apply one validated-or-die op to a mutable {page: {id: label}} map."""
    page = state.get(op.page_id)
    if page is None:
        raise EditError(f"unknown page '{op.page_id}'")
    width, height = page_size

    def check_bounds(bbox: BBox) -> None:
        if not bbox.within_page(width, height):
            raise EditError(
                f"bbox out of bounds: ({bbox.x_min}, {bbox.y_min}, "
                f"{bbox.x_max}, {bbox.y_max}) on {width}x{height} page")

    if op.kind == EditKind.ADD:
        assert op.label is not None
        if op.label.label_id in page:
            raise EditError(f"duplicate label '{op.label.label_id}' on page '{op.page_id}'")
        check_bounds(op.label.bbox)
        page[op.label.label_id] = op.label
        return

    current = page.get(op.label_id or "")
    if current is None:
        raise EditError(f"unknown label '{op.label_id}' on page '{op.page_id}'")

    if op.kind == EditKind.REMOVE:
        del page[op.label_id]
    elif op.kind == EditKind.MOVE:
        try:
            moved = current.moved(op.dx, op.dy)
        except ValueError as exc:
            raise EditError(f"move pushes label '{op.label_id}' out of bounds: "
                            f"{exc}") from exc
        check_bounds(moved.bbox)
        page[op.label_id] = _as_human(moved)
    elif op.kind == EditKind.RESIZE:
        assert op.bbox is not None
        check_bounds(op.bbox)
        page[op.label_id] = _as_human(current.resized(op.bbox))
    elif op.kind == EditKind.RELABEL:
        assert op.cls is not None
        page[op.label_id] = _as_human(current.relabeled(op.cls))


def _as_human(label: RegionLabel) -> RegionLabel:
    if label.source == LabelSource.HUMAN:
        return label
    return RegionLabel(label_id=label.label_id, bbox=label.bbox, cls=label.cls,
                       source=LabelSource.HUMAN, category=label.category)


@dataclass(slots=True)
class CurationSession:
    """One document's labels, edit log, and review status."""

    doc_id: str
    page_size: tuple[int, int]
    base: dict[str, list[RegionLabel]]
    log: list[EditOp] = field(default_factory=list)
    status: SessionStatus = SessionStatus.UNREVIEWED
    pass1_actor: Optional[str] = None
    raster_dir: Optional[str] = None
    year: Optional[int] = None
    _current: dict[str, dict[str, RegionLabel]] = field(default_factory=dict, repr=False)

    def __post_init__(self) -> None:
        if not self._current:
            self._current = {pid: {lab.label_id: lab for lab in labs}
                             for pid, labs in self.base.items()}

    @property
    def sequence(self) -> int:
        return len(self.log)

    @property
    def page_ids(self) -> list[str]:
        return list(self.base.keys())

    def labels_for(self, page_id: str) -> list[RegionLabel]:
        if page_id not in self._current:
            raise EditError(f"unknown page '{page_id}'")
        return list(self._current[page_id].values())

    def current_labels(self) -> dict[str, list[RegionLabel]]:
        return {pid: list(page.values()) for pid, page in self._current.items()}

    def apply(self, op: EditOp) -> None:
        """Validate and apply one op; the log grows by exactly one entry."""
        if self.status == SessionStatus.VERIFIED:
            raise EditError("session locked")
        expected = self.sequence + 1
        if op.sequence != expected:
            raise EditError(f"stale sequence {op.sequence}, expected {expected}")
        _apply_to_state(self._current, op, self.page_size)
        self.log.append(op)

    def replay(self) -> dict[str, list[RegionLabel]]:
        """Left fold of the full log over the base labels.

        Verifies log sequences are 1..n while at it; a log that skips or
        repeats a sequence is corrupt.
        """
        state = {pid: {lab.label_id: lab for lab in labs}
                 for pid, labs in self.base.items()}
        for i, op in enumerate(self.log, start=1):
            if op.sequence != i:
                raise EditError(f"corrupt log: op {i} has sequence {op.sequence}")
            _apply_to_state(state, op, self.page_size)
        return {pid: list(page.values()) for pid, page in state.items()}

    def invert_last(self, actor: str) -> EditOp:
        """Build the inverse of the latest op (to append, never truncate)."""
        if not self.log:
            raise EditError("nothing to undo")
        last = self.log[-1]
        seq = self.sequence + 1
        if last.kind == EditKind.ADD:
            return EditOp(kind=EditKind.REMOVE, page_id=last.page_id, actor=actor,
                          sequence=seq, label_id=last.label.label_id)
        before = self._state_before(len(self.log) - 1)
        prior = before[last.page_id].get(last.label_id or "")
        if last.kind == EditKind.REMOVE:
            assert prior is not None
            return EditOp(kind=EditKind.ADD, page_id=last.page_id, actor=actor,
                          sequence=seq, label=prior)
        if last.kind == EditKind.MOVE:
            return EditOp(kind=EditKind.MOVE, page_id=last.page_id, actor=actor,
                          sequence=seq, label_id=last.label_id, dx=-last.dx, dy=-last.dy)
        if last.kind == EditKind.RESIZE:
            assert prior is not None
            return EditOp(kind=EditKind.RESIZE, page_id=last.page_id, actor=actor,
                          sequence=seq, label_id=last.label_id, bbox=prior.bbox)
        assert prior is not None
        return EditOp(kind=EditKind.RELABEL, page_id=last.page_id, actor=actor,
                      sequence=seq, label_id=last.label_id, cls=prior.cls)

    def _state_before(self, n_ops: int) -> dict[str, dict[str, RegionLabel]]:
        state = {pid: {lab.label_id: lab for lab in labs}
                 for pid, labs in self.base.items()}
        for op in self.log[:n_ops]:
            _apply_to_state(state, op, self.page_size)
        return state

    def set_status(self, new_status: SessionStatus, actor: str) -> None:
        """Advance the review state machine by one step.

        unreviewed -> pass1_done -> verified, never backward or skipping,
        and the verifier must differ from the pass-1 actor.
        """
        if self.status == SessionStatus.VERIFIED:
            raise EditError("session locked")
        if self.status == SessionStatus.UNREVIEWED:
            if new_status != SessionStatus.PASS1_DONE:
                raise EditError(f"invalid status transition {self.status} -> {new_status}")
            self.pass1_actor = actor
        else:
            if new_status != SessionStatus.VERIFIED:
                raise EditError(f"invalid status transition {self.status} -> {new_status}")
            if actor == self.pass1_actor:
                raise EditError("verification requires a second distinct actor")
        self.status = new_status


class SessionStore:
    """One append-only JSONL log per document under a root directory.

    Line types: 'base' (header with machine labels), 'op', 'status', and
    periodic 'snapshot' records. Loading replays ops over the base and
    cross-checks any snapshots encountered along the way.
    """

    def __init__(self, root: PathLike):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def _path(self, doc_id: str) -> Path:
        safe = doc_id.replace("/", "_")
        return self.root / f"{safe}.log.jsonl"

    def list_ids(self) -> list[str]:
        out = []
        for path in sorted(self.root.glob("*.log.jsonl")):
            with path.open("r", encoding="utf-8") as fh:
                first = fh.readline()
            if first:
                rec = json.loads(first)
                if rec.get("type") == "base":
                    out.append(rec["doc_id"])
        return out

    def create(self, doc_id: str, page_size: tuple[int, int],
               base: dict[str, list[RegionLabel]],
               raster_dir: Optional[str] = None,
               year: Optional[int] = None) -> CurationSession:
        path = self._path(doc_id)
        if path.exists():
            raise EditError(f"session '{doc_id}' already exists at {path}")
        session = CurationSession(doc_id=doc_id, page_size=page_size, base=base,
                                  raster_dir=raster_dir, year=year)
        header = {
            "type": "base",
            "doc_id": doc_id,
            "page_size": list(page_size),
            "raster_dir": raster_dir,
            "year": year,
            "pages": {pid: [lab.to_record() for lab in labs]
                      for pid, labs in base.items()},
        }
        with path.open("w", encoding="utf-8") as fh:
            fh.write(json.dumps(header, sort_keys=True) + "\n")
        return session

    def load(self, doc_id: str) -> CurationSession:
        path = self._path(doc_id)
        if not path.is_file():
            raise FileNotFoundError(f"no session log for '{doc_id}' at {path}")
        session: Optional[CurationSession] = None
        for line_no, rec in self._iter_records(path):
            kind = rec.get("type")
            if kind == "base":
                base = {
                    pid: [RegionLabel.from_record(r) for r in labs]
                    for pid, labs in rec["pages"].items()
                }
                session = CurationSession(
                    doc_id=rec["doc_id"],
                    page_size=(int(rec["page_size"][0]), int(rec["page_size"][1])),
                    base=base,
                    raster_dir=rec.get("raster_dir"),
                    year=rec.get("year"),
                )
            elif session is None:
                raise EditError(f"{path}:{line_no}: log does not start with a base record")
            elif kind == "op":
                session.apply(EditOp.from_record(rec))
            elif kind == "status":
                session.set_status(SessionStatus(rec["status"]), str(rec["actor"]))
            elif kind == "snapshot":
                self._check_snapshot(session, rec, f"{path}:{line_no}")
            else:
                raise EditError(f"{path}:{line_no}: unknown record type {kind!r}")
        if session is None:
            raise EditError(f"{path}: empty session log")
        return session

    @staticmethod
    def _iter_records(path: Path) -> Iterator[tuple[int, dict[str, Any]]]:
        with path.open("r", encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, start=1):
                line = line.strip()
                if line:
                    yield line_no, json.loads(line)

    @staticmethod
    def _check_snapshot(session: CurationSession, rec: dict[str, Any], ctx: str) -> None:
        if int(rec["sequence"]) != session.sequence:
            raise EditError(f"{ctx}: snapshot at sequence {rec['sequence']} "
                            f"but log is at {session.sequence}")
        materialized = {pid: [lab.to_record() for lab in labs]
                        for pid, labs in session.current_labels().items()}
        if materialized != rec["pages"]:
            raise EditError(f"{ctx}: snapshot disagrees with replayed state")

    def append_op(self, session: CurationSession, op: EditOp) -> None:
        """Apply to the in-memory session, then persist (and maybe snapshot)."""
        session.apply(op)
        path = self._path(session.doc_id)
        with path.open("a", encoding="utf-8") as fh:
            fh.write(json.dumps({"type": "op", **op.to_record()}, sort_keys=True) + "\n")
            if session.sequence % SNAPSHOT_EVERY == 0:
                snap = {
                    "type": "snapshot",
                    "sequence": session.sequence,
                    "pages": {pid: [lab.to_record() for lab in labs]
                              for pid, labs in session.current_labels().items()},
                }
                fh.write(json.dumps(snap, sort_keys=True) + "\n")

    def append_status(self, session: CurationSession, new_status: SessionStatus,
                      actor: str) -> None:
        session.set_status(new_status, actor)
        path = self._path(session.doc_id)
        with path.open("a", encoding="utf-8") as fh:
            fh.write(json.dumps({"type": "status", "status": new_status.value,
                                 "actor": actor}, sort_keys=True) + "\n")
