// Bounding-box editor state machine. The client never materializes
// label state on its own: every gesture posts exactly one edit op and
// the next render uses the label list the server sends back.

import { ApiError, CurateClient } from "./api";
import { sourceColor } from "./palette";
import {
  EditOpRecord,
  LabelClass,
  LabelRecord,
  PagePayload,
  SessionStatus,
} from "./types";
import { findByClass, h, VNode } from "./vnode";

export interface Rect {
  x_min: number;
  y_min: number;
  x_max: number;
  y_max: number;
}

export interface DragState {
  mode: "draw" | "move" | "resize";
  labelId: string | null;
  startX: number;
  startY: number;
  curX: number;
  curY: number;
}

export interface EditorState {
  docId: string;
  pageId: string;
  pageWidth: number;
  pageHeight: number;
  sequence: number;
  status: SessionStatus;
  labels: LabelRecord[];
  pending: DragState | null;
  error: string | null;
  needsReload: boolean;
}

export const MIN_BOX_SIZE = 4;

// Corner ordering plus page clamping for drawn and resized rectangles.
export function clampRect(
  rect: Rect,
  pageWidth: number,
  pageHeight: number,
): Rect {
  let x0 = Math.min(rect.x_min, rect.x_max);
  let x1 = Math.max(rect.x_min, rect.x_max);
  let y0 = Math.min(rect.y_min, rect.y_max);
  let y1 = Math.max(rect.y_min, rect.y_max);
  x0 = Math.max(0, Math.min(x0, pageWidth - MIN_BOX_SIZE));
  y0 = Math.max(0, Math.min(y0, pageHeight - MIN_BOX_SIZE));
  x1 = Math.min(pageWidth, Math.max(x1, x0 + MIN_BOX_SIZE));
  y1 = Math.min(pageHeight, Math.max(y1, y0 + MIN_BOX_SIZE));
  return { x_min: x0, y_min: y0, x_max: x1, y_max: y1 };
}

// Clamp a drag delta so the whole box stays on the page; the server
// would reject an out-of-bounds move, so never emit one.
export function clampDelta(
  label: LabelRecord,
  dx: number,
  dy: number,
  pageWidth: number,
  pageHeight: number,
): { dx: number; dy: number } {
  const clampedDx = Math.max(-label.x_min, Math.min(dx, pageWidth - label.x_max));
  const clampedDy = Math.max(-label.y_min, Math.min(dy, pageHeight - label.y_max));
  return { dx: clampedDx, dy: clampedDy };
}

export function toggledClass(cls: LabelClass): LabelClass {
  return cls === "figure" ? "table" : "figure";
}

export class EditorSession {
  state: EditorState;

  constructor(
    private readonly client: CurateClient,
    docId: string,
    pageId: string,
    private readonly actor: string,
    pageWidth: number,
    pageHeight: number,
  ) {
    this.state = {
      docId,
      pageId,
      pageWidth,
      pageHeight,
      sequence: 0,
      status: "unreviewed",
      labels: [],
      pending: null,
      error: null,
      needsReload: false,
    };
  }

  async load(): Promise<void> {
    const payload = await this.client.pageLabels(
      this.state.docId, this.state.pageId);
    this.acceptPayload(payload);
  }

  private acceptPayload(payload: PagePayload): void {
    this.state.sequence = payload.sequence;
    this.state.status = payload.status;
    this.state.labels = payload.labels;
    this.state.error = null;
    this.state.pending = null;
    this.state.needsReload = false;
  }

  // Sequence numbers grow strictly, so deriving new ids from the next
  // sequence can never collide with an id already in the session.
  private nextLabelId(): string {
    return `h${String(this.state.sequence + 1).padStart(4, "0")}`;
  }

  private baseOp(kind: EditOpRecord["kind"]): EditOpRecord {
    return {
      kind,
      page_id: this.state.pageId,
      actor: this.actor,
      sequence: this.state.sequence + 1,
    };
  }

  private findLabel(labelId: string): LabelRecord {
    const label = this.state.labels.find((lab) => lab.label_id === labelId);
    if (!label) throw new Error(`no label '${labelId}' on this page`);
    return label;
  }

  private async post(op: EditOpRecord): Promise<boolean> {
    if (this.state.status === "verified") {
      this.state.error = "session is locked";
      return false;
    }
    try {
      const payload = await this.client.edit(this.state.docId, op);
      this.acceptPayload(payload);
      return true;
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        // someone else edited first; prompt for a fresh load
        this.state.needsReload = true;
      }
      this.state.error = err instanceof Error ? err.message : String(err);
      return false;
    }
  }

  draw(rect: Rect, cls: LabelClass = "figure"): Promise<boolean> {
    const clamped = clampRect(rect, this.state.pageWidth, this.state.pageHeight);
    const op = this.baseOp("add");
    op.label = {
      label_id: this.nextLabelId(),
      x_min: clamped.x_min,
      y_min: clamped.y_min,
      x_max: clamped.x_max,
      y_max: clamped.y_max,
      class: cls,
      source: "human",
    };
    return this.post(op);
  }

  move(labelId: string, dx: number, dy: number): Promise<boolean> {
    const label = this.findLabel(labelId);
    const clamped = clampDelta(
      label, dx, dy, this.state.pageWidth, this.state.pageHeight);
    const op = this.baseOp("move");
    op.label_id = labelId;
    op.dx = clamped.dx;
    op.dy = clamped.dy;
    return this.post(op);
  }

  resize(labelId: string, rect: Rect): Promise<boolean> {
    this.findLabel(labelId);
    const clamped = clampRect(rect, this.state.pageWidth, this.state.pageHeight);
    const op = this.baseOp("resize");
    op.label_id = labelId;
    op.bbox = [clamped.x_min, clamped.y_min, clamped.x_max, clamped.y_max];
    return this.post(op);
  }

  relabel(labelId: string): Promise<boolean> {
    const label = this.findLabel(labelId);
    const op = this.baseOp("relabel");
    op.label_id = labelId;
    op.class = toggledClass(label.class);
    return this.post(op);
  }

  remove(labelId: string): Promise<boolean> {
    this.findLabel(labelId);
    const op = this.baseOp("remove");
    op.label_id = labelId;
    return this.post(op);
  }

  async undo(): Promise<boolean> {
    try {
      const payload = await this.client.undo(this.state.docId, this.actor);
      if (payload.page_id === this.state.pageId) {
        this.acceptPayload(payload);
      } else {
        // the undone op touched another page; resync this one
        await this.load();
      }
      return true;
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        this.state.needsReload = true;
      }
      this.state.error = err instanceof Error ? err.message : String(err);
      return false;
    }
  }
}

export function renderEditor(state: EditorState, rasterUrl: string): VNode {
  const children: VNode[] = [];
  if (state.needsReload) {
    children.push(h("div", { attrs: { class: "reload-prompt" } }, [
      "another editor changed this session; reload to continue",
    ]));
  }
  if (state.error) {
    children.push(h("div", { attrs: { class: "error-banner" } }, [state.error]));
  }
  const boxes: VNode[] = state.labels.map((label) =>
    h("div", {
      attrs: {
        class: "label-box",
        "data-label-id": label.label_id,
        "data-class": label.class,
        "data-source": label.source,
        ...(label.category ? { "data-category": label.category } : {}),
      },
      style: {
        left: `${label.x_min}px`,
        top: `${label.y_min}px`,
        width: `${label.x_max - label.x_min}px`,
        height: `${label.y_max - label.y_min}px`,
        borderColor: sourceColor(label.source),
      },
    }));
  children.push(h("div", {
    attrs: { class: "page-canvas" },
    style: {
      width: `${state.pageWidth}px`,
      height: `${state.pageHeight}px`,
    },
  }, [
    h("img", { attrs: { class: "page-raster", src: rasterUrl } }),
    ...boxes,
  ]));
  children.push(h("div", { attrs: { class: "editor-toolbar" } }, [
    h("span", { attrs: { class: "session-status" } }, [state.status]),
    h("button", { attrs: { class: "undo-button" } }, ["undo"]),
  ]));
  return h("div", { attrs: { class: "editor" } }, children);
}

// Read the labels back out of a rendered tree; this is what the page
// visually shows, so tests compare it against the server's answer.
export function displayedLabels(tree: VNode): LabelRecord[] {
  return findByClass(tree, "label-box").map((node) => {
    const left = parseFloat(node.style.left);
    const top = parseFloat(node.style.top);
    const width = parseFloat(node.style.width);
    const height = parseFloat(node.style.height);
    const record: LabelRecord = {
      label_id: node.attrs["data-label-id"],
      x_min: left,
      y_min: top,
      x_max: left + width,
      y_max: top + height,
      class: node.attrs["data-class"] as LabelClass,
      source: node.attrs["data-source"] as LabelRecord["source"],
    };
    if (node.attrs["data-category"]) {
      record.category = node.attrs["data-category"];
    }
    return record;
  });
}
