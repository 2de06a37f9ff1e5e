// Corpus overview for the curate face: one block per year, session
// cells tinted by review status.

import { statusTint } from "./palette";
import { OverviewResponse, SessionSummary } from "./types";
import { h, VNode } from "./vnode";

export function renderOverview(sessions: SessionSummary[],
                               overview: OverviewResponse,
                               onOpen?: (docId: string) => void): VNode {
  const byYear = new Map<string, SessionSummary[]>();
  for (const session of sessions) {
    const key = session.year !== null ? String(session.year) : "unknown";
    const bucket = byYear.get(key);
    if (bucket) {
      bucket.push(session);
    } else {
      byYear.set(key, [session]);
    }
  }
  const years = [...byYear.keys()].sort();
  return h("div", { attrs: { class: "overview-grid" } },
    years.map((year) => {
      const slot = overview.by_year[year];
      const summary = slot
        ? `${slot.pages} pages, ${slot.machine_labels} machine / ${slot.curated_labels} curated`
        : "";
      return h("section", {
        attrs: { class: "year-block", "data-year": year },
      }, [
        h("h3", {}, [year]),
        h("p", { attrs: { class: "year-summary" } }, [summary]),
        h("div", { attrs: { class: "session-cells" } },
          (byYear.get(year) as SessionSummary[]).map((session) =>
            h("button", {
              attrs: {
                class: "session-cell",
                type: "button",
                "data-doc-id": session.doc_id,
                "data-status": session.status,
              },
              style: { backgroundColor: statusTint(session.status) },
              on: { click: () => onOpen?.(session.doc_id) },
            }, [`${session.doc_id} (${session.n_pages}p)`]))),
      ]);
    }));
}
