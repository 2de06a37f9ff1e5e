// Faceted gallery over the catalog API: query panel, one of three
// layouts, venue-colored frames, and a detail panel per image.

import { brickWall, paperGroups, timelineGroups } from "./layout";
import { venueFrameColor, VENUE_COLORS } from "./palette";
import { ImageHit, QueryState, Venue, VENUES } from "./types";
import { h, VNode } from "./vnode";

export interface NavigatorActions {
  onSelect?: (hit: ImageHit) => void;
  onToggleCaption?: () => void;
  onQueryChange?: (query: QueryState) => void;
}

export interface NavigatorState {
  query: QueryState;
  // null means "no search has completed yet"; an error keeps the last
  // good results on screen underneath the banner.
  results: ImageHit[] | null;
  error: string | null;
  selected: ImageHit | null;
  captionShown: boolean;
}

const ROW_HEIGHT = 160;
const GALLERY_WIDTH = 1200;
const DEFAULT_ASPECT = 4 / 3;

function imageCard(hit: ImageHit, actions: NavigatorActions,
                   style: Record<string, string> = {}): VNode {
  return h("figure", {
    attrs: {
      class: "image-card",
      "data-image-id": hit.image_id,
      "data-venue": hit.venue,
      "data-type": hit.type,
    },
    style: { ...style, borderColor: venueFrameColor(hit.venue) },
    on: { click: () => actions.onSelect?.(hit) },
  }, [
    h("img", {
      attrs: {
        class: "thumb",
        src: hit.thumbnail_ref ?? "",
        alt: `${hit.paper_title} (${hit.image_id})`,
        loading: "lazy",
      },
    }),
  ]);
}

function brickWallGallery(hits: ImageHit[], actions: NavigatorActions): VNode {
  const layout = brickWall(
    hits.map((hit) => ({ id: hit.image_id, aspect: DEFAULT_ASPECT })),
    GALLERY_WIDTH, ROW_HEIGHT);
  const byId = new Map(hits.map((hit) => [hit.image_id, hit]));
  const cells: VNode[] = [];
  for (const row of layout.rows) {
    for (const placed of row) {
      const hit = byId.get(placed.id) as ImageHit;
      cells.push(imageCard(hit, actions, {
        position: "absolute",
        left: `${placed.x}px`,
        top: `${placed.y}px`,
        width: `${placed.width}px`,
        height: `${placed.height}px`,
      }));
    }
  }
  return h("div", {
    attrs: { class: "gallery brick-wall" },
    style: { position: "relative", height: `${layout.height}px` },
  }, cells);
}

function timelineGallery(hits: ImageHit[], actions: NavigatorActions): VNode {
  const groups = timelineGroups(hits);
  return h("div", { attrs: { class: "gallery timeline" } },
    groups.map((group) => h("section", {
      attrs: { class: "year-pile", "data-year": String(group.year) },
    }, [
      h("h3", {}, [String(group.year)]),
      h("div", { attrs: { class: "pile" } },
        group.items.map((hit) => imageCard(hit, actions))),
    ])));
}

function paperListGallery(hits: ImageHit[], actions: NavigatorActions): VNode {
  const groups = paperGroups(hits);
  return h("div", { attrs: { class: "gallery paper-list" } },
    groups.map((group) => h("section", {
      attrs: { class: "paper-row", "data-doi": group.doi },
    }, [
      h("h3", { attrs: { class: "paper-title" } },
        [`${group.title} (${group.venue} ${group.year})`]),
      h("div", { attrs: { class: "paper-images" } },
        group.items.map((hit) => imageCard(hit, actions))),
    ])));
}

export function renderVenueLegend(): VNode {
  return h("div", { attrs: { class: "venue-legend" } },
    VENUES.map((venue: Venue) => h("span", {
      attrs: { class: "legend-entry", "data-venue": venue },
      style: { borderColor: VENUE_COLORS[venue] },
    }, [venue])));
}

export function renderQueryPanel(query: QueryState,
                                 actions: NavigatorActions = {}): VNode {
  const change = (patch: Partial<QueryState>) =>
    actions.onQueryChange?.({ ...query, ...patch });
  return h("form", { attrs: { class: "query-panel" } }, [
    h("input", {
      attrs: { class: "terms-input", type: "text", value: query.terms },
      on: { input: (event) => change({ terms: readValue(event) }) },
    }),
    h("input", {
      attrs: { class: "authors-input", type: "text", value: query.authors },
      on: { input: (event) => change({ authors: readValue(event) }) },
    }),
    h("div", { attrs: { class: "venue-checkboxes" } },
      VENUES.map((venue) => h("label", {}, [
        h("input", {
          attrs: {
            type: "checkbox",
            value: venue,
            ...(query.venues.includes(venue) ? { checked: "checked" } : {}),
          },
          on: {
            change: () => {
              const next = query.venues.includes(venue)
                ? query.venues.filter((v) => v !== venue)
                : [...query.venues, venue];
              change({ venues: next });
            },
          },
        }),
        venue,
      ]))),
    h("select", {
      attrs: { class: "type-select", value: query.imageType },
      on: { change: (event) => change({ imageType: readValue(event) as QueryState["imageType"] }) },
    }, [
      h("option", { attrs: { value: "both" } }, ["figures and tables"]),
      h("option", { attrs: { value: "figure" } }, ["figures"]),
      h("option", { attrs: { value: "table" } }, ["tables"]),
    ]),
    h("select", {
      attrs: { class: "layout-select", value: query.layout },
      on: { change: (event) => change({ layout: readValue(event) as QueryState["layout"] }) },
    }, [
      h("option", { attrs: { value: "brick_wall" } }, ["brick wall"]),
      h("option", { attrs: { value: "timeline" } }, ["timeline"]),
      h("option", { attrs: { value: "paper_list" } }, ["paper list"]),
    ]),
  ]);
}

function readValue(event: unknown): string {
  const target = (event as { target?: { value?: string } })?.target;
  return target?.value ?? "";
}

function detailPanel(state: NavigatorState, actions: NavigatorActions): VNode {
  const hit = state.selected as ImageHit;
  const children: Array<VNode | string> = [
    h("h2", { attrs: { class: "detail-title" } }, [hit.paper_title]),
    h("p", { attrs: { class: "detail-meta" } },
      [`${hit.venue} ${hit.year}, image ${hit.in_paper_index}`]),
    h("a", {
      attrs: { class: "doi-link", href: hit.doi_url, target: "_blank" },
    }, [hit.doi_url]),
    h("button", {
      attrs: { class: "caption-toggle", type: "button" },
      on: { click: () => actions.onToggleCaption?.() },
    }, [state.captionShown ? "hide caption" : "show caption"]),
  ];
  if (state.captionShown) {
    children.push(h("blockquote", { attrs: { class: "caption" } },
      [hit.caption ?? "no caption recorded"]));
  }
  return h("aside", { attrs: { class: "detail-panel" } }, children);
}

export function renderNavigator(state: NavigatorState,
                                actions: NavigatorActions = {}): VNode {
  const children: VNode[] = [
    renderQueryPanel(state.query, actions),
    renderVenueLegend(),
  ];
  if (state.error) {
    children.push(h("div", { attrs: { class: "error-banner" } },
      [`search failed: ${state.error}`]));
  }
  if (state.results !== null) {
    if (state.results.length === 0) {
      children.push(h("div", { attrs: { class: "empty-placeholder" } },
        ["no matches"]));
    } else if (state.query.layout === "timeline") {
      children.push(timelineGallery(state.results, actions));
    } else if (state.query.layout === "paper_list") {
      children.push(paperListGallery(state.results, actions));
    } else {
      children.push(brickWallGallery(state.results, actions));
    }
  }
  if (state.selected) {
    children.push(detailPanel(state, actions));
  }
  return h("div", { attrs: { class: "navigator" } }, children);
}
