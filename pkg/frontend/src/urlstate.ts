// Query-panel state serialized into the URL query string, so any view
// can be bookmarked and reloads restore the same search.

import {
  ImageTypeFilter,
  LayoutMode,
  QueryState,
  TermMode,
  Venue,
  VENUES,
} from "./types";

const LAYOUTS: LayoutMode[] = ["brick_wall", "timeline", "paper_list"];
const TERM_MODES: TermMode[] = ["title_and_abstract", "author_keywords"];
const IMAGE_TYPES: ImageTypeFilter[] = ["figure", "table", "both"];

export function defaultQuery(): QueryState {
  return {
    terms: "",
    termMode: "title_and_abstract",
    authors: "",
    venues: [...VENUES],
    yearMin: null,
    yearMax: null,
    imageType: "both",
    layout: "brick_wall",
  };
}

// Venues normalize to the canonical order with duplicates dropped, so
// equal selections always serialize identically.
export function normalizeVenues(venues: string[]): Venue[] {
  const picked = new Set(venues);
  const kept = VENUES.filter((v) => picked.has(v));
  return kept.length > 0 ? kept : [...VENUES];
}

export function queryToParams(query: QueryState): URLSearchParams {
  const params = new URLSearchParams();
  if (query.terms) params.set("terms", query.terms);
  if (query.termMode !== "title_and_abstract") {
    params.set("term_mode", query.termMode);
  }
  if (query.authors) params.set("authors", query.authors);
  const venues = normalizeVenues(query.venues);
  if (venues.length < VENUES.length) params.set("venues", venues.join(","));
  if (query.yearMin !== null) params.set("year_min", String(query.yearMin));
  if (query.yearMax !== null) params.set("year_max", String(query.yearMax));
  if (query.imageType !== "both") params.set("type", query.imageType);
  if (query.layout !== "brick_wall") params.set("layout", query.layout);
  return params;
}

function parseYear(raw: string | null): number | null {
  if (raw === null) return null;
  const value = Number(raw);
  return Number.isInteger(value) ? value : null;
}

function pick<T extends string>(raw: string | null, allowed: T[], fallback: T): T {
  return raw !== null && (allowed as string[]).includes(raw)
    ? (raw as T)
    : fallback;
}

export function queryFromParams(params: URLSearchParams): QueryState {
  const base = defaultQuery();
  const venuesRaw = params.get("venues");
  return {
    terms: params.get("terms") ?? "",
    termMode: pick(params.get("term_mode"), TERM_MODES, base.termMode),
    authors: params.get("authors") ?? "",
    venues: venuesRaw === null
      ? [...VENUES]
      : normalizeVenues(venuesRaw.split(",").map((v) => v.trim())),
    yearMin: parseYear(params.get("year_min")),
    yearMax: parseYear(params.get("year_max")),
    imageType: pick(params.get("type"), IMAGE_TYPES, base.imageType),
    layout: pick(params.get("layout"), LAYOUTS, base.layout),
  };
}

// The catalog API takes the same facets under slightly different names;
// layout is a pure view concern and never reaches the server.
export function searchParams(query: QueryState): URLSearchParams {
  const params = new URLSearchParams();
  if (query.terms) params.set("terms", query.terms);
  if (query.termMode !== "title_and_abstract") {
    params.set("term_mode", query.termMode);
  }
  if (query.authors) params.set("authors", query.authors);
  const venues = normalizeVenues(query.venues);
  if (venues.length < VENUES.length) params.set("venues", venues.join(","));
  if (query.yearMin !== null) params.set("year_min", String(query.yearMin));
  if (query.yearMax !== null) params.set("year_max", String(query.yearMax));
  if (query.imageType !== "both") params.set("image_type", query.imageType);
  return params;
}
