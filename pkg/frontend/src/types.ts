// Wire types shared with the curation and catalog HTTP APIs, plus the
// view state for the single-page app.

export type LabelClass = "figure" | "table";
export type LabelSource = "machine" | "human";
export type SessionStatus = "unreviewed" | "pass1_done" | "verified";
export type Venue = "Vis" | "SciVis" | "InfoVis" | "VAST";

export const VENUES: Venue[] = ["Vis", "SciVis", "InfoVis", "VAST"];

export interface LabelRecord {
  label_id: string;
  x_min: number;
  y_min: number;
  x_max: number;
  y_max: number;
  class: LabelClass;
  source: LabelSource;
  category?: string;
}

export interface PagePayload {
  doc_id: string;
  page_id: string;
  sequence: number;
  status: SessionStatus;
  labels: LabelRecord[];
}

export interface SessionSummary {
  doc_id: string;
  status: SessionStatus;
  sequence: number;
  n_pages: number;
  year: number | null;
}

export interface SessionDetail {
  doc_id: string;
  status: SessionStatus;
  sequence: number;
  page_size: [number, number];
  pages: string[];
  year: number | null;
}

export type EditKind = "add" | "remove" | "move" | "resize" | "relabel";

export interface EditOpRecord {
  kind: EditKind;
  page_id: string;
  actor: string;
  sequence: number;
  label?: LabelRecord;
  label_id?: string;
  dx?: number;
  dy?: number;
  bbox?: [number, number, number, number];
  class?: LabelClass;
}

export interface OverviewYear {
  sessions: number;
  pages: number;
  machine_labels: number;
  curated_labels: number;
  statuses: Record<SessionStatus, number>;
}

export interface OverviewResponse {
  by_year: Record<string, OverviewYear>;
  stats: Record<string, unknown>;
}

export interface ImageHit {
  image_id: string;
  doi: string;
  type: "F" | "T";
  thumbnail_ref: string | null;
  fullres_ref: string | null;
  caption: string | null;
  in_paper_index: number;
  curation_ref: string | null;
  color_plate_duplicate: boolean;
  year: number;
  venue: string;
  proceedings_order: number;
  paper_title: string;
  doi_url: string;
}

export interface SearchResponse {
  count: number;
  results: ImageHit[];
}

export interface PaperDetail {
  doi: string;
  title: string;
  abstract: string;
  authors: string[];
  author_keywords: string[];
  venue: string;
  year: number;
  page_count: number;
  proceedings_order: number;
  doi_url: string;
  images: Array<Record<string, unknown>>;
}

export type TermMode = "title_and_abstract" | "author_keywords";
export type ImageTypeFilter = "figure" | "table" | "both";
export type LayoutMode = "brick_wall" | "timeline" | "paper_list";
export type Face = "curate" | "navigate";

// The faceted query panel state; everything here round-trips through
// the URL so a view is shareable and survives reload.
export interface QueryState {
  terms: string;
  termMode: TermMode;
  authors: string;
  venues: Venue[];
  yearMin: number | null;
  yearMax: number | null;
  imageType: ImageTypeFilter;
  layout: LayoutMode;
}

export interface ViewState {
  face: Face;
  query: QueryState;
  selectedImage: string | null;
  selectedPage: string | null;
}
