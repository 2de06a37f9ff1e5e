// Color coding is a pure function of the venue / source / status enums;
// nothing here depends on runtime state.

import { LabelSource, SessionStatus, Venue } from "./types";

// One fixed frame color per conference track, the legend of the gallery.
export const VENUE_COLORS: Record<Venue, string> = {
  Vis: "#d62728",
  SciVis: "#9467bd",
  InfoVis: "#1f77b4",
  VAST: "#2ca02c",
};

const UNKNOWN_VENUE_COLOR = "#7f7f7f";

export function venueFrameColor(venue: string): string {
  return (VENUE_COLORS as Record<string, string>)[venue] ?? UNKNOWN_VENUE_COLOR;
}

// Machine predictions draw orange, human-touched boxes green.
export const SOURCE_COLORS: Record<LabelSource, string> = {
  machine: "#e8821e",
  human: "#2f9e44",
};

export function sourceColor(source: LabelSource): string {
  return SOURCE_COLORS[source];
}

// Review-status tints for the overview grid cells.
export const STATUS_TINTS: Record<SessionStatus, string> = {
  unreviewed: "#f1f3f5",
  pass1_done: "#ffe8a8",
  verified: "#b2f2bb",
};

export function statusTint(status: SessionStatus): string {
  return STATUS_TINTS[status];
}
