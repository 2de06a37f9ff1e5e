// Pure layout math for the three gallery modes. Rendering happens
// elsewhere; these functions only decide grouping and geometry.

export interface LayoutItem {
  id: string;
  // width / height of the thumbnail; rows have fixed height, so the
  // aspect ratio alone fixes each brick's width.
  aspect: number;
}

export interface PlacedItem {
  id: string;
  x: number;
  y: number;
  width: number;
  height: number;
}

export interface BrickWallLayout {
  rows: PlacedItem[][];
  height: number;
}

export function brickWall(
  items: LayoutItem[],
  galleryWidth: number,
  rowHeight: number,
  gap = 8,
): BrickWallLayout {
  if (galleryWidth <= 0 || rowHeight <= 0) {
    throw new Error(`gallery width and row height must be positive, got ${galleryWidth}x${rowHeight}`);
  }
  const rows: PlacedItem[][] = [];
  let row: PlacedItem[] = [];
  let x = 0;
  let y = 0;
  for (const item of items) {
    const width = Math.min(rowHeight * item.aspect, galleryWidth);
    if (row.length > 0 && x + width > galleryWidth) {
      rows.push(row);
      row = [];
      x = 0;
      y += rowHeight + gap;
    }
    row.push({ id: item.id, x, y, width, height: rowHeight });
    x += width + gap;
  }
  if (row.length > 0) rows.push(row);
  const height = rows.length === 0 ? 0 : y + rowHeight;
  return { rows, height };
}

export interface GroupableHit {
  image_id: string;
  doi: string;
  year: number;
  venue: string;
  paper_title: string;
}

export interface YearGroup<T> {
  year: number;
  items: T[];
}

// Timeline: one pile of thumbnails per publication year, years ascending.
export function timelineGroups<T extends GroupableHit>(hits: T[]): YearGroup<T>[] {
  const byYear = new Map<number, T[]>();
  for (const hit of hits) {
    const pile = byYear.get(hit.year);
    if (pile) {
      pile.push(hit);
    } else {
      byYear.set(hit.year, [hit]);
    }
  }
  return [...byYear.keys()]
    .sort((a, b) => a - b)
    .map((year) => ({ year, items: byYear.get(year) as T[] }));
}

export interface PaperGroup<T> {
  doi: string;
  title: string;
  year: number;
  venue: string;
  items: T[];
}

// Paper list: images grouped under a per-paper title row, in the order
// papers first appear in the (already canonically sorted) results.
export function paperGroups<T extends GroupableHit>(hits: T[]): PaperGroup<T>[] {
  const groups: PaperGroup<T>[] = [];
  const byDoi = new Map<string, PaperGroup<T>>();
  for (const hit of hits) {
    let group = byDoi.get(hit.doi);
    if (!group) {
      group = {
        doi: hit.doi,
        title: hit.paper_title,
        year: hit.year,
        venue: hit.venue,
        items: [],
      };
      byDoi.set(hit.doi, group);
      groups.push(group);
    }
    group.items.push(hit);
  }
  return groups;
}
