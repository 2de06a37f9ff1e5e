// End-to-end checks against live backend services: a curation session
// served by `figharvest curate serve` and a catalog served by
// `figharvest catalog serve`, both spawned from a fixture corpus built
// with the real CLI. The editor tests assert after every gesture that
// the labels a rendered tree displays equal what GET /labels returns.

import { execFileSync, spawn, type ChildProcess } from "node:child_process";
import { mkdtempSync, rmSync, writeFileSync } from "node:fs";
import { createServer, type AddressInfo } from "node:net";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiError, CatalogClient, CurateClient } from "../src/api";
import { displayedLabels, EditorSession, renderEditor } from "../src/editor";
import { NavigatorState, renderNavigator } from "../src/navigator";
import { VENUE_COLORS } from "../src/palette";
import { EditOpRecord, ImageHit, LabelRecord, TermMode } from "../src/types";
import { defaultQuery } from "../src/urlstate";
import { findByClass, textOf } from "../src/vnode";

const DOC = "demo-2004";

let workDir: string;
let curateBase: string;
let catalogBase: string;
const procs: ChildProcess[] = [];

function cli(args: string[]): void {
  execFileSync("figharvest", args, { stdio: ["ignore", "pipe", "pipe"] });
}

function freePort(): Promise<number> {
  return new Promise((resolve, reject) => {
    const probe = createServer();
    probe.once("error", reject);
    probe.listen(0, "127.0.0.1", () => {
      const port = (probe.address() as AddressInfo).port;
      probe.close(() => resolve(port));
    });
  });
}

async function waitForServer(url: string, proc: ChildProcess): Promise<void> {
  for (let attempt = 0; attempt < 300; attempt++) {
    if (proc.exitCode !== null) {
      throw new Error(`server exited with code ${proc.exitCode} before ready`);
    }
    try {
      const response = await fetch(url);
      if (response.ok) return;
    } catch {
      // not listening yet
    }
    await new Promise((resolve) => setTimeout(resolve, 200));
  }
  throw new Error(`server at ${url} never became ready`);
}

function serve(args: string[]): ChildProcess {
  const proc = spawn("figharvest", args, { stdio: "ignore" });
  procs.push(proc);
  return proc;
}

beforeAll(async () => {
  workDir = mkdtempSync(join(tmpdir(), "figharvest-webui-"));
  const corpus = join(workDir, "corpus");
  const preds = join(workDir, "preds.jsonl");
  const sessionStore = join(workDir, "sessions");
  cli(["synth", "--pages", "4", "--out", corpus, "--seed", "11"]);
  cli(["detect", "--baseline", "--pages", corpus, "--out", preds,
    "--workers", "2"]);
  cli(["curate", "init", "--store", sessionStore, "--machine", preds,
    "--pages", corpus, "--doc-id", DOC, "--year", "2004"]);

  const papers = join(workDir, "papers.jsonl");
  const images = join(workDir, "images.jsonl");
  writeFileSync(papers, [
    {
      doi: "10.1/a", title: "Flow Maps", abstract: "",
      authors: ["Ada Lovelace"], author_keywords: ["flow"],
      venue: "Vis", year: 1999, page_count: 8, proceedings_order: 1,
    },
    {
      doi: "10.1/b", title: "Tree Views", abstract: "",
      authors: ["Grace Hopper"], author_keywords: ["trees"],
      venue: "InfoVis", year: 2003, page_count: 10, proceedings_order: 2,
    },
  ].map((rec) => JSON.stringify(rec)).join("\n") + "\n");
  writeFileSync(images, [
    { image_id: "a-1", doi: "10.1/a", in_paper_index: 1, type: "F" },
    { image_id: "a-2", doi: "10.1/a", in_paper_index: 2, type: "T" },
    { image_id: "b-1", doi: "10.1/b", in_paper_index: 1, type: "F" },
  ].map((rec) => JSON.stringify(rec)).join("\n") + "\n");
  const catalogStore = join(workDir, "catalog");
  cli(["catalog", "ingest", "--papers", papers, "--images", images,
    "--store", catalogStore]);

  const curatePort = await freePort();
  const catalogPort = await freePort();
  curateBase = `http://127.0.0.1:${curatePort}`;
  catalogBase = `http://127.0.0.1:${catalogPort}`;
  const curateProc = serve(["curate", "serve", "--store", sessionStore,
    "--port", String(curatePort)]);
  const catalogProc = serve(["catalog", "serve", "--store", catalogStore,
    "--port", String(catalogPort)]);
  await waitForServer(`${curateBase}/api/sessions`, curateProc);
  await waitForServer(`${catalogBase}/api/search`, catalogProc);
});

afterAll(() => {
  for (const proc of procs) proc.kill("SIGTERM");
  if (workDir) rmSync(workDir, { recursive: true, force: true });
});

describe("editor round-trip against the live curation API", () => {
  let client: CurateClient;
  let session: EditorSession;
  let pageId: string;

  // The acceptance bar for every gesture: what the rendered tree
  // displays must equal what the server says the page holds.
  async function expectDisplayEqualsServer(): Promise<LabelRecord[]> {
    const tree = renderEditor(session.state, client.rasterUrl(DOC, pageId));
    const shown = displayedLabels(tree);
    const server = await client.pageLabels(DOC, pageId);
    expect(shown).toEqual(server.labels);
    return shown;
  }

  it("loads the machine-seeded session", async () => {
    client = new CurateClient(curateBase);
    const sessions = await client.listSessions();
    expect(sessions.map((s) => s.doc_id)).toEqual([DOC]);
    expect(sessions[0].status).toBe("unreviewed");

    const detail = await client.session(DOC);
    expect(detail.pages.length).toBe(4);
    pageId = detail.pages[0];
    session = new EditorSession(client, DOC, pageId, "reviewer",
      detail.page_size[0], detail.page_size[1]);
    await session.load();
    const shown = await expectDisplayEqualsServer();
    for (const label of shown) {
      expect(label.source).toBe("machine");
    }
  });

  it("serves the page raster as an image", async () => {
    const response = await fetch(client.rasterUrl(DOC, pageId));
    expect(response.ok).toBe(true);
    expect(response.headers.get("content-type")).toBe("image/png");
  });

  it("draw: a new human box appears on page and server alike", async () => {
    const before = session.state.labels.length;
    expect(await session.draw(
      { x_min: 30, y_min: 40, x_max: 180, y_max: 160 }, "figure")).toBe(true);
    const shown = await expectDisplayEqualsServer();
    expect(shown).toHaveLength(before + 1);
    const drawn = shown.find((l) => l.label_id === "h0001") as LabelRecord;
    expect(drawn).toMatchObject({
      x_min: 30, y_min: 40, x_max: 180, y_max: 160,
      class: "figure", source: "human",
    });
  });

  it("move: the box shifts by the posted delta", async () => {
    expect(await session.move("h0001", 25, 10)).toBe(true);
    const shown = await expectDisplayEqualsServer();
    const moved = shown.find((l) => l.label_id === "h0001") as LabelRecord;
    expect(moved).toMatchObject({ x_min: 55, y_min: 50, x_max: 205, y_max: 170 });
  });

  it("resize: the box takes the posted bbox", async () => {
    expect(await session.resize("h0001",
      { x_min: 50, y_min: 60, x_max: 260, y_max: 300 })).toBe(true);
    const shown = await expectDisplayEqualsServer();
    const resized = shown.find((l) => l.label_id === "h0001") as LabelRecord;
    expect(resized).toMatchObject({
      x_min: 50, y_min: 60, x_max: 260, y_max: 300,
    });
  });

  it("relabel: the class toggles", async () => {
    expect(await session.relabel("h0001")).toBe(true);
    const shown = await expectDisplayEqualsServer();
    expect(shown.find((l) => l.label_id === "h0001")?.class).toBe("table");
  });

  it("remove: the box disappears everywhere", async () => {
    const before = session.state.labels.length;
    expect(await session.remove("h0001")).toBe(true);
    const shown = await expectDisplayEqualsServer();
    expect(shown).toHaveLength(before - 1);
    expect(shown.some((l) => l.label_id === "h0001")).toBe(false);
  });

  it("undo: the server rolls the page back", async () => {
    await session.draw({ x_min: 400, y_min: 400, x_max: 520, y_max: 520 });
    const added = session.state.labels.length;
    expect(await session.undo()).toBe(true);
    const shown = await expectDisplayEqualsServer();
    expect(shown).toHaveLength(added - 1);
  });

  it("flags a conflict when another editor got there first", async () => {
    const detail = await client.session(DOC);
    const rival = new EditorSession(client, DOC, pageId, "rival",
      detail.page_size[0], detail.page_size[1]);
    await rival.load();
    expect(await rival.draw(
      { x_min: 600, y_min: 600, x_max: 700, y_max: 700 })).toBe(true);

    // `session` still holds the pre-rival sequence, so its next op is stale
    expect(await session.draw(
      { x_min: 100, y_min: 700, x_max: 200, y_max: 800 })).toBe(false);
    expect(session.state.needsReload).toBe(true);
    const tree = renderEditor(session.state, client.rasterUrl(DOC, pageId));
    expect(findByClass(tree, "reload-prompt")).toHaveLength(1);

    await session.load();
    expect(session.state.needsReload).toBe(false);
    expect(await session.draw(
      { x_min: 100, y_min: 700, x_max: 200, y_max: 800 })).toBe(true);
    await expectDisplayEqualsServer();
  });

  it("locks the session once verified", async () => {
    await client.setStatus(DOC, "pass1_done", "reviewer");
    await client.setStatus(DOC, "verified", "second-reader");
    await session.load();
    expect(session.state.status).toBe("verified");

    expect(await session.draw(
      { x_min: 10, y_min: 10, x_max: 60, y_max: 60 })).toBe(false);
    expect(session.state.error).toBe("session is locked");

    // the server enforces the lock too, not just the client
    const op: EditOpRecord = {
      kind: "add", page_id: pageId, actor: "reviewer",
      sequence: session.state.sequence + 1,
      label: {
        label_id: "h9999", x_min: 10, y_min: 10, x_max: 60, y_max: 60,
        class: "figure", source: "human",
      },
    };
    await expect(client.edit(DOC, op)).rejects.toMatchObject({ status: 409 });
    await expectDisplayEqualsServer();
  });
});

describe("navigator against the live catalog API", () => {
  let client: CatalogClient;

  function navState(overrides: Partial<NavigatorState>): NavigatorState {
    return {
      query: defaultQuery(),
      results: null,
      error: null,
      selected: null,
      captionShown: false,
      ...overrides,
    };
  }

  it("renders live results in canonical order with venue frames", async () => {
    client = new CatalogClient(catalogBase);
    const response = await client.search(defaultQuery());
    expect(response.count).toBe(3);
    expect(response.results.map((r) => r.image_id))
      .toEqual(["a-1", "a-2", "b-1"]);

    const tree = renderNavigator(navState({ results: response.results }));
    const cards = findByClass(tree, "image-card");
    expect(cards.map((c) => c.attrs["data-image-id"]))
      .toEqual(["a-1", "a-2", "b-1"]);
    expect(cards.map((c) => c.style.borderColor)).toEqual([
      VENUE_COLORS.Vis, VENUE_COLORS.Vis, VENUE_COLORS.InfoVis,
    ]);
  });

  it("renders the empty state for a live empty result", async () => {
    const query = { ...defaultQuery(), yearMin: 2010 };
    const response = await client.search(query);
    expect(response.count).toBe(0);
    const tree = renderNavigator(navState({
      query, results: response.results,
    }));
    expect(textOf(findByClass(tree, "empty-placeholder")[0])).toBe("no matches");
    expect(findByClass(tree, "image-card")).toHaveLength(0);
  });

  it("renders the error state for a live rejection, keeping old results", async () => {
    const good = await client.search(defaultQuery());
    const state = navState({ results: good.results });

    const bad = {
      ...defaultQuery(),
      termMode: "psychic" as unknown as TermMode,
      terms: "flow",
    };
    let caught: unknown;
    try {
      await client.search(bad);
    } catch (err) {
      caught = err;
      state.error = err instanceof Error ? err.message : String(err);
    }
    expect(caught).toBeInstanceOf(ApiError);
    expect((caught as ApiError).status).toBe(400);

    const tree = renderNavigator(state);
    expect(findByClass(tree, "error-banner")).toHaveLength(1);
    expect(textOf(findByClass(tree, "error-banner")[0]))
      .toContain("search failed:");
    expect(findByClass(tree, "image-card")).toHaveLength(3);
  });

  it("joins paper metadata into each hit", async () => {
    const response = await client.search(defaultQuery());
    const hit = response.results[2] as ImageHit;
    expect(hit).toMatchObject({
      image_id: "b-1", type: "F", venue: "InfoVis", year: 2003,
      paper_title: "Tree Views", doi_url: "https://doi.org/10.1/b",
    });
  });
});
