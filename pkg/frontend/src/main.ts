// App shell: reads the backend locations and face from the URL, keeps
// the query panel in sync with the query string, and re-renders the
// active face after every state change or server response.

import { CatalogClient, CurateClient } from "./api";
import { mount } from "./dom";
import { displayedLabels, EditorSession, renderEditor } from "./editor";
import { NavigatorState, renderNavigator } from "./navigator";
import { renderOverview } from "./overview";
import { Face, ImageHit, QueryState } from "./types";
import { h } from "./vnode";
import { defaultQuery, queryFromParams, queryToParams } from "./urlstate";

const params = new URLSearchParams(window.location.search);
const catalogBase = params.get("catalog") ?? "http://127.0.0.1:8601";
const curateBase = params.get("curate") ?? "http://127.0.0.1:8602";
const face: Face = params.get("face") === "curate" ? "curate" : "navigate";
const actor = params.get("actor") ?? "editor";

const catalog = new CatalogClient(catalogBase);
const curate = new CurateClient(curateBase);
const root = document.getElementById("app") as HTMLElement;

function pushQueryToUrl(query: QueryState): void {
  const next = queryToParams(query);
  for (const keep of ["catalog", "curate", "face", "actor"]) {
    const value = params.get(keep);
    if (value) next.set(keep, value);
  }
  const suffix = next.toString();
  window.history.replaceState(
    null, "", suffix ? `?${suffix}` : window.location.pathname);
}

async function runNavigator(): Promise<void> {
  const state: NavigatorState = {
    query: queryFromParams(params),
    results: null,
    error: null,
    selected: null,
    captionShown: false,
  };

  const render = () => mount(root, renderNavigator(state, {
    onSelect: (hit: ImageHit) => {
      state.selected = hit;
      state.captionShown = false;
      render();
    },
    onToggleCaption: () => {
      state.captionShown = !state.captionShown;
      render();
    },
    onQueryChange: (query: QueryState) => {
      state.query = query;
      pushQueryToUrl(query);
      void search();
    },
  }));

  const search = async () => {
    try {
      const response = await catalog.search(state.query);
      state.results = response.results;
      state.error = null;
    } catch (err) {
      state.error = err instanceof Error ? err.message : String(err);
    }
    render();
  };

  render();
  await search();
}

async function runCurate(): Promise<void> {
  const docId = params.get("doc");
  const pageId = params.get("page");
  if (!docId || !pageId) {
    const [sessions, overview] = await Promise.all([
      curate.listSessions(), curate.overview()]);
    mount(root, renderOverview(sessions, overview, (doc) => {
      const next = new URLSearchParams(window.location.search);
      next.set("doc", doc);
      window.location.search = next.toString();
    }));
    return;
  }

  const detail = await curate.session(docId);
  const [pageWidth, pageHeight] = detail.page_size;
  const session = new EditorSession(
    curate, docId, pageId, actor, pageWidth, pageHeight);
  await session.load();

  const render = () => {
    const tree = renderEditor(session.state, curate.rasterUrl(docId, pageId));
    mount(root, tree);
    // the canvas is the single source of truth for what is on screen
    console.debug("displayed", displayedLabels(tree).length, "labels");
  };
  render();

  window.addEventListener("keydown", (event) => {
    if (event.key === "z" && (event.ctrlKey || event.metaKey)) {
      void session.undo().then(render);
    }
  });
}

async function boot(): Promise<void> {
  if (face === "curate") {
    await runCurate();
  } else {
    await runNavigator();
  }
}

void boot().catch((err) => {
  mount(root, h("div", { attrs: { class: "error-banner" } },
    [`failed to start: ${err instanceof Error ? err.message : String(err)}`]));
});

export { defaultQuery };
