// Thin fetch wrappers over the two backend services. Every method
// returns parsed JSON or throws ApiError with the server's detail.

import {
  EditOpRecord,
  OverviewResponse,
  PagePayload,
  PaperDetail,
  QueryState,
  SearchResponse,
  SessionDetail,
  SessionStatus,
  SessionSummary,
} from "./types";
import { searchParams } from "./urlstate";

export class ApiError extends Error {
  readonly status: number;

  constructor(status: number, detail: string) {
    super(detail);
    this.status = status;
  }
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  const response = await fetch(url, init);
  if (!response.ok) {
    let detail = `${response.status} ${response.statusText}`;
    try {
      const body = (await response.json()) as { detail?: string };
      if (body.detail) detail = body.detail;
    } catch {
      // non-JSON error body; keep the status line
    }
    throw new ApiError(response.status, detail);
  }
  return (await response.json()) as T;
}

function post<T>(url: string, payload: unknown): Promise<T> {
  return request<T>(url, {
    method: "POST",
    headers: { "content-type": "application/json" },
    body: JSON.stringify(payload),
  });
}

export class CurateClient {
  constructor(private readonly baseUrl: string) {}

  listSessions(): Promise<SessionSummary[]> {
    return request(`${this.baseUrl}/api/sessions`);
  }

  session(docId: string): Promise<SessionDetail> {
    return request(`${this.baseUrl}/api/session/${docId}`);
  }

  pageLabels(docId: string, pageId: string): Promise<PagePayload> {
    return request(`${this.baseUrl}/api/session/${docId}/page/${pageId}/labels`);
  }

  rasterUrl(docId: string, pageId: string): string {
    return `${this.baseUrl}/api/session/${docId}/page/${pageId}/raster`;
  }

  edit(docId: string, op: EditOpRecord): Promise<PagePayload> {
    return post(`${this.baseUrl}/api/session/${docId}/edit`, op);
  }

  undo(docId: string, actor: string): Promise<PagePayload & { undone: string }> {
    return post(`${this.baseUrl}/api/session/${docId}/undo`, { actor });
  }

  setStatus(docId: string, status: SessionStatus, actor: string):
      Promise<{ doc_id: string; status: SessionStatus; sequence: number }> {
    return post(`${this.baseUrl}/api/session/${docId}/status`, { status, actor });
  }

  diff(docId: string): Promise<Record<string, unknown>> {
    return request(`${this.baseUrl}/api/session/${docId}/diff`);
  }

  overview(): Promise<OverviewResponse> {
    return request(`${this.baseUrl}/api/overview`);
  }
}

export class CatalogClient {
  constructor(private readonly baseUrl: string) {}

  search(query: QueryState): Promise<SearchResponse> {
    const params = searchParams(query).toString();
    const suffix = params ? `?${params}` : "";
    return request(`${this.baseUrl}/api/search${suffix}`);
  }

  image(imageId: string): Promise<Record<string, unknown>> {
    return request(`${this.baseUrl}/api/image/${imageId}`);
  }

  paper(doi: string): Promise<PaperDetail> {
    return request(`${this.baseUrl}/api/paper/${doi}`);
  }

  stats(group = "year,venue"): Promise<Record<string, unknown>> {
    return request(`${this.baseUrl}/api/stats?group=${encodeURIComponent(group)}`);
  }
}
