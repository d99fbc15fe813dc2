/** Thin typed client over the REST service; the only network boundary. */

import type {
  BatchFileDoc,
  BsvGraphDoc,
  HighlightDoc,
  JobDoc,
  PanelDoc,
  PlaytestStateDoc,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly detail: unknown,
  ) {
    super(`HTTP ${status}: ${JSON.stringify(detail)}`);
  }
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly projectId: string,
    private readonly fetchImpl: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request<T>(
    method: string,
    path: string,
    body?: unknown,
  ): Promise<T> {
    const init: RequestInit = { method };
    if (body !== undefined) {
      init.body = JSON.stringify(body);
      init.headers = { "Content-Type": "application/json" };
    }
    const resp = await this.fetchImpl(`${this.baseUrl}${path}`, init);
    const payload = await resp.json();
    if (!resp.ok) {
      throw new ApiError(resp.status, (payload as { detail?: unknown }).detail);
    }
    return payload as T;
  }

  private projectPath(suffix: string, params?: Record<string, string>): string {
    const query = params ? `?${new URLSearchParams(params)}` : "";
    return `/projects/${this.projectId}${suffix}${query}`;
  }

  getBsv(
    dims: string[],
    options: { batch?: number; view?: string; compare?: boolean } = {},
  ): Promise<BsvGraphDoc> {
    const params: Record<string, string> = { dims: dims.join(",") };
    if (options.batch !== undefined) params.batch = String(options.batch);
    if (options.view !== undefined) params.view = options.view;
    if (options.compare) params.compare = "true";
    return this.request("GET", this.projectPath("/bsv", params));
  }

  highlightByStoryline(storylineId: string, batch?: number): Promise<HighlightDoc> {
    const params: Record<string, string> = { by: "storyline", storyline_id: storylineId };
    if (batch !== undefined) params.batch = String(batch);
    return this.request("GET", this.projectPath("/highlight", params));
  }

  highlightByValue(value: string[], dims: string[], batch?: number): Promise<HighlightDoc> {
    const params: Record<string, string> = {
      by: "value",
      value: value.join(","),
      dims: dims.join(","),
    };
    if (batch !== undefined) params.batch = String(batch);
    return this.request("GET", this.projectPath("/highlight", params));
  }

  highlightByTimestep(t: number, batch?: number): Promise<HighlightDoc> {
    const params: Record<string, string> = { by: "timestep", t: String(t) };
    if (batch !== undefined) params.batch = String(batch);
    return this.request("GET", this.projectPath("/highlight", params));
  }

  listPanels(): Promise<{ panels: PanelDoc[] }> {
    return this.request("GET", this.projectPath("/panels"));
  }

  createPanel(dimensionIds: string[], view: string, position?: { x: number; y: number }): Promise<PanelDoc> {
    return this.request("POST", this.projectPath("/panels"), {
      dimension_ids: dimensionIds,
      view,
      position,
    });
  }

  updatePanel(
    panelId: string,
    patch: Partial<Pick<PanelDoc, "position" | "view" | "comparison">>,
  ): Promise<PanelDoc> {
    return this.request("PUT", this.projectPath(`/panels/${panelId}`), patch);
  }

  combinePanels(draggedId: string, targetId: string): Promise<PanelDoc> {
    return this.request(
      "POST",
      this.projectPath(`/panels/${draggedId}/combine/${targetId}`),
    );
  }

  playtest(sessionId: string, action: "start"): Promise<PlaytestStateDoc>;
  playtest(sessionId: string, action: "player", text: string): Promise<PlaytestStateDoc>;
  playtest(sessionId: string, action: string, text?: string): Promise<PlaytestStateDoc> {
    return this.request("POST", this.projectPath(`/playtest/${sessionId}`), {
      action,
      ...(text === undefined ? {} : { text }),
    });
  }

  exportPlaytest(sessionId: string): Promise<BatchFileDoc> {
    return this.request("GET", this.projectPath(`/playtest/${sessionId}/export`));
  }

  getJob(jobId: string): Promise<JobDoc> {
    return this.request("GET", `/jobs/${jobId}`);
  }
}
