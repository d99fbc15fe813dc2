/** Browser entry point: wires the API client, panel board, and renderers.
 *
 * Expects the REST service on the same origin (or VITE-style override via a
 * global) and a #canvas-root element to mount panels into.
 */

import { ApiClient } from "./api.js";
import { DEFAULT_RENDER_OPTIONS, hitTest, panelPixelSize, renderPanel } from "./canvas.js";
import { applyHighlight, clearHighlight } from "./highlight.js";
import { computeLayout } from "./layout.js";
import { PanelBoard } from "./panels.js";
import type { PanelDoc } from "./types.js";

interface AppConfig {
  baseUrl: string;
  projectId: string;
}

function config(): AppConfig {
  const w = window as unknown as { STORYBUNDLE_CONFIG?: Partial<AppConfig> };
  return {
    baseUrl: w.STORYBUNDLE_CONFIG?.baseUrl ?? "",
    projectId: w.STORYBUNDLE_CONFIG?.projectId ?? "project",
  };
}

async function mountPanel(
  root: HTMLElement,
  api: ApiClient,
  panel: PanelDoc,
): Promise<void> {
  const graph = await api.getBsv(panel.dimension_ids, {
    view: panel.view,
    compare: panel.comparison,
  });
  const layout = computeLayout(graph);

  const element = document.createElement("canvas");
  element.className = "bsv-panel";
  element.style.position = "absolute";
  element.style.left = `${panel.position.x}px`;
  element.style.top = `${panel.position.y}px`;
  const size = panelPixelSize(layout, DEFAULT_RENDER_OPTIONS);
  element.width = size.width;
  element.height = size.height;
  root.appendChild(element);

  const ctx = element.getContext("2d");
  if (!ctx) throw new Error("2d canvas context unavailable");
  let highlight = clearHighlight();
  const draw = () =>
    renderPanel(ctx, layout, { ...DEFAULT_RENDER_OPTIONS, highlight });
  draw();

  element.addEventListener("click", async (event) => {
    const rect = element.getBoundingClientRect();
    const dot = hitTest(layout, event.clientX - rect.left, event.clientY - rect.top);
    if (dot === null) {
      highlight = clearHighlight();
    } else {
      const doc = await api.highlightByStoryline(dot.storylineId, graph.batch_id);
      highlight = applyHighlight(layout, doc);
    }
    draw();
  });
}

async function bootstrap(): Promise<void> {
  const { baseUrl, projectId } = config();
  const api = new ApiClient(baseUrl, projectId);
  const board = new PanelBoard(api);
  const root = document.getElementById("canvas-root");
  if (!root) throw new Error("missing #canvas-root element");
  const panels = await board.refresh();
  await Promise.all(panels.map((panel) => mountPanel(root, api, panel)));
}

if (typeof document !== "undefined" && document.getElementById("canvas-root")) {
  void bootstrap();
}
