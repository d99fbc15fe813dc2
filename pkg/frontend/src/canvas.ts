/** Canvas renderer: draws one panel's dot layout with optional highlight.
 *
 * Purely presentational — all positions come from the layout module and all
 * structure from the server documents.
 */

import type { HighlightedLayout } from "./highlight.js";
import type { Dot, DotLayout } from "./types.js";

export interface RenderOptions {
  cellWidth: number;
  cellHeight: number;
  dotRadius: number;
  margin: number;
  /** Dots outside the highlight are dimmed when a highlight is active. */
  highlight?: HighlightedLayout;
  /** Hollow ghost dots drawn behind the current batch (comparison overlay). */
  overlay?: DotLayout;
}

export const DEFAULT_RENDER_OPTIONS: RenderOptions = {
  cellWidth: 96,
  cellHeight: 72,
  dotRadius: 7,
  margin: 48,
};

export function dotCenter(dot: Dot, opts: RenderOptions): { x: number; y: number } {
  // dots in a cell spread horizontally around the cell center
  const spread = (dot.indexInCell - (dot.cellSize - 1) / 2) * (opts.dotRadius * 2.4);
  return {
    x: opts.margin + dot.col * opts.cellWidth + opts.cellWidth / 2 + spread,
    y: opts.margin + dot.row * opts.cellHeight + opts.cellHeight / 2,
  };
}

export function panelPixelSize(layout: DotLayout, opts: RenderOptions): { width: number; height: number } {
  return {
    width: opts.margin * 2 + layout.columnLabels.length * opts.cellWidth,
    height: opts.margin * 2 + layout.rowLabels.length * opts.cellHeight,
  };
}

export function renderPanel(
  ctx: CanvasRenderingContext2D,
  layout: DotLayout,
  opts: RenderOptions = DEFAULT_RENDER_OPTIONS,
): void {
  const { width, height } = panelPixelSize(layout, opts);
  ctx.clearRect(0, 0, width, height);

  ctx.fillStyle = "#444";
  ctx.font = "12px sans-serif";
  ctx.textAlign = "center";
  layout.columnLabels.forEach((text, col) => {
    ctx.fillText(text, opts.margin + col * opts.cellWidth + opts.cellWidth / 2, opts.margin - 12);
  });
  ctx.textAlign = "right";
  layout.rowLabels.forEach((text, row) => {
    ctx.fillText(text, opts.margin - 8, opts.margin + row * opts.cellHeight + opts.cellHeight / 2 + 4);
  });

  const centers = new Map<string, { x: number; y: number; n: number }>();
  for (const dot of layout.dots) {
    const c = dotCenter(dot, opts);
    const agg = centers.get(dot.nodeId) ?? { x: 0, y: 0, n: 0 };
    centers.set(dot.nodeId, { x: agg.x + c.x, y: agg.y + c.y, n: agg.n + 1 });
  }

  ctx.strokeStyle = "#b8b8b8";
  for (const edge of layout.edges) {
    const a = centers.get(edge.fromNodeId);
    const b = centers.get(edge.toNodeId);
    if (!a || !b) continue;
    ctx.lineWidth = edge.multiplicity;
    ctx.beginPath();
    ctx.moveTo(a.x / a.n, a.y / a.n);
    ctx.lineTo(b.x / b.n, b.y / b.n);
    ctx.stroke();
  }

  if (opts.overlay) {
    ctx.lineWidth = 1.5;
    for (const ghost of opts.overlay.dots) {
      const c = dotCenter(ghost, opts);
      ctx.strokeStyle = ghost.color;
      ctx.beginPath();
      ctx.arc(c.x, c.y, opts.dotRadius, 0, Math.PI * 2);
      ctx.stroke();
    }
  }

  for (const dot of layout.dots) {
    const c = dotCenter(dot, opts);
    const dimmed =
      opts.highlight !== undefined &&
      opts.highlight.selected.size > 0 &&
      !opts.highlight.selected.has(dot.key);
    ctx.globalAlpha = dimmed ? 0.25 : 1;
    ctx.fillStyle = dot.color;
    ctx.beginPath();
    ctx.arc(c.x, c.y, opts.dotRadius, 0, Math.PI * 2);
    ctx.fill();
  }
  ctx.globalAlpha = 1;
}

/** The dot under a pointer position, for click-to-highlight interactions. */
export function hitTest(
  layout: DotLayout,
  x: number,
  y: number,
  opts: RenderOptions = DEFAULT_RENDER_OPTIONS,
): Dot | null {
  for (const dot of layout.dots) {
    const c = dotCenter(dot, opts);
    if ((x - c.x) ** 2 + (y - c.y) ** 2 <= opts.dotRadius ** 2) return dot;
  }
  return null;
}
