/** Client-side panel board state.
 *
 * Every mutation maps 1:1 to a REST call; the board applies the server's
 * response rather than computing its own result. The only client-side logic
 * is the drop guard, which pre-validates a drag-combine so obviously invalid
 * drops give instant feedback without a round trip — the server remains
 * authoritative and re-checks every rule.
 */

import type { ApiClient } from "./api.js";
import type { PanelDoc } from "./types.js";

export type DropVerdict = { ok: true } | { ok: false; reason: string };

/** Whether dropping `dragged` onto `target` may create a combined 2D panel. */
export function canCombine(dragged: PanelDoc, target: PanelDoc): DropVerdict {
  if (dragged.panel_id === target.panel_id) {
    return { ok: false, reason: "cannot drop a panel onto itself" };
  }
  if (dragged.dimension_ids.length !== 1 || target.dimension_ids.length !== 1) {
    return { ok: false, reason: "only two 1D panels can be combined (2-dimension cap)" };
  }
  if (dragged.dimension_ids[0] === target.dimension_ids[0]) {
    return { ok: false, reason: "cannot combine a dimension with itself" };
  }
  return { ok: true };
}

/** Which view toggles a panel's button row offers. */
export function availableViews(panel: PanelDoc): string[] {
  if (panel.dimension_ids.length === 2) return ["grid_2d"];
  return ["timeline_1d", "compact_1d"];
}

export class PanelBoard {
  private panels = new Map<string, PanelDoc>();

  constructor(private readonly api: ApiClient) {}

  list(): PanelDoc[] {
    return [...this.panels.values()];
  }

  get(panelId: string): PanelDoc {
    const panel = this.panels.get(panelId);
    if (!panel) throw new Error(`unknown panel ${panelId}`);
    return panel;
  }

  async refresh(): Promise<PanelDoc[]> {
    const { panels } = await this.api.listPanels();
    this.panels = new Map(panels.map((p) => [p.panel_id, p]));
    return this.list();
  }

  async add(dimensionIds: string[], view: string, position?: { x: number; y: number }): Promise<PanelDoc> {
    const panel = await this.api.createPanel(dimensionIds, view, position);
    this.panels.set(panel.panel_id, panel);
    return panel;
  }

  /** Layout moves are optimistic: apply locally, then persist. */
  async move(panelId: string, position: { x: number; y: number }): Promise<PanelDoc> {
    const panel = this.get(panelId);
    panel.position = position;
    const saved = await this.api.updatePanel(panelId, { position });
    this.panels.set(panelId, saved);
    return saved;
  }

  async toggleView(panelId: string, view: string): Promise<PanelDoc> {
    const panel = this.get(panelId);
    if (!availableViews(panel).includes(view)) {
      throw new Error(`view ${view} is not available on panel ${panelId}`);
    }
    const saved = await this.api.updatePanel(panelId, { view });
    this.panels.set(panelId, saved);
    return saved;
  }

  async toggleComparison(panelId: string): Promise<PanelDoc> {
    const panel = this.get(panelId);
    const saved = await this.api.updatePanel(panelId, {
      comparison: !panel.comparison,
    });
    this.panels.set(panelId, saved);
    return saved;
  }

  /** Drag-combine `dragged` onto `target`; sources are kept. */
  async combine(draggedId: string, targetId: string): Promise<PanelDoc> {
    const verdict = canCombine(this.get(draggedId), this.get(targetId));
    if (!verdict.ok) throw new Error(verdict.reason);
    const panel = await this.api.combinePanels(draggedId, targetId);
    this.panels.set(panel.panel_id, panel);
    return panel;
  }

  /** Serializable canvas descriptor; feeding it back restores the layout. */
  descriptor(): PanelDoc[] {
    return this.list().map((p) => ({
      ...p,
      dimension_ids: [...p.dimension_ids],
      position: { ...p.position },
    }));
  }

  restore(descriptor: PanelDoc[]): void {
    this.panels = new Map(descriptor.map((p) => [p.panel_id, p]));
  }
}
