/** Shapes of the REST service's response bodies, mirrored 1:1. */

export interface StateRef {
  storyline_id: string;
  timestep: number;
}

export interface DimensionDoc {
  id: string;
  name: string;
  description: string;
  values: string[];
  origin: string;
}

export interface BsvNodeDoc {
  id: string;
  value_key: string[];
  timestep: number | null;
  member_states: StateRef[];
}

export interface BsvEdgeDoc {
  from: string;
  to: string;
  multiplicity: number;
  storyline_ids: string[];
}

export interface BsvGraphDoc {
  view: "timeline_1d" | "compact_1d" | "grid_2d";
  batch_id: number;
  dimension_ids: string[];
  nodes: BsvNodeDoc[];
  edges: BsvEdgeDoc[];
  dimensions: DimensionDoc[];
  storyline_colors: Record<string, string>;
  previous_overlay?: Omit<BsvGraphDoc, "dimensions" | "storyline_colors">;
}

export interface HighlightDoc {
  provenance: string;
  states: StateRef[];
}

export interface PanelDoc {
  panel_id: string;
  dimension_ids: string[];
  view: string;
  position: { x: number; y: number };
  comparison: boolean;
}

export interface TranscriptTurn {
  role: "game_master" | "player";
  text: string;
}

export interface PlaytestStateDoc {
  session_id: string;
  round_index: number;
  transcript: TranscriptTurn[];
  triggers: { rule_id: string; round: number; rationale: string }[];
  warnings: string[];
}

export interface BatchRound {
  gm_text: string;
  player_text: string;
  triggered_rule_ids: string[];
}

export interface BatchFileDoc {
  format_version: number;
  storylines: {
    id: string;
    player_profile: string | null;
    rounds: BatchRound[];
  }[];
}

export interface JobDoc {
  job_id: string;
  kind: string;
  status: "pending" | "running" | "done" | "error";
  result: Record<string, unknown> | null;
  error: string | null;
}

/** A single state rendered as one colored dot on the canvas. */
export interface Dot {
  /** "storylineId@timestep", unique per dot. */
  key: string;
  storylineId: string;
  timestep: number;
  /** Grid column of the containing cell (0-based). */
  col: number;
  /** Grid row of the containing cell (0-based). */
  row: number;
  /** Position of this dot among its cell's dots (for within-cell offsets). */
  indexInCell: number;
  cellSize: number;
  nodeId: string;
  color: string;
}

export interface LayoutEdge {
  fromNodeId: string;
  toNodeId: string;
  multiplicity: number;
}

export interface DotLayout {
  view: BsvGraphDoc["view"];
  /** Column captions (timesteps for timelines, first-dimension values for grids). */
  columnLabels: string[];
  /** Row captions (dimension values; empty label rows never occur). */
  rowLabels: string[];
  dots: Dot[];
  edges: LayoutEdge[];
  /** Per-node dot counts, e.g. for compact-view badges. */
  nodeCounts: Record<string, number>;
}

export function stateKey(ref: StateRef): string {
  return `${ref.storyline_id}@${ref.timestep}`;
}
