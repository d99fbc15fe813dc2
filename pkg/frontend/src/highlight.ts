/** Apply a server-computed highlight set to a dot layout.
 *
 * The client never derives which states match a storyline, value, or
 * timestep selection — it only marks the dots named by the service.
 */

import type { DotLayout, HighlightDoc } from "./types.js";
import { stateKey } from "./types.js";

export interface HighlightedLayout {
  /** Dot keys ("storyline@timestep") to render emphasized. */
  selected: Set<string>;
  /** Node ids that contain at least one selected dot. */
  selectedNodes: Set<string>;
}

export function applyHighlight(
  layout: DotLayout,
  highlight: HighlightDoc,
): HighlightedLayout {
  const wanted = new Set(highlight.states.map(stateKey));
  const selected = new Set<string>();
  const selectedNodes = new Set<string>();
  for (const dot of layout.dots) {
    if (wanted.has(dot.key)) {
      selected.add(dot.key);
      selectedNodes.add(dot.nodeId);
    }
  }
  return { selected, selectedNodes };
}

export function clearHighlight(): HighlightedLayout {
  return { selected: new Set(), selectedNodes: new Set() };
}
