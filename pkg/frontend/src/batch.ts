/** Structural validation of exported playthrough batch files.
 *
 * Used before offering an export for download, so a malformed document is
 * caught client-side with a readable error list instead of a failed
 * re-upload later.
 */

import type { BatchFileDoc } from "./types.js";

export function validateBatchFile(doc: unknown): string[] {
  const errors: string[] = [];
  if (typeof doc !== "object" || doc === null || Array.isArray(doc)) {
    return ["document is not a JSON object"];
  }
  const d = doc as Partial<BatchFileDoc>;
  if (d.format_version !== 1) {
    errors.push(`format_version must be 1, got ${JSON.stringify(d.format_version)}`);
  }
  if (!Array.isArray(d.storylines)) {
    errors.push("storylines must be an array");
    return errors;
  }
  const seen = new Set<string>();
  d.storylines.forEach((storyline, i) => {
    const where = `storylines[${i}]`;
    if (typeof storyline.id !== "string" || storyline.id === "") {
      errors.push(`${where}.id must be a nonempty string`);
    } else if (seen.has(storyline.id)) {
      errors.push(`${where}.id duplicates ${JSON.stringify(storyline.id)}`);
    } else {
      seen.add(storyline.id);
    }
    if (storyline.player_profile !== null && typeof storyline.player_profile !== "string") {
      errors.push(`${where}.player_profile must be a string or null`);
    }
    if (!Array.isArray(storyline.rounds) || storyline.rounds.length === 0) {
      errors.push(`${where}.rounds must be a nonempty array`);
      return;
    }
    storyline.rounds.forEach((round, j) => {
      const at = `${where}.rounds[${j}]`;
      if (typeof round.gm_text !== "string" || round.gm_text.trim() === "") {
        errors.push(`${at}.gm_text must be nonempty`);
      }
      if (typeof round.player_text !== "string" || round.player_text.trim() === "") {
        errors.push(`${at}.player_text must be nonempty`);
      }
      if (!Array.isArray(round.triggered_rule_ids)) {
        errors.push(`${at}.triggered_rule_ids must be an array`);
      }
    });
  });
  return errors;
}
