import { createHash } from "node:crypto";

import { positiveClassProbability } from "./classifier.js";
import { tokenize } from "./tokenize.js";
import type { DatasetInstance } from "./types.js";

/** Optional: heuristic judgments written straight into the engine's judge
 * cache format, so a downstream `judge` run replays fully offline.
 *
 * Cache keys must agree with the engine: sha256 over
 * template_id \x1f instance_id \x1f model_id.
 */

export const JUDGE_TEMPLATES = [
  "style_likert",
  "style_binary",
  "content_likert",
  "fluency_likert",
] as const;

export function cacheKey(templateId: string, instanceId: string, modelId: string): string {
  return createHash("sha256")
    .update([templateId, instanceId, modelId].join("\x1f"), "utf-8")
    .digest("hex");
}

function clampLikert(x: number): number {
  return Math.min(5, Math.max(1, Math.round(x)));
}

function styleRating(inst: DatasetInstance): number {
  const p = positiveClassProbability(inst.generated_text);
  const towardTarget = inst.target_style_label === 1 ? p : 1 - p;
  return clampLikert(1 + 4 * towardTarget);
}

function contentRating(inst: DatasetInstance): number {
  const src = new Set(tokenize(inst.source_text).map((t) => t.toLowerCase()));
  const gen = tokenize(inst.generated_text).map((t) => t.toLowerCase());
  if (gen.length === 0) return 1;
  const overlap = gen.filter((t) => src.has(t)).length / gen.length;
  return clampLikert(1 + 4 * overlap);
}

function fluencyRating(inst: DatasetInstance): number {
  const tokens = tokenize(inst.generated_text);
  const repeats = tokens.filter((t, i) => i > 0 && t === tokens[i - 1]).length;
  return clampLikert(5 - 2 * repeats);
}

export interface CacheRecord {
  key: string;
  prompt: string;
  raw_text: string;
  timestamp: number;
}

export function buildJudgeCacheRecords(
  instances: DatasetInstance[],
  modelId: string,
): CacheRecord[] {
  const records: CacheRecord[] = [];
  for (const inst of instances) {
    const ratings: Record<string, number> = {
      style_likert: styleRating(inst),
      style_binary: styleRating(inst) >= 4 ? 1 : 0,
      content_likert: contentRating(inst),
      fluency_likert: fluencyRating(inst),
    };
    for (const template of JUDGE_TEMPLATES) {
      records.push({
        key: cacheKey(template, inst.instance_id, modelId),
        prompt: "",
        raw_text: String(ratings[template]),
        timestamp: 0,
      });
    }
  }
  return records;
}
