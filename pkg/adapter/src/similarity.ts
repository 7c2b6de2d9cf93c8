import { sentenceVector } from "./embeddings.js";
import type { ScoreRecord } from "./lm.js";
import { round5 } from "./rng.js";
import { tokenize } from "./tokenize.js";
import type { DatasetInstance } from "./types.js";

/** Learned-similarity stand-ins for the ingested neural content scores.
 *
 * Both map a sentence-embedding cosine onto [0, 1]; the two metrics use
 * different embedding spaces so their columns are correlated but not
 * identical, as the real models' outputs would be.
 */

function cosine(a: number[], b: number[]): number {
  let dot = 0;
  let na = 0;
  let nb = 0;
  for (let i = 0; i < a.length; i++) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na === 0 || nb === 0) return 0;
  return dot / Math.sqrt(na * nb);
}

function similarity(generated: string, comparison: string, space: string): number {
  const a = sentenceVector(tokenize(generated), space);
  const b = sentenceVector(tokenize(comparison), space);
  return (cosine(a, b) + 1) / 2;
}

export function buildSimilarityRecords(instances: DatasetInstance[]): ScoreRecord[] {
  const records: ScoreRecord[] = [];
  for (const inst of instances) {
    const comparison = inst.reference_text ?? inst.source_text;
    records.push({
      instance_id: inst.instance_id,
      metric_id: "bleurt",
      value: round5(similarity(inst.generated_text, comparison, "bleurt-v1")),
    });
    records.push({
      instance_id: inst.instance_id,
      metric_id: "s3bert",
      value: round5(similarity(inst.generated_text, comparison, "s3bert-v1")),
    });
  }
  return records;
}
