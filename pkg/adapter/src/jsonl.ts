import { readFileSync, writeFileSync, mkdirSync } from "node:fs";
import { dirname } from "node:path";

import type { DatasetInstance } from "./types.js";

export function readJsonl(path: string): unknown[] {
  return readFileSync(path, "utf-8")
    .split("\n")
    .filter((line) => line.trim().length > 0)
    .map((line) => JSON.parse(line));
}

export function writeLines(path: string, lines: string[]): void {
  mkdirSync(dirname(path), { recursive: true });
  writeFileSync(path, lines.join("\n") + "\n", "utf-8");
}

export function writeJsonl(path: string, records: unknown[]): void {
  writeLines(
    path,
    records.map((rec) => JSON.stringify(rec)),
  );
}

/** Load dataset.jsonl, skipping the optional rating-scale header record. */
export function loadDataset(path: string): DatasetInstance[] {
  const instances: DatasetInstance[] = [];
  for (const raw of readJsonl(path)) {
    const rec = raw as Record<string, unknown>;
    if (rec.instance_id === undefined) continue; // header record
    for (const field of [
      "instance_id",
      "language",
      "task",
      "direction",
      "system_id",
      "source_text",
      "generated_text",
      "target_style_label",
    ]) {
      if (rec[field] === undefined || rec[field] === null) {
        throw new Error(`dataset record missing field '${field}'`);
      }
    }
    instances.push(rec as unknown as DatasetInstance);
  }
  if (instances.length === 0) throw new Error(`no instances in ${path}`);
  return instances;
}
