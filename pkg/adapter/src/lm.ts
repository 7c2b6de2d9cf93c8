import { round5 } from "./rng.js";
import { tokenize } from "./tokenize.js";
import type { DatasetInstance } from "./types.js";

/** Add-k smoothed bigram language models standing in for the causal LMs.
 *
 * Two granularities mimic the two model families: a word-bigram model
 * ("gpt2" contract) and a character-bigram model ("mgpt" contract, which
 * copes better with the multilingual scripts). The finetuned variants are
 * trained only on target-style text (references when present, otherwise
 * sources), mirroring a model adapted to the target style.
 */

const BOS = "";
const EOS = "";
const ADD_K = 0.2;

type Unit = "word" | "char";

function units(text: string, unit: Unit): string[] {
  return unit === "word" ? tokenize(text) : Array.from(text);
}

export class BigramModel {
  private bigrams = new Map<string, Map<string, number>>();
  private unigrams = new Map<string, number>();
  private vocab = new Set<string>([EOS]);

  constructor(private unit: Unit) {}

  train(sentences: string[]): this {
    for (const sent of sentences) {
      const seq = [BOS, ...units(sent, this.unit), EOS];
      for (let i = 0; i < seq.length - 1; i++) {
        const prev = seq[i];
        const cur = seq[i + 1];
        this.vocab.add(cur);
        this.unigrams.set(prev, (this.unigrams.get(prev) ?? 0) + 1);
        let row = this.bigrams.get(prev);
        if (!row) {
          row = new Map();
          this.bigrams.set(prev, row);
        }
        row.set(cur, (row.get(cur) ?? 0) + 1);
      }
    }
    return this;
  }

  /** exp(mean negative log p) over the sentence; always finite and > 0. */
  perplexity(text: string): number {
    const seq = [BOS, ...units(text, this.unit), EOS];
    const v = this.vocab.size + 1;
    let logSum = 0;
    for (let i = 0; i < seq.length - 1; i++) {
      const count = this.bigrams.get(seq[i])?.get(seq[i + 1]) ?? 0;
      const total = this.unigrams.get(seq[i]) ?? 0;
      logSum += Math.log((count + ADD_K) / (total + ADD_K * v));
    }
    return Math.exp(-logSum / (seq.length - 1));
  }
}

export interface ScoreRecord {
  instance_id: string;
  metric_id: string;
  value: number;
}

export function buildPerplexityRecords(instances: DatasetInstance[]): ScoreRecord[] {
  const baseCorpus = instances.flatMap((inst) =>
    [inst.source_text, inst.reference_text].filter((t): t is string => !!t),
  );
  const targetCorpus = instances.map(
    (inst) => inst.reference_text ?? inst.source_text,
  );
  const models: [string, BigramModel][] = [
    ["ppl_gpt2", new BigramModel("word").train(baseCorpus)],
    ["ppl_mgpt", new BigramModel("char").train(baseCorpus)],
    ["ppl_gpt2_ft", new BigramModel("word").train(targetCorpus)],
    ["ppl_mgpt_ft", new BigramModel("char").train(targetCorpus)],
  ];
  const records: ScoreRecord[] = [];
  for (const inst of instances) {
    for (const [metric, model] of models) {
      records.push({
        instance_id: inst.instance_id,
        metric_id: metric,
        value: round5(model.perplexity(inst.generated_text)),
      });
    }
  }
  return records;
}
