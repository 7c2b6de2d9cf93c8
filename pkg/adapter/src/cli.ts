import { join } from "node:path";

import { buildStyleDistRecords } from "./classifier.js";
import { buildTokenRecords } from "./embeddings.js";
import { buildJudgeCacheRecords } from "./judgments.js";
import { defaultStyleLexicon, loadLexiconFile } from "./lexicon.js";
import { buildPerplexityRecords, type ScoreRecord } from "./lm.js";
import { loadDataset, writeJsonl, writeLines } from "./jsonl.js";
import { buildParseArtifacts } from "./parse.js";
import { buildSimilarityRecords } from "./similarity.js";

const USAGE = `usage: node dist/cli.js <command> --dataset PATH --out DIR [--lexicon PATH] [--model-id ID]

commands:
  style-dists    write style_dists.jsonl (classifier distributions)
  embeddings     write tokens.jsonl (token/sentence vectors, IDF, masks)
  parses         write parses.conllu and amr.penman
  perplexities   write perplexity rows into external_scores.jsonl
  similarity     write bleurt/s3bert rows into external_scores.jsonl
  judgments      write judge_cache.jsonl (offline-replayable ratings)
  all            everything above (scores merged into external_scores.jsonl)
`;

interface Args {
  command: string;
  dataset: string;
  out: string;
  lexicon?: string;
  modelId: string;
}

function parseArgs(argv: string[]): Args {
  const [command, ...rest] = argv;
  if (!command || command === "--help" || command === "-h") {
    throw new Error(USAGE);
  }
  const flags = new Map<string, string>();
  for (let i = 0; i < rest.length; i += 2) {
    if (!rest[i].startsWith("--") || rest[i + 1] === undefined) {
      throw new Error(USAGE);
    }
    flags.set(rest[i].slice(2), rest[i + 1]);
  }
  const dataset = flags.get("dataset");
  const out = flags.get("out");
  if (!dataset || !out) throw new Error(USAGE);
  return {
    command,
    dataset,
    out,
    lexicon: flags.get("lexicon"),
    modelId: flags.get("model-id") ?? "heuristic-judge-v1",
  };
}

export function run(argv: string[]): void {
  const args = parseArgs(argv);
  const instances = loadDataset(args.dataset);
  const lexicon = args.lexicon ? loadLexiconFile(args.lexicon) : defaultStyleLexicon();

  const emitted: string[] = [];
  const emit = (name: string, write: () => void) => {
    write();
    emitted.push(name);
  };

  const wantAll = args.command === "all";
  const scoreRecords: ScoreRecord[] = [];

  if (wantAll || args.command === "style-dists") {
    emit("style_dists.jsonl", () =>
      writeJsonl(join(args.out, "style_dists.jsonl"), buildStyleDistRecords(instances)),
    );
  }
  if (wantAll || args.command === "embeddings") {
    emit("tokens.jsonl", () =>
      writeJsonl(join(args.out, "tokens.jsonl"), buildTokenRecords(instances, lexicon)),
    );
  }
  if (wantAll || args.command === "parses") {
    const parses = buildParseArtifacts(instances);
    emit("parses.conllu", () =>
      writeLines(join(args.out, "parses.conllu"), [parses.conllu.join("\n\n")]),
    );
    emit("amr.penman", () =>
      writeLines(join(args.out, "amr.penman"), [parses.penman.join("\n\n")]),
    );
  }
  if (wantAll || args.command === "perplexities") {
    scoreRecords.push(...buildPerplexityRecords(instances));
  }
  if (wantAll || args.command === "similarity") {
    scoreRecords.push(...buildSimilarityRecords(instances));
  }
  if (scoreRecords.length > 0) {
    emit("external_scores.jsonl", () =>
      writeJsonl(join(args.out, "external_scores.jsonl"), scoreRecords),
    );
  }
  if (wantAll || args.command === "judgments") {
    emit("judge_cache.jsonl", () =>
      writeJsonl(
        join(args.out, "judge_cache.jsonl"),
        buildJudgeCacheRecords(instances, args.modelId),
      ),
    );
  }
  if (emitted.length === 0) throw new Error(USAGE);
  console.log(`emitted ${emitted.join(", ")} for ${instances.length} instances into ${args.out}`);
}

const isMain = process.argv[1]?.endsWith("cli.js");
if (isMain) {
  try {
    run(process.argv.slice(2));
  } catch (err) {
    console.error(err instanceof Error ? err.message : err);
    process.exit(1);
  }
}
