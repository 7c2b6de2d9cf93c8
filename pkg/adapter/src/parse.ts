import { tokenize } from "./tokenize.js";
import { PLAIN_SLOTS, slotText, type DatasetInstance } from "./types.js";

/** Rule-based dependency parsing and AMR-style graph generation.
 *
 * This is a deterministic heuristic parser, not a statistical one: good
 * enough to exercise tree/graph metrics with schema-valid, linguistically
 * plausible structures. Attachment rules only point forward or at the
 * root, which guarantees a single-root acyclic tree.
 */

const VERBS = new Set([
  // en copulas/light verbs
  "is", "was", "are", "were", "be", "been", "seems", "seemed", "felt",
  "feel", "looks", "looked", "can", "charge", "runs", "ran", "made",
  // hi
  "था", "थी", "है", "हैं", "लगा", "रहा", "रही",
  // bn
  "ছিল", "লাগল", "হয়", "আছে",
]);

const DETS = new Set([
  "the", "this", "that", "my", "a", "an", "his", "her", "so",
  "यह", "वह", "मेरा", "एक",
  "এই", "সেই", "আমার", "একটা",
]);

const ADVS = new Set([
  "really", "quite", "honestly", "truly", "very", "too",
  "बहुत", "काफ़ी", "सच",
  "খুব", "বেশ", "সত্যিই",
]);

const ADJS = new Set([
  "great", "lovely", "excellent", "wonderful", "awful", "terrible",
  "horrible", "dreadful", "fair", "bloody", "good", "bad", "nice",
  "अच्छा", "शानदार", "बेहतरीन", "खराब", "बेकार", "घटिया",
  "ভালো", "চমৎকার", "দারুণ", "খারাপ", "বাজে", "জঘন্য",
]);

const PUNCT = /^\p{P}+$/u;

export interface ParsedToken {
  index: number; // 1-based
  form: string;
  lemma: string;
  upos: string;
  head: number; // 0 = root
  deprel: string;
}

function uposOf(token: string): string {
  const lower = token.toLowerCase();
  if (PUNCT.test(token)) return "PUNCT";
  if (VERBS.has(lower)) return "VERB";
  if (DETS.has(lower)) return "DET";
  if (ADVS.has(lower)) return "ADV";
  if (ADJS.has(lower)) return "ADJ";
  return "NOUN";
}

function lemmaOf(token: string, upos: string, language: string): string {
  const lower = token.toLowerCase();
  if (language === "en" && upos === "NOUN" && lower.endsWith("s") && lower.length > 3) {
    return lower.slice(0, -1);
  }
  return lower;
}

export function parseSentence(text: string, language: string): ParsedToken[] {
  const forms = tokenize(text);
  const upos = forms.map(uposOf);
  const n = forms.length;
  // root: first verb, else first non-punct token, else token 1
  let root = upos.indexOf("VERB") + 1;
  if (root === 0) root = upos.findIndex((u) => u !== "PUNCT") + 1;
  if (root === 0) root = 1;

  const nextOf = (from: number, wanted: string[]): number => {
    for (let j = from + 1; j < n; j++) {
      if (wanted.includes(upos[j])) return j + 1;
    }
    return root;
  };

  const tokens: ParsedToken[] = [];
  for (let i = 0; i < n; i++) {
    const index = i + 1;
    let head: number;
    let deprel: string;
    if (index === root) {
      head = 0;
      deprel = "root";
    } else if (upos[i] === "PUNCT") {
      head = root;
      deprel = "punct";
    } else if (upos[i] === "DET") {
      head = nextOf(i, ["NOUN"]);
      deprel = head === root ? "dep" : "det";
    } else if (upos[i] === "ADV") {
      head = nextOf(i, ["ADJ", "VERB"]);
      deprel = "advmod";
    } else if (upos[i] === "ADJ") {
      const noun = nextOf(i, ["NOUN"]);
      head = noun !== root ? noun : root;
      deprel = head === root ? "xcomp" : "amod";
    } else {
      head = root;
      deprel = index < root ? "nsubj" : "obj";
    }
    if (head === index) head = root === index ? 0 : root; // never self-attach
    tokens.push({
      index,
      form: forms[i],
      lemma: lemmaOf(forms[i], upos[i], language),
      upos: upos[i],
      head,
      deprel,
    });
  }
  return tokens;
}

export function toConllu(tokens: ParsedToken[]): string {
  return tokens
    .map((t) =>
      [t.index, t.form, t.lemma, t.upos, "_", "_", t.head, t.deprel, "_", "_"].join("\t"),
    )
    .join("\n");
}

const DEPREL_TO_RELATION: Record<string, string> = {
  nsubj: "ARG0",
  obj: "ARG1",
  xcomp: "ARG1",
  amod: "mod",
  advmod: "degree",
  dep: "mod",
};

function sanitizeConcept(lemma: string): string {
  const cleaned = lemma.replace(/[()"/\s]+/g, "-");
  return cleaned.length > 0 ? cleaned : "thing";
}

/** AMR-style expression from the parse: determiners and punctuation are
 * dropped, dependency relations map onto a small relation vocabulary. */
export function toPenman(tokens: ParsedToken[]): string {
  const kept = tokens.filter((t) => t.upos !== "PUNCT" && t.upos !== "DET");
  if (kept.length === 0) {
    return "(a0 / empty)";
  }
  const keptIds = new Set(kept.map((t) => t.index));
  const varOf = new Map<number, string>();
  kept.forEach((t, i) => varOf.set(t.index, `a${i}`));

  const effectiveHead = (t: ParsedToken): number => {
    let head = t.head;
    const byIndex = new Map(tokens.map((tok) => [tok.index, tok]));
    while (head !== 0 && !keptIds.has(head)) {
      head = byIndex.get(head)!.head;
    }
    return head;
  };

  const children = new Map<number, ParsedToken[]>();
  let rootTok: ParsedToken | null = null;
  for (const t of kept) {
    const head = effectiveHead(t);
    if (head === 0 || !keptIds.has(head)) {
      if (rootTok === null) rootTok = t;
      else {
        children.set(rootTok.index, [...(children.get(rootTok.index) ?? []), t]);
      }
      continue;
    }
    children.set(head, [...(children.get(head) ?? []), t]);
  }
  if (rootTok === null) rootTok = kept[0];

  const emit = (t: ParsedToken): string => {
    let expr = `(${varOf.get(t.index)} / ${sanitizeConcept(t.lemma)}`;
    for (const child of children.get(t.index) ?? []) {
      const rel = DEPREL_TO_RELATION[child.deprel] ?? "mod";
      expr += ` :${rel} ${emit(child)}`;
    }
    expr += ")";
    return expr;
  };
  return emit(rootTok);
}

export interface ParseArtifacts {
  conllu: string[];
  penman: string[];
}

export function buildParseArtifacts(instances: DatasetInstance[]): ParseArtifacts {
  const conllu: string[] = [];
  const penman: string[] = [];
  for (const inst of instances) {
    for (const slot of PLAIN_SLOTS) {
      const text = slotText(inst, slot);
      if (text === null) continue;
      const tokens = parseSentence(text, inst.language);
      const header = `# instance_id = ${inst.instance_id}\n# slot = ${slot}\n`;
      conllu.push(header + toConllu(tokens));
      penman.push(header + toPenman(tokens));
    }
  }
  return { conllu, penman };
}
