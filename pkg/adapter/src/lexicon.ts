import { readFileSync } from "node:fs";

/** Built-in polarity word lists for the style classifier.
 *
 * Deliberately small: the classifier is a deterministic stand-in for a
 * fine-tuned model, not a replication of one. Class 0 collects
 * negative/toxic cues, class 1 positive/clean ones, across the three
 * supported languages.
 */
export const NEGATIVE_WORDS = new Set(
  [
    // en
    "awful", "terrible", "horrible", "dreadful", "bad", "worst", "bloody",
    "idiot", "moron", "trash", "stupid", "hate", "disgusting", "ugly",
    // hi
    "खराब", "बेकार", "घटिया", "बेवकूफ", "गधा", "नालायक", "बुरा",
    // bn
    "খারাপ", "বাজে", "জঘন্য", "বোকা", "গাধা", "অপদার্থ",
  ].map((w) => w.toLowerCase()),
);

export const POSITIVE_WORDS = new Set(
  [
    // en
    "great", "lovely", "excellent", "wonderful", "good", "best", "fair",
    "nice", "person", "fellow", "colleague", "friend", "kind", "beautiful",
    // hi
    "अच्छा", "शानदार", "बेहतरीन", "व्यक्ति", "इंसान", "साथी",
    // bn
    "ভালো", "চমৎকার", "দারুণ", "মানুষ", "বন্ধু", "সহকর্মী",
  ].map((w) => w.toLowerCase()),
);

export function defaultStyleLexicon(): Set<string> {
  return new Set([...NEGATIVE_WORDS, ...POSITIVE_WORDS]);
}

/** One lowercase token per line; blank lines ignored. */
export function loadLexiconFile(path: string): Set<string> {
  return new Set(
    readFileSync(path, "utf-8")
      .split("\n")
      .map((line) => line.trim().toLowerCase())
      .filter((line) => line.length > 0),
  );
}
