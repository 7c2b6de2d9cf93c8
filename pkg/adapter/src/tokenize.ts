/** Whitespace tokenizer that peels punctuation off token edges.
 *
 * Unicode-safe for Devanagari/Bengali: combining vowel signs stay attached
 * to their stems (a \w-based regex would split them off).
 */

const PUNCT = /\p{P}/u;

export function tokenize(text: string): string[] {
  const tokens: string[] = [];
  for (const chunk of text.split(/\s+/).filter((c) => c.length > 0)) {
    const chars = Array.from(chunk);
    let start = 0;
    let end = chars.length;
    const lead: string[] = [];
    while (start < end && PUNCT.test(chars[start])) {
      lead.push(chars[start]);
      start++;
    }
    const trail: string[] = [];
    while (end > start && PUNCT.test(chars[end - 1])) {
      trail.push(chars[end - 1]);
      end--;
    }
    tokens.push(...lead);
    if (start < end) tokens.push(chars.slice(start, end).join(""));
    tokens.push(...trail.reverse());
  }
  return tokens;
}
