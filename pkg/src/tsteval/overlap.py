"""Word-overlap content metrics over pre-tokenized sentences.

Sentence-level BLEU, Masked BLEU, ROUGE-2, ROUGE-L, METEOR, TER and PINC.
All functions are pure; callers may evaluate instances in parallel.
"""

from __future__ import annotations

import itertools
import math
import unicodedata
from collections import Counter
from pathlib import Path
from typing import Callable, Iterable, Sequence

MASK_TOKEN = "\u27e8MASK\u27e9"  # ⟨MASK⟩


def _is_punct(ch: str) -> bool:
    return unicodedata.category(ch).startswith("P")


def simple_tokenize(text: str) -> list[str]:
    """Fallback whitespace+punctuation splitter for raw text.

    Splits on whitespace and peels punctuation off token edges (regex \\w
    classes would split Devanagari/Bengali matras away from their stems).
    Language-aware tokenization is the adapter's job; this splitter only
    backs metrics when no token annotations were supplied.
    """
    tokens: list[str] = []
    for chunk in text.split():
        start, end = 0, len(chunk)
        lead = []
        while start < end and _is_punct(chunk[start]):
            lead.append(chunk[start])
            start += 1
        trail = []
        while end > start and _is_punct(chunk[end - 1]):
            trail.append(chunk[end - 1])
            end -= 1
        tokens.extend(lead)
        if start < end:
            tokens.append(chunk[start:end])
        tokens.extend(reversed(trail))
    return tokens


def load_lexicon(path: str | Path) -> frozenset[str]:
    """Read a style lexicon: one lowercase token per line, blanks ignored."""
    with open(path, encoding="utf-8") as fh:
        return frozenset(line.strip().lower() for line in fh if line.strip())


def ngram_counts(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def _require_nonempty(*seqs: Sequence[str]) -> None:
    for seq in seqs:
        if len(seq) == 0:
            raise ValueError("empty sequence")


def bleu(candidate: Sequence[str], reference: Sequence[str], max_n: int = 4) -> float:
    """Sentence-level BLEU.

    Geometric mean of clipped modified n-gram precisions with add-one
    smoothing for n >= 2, times the brevity penalty. Zero unigram precision
    forces a hard 0; n-levels the candidate is too short for are skipped.
    """
    _require_nonempty(candidate, reference)
    log_sum = 0.0
    used = 0
    for n in range(1, max_n + 1):
        total = len(candidate) - n + 1
        if total <= 0:
            break
        cand_counts = ngram_counts(candidate, n)
        ref_counts = ngram_counts(reference, n)
        matches = sum(
            min(count, ref_counts[gram]) for gram, count in cand_counts.items()
        )
        if n == 1:
            if matches == 0:
                return 0.0
            p = matches / total
        else:
            p = (matches + 1) / (total + 1)
        log_sum += math.log(p)
        used += 1
    bp = math.exp(min(0.0, 1.0 - len(reference) / len(candidate)))
    return math.exp(log_sum / used) * bp


def mask_tokens(
    sentence: Sequence[str],
    lexicon: Iterable[str] | None = None,
    flags: Sequence[bool] | None = None,
) -> list[str]:
    """Replace style-bearing tokens with the literal mask token.

    A token is masked when its case-folded form is in the lexicon or its
    mask flag is true. Length-preserving and idempotent.
    """
    lex = frozenset(w.lower() for w in lexicon) if lexicon is not None else frozenset()
    if flags is not None and len(flags) != len(sentence):
        raise ValueError(
            f"{len(flags)} mask flags for {len(sentence)} tokens"
        )
    out = []
    for i, tok in enumerate(sentence):
        flagged = flags[i] if flags is not None else False
        out.append(MASK_TOKEN if flagged or tok.lower() in lex else tok)
    return out


def masked_bleu(
    candidate: Sequence[str],
    reference: Sequence[str],
    lexicon: Iterable[str] | None = None,
    cand_flags: Sequence[bool] | None = None,
    ref_flags: Sequence[bool] | None = None,
    max_n: int = 4,
) -> float:
    """BLEU over both sequences with style tokens masked (compositional)."""
    return bleu(
        mask_tokens(candidate, lexicon, cand_flags),
        mask_tokens(reference, lexicon, ref_flags),
        max_n=max_n,
    )


def _f1(p: float, r: float) -> float:
    return 0.0 if p + r == 0 else 2 * p * r / (p + r)


def rouge_2(candidate: Sequence[str], reference: Sequence[str]) -> float:
    """Bigram-overlap F1 (beta=1). Sequences shorter than 2 tokens score 0."""
    _require_nonempty(candidate, reference)
    if len(candidate) < 2 or len(reference) < 2:
        return 0.0
    cand_counts = ngram_counts(candidate, 2)
    ref_counts = ngram_counts(reference, 2)
    matches = sum(min(c, ref_counts[g]) for g, c in cand_counts.items())
    p = matches / (len(candidate) - 1)
    r = matches / (len(reference) - 1)
    return _f1(p, r)


def _lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for j, y in enumerate(b, start=1):
            cur.append(prev[j - 1] + 1 if x == y else max(prev[j], cur[j - 1]))
        prev = cur
    return prev[-1]


def rouge_l(candidate: Sequence[str], reference: Sequence[str]) -> float:
    """Longest-common-subsequence F1 (beta=1, hence symmetric)."""
    _require_nonempty(candidate, reference)
    lcs = _lcs_length(candidate, reference)
    return _f1(lcs / len(candidate), lcs / len(reference))


# METEOR alignment: stage matchers pair yet-unmatched tokens that are equal
# under the stage key. Among maximum-size stage alignments we pick the one
# with fewest crossings against the full alignment built so far, breaking
# remaining ties toward fewest chunks (the quantity the penalty reads).
# Within one surface key, monotone pairing of the chosen occurrences is
# always crossing-optimal, so only the occurrence subsets are enumerated.
_METEOR_ALPHA = 0.9
_METEOR_BETA = 3.0
_METEOR_GAMMA = 0.5
_MAX_SUBSET_COMBOS = 200_000


def _crossings(pairs: list[tuple[int, int]]) -> int:
    count = 0
    for (i1, j1), (i2, j2) in itertools.combinations(pairs, 2):
        if (i1 - i2) * (j1 - j2) < 0:
            count += 1
    return count


def _chunk_count(pairs: list[tuple[int, int]]) -> int:
    if not pairs:
        return 0
    pairs = sorted(pairs)
    chunks = 1
    for (i1, j1), (i2, j2) in zip(pairs, pairs[1:]):
        if not (i2 == i1 + 1 and j2 == j1 + 1):
            chunks += 1
    return chunks


def _stage_align(
    cand_keys: list[str | None],
    ref_keys: list[str | None],
    free_cand: list[int],
    free_ref: list[int],
    existing: list[tuple[int, int]],
) -> list[tuple[int, int]]:
    by_key: dict[str, tuple[list[int], list[int]]] = {}
    for i in free_cand:
        key = cand_keys[i]
        if key is not None:
            by_key.setdefault(key, ([], []))[0].append(i)
    for j in free_ref:
        key = ref_keys[j]
        if key is not None and key in by_key:
            by_key[key][1].append(j)

    groups = []
    combos = 1
    for key, (ci, rj) in sorted(by_key.items()):
        m = min(len(ci), len(rj))
        if m == 0:
            continue
        choices = math.comb(len(ci), m) * math.comb(len(rj), m)
        combos *= max(choices, 1)
        groups.append((ci, rj, m))
    if not groups:
        return []

    def pairings(group_choices):
        pairs = []
        for (ci, rj, m), (csub, rsub) in group_choices:
            pairs.extend(zip(sorted(csub), sorted(rsub)))
        return pairs

    if combos <= _MAX_SUBSET_COMBOS:
        options_per_group = [
            [
                ((ci, rj, m), (csub, rsub))
                for csub in itertools.combinations(ci, m)
                for rsub in itertools.combinations(rj, m)
            ]
            for ci, rj, m in groups
        ]
        best_pairs: list[tuple[int, int]] | None = None
        best_key: tuple[int, int] | None = None
        for combo in itertools.product(*options_per_group):
            pairs = pairings(combo)
            merged = pairs + existing
            key = (_crossings(merged), _chunk_count(merged))
            if best_key is None or key < best_key:
                best_pairs, best_key = pairs, key
        return best_pairs or []
    # combinatorial blow-up: first occurrences, monotone pairing
    return pairings([((ci, rj, m), (ci[:m], rj[:m])) for ci, rj, m in groups])


def meteor(
    candidate: Sequence[str],
    reference: Sequence[str],
    stemmer: Callable[[str], str] | None = None,
    synonyms: Iterable[frozenset[str] | set[str]] | None = None,
) -> float:
    """Staged unigram-alignment score (exact, then stem, then synonym).

    Hindi/Bengali default to exact-only matching: pass no stemmer/synonyms.
    """
    _require_nonempty(candidate, reference)

    syn_index: dict[str, set[int]] = {}
    if synonyms is not None:
        for gid, group in enumerate(synonyms):
            for word in group:
                syn_index.setdefault(word.lower(), set()).add(gid)

    def exact_key(tok: str) -> str:
        return tok.lower()

    def stem_key(tok: str) -> str | None:
        return stemmer(tok.lower()) if stemmer is not None else None

    def syn_key(tok: str) -> str | None:
        gids = syn_index.get(tok.lower())
        return str(min(gids)) if gids else None

    stages: list[Callable[[str], str | None]] = [exact_key]
    if stemmer is not None:
        stages.append(stem_key)
    if synonyms is not None:
        stages.append(syn_key)

    alignment: list[tuple[int, int]] = []
    matched_cand: set[int] = set()
    matched_ref: set[int] = set()
    for key_fn in stages:
        free_cand = [i for i in range(len(candidate)) if i not in matched_cand]
        free_ref = [j for j in range(len(reference)) if j not in matched_ref]
        cand_keys = [key_fn(t) for t in candidate]
        ref_keys = [key_fn(t) for t in reference]
        new_pairs = _stage_align(cand_keys, ref_keys, free_cand, free_ref, alignment)
        alignment.extend(new_pairs)
        matched_cand.update(i for i, _ in new_pairs)
        matched_ref.update(j for _, j in new_pairs)

    matches = len(alignment)
    if matches == 0:
        return 0.0
    p = matches / len(candidate)
    r = matches / len(reference)
    fmean = p * r / (_METEOR_ALPHA * p + (1 - _METEOR_ALPHA) * r)
    chunks = _chunk_count(alignment)
    penalty = _METEOR_GAMMA * (chunks / matches) ** _METEOR_BETA
    return fmean * (1 - penalty)


def word_edit_distance(a: Sequence[str], b: Sequence[str]) -> int:
    """Word-level Levenshtein distance (unit insert/delete/substitute)."""
    prev = list(range(len(b) + 1))
    for i, x in enumerate(a, start=1):
        cur = [i]
        for j, y in enumerate(b, start=1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (x != y)))
        prev = cur
    return prev[-1]


def ter(
    candidate: Sequence[str],
    reference: Sequence[str],
    enable_shifts: bool = True,
) -> float:
    """Translation edit rate: (block shifts + word edits) / |reference|.

    The shift loop greedily applies the single block move that most reduces
    the remaining edit distance, breaking ties toward the smallest
    (block start, block length, target position); each shift costs one edit.
    """
    if len(reference) == 0:
        raise ValueError("empty reference")
    shifts = 0
    current = list(candidate)
    if enable_shifts:
        while True:
            base = word_edit_distance(current, reference)
            if base == 0:
                break
            best: tuple[int, int, int, int] | None = None  # (-reduction, start, length, target)
            best_seq: list[str] | None = None
            n = len(current)
            for start in range(n):
                for length in range(1, n - start + 1):
                    block = current[start : start + length]
                    rest = current[:start] + current[start + length :]
                    for target in range(len(rest) + 1):
                        shifted = rest[:target] + block + rest[target:]
                        if shifted == current:
                            continue
                        reduction = base - word_edit_distance(shifted, reference)
                        if reduction < 1:
                            continue
                        key = (-reduction, start, length, target)
                        if best is None or key < best:
                            best, best_seq = key, shifted
            if best_seq is None:
                break
            shifts += 1
            current = best_seq
    edits = shifts + word_edit_distance(current, reference)
    return edits / len(reference)


def pinc(
    source: Sequence[str], candidate: Sequence[str], max_n: int = 4
) -> float:
    """Mean n-gram novelty of the candidate relative to its source.

    Levels where the candidate has no n-grams are skipped; distinct n-grams
    (set semantics) are compared.
    """
    if len(candidate) == 0:
        raise ValueError("empty candidate")
    total = 0.0
    levels = 0
    for n in range(1, max_n + 1):
        cand_grams = set(ngram_counts(candidate, n))
        if not cand_grams:
            break
        src_grams = set(ngram_counts(source, n))
        total += 1 - len(cand_grams & src_grams) / len(cand_grams)
        levels += 1
    return total / levels
