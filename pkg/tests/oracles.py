"""Independent brute-force oracles used to compute expected test values.

Everything here is written from the metric definitions, deliberately not
sharing code with the package: exhaustive enumeration, naive loops and LP
solves stand in for the optimized implementations they check.
"""

from __future__ import annotations

import itertools
import math
from functools import lru_cache

import numpy as np
from scipy.optimize import linprog


# --- n-gram metrics ---------------------------------------------------------


def ngram_list(tokens, n):
    return [tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1)]


def naive_bleu(cand, ref, max_n=4):
    logs = []
    for n in range(1, max_n + 1):
        cgrams = ngram_list(cand, n)
        if not cgrams:
            break
        rgrams = ngram_list(ref, n)
        matches = sum(
            min(cgrams.count(g), rgrams.count(g)) for g in set(cgrams)
        )
        if n == 1:
            if matches == 0:
                return 0.0
            p = matches / len(cgrams)
        else:
            p = (matches + 1) / (len(cgrams) + 1)
        logs.append(math.log(p))
    bp = math.exp(min(0.0, 1.0 - len(ref) / len(cand)))
    return math.exp(sum(logs) / len(logs)) * bp


def naive_rouge2(cand, ref):
    if len(cand) < 2 or len(ref) < 2:
        return 0.0
    cgrams = ngram_list(cand, 2)
    rgrams = ngram_list(ref, 2)
    matches = sum(min(cgrams.count(g), rgrams.count(g)) for g in set(cgrams))
    p = matches / len(cgrams)
    r = matches / len(rgrams)
    return 0.0 if p + r == 0 else 2 * p * r / (p + r)


def naive_rouge_l(cand, ref):
    @lru_cache(maxsize=None)
    def lcs(i, j):
        if i == 0 or j == 0:
            return 0
        if cand[i - 1] == ref[j - 1]:
            return lcs(i - 1, j - 1) + 1
        return max(lcs(i - 1, j), lcs(i, j - 1))

    cand, ref = tuple(cand), tuple(ref)
    length = lcs(len(cand), len(ref))
    p = length / len(cand)
    r = length / len(ref)
    return 0.0 if p + r == 0 else 2 * p * r / (p + r)


def _crossings(pairs):
    return sum(
        1
        for (i1, j1), (i2, j2) in itertools.combinations(pairs, 2)
        if (i1 - i2) * (j1 - j2) < 0
    )


def _chunks_of(pairs):
    if not pairs:
        return 0
    pairs = sorted(pairs)
    return 1 + sum(
        1
        for (i1, j1), (i2, j2) in zip(pairs, pairs[1:])
        if not (i2 == i1 + 1 and j2 == j1 + 1)
    )


def naive_meteor(cand, ref):
    """Exact-match stage only; exhaustive search over all alignments.

    Selection: maximum matches, then fewest crossings, then fewest chunks.
    """
    best_key = None
    best_pairs: list = []

    def rec(i, used, pairs):
        nonlocal best_key, best_pairs
        if i == len(cand):
            key = (len(pairs), -_crossings(pairs), -_chunks_of(pairs))
            if best_key is None or key > best_key:
                best_key, best_pairs = key, list(pairs)
            return
        rec(i + 1, used, pairs)
        for j in range(len(ref)):
            if j not in used and cand[i].lower() == ref[j].lower():
                used.add(j)
                pairs.append((i, j))
                rec(i + 1, used, pairs)
                pairs.pop()
                used.remove(j)

    rec(0, set(), [])
    matches = len(best_pairs)
    if matches == 0:
        return 0.0
    p = matches / len(cand)
    r = matches / len(ref)
    fmean = p * r / (0.9 * p + 0.1 * r)
    chunks = _chunks_of(best_pairs)
    return fmean * (1 - 0.5 * (chunks / matches) ** 3)


def naive_edit_distance(a, b):
    @lru_cache(maxsize=None)
    def d(i, j):
        if i == 0:
            return j
        if j == 0:
            return i
        return min(
            d(i - 1, j) + 1,
            d(i, j - 1) + 1,
            d(i - 1, j - 1) + (a[i - 1] != b[j - 1]),
        )

    a, b = tuple(a), tuple(b)
    return d(len(a), len(b))


def naive_ter(cand, ref, enable_shifts=True):
    shifts = 0
    current = list(cand)
    while enable_shifts and naive_edit_distance(current, ref) > 0:
        base = naive_edit_distance(current, ref)
        candidates = []
        for start in range(len(current)):
            for length in range(1, len(current) - start + 1):
                block = current[start : start + length]
                rest = current[:start] + current[start + length :]
                for target in range(len(rest) + 1):
                    shifted = rest[:target] + block + rest[target:]
                    if shifted == current:
                        continue
                    reduction = base - naive_edit_distance(shifted, ref)
                    if reduction >= 1:
                        candidates.append((-reduction, start, length, target, shifted))
        if not candidates:
            break
        candidates.sort(key=lambda c: c[:4])
        shifts += 1
        current = candidates[0][4]
    return (shifts + naive_edit_distance(current, ref)) / len(ref)


def naive_pinc(src, cand, max_n=4):
    total, levels = 0.0, 0
    for n in range(1, max_n + 1):
        cgrams = set(ngram_list(cand, n))
        if not cgrams:
            break
        sgrams = set(ngram_list(src, n))
        total += 1 - len(cgrams & sgrams) / len(cgrams)
        levels += 1
    return total / levels


# --- transport --------------------------------------------------------------


def transport_lp(cost: np.ndarray, row: np.ndarray, col: np.ndarray) -> float:
    m, n = cost.shape
    a_eq = []
    for i in range(m):
        r = np.zeros((m, n))
        r[i, :] = 1
        a_eq.append(r.ravel())
    for j in range(n):
        c = np.zeros((m, n))
        c[:, j] = 1
        a_eq.append(c.ravel())
    res = linprog(
        cost.ravel(),
        A_eq=np.array(a_eq),
        b_eq=np.concatenate([row, col]),
        bounds=(0, None),
        method="highs",
        options={
            "primal_feasibility_tolerance": 1e-10,
            "dual_feasibility_tolerance": 1e-10,
        },
    )
    assert res.success, res.message
    return float(res.fun)


def emd_lp(p: np.ndarray, q: np.ndarray) -> float:
    k = len(p)
    cost = np.abs(np.arange(k)[:, None] - np.arange(k)[None, :]).astype(float)
    return transport_lp(cost, np.asarray(p, dtype=float), np.asarray(q, dtype=float))


def wmd_permutations(x: np.ndarray, y: np.ndarray) -> float:
    """Uniform-weight WMD for equal token counts: best perfect matching."""
    n = len(x)
    dist = np.linalg.norm(x[:, None, :] - y[None, :, :], axis=2)
    return min(
        float(dist[range(n), perm].mean())
        for perm in itertools.permutations(range(n))
    )


# --- tree edit distance over Tai mappings ------------------------------------


def _postorder_info(tree):
    """(labels, ancestor matrix) in postorder from an OrderedTree-like node."""
    labels: list[str] = []
    ancestor_stacks: list[list] = []

    def walk(node, open_ancestors):
        for child in node.children:
            walk(child, open_ancestors + [node])
        node._oracle_idx = len(labels)
        labels.append(node.label)
        ancestor_stacks.append(open_ancestors.copy())

    walk(tree, [])
    n = len(labels)
    anc = np.zeros((n, n), dtype=bool)
    for idx in range(n):
        for parent in ancestor_stacks[idx]:
            anc[parent._oracle_idx, idx] = True
    return labels, anc


def exhaustive_ted(t1, t2) -> int:
    """Minimum Tai-mapping cost: unit insert/delete, unit rename on label
    mismatch; mappings must preserve postorder and ancestorship both ways."""
    labels1, anc1 = _postorder_info(t1)
    labels2, anc2 = _postorder_info(t2)
    n1, n2 = len(labels1), len(labels2)
    best = n1 + n2  # empty mapping
    for k in range(1, min(n1, n2) + 1):
        for sub1 in itertools.combinations(range(n1), k):
            a1 = anc1[np.ix_(sub1, sub1)]
            for sub2 in itertools.combinations(range(n2), k):
                if not np.array_equal(a1, anc2[np.ix_(sub2, sub2)]):
                    continue
                renames = sum(
                    labels1[i] != labels2[j] for i, j in zip(sub1, sub2)
                )
                cost = (n1 - k) + (n2 - k) + renames
                if cost < best:
                    best = cost
    return best


# --- graph alignment ---------------------------------------------------------


def exhaustive_smatch(g1, g2):
    """Best matched-triple count over all injective variable mappings.

    Triples are compared with set semantics on both sides, matching the
    precision/recall denominators below.
    """
    vars1 = [v for v, _ in g1.instance_triples]
    vars2 = [v for v, _ in g2.instance_triples]
    inst1, attr1, rel1 = (
        set(g1.instance_triples),
        set(g1.attribute_triples),
        set(g1.relation_triples),
    )
    inst2 = set(g2.instance_triples)
    attr2 = set(g2.attribute_triples)
    rel2 = set(g2.relation_triples)

    best = 0

    def score(mapping: dict) -> int:
        count = 0
        for var, concept in inst1:
            if (mapping.get(var), concept) in inst2:
                count += 1
        for rel, var, val in attr1:
            if (rel, mapping.get(var), val) in attr2:
                count += 1
        for rel, src, tgt in rel1:
            if src in mapping and tgt in mapping:
                if (rel, mapping[src], mapping[tgt]) in rel2:
                    count += 1
        return count

    def rec(i, mapping, used):
        nonlocal best
        if i == len(vars1):
            best = max(best, score(mapping))
            return
        rec(i + 1, mapping, used)  # leave unmapped
        for w in vars2:
            if w not in used:
                mapping[vars1[i]] = w
                used.add(w)
                rec(i + 1, mapping, used)
                del mapping[vars1[i]]
                used.remove(w)

    rec(0, {}, set())
    total1 = (
        len(set(g1.instance_triples))
        + len(set(g1.attribute_triples))
        + len(set(g1.relation_triples))
    )
    total2 = (
        len(set(g2.instance_triples))
        + len(set(g2.attribute_triples))
        + len(set(g2.relation_triples))
    )
    p = best / total1
    r = best / total2
    f = 0.0 if p + r == 0 else 2 * p * r / (p + r)
    return p, r, f


# --- correlations ------------------------------------------------------------


def naive_pearson(x, y):
    n = len(x)
    mx = sum(x) / n
    my = sum(y) / n
    num = sum((a - mx) * (b - my) for a, b in zip(x, y))
    dx = math.sqrt(sum((a - mx) ** 2 for a in x))
    dy = math.sqrt(sum((b - my) ** 2 for b in y))
    if dx == 0 or dy == 0:
        return None
    return num / (dx * dy)


def naive_ranks(v):
    return [
        (sum(1 for w in v if w < a) + 1 + sum(1 for w in v if w <= a)) / 2 for a in v
    ]


def naive_spearman(x, y):
    return naive_pearson(naive_ranks(list(x)), naive_ranks(list(y)))


def naive_kendall_tau_b(x, y):
    concordant = discordant = tied_x_only = tied_y_only = 0
    n = len(x)
    for i in range(n):
        for j in range(i + 1, n):
            dx = x[i] - x[j]
            dy = y[i] - y[j]
            if dx == 0 and dy == 0:
                continue
            if dx == 0:
                tied_x_only += 1
            elif dy == 0:
                tied_y_only += 1
            elif dx * dy > 0:
                concordant += 1
            else:
                discordant += 1
    denom = math.sqrt(
        (concordant + discordant + tied_x_only)
        * (concordant + discordant + tied_y_only)
    )
    if denom == 0:
        return None
    return (concordant - discordant) / denom
