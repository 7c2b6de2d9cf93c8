"""Graph-overlap F1 between semantic graphs via variable alignment.

The best injective mapping from one graph's variables to the other's is
searched by hill-climbing: one greedy concept-matching start plus random
concept-biased restarts, with single-reassignment and swap moves, taking
the best improvement and walking short plateaus when no move improves the
matched-triple count. Deterministic given the seed; randomness always
comes from the caller-provided seed, never ambient state.
"""

from __future__ import annotations

import random
from typing import NamedTuple

from .penman import SemanticGraph


class SmatchResult(NamedTuple):
    precision: float
    recall: float
    f1: float


def _triple_sets(g: SemanticGraph):
    instances = {(var, concept) for var, concept in g.instance_triples}
    attributes = {(rel, var, val) for rel, var, val in g.attribute_triples}
    relations = {(rel, src, tgt) for rel, src, tgt in g.relation_triples}
    return instances, attributes, relations


def _match_count(
    mapping: list[int | None],
    vars1: list[str],
    vars2: list[str],
    t1,
    t2,
) -> int:
    instances1, attributes1, relations1 = t1
    instances2, attributes2, relations2 = t2
    translate = {
        vars1[i]: vars2[m] for i, m in enumerate(mapping) if m is not None
    }
    count = 0
    for var, concept in instances1:
        if (translate.get(var), concept) in instances2:
            count += 1
    for rel, var, val in attributes1:
        if (rel, translate.get(var), val) in attributes2:
            count += 1
    for rel, src, tgt in relations1:
        if src in translate and tgt in translate:
            if (rel, translate[src], translate[tgt]) in relations2:
                count += 1
    return count


def _greedy_start(vars1, vars2, concepts1, concepts2) -> list[int | None]:
    used: set[int] = set()
    mapping: list[int | None] = []
    for var in vars1:
        pick = None
        for j, w in enumerate(vars2):
            if j not in used and concepts2[w] == concepts1[var]:
                pick = j
                break
        if pick is not None:
            used.add(pick)
        mapping.append(pick)
    return mapping


def _random_start(
    vars1, vars2, concepts1, concepts2, rng: random.Random
) -> list[int | None]:
    """Random injective start biased toward concept-compatible targets."""
    order = list(range(len(vars1)))
    rng.shuffle(order)
    mapping: list[int | None] = [None] * len(vars1)
    used: set[int] = set()
    for i in order:
        same = [
            j
            for j, w in enumerate(vars2)
            if j not in used and concepts2[w] == concepts1[vars1[i]]
        ]
        pool = same if same else [j for j in range(len(vars2)) if j not in used]
        if pool:
            pick = pool[rng.randrange(len(pool))]
            mapping[i] = pick
            used.add(pick)
    return mapping


def _neighbor_mappings(current, n1, n2):
    """All single-reassign and swap neighbors of a mapping, in scan order.

    Reassigns may target a free variable, None, or an occupied variable
    (displacing the occupant to unmapped).
    """
    used = {m: i for i, m in enumerate(current) if m is not None}
    for i in range(n1):
        original = current[i]
        for cand in [None, *range(n2)]:
            if cand == original:
                continue
            neighbor = list(current)
            occupant = used.get(cand) if cand is not None else None
            if occupant is not None:
                neighbor[occupant] = None
            neighbor[i] = cand
            yield neighbor
    for i in range(n1):
        for j in range(i + 1, n1):
            if current[i] == current[j]:
                continue
            neighbor = list(current)
            neighbor[i], neighbor[j] = neighbor[j], neighbor[i]
            yield neighbor


def _climb(mapping, vars1, vars2, t1, t2) -> tuple[list[int | None], int]:
    """Best-improvement hill climb with bounded sideways (plateau) steps.

    Equal-score moves are taken (first in scan order, never revisiting a
    mapping) while a small budget lasts; any improvement refills it. This
    crosses the short plateaus that pure strict-improvement climbing gets
    stuck on, while staying deterministic and terminating.
    """
    current = list(mapping)
    score = _match_count(current, vars1, vars2, t1, t2)
    n1, n2 = len(vars1), len(vars2)
    best_mapping, best_score = list(current), score
    visited = {tuple(current)}
    plateau_budget = 2 * n1
    budget = plateau_budget
    while True:
        improving: list[int | None] | None = None
        improving_score = score
        sideways: list[int | None] | None = None
        for neighbor in _neighbor_mappings(current, n1, n2):
            s = _match_count(neighbor, vars1, vars2, t1, t2)
            if s > improving_score:
                improving, improving_score = neighbor, s
            elif (
                s == score
                and sideways is None
                and budget > 0
                and tuple(neighbor) not in visited
            ):
                sideways = neighbor
        if improving is not None:
            current, score = improving, improving_score
            budget = plateau_budget
        elif sideways is not None:
            current = sideways
            budget -= 1
        else:
            return best_mapping, best_score
        visited.add(tuple(current))
        if score > best_score:
            best_mapping, best_score = list(current), score


def smatch(
    g1: SemanticGraph,
    g2: SemanticGraph,
    restarts: int = 4,
    seed: int = 0,
) -> SmatchResult:
    """Precision/recall/F1 of the best variable alignment found.

    Precision is over g1's triples, recall over g2's. More restarts never
    lower the result for a fixed seed (best-so-far is kept as the restart
    RNG stream extends).
    """
    if g1.triple_count() == 0 or g2.triple_count() == 0:
        raise ValueError("empty graph")
    if restarts < 1:
        raise ValueError("need at least one start")
    vars1 = [var for var, _ in g1.instance_triples]
    vars2 = [var for var, _ in g2.instance_triples]
    concepts1 = dict(g1.instance_triples)
    concepts2 = dict(g2.instance_triples)
    t1 = _triple_sets(g1)
    t2 = _triple_sets(g2)

    rng = random.Random(seed)
    best = 0
    starts = [_greedy_start(vars1, vars2, concepts1, concepts2)]
    for _ in range(restarts - 1):
        starts.append(_random_start(vars1, vars2, concepts1, concepts2, rng))
    for start in starts:
        _, score = _climb(start, vars1, vars2, t1, t2)
        best = max(best, score)

    total1 = len(t1[0]) + len(t1[1]) + len(t1[2])
    total2 = len(t2[0]) + len(t2[1]) + len(t2[2])
    precision = best / total1
    recall = best / total2
    f1 = 0.0 if precision + recall == 0 else 2 * precision * recall / (precision + recall)
    return SmatchResult(precision, recall, f1)
