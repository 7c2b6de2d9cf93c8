"""Shared random-structure generators for property and oracle tests."""

from __future__ import annotations

import numpy as np

from tsteval.structural import OrderedTree, SemanticGraph

TREE_LABELS = ["A", "B", "C", "D"]
CONCEPTS = ["want", "boy", "go", "dog", "run", "city", "see", "house"]
RELATIONS = ["ARG0", "ARG1", "mod"]
ATTR_VALUES = ["1", "2", "-"]


def random_tree(rng: np.random.Generator, max_nodes: int = 8) -> OrderedTree:
    n = int(rng.integers(1, max_nodes + 1))
    nodes = [OrderedTree(label=TREE_LABELS[rng.integers(len(TREE_LABELS))])]
    for _ in range(n - 1):
        node = OrderedTree(label=TREE_LABELS[rng.integers(len(TREE_LABELS))])
        parent = nodes[int(rng.integers(len(nodes)))]
        parent.children.append(node)
        nodes.append(node)
    return nodes[0]


def random_graph(rng: np.random.Generator, max_vars: int = 6) -> SemanticGraph:
    """Random connected semantic graph (every var linked toward the top)."""
    n = int(rng.integers(1, max_vars + 1))
    graph = SemanticGraph()
    variables = [f"x{i}" for i in range(n)]
    # concepts sampled without replacement: graphs derived from sentences
    # (lemmas as concepts) rarely repeat a concept
    chosen = rng.choice(len(CONCEPTS), size=n, replace=False)
    for var, ci in zip(variables, chosen):
        graph.instance_triples.append((var, CONCEPTS[int(ci)]))

    def add_edge(a: str, b: str) -> None:
        if rng.random() < 0.5:
            a, b = b, a
        triple = (RELATIONS[rng.integers(len(RELATIONS))], a, b)
        if triple not in graph.relation_triples:
            graph.relation_triples.append(triple)

    for i in range(1, n):
        add_edge(variables[int(rng.integers(i))], variables[i])
    for _ in range(int(rng.integers(0, n))):
        i, j = rng.integers(n), rng.integers(n)
        if i != j:
            add_edge(variables[int(i)], variables[int(j)])
    n_attr = int(rng.integers(0, n))
    for _ in range(n_attr):
        graph.attribute_triples.append(
            (
                RELATIONS[rng.integers(len(RELATIONS))],
                variables[int(rng.integers(n))],
                ATTR_VALUES[rng.integers(len(ATTR_VALUES))],
            )
        )
    graph.top = variables[0]
    return graph


def mutated_graph_pair(
    rng: np.random.Generator, max_vars: int = 6
) -> tuple[SemanticGraph, SemanticGraph]:
    """A random graph and a mutated copy of it.

    This is the distribution graph comparison actually runs on: the two
    sides parse a sentence and its rewrite, so concepts overlap while
    structure drifts. Variables are always renamed; concepts, relations
    and attributes are perturbed; a node may be dropped or added.
    """
    g1 = random_graph(rng, max_vars)
    g2 = rename_graph(g1, "y")
    variables = [v for v, _ in g2.instance_triples]
    # concept swaps
    for _ in range(int(rng.integers(0, 3))):
        i = int(rng.integers(len(g2.instance_triples)))
        var, _ = g2.instance_triples[i]
        g2.instance_triples[i] = (var, CONCEPTS[rng.integers(len(CONCEPTS))])
    # relation rewires / drops
    for _ in range(int(rng.integers(0, 3))):
        if not g2.relation_triples:
            break
        i = int(rng.integers(len(g2.relation_triples)))
        if rng.random() < 0.5:
            g2.relation_triples.pop(i)
        else:
            rel, src, tgt = g2.relation_triples[i]
            g2.relation_triples[i] = (
                RELATIONS[rng.integers(len(RELATIONS))], src, tgt
            )
    # attribute perturbations
    if g2.attribute_triples and rng.random() < 0.5:
        g2.attribute_triples.pop(int(rng.integers(len(g2.attribute_triples))))
    if rng.random() < 0.4:
        g2.attribute_triples.append(
            (
                RELATIONS[rng.integers(len(RELATIONS))],
                variables[int(rng.integers(len(variables)))],
                ATTR_VALUES[rng.integers(len(ATTR_VALUES))],
            )
        )
    # node addition (hangs off an existing variable)
    if len(variables) < max_vars and rng.random() < 0.4:
        new = f"y{len(variables)}"
        g2.instance_triples.append((new, CONCEPTS[rng.integers(len(CONCEPTS))]))
        g2.relation_triples.append(
            (
                RELATIONS[rng.integers(len(RELATIONS))],
                variables[int(rng.integers(len(variables)))],
                new,
            )
        )
    # node drop (never the top; incident edges go with it)
    droppable = [v for v in variables if v != g2.top]
    if droppable and rng.random() < 0.35:
        victim = droppable[int(rng.integers(len(droppable)))]
        g2.instance_triples = [
            (v, c) for v, c in g2.instance_triples if v != victim
        ]
        g2.relation_triples = [
            (r, s, t) for r, s, t in g2.relation_triples if victim not in (s, t)
        ]
        g2.attribute_triples = [
            (r, v, a) for r, v, a in g2.attribute_triples if v != victim
        ]
    return g1, g2


def rename_graph(graph: SemanticGraph, prefix: str) -> SemanticGraph:
    mapping = {var: f"{prefix}{i}" for i, (var, _) in enumerate(graph.instance_triples)}
    out = SemanticGraph(
        instance_triples=[(mapping[v], c) for v, c in graph.instance_triples],
        attribute_triples=[(r, mapping[v], a) for r, v, a in graph.attribute_triples],
        relation_triples=[
            (r, mapping[s], mapping[t]) for r, s, t in graph.relation_triples
        ],
        top=mapping[graph.top],
    )
    return out


def random_distribution(rng: np.random.Generator, k: int) -> np.ndarray:
    alpha = rng.uniform(0.3, 3.0, size=k)
    return rng.dirichlet(alpha)
