"""Dependency tree to AMR-style semantic graph conversion.

Mapping convention: one variable per retained token, the lowercased lemma
(form fallback) as its concept, the dependency relation as the edge label,
and the syntactic root as the graph top. Punctuation edges are dropped by
default for semantic comparison; a punctuation token's dependents, if any,
reattach to its head so the result stays a tree.
"""

from __future__ import annotations

from .conllu import DependencyTree
from .penman import SemanticGraph


def dep_to_amr_style(tree: DependencyTree, drop_punct: bool = True) -> SemanticGraph:
    """Convert a dependency tree into an AMR-style SemanticGraph."""
    root = tree.root
    dropped = {
        tok.index
        for tok in tree.tokens
        if drop_punct and tok.deprel == "punct" and tok.index != root
    }

    def effective_head(index: int) -> int:
        head = tree.token(index).head
        while head in dropped:
            head = tree.token(head).head
        return head

    graph = SemanticGraph()
    var_of: dict[int, str] = {}
    for tok in tree.tokens:
        if tok.index in dropped:
            continue
        var = f"v{tok.index}"
        var_of[tok.index] = var
        lemma = tok.lemma if tok.lemma not in ("", "_") else tok.form
        graph.instance_triples.append((var, lemma.lower()))
    for tok in tree.tokens:
        if tok.index in dropped:
            continue
        head = effective_head(tok.index)
        if head == 0:
            continue
        graph.relation_triples.append((tok.deprel, var_of[head], var_of[tok.index]))
    graph.top = var_of[root]
    graph.validate()
    return graph
