"""Ordered-tree edit distance (Zhang & Shasha) on dependency trees.

Unit costs: insert 1, delete 1, rename 0 iff the labels are equal else 1.
Node labels default to the (UPOS, deprel) pair so structure comparisons
are not defeated by synonym substitution; ``lemma`` labeling is stricter.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

from .conllu import DependencyTree

LABEL_SCHEMES = ("deprel_upos", "lemma")


@dataclass
class OrderedTree:
    label: str
    children: list["OrderedTree"] = field(default_factory=list)

    def size(self) -> int:
        return 1 + sum(c.size() for c in self.children)


class _Annotated:
    """Postorder labels, leftmost-leaf descendants and keyroots."""

    def __init__(self, root: OrderedTree):
        self.labels: list[str] = []
        self.lmld: list[int] = []
        self._walk(root)
        last_for_lmld: dict[int, int] = {}
        for idx, leaf in enumerate(self.lmld):
            last_for_lmld[leaf] = idx
        self.keyroots = sorted(last_for_lmld.values())

    def _walk(self, node: OrderedTree) -> int:
        child_idx = [self._walk(c) for c in node.children]
        idx = len(self.labels)
        self.labels.append(node.label)
        self.lmld.append(self.lmld[child_idx[0]] if child_idx else idx)
        return idx


def tree_edit_distance(t1: OrderedTree, t2: OrderedTree) -> int:
    """Exact ordered tree edit distance with unit costs."""
    a1, a2 = _Annotated(t1), _Annotated(t2)
    m, n = len(a1.labels), len(a2.labels)
    td = [[0] * n for _ in range(m)]
    for i in a1.keyroots:
        for j in a2.keyroots:
            _treedist(i, j, a1, a2, td)
    return td[m - 1][n - 1]


def _treedist(i: int, j: int, a1: _Annotated, a2: _Annotated, td: list[list[int]]) -> None:
    l1, l2 = a1.lmld, a2.lmld
    ioff = l1[i] - 1
    joff = l2[j] - 1
    m = i - l1[i] + 2
    n = j - l2[j] + 2
    fd = [[0] * n for _ in range(m)]
    for x in range(1, m):
        fd[x][0] = fd[x - 1][0] + 1
    for y in range(1, n):
        fd[0][y] = fd[0][y - 1] + 1
    for x in range(1, m):
        for y in range(1, n):
            xi, yj = x + ioff, y + joff
            if l1[xi] == l1[i] and l2[yj] == l2[j]:
                rename = 0 if a1.labels[xi] == a2.labels[yj] else 1
                fd[x][y] = min(
                    fd[x - 1][y] + 1, fd[x][y - 1] + 1, fd[x - 1][y - 1] + rename
                )
                td[xi][yj] = fd[x][y]
            else:
                p = l1[xi] - 1 - ioff
                q = l2[yj] - 1 - joff
                fd[x][y] = min(
                    fd[x - 1][y] + 1, fd[x][y - 1] + 1, fd[p][q] + td[xi][yj]
                )


def tree_from_dependency(tree: DependencyTree, label: str = "deprel_upos") -> OrderedTree:
    """Build the ordered labeled tree for TED; children follow token order.

    Punctuation is kept: TED is a syntactic comparison.
    """
    if label not in LABEL_SCHEMES:
        raise ValueError(f"unknown label scheme {label!r}")

    def label_of(index: int) -> str:
        tok = tree.token(index)
        if label == "deprel_upos":
            return f"{tok.upos}/{tok.deprel}"
        lemma = tok.lemma if tok.lemma not in ("", "_") else tok.form
        return lemma.lower()

    def build(index: int) -> OrderedTree:
        return OrderedTree(
            label=label_of(index),
            children=[build(c) for c in tree.children(index)],
        )

    return build(tree.root)


class TedResult(NamedTuple):
    raw: int
    normalized: float


def ted(t1: DependencyTree, t2: DependencyTree, label: str = "deprel_upos") -> TedResult:
    """Tree edit distance between two dependency trees.

    ``normalized`` divides by max(|t1|, |t2|), clamped to 1: with unit costs
    the raw distance can exceed the larger tree size when the shapes admit
    only a small order/ancestry-consistent mapping.
    """
    o1 = tree_from_dependency(t1, label)
    o2 = tree_from_dependency(t2, label)
    raw = tree_edit_distance(o1, o2)
    return TedResult(raw, min(1.0, raw / max(len(t1), len(t2))))
