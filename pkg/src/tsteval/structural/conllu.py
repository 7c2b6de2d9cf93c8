"""CoNLL-U dependency parse ingestion.

Reads single sentence blocks or whole files whose blocks are keyed by
``# instance_id = ...`` / ``# slot = ...`` comments. Multiword-token lines
(``1-2``) and empty-node lines (``1.1``) are skipped; other comments are
ignored.
"""

from __future__ import annotations

from dataclasses import dataclass


class ConlluError(ValueError):
    """Malformed CoNLL-U input; message carries the offending line number."""


@dataclass(frozen=True)
class Token:
    index: int
    form: str
    lemma: str
    upos: str
    deprel: str
    head: int  # 0 = root


@dataclass
class DependencyTree:
    """Validated dependency tree with 1..n contiguous token indices."""

    tokens: list[Token]

    def __post_init__(self) -> None:
        self._validate()
        self._children: dict[int, list[int]] = {i: [] for i in range(0, len(self.tokens) + 1)}
        for tok in self.tokens:
            self._children[tok.head].append(tok.index)
        for kids in self._children.values():
            kids.sort()

    def _validate(self) -> None:
        n = len(self.tokens)
        if n == 0:
            raise ConlluError("empty tree")
        indices = [t.index for t in self.tokens]
        if indices != list(range(1, n + 1)):
            raise ConlluError(f"token ids not contiguous 1..{n}: {indices}")
        roots = [t.index for t in self.tokens if t.head == 0]
        if len(roots) == 0:
            raise ConlluError("no root (head=0) token")
        if len(roots) > 1:
            raise ConlluError(f"multiple roots: tokens {roots}")
        for t in self.tokens:
            if not 0 <= t.head <= n:
                raise ConlluError(f"token {t.index}: head {t.head} does not exist")
            if t.head == t.index:
                raise ConlluError(f"token {t.index}: self-loop head")
        # acyclicity: walk each token to the root, bounded by n steps
        head_of = {t.index: t.head for t in self.tokens}
        for t in self.tokens:
            cur, steps = t.index, 0
            while cur != 0:
                cur = head_of[cur]
                steps += 1
                if steps > n:
                    raise ConlluError(f"cycle involving token {t.index}")

    def __len__(self) -> int:
        return len(self.tokens)

    @property
    def root(self) -> int:
        return next(t.index for t in self.tokens if t.head == 0)

    def token(self, index: int) -> Token:
        return self.tokens[index - 1]

    def children(self, index: int) -> list[int]:
        """Dependents of a token (or of 0 for the root), ordered by index."""
        return self._children[index]


def _is_skippable_id(field: str) -> bool:
    return "-" in field or "." in field


def parse_conllu(text: str, start_line: int = 1) -> DependencyTree:
    """Parse one CoNLL-U sentence block into a DependencyTree."""
    tokens: list[Token] = []
    for offset, raw in enumerate(text.splitlines()):
        lineno = start_line + offset
        line = raw.rstrip("\n")
        if not line.strip() or line.startswith("#"):
            continue
        fields = line.split("\t") if "\t" in line else line.split()
        if _is_skippable_id(fields[0]):
            continue
        if len(fields) < 8:
            raise ConlluError(f"line {lineno}: expected >= 8 fields, got {len(fields)}")
        try:
            index = int(fields[0])
        except ValueError:
            raise ConlluError(f"line {lineno}: bad token id {fields[0]!r}")
        try:
            head = int(fields[6])
        except ValueError:
            raise ConlluError(f"line {lineno}: bad head {fields[6]!r}")
        tokens.append(
            Token(
                index=index,
                form=fields[1],
                lemma=fields[2],
                upos=fields[3],
                deprel=fields[7],
                head=head,
            )
        )
    if not tokens:
        raise ConlluError(f"line {start_line}: no token lines in block")
    try:
        return DependencyTree(tokens)
    except ConlluError as exc:
        raise ConlluError(f"block at line {start_line}: {exc}") from exc


def parse_conllu_file(text: str) -> dict[tuple[str, str], DependencyTree]:
    """Parse a keyed multi-sentence file into (instance_id, slot) -> tree."""
    out: dict[tuple[str, str], DependencyTree] = {}
    block_lines: list[str] = []
    block_start = 1
    instance_id: str | None = None
    slot: str | None = None

    def flush(end_line: int) -> None:
        nonlocal instance_id, slot, block_lines
        if not any(l.strip() and not l.startswith("#") for l in block_lines):
            block_lines = []
            instance_id = slot = None
            return
        if instance_id is None or slot is None:
            raise ConlluError(
                f"block at line {block_start}: missing '# instance_id =' or '# slot =' key"
            )
        key = (instance_id, slot)
        if key in out:
            raise ConlluError(f"block at line {block_start}: duplicate key {key}")
        out[key] = parse_conllu("\n".join(block_lines), start_line=block_start)
        block_lines = []
        instance_id = slot = None

    lineno = 0
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            flush(lineno)
            block_start = lineno + 1
            continue
        stripped = line.strip()
        if stripped.startswith("#"):
            body = stripped[1:].strip()
            if "=" in body:
                key, _, value = body.partition("=")
                key, value = key.strip(), value.strip()
                if key == "instance_id":
                    instance_id = value
                elif key == "slot":
                    slot = value
        block_lines.append(line)
    flush(lineno + 1)
    return out
