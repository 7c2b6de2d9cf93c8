"""PENMAN notation parsing and serialization for semantic graphs.

A graph is a triple store: instance triples (variable, concept), attribute
triples (relation, variable, constant) and relation triples (relation,
variable, variable), plus a top variable. ``:rel-of`` edges are normalized
by inversion at parse time, so the stored graph is orientation-canonical.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field


class PenmanError(ValueError):
    """Malformed PENMAN input; message carries the character offset."""


_NUMBER_RE = re.compile(r"^[+-]?\d+(\.\d+)?([eE][+-]?\d+)?$")
_SIGN_CONSTANTS = ("-", "+")


def _is_constant_token(tok: str) -> bool:
    return bool(_NUMBER_RE.match(tok)) or tok in _SIGN_CONSTANTS


@dataclass
class SemanticGraph:
    instance_triples: list[tuple[str, str]] = field(default_factory=list)
    attribute_triples: list[tuple[str, str, str]] = field(default_factory=list)
    relation_triples: list[tuple[str, str, str]] = field(default_factory=list)
    top: str = ""

    @property
    def variables(self) -> set[str]:
        return {var for var, _ in self.instance_triples}

    def validate(self) -> None:
        seen: set[str] = set()
        for var, _ in self.instance_triples:
            if var in seen:
                raise PenmanError(f"variable {var!r} has multiple instance triples")
            seen.add(var)
        if self.top not in seen:
            raise PenmanError(f"top {self.top!r} is not a defined variable")
        for rel, src, tgt in self.relation_triples:
            for end in (src, tgt):
                if end not in seen:
                    raise PenmanError(
                        f"relation :{rel} references undefined variable {end!r}"
                    )
        for rel, src, _ in self.attribute_triples:
            if src not in seen:
                raise PenmanError(
                    f"attribute :{rel} references undefined variable {src!r}"
                )

    def triple_count(self) -> int:
        return (
            len(self.instance_triples)
            + len(self.attribute_triples)
            + len(self.relation_triples)
        )


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.graph = SemanticGraph()
        # bare targets held until the full expression is read so that
        # forward references to later-defined variables resolve
        self.pending: list[tuple[str, str, str, int]] = []

    def error(self, msg: str, pos: int | None = None) -> PenmanError:
        return PenmanError(f"offset {self.pos if pos is None else pos}: {msg}")

    def _skip_ws(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def _peek(self) -> str:
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def _atom(self) -> str:
        start = self.pos
        while self.pos < len(self.text) and not (
            self.text[self.pos].isspace() or self.text[self.pos] in '()"/'
        ):
            self.pos += 1
        if self.pos == start:
            raise self.error("expected a token")
        return self.text[start : self.pos]

    def _quoted(self) -> str:
        start = self.pos
        self.pos += 1  # opening quote
        chunks: list[str] = []
        while True:
            if self.pos >= len(self.text):
                raise self.error("unterminated string", start)
            ch = self.text[self.pos]
            if ch == "\\" and self.pos + 1 < len(self.text):
                chunks.append(self.text[self.pos + 1])
                self.pos += 2
                continue
            if ch == '"':
                self.pos += 1
                return "".join(chunks)
            chunks.append(ch)
            self.pos += 1

    def _add_relation(self, rel: str, src: str, tgt: str) -> None:
        if rel.endswith("-of") and len(rel) > 3:
            self.graph.relation_triples.append((rel[:-3], tgt, src))
        else:
            self.graph.relation_triples.append((rel, src, tgt))

    def parse_node(self) -> str:
        open_pos = self.pos
        if self._peek() != "(":
            raise self.error("expected '('")
        self.pos += 1
        self._skip_ws()
        var = self._atom()
        self._skip_ws()
        if self._peek() != "/":
            raise self.error(f"expected '/' after variable {var!r}")
        self.pos += 1
        self._skip_ws()
        concept = self._atom()
        if any(v == var for v, _ in self.graph.instance_triples):
            raise self.error(f"duplicate instance for variable {var!r}", open_pos)
        self.graph.instance_triples.append((var, concept))
        self._skip_ws()
        while self._peek() == ":":
            rel_pos = self.pos
            self.pos += 1
            rel = self._atom()
            if not rel:
                raise self.error("empty relation name", rel_pos)
            self._skip_ws()
            ch = self._peek()
            if ch == "(":
                child = self.parse_node()
                self._add_relation(rel, var, child)
            elif ch == '"':
                value = self._quoted()
                self.graph.attribute_triples.append((rel, var, value))
            elif ch in (")", ":") or ch == "":
                raise self.error(f"relation :{rel} has no target", rel_pos)
            else:
                tok_pos = self.pos
                tok = self._atom()
                self.pending.append((rel, var, tok, tok_pos))
            self._skip_ws()
        if self._peek() != ")":
            raise self.error("unbalanced parentheses: missing ')'", open_pos)
        self.pos += 1
        self._skip_ws()
        return var

    def run(self) -> SemanticGraph:
        self._skip_ws()
        if self._peek() != "(":
            raise self.error("expression must start with '('")
        top = self.parse_node()
        self._skip_ws()
        if self.pos != len(self.text):
            raise self.error("trailing content after expression")
        defined = self.graph.variables
        for rel, src, tok, tok_pos in self.pending:
            if tok in defined:
                self._add_relation(rel, src, tok)
            elif _is_constant_token(tok):
                self.graph.attribute_triples.append((rel, src, tok))
            else:
                raise self.error(f"undefined variable reference {tok!r}", tok_pos)
        self.graph.top = top
        self.graph.validate()
        return self.graph


def parse_penman(text: str) -> SemanticGraph:
    """Parse a single PENMAN expression into a SemanticGraph."""
    return _Parser(text).run()


def _format_constant(value: str, variables: set[str]) -> str:
    if _is_constant_token(value) and value not in variables:
        return value
    escaped = value.replace("\\", "\\\\").replace('"', '\\"')
    return f'"{escaped}"'


def serialize_penman(graph: SemanticGraph) -> str:
    """Serialize a graph to one PENMAN expression.

    Every variable must be reachable from the top following edges in either
    direction; backward traversals are emitted as ``:rel-of``. Parsing the
    output yields the identical triple set.
    """
    graph.validate()
    concepts = dict(graph.instance_triples)
    variables = set(concepts)
    out_edges: dict[str, list[int]] = {v: [] for v in variables}
    in_edges: dict[str, list[int]] = {v: [] for v in variables}
    for idx, (_, src, tgt) in enumerate(graph.relation_triples):
        out_edges[src].append(idx)
        in_edges[tgt].append(idx)
    attrs: dict[str, list[tuple[str, str]]] = {v: [] for v in variables}
    for rel, src, val in graph.attribute_triples:
        attrs[src].append((rel, val))

    expanded: set[str] = set()
    emitted: set[int] = set()

    def emit(var: str) -> str:
        expanded.add(var)
        parts = [f"({var} / {concepts[var]}"]
        for rel, val in attrs[var]:
            parts.append(f" :{rel} {_format_constant(val, variables)}")
        for idx in out_edges[var]:
            if idx in emitted:
                continue
            emitted.add(idx)
            rel, _, tgt = graph.relation_triples[idx]
            target = tgt if tgt in expanded else emit(tgt)
            parts.append(f" :{rel} {target}")
        for idx in in_edges[var]:
            if idx in emitted:
                continue
            emitted.add(idx)
            rel, src, _ = graph.relation_triples[idx]
            source = src if src in expanded else emit(src)
            parts.append(f" :{rel}-of {source}")
        parts.append(")")
        return "".join(parts)

    text = emit(graph.top)
    unreachable = variables - expanded
    if unreachable:
        raise PenmanError(
            f"variables unreachable from top: {sorted(unreachable)}"
        )
    return text


def parse_penman_file(text: str) -> dict[tuple[str, str], SemanticGraph]:
    """Parse a keyed multi-expression file into (instance_id, slot) -> graph.

    Expressions are preceded by ``# instance_id = ...`` / ``# slot = ...``
    comment lines and separated by blank lines.
    """
    out: dict[tuple[str, str], SemanticGraph] = {}
    instance_id: str | None = None
    slot: str | None = None
    expr_lines: list[str] = []
    start_line = 1

    def flush(end_line: int) -> None:
        nonlocal instance_id, slot, expr_lines
        body = "\n".join(expr_lines).strip()
        if not body:
            expr_lines = []
            instance_id = slot = None
            return
        if instance_id is None or slot is None:
            raise PenmanError(
                f"expression at line {start_line}: missing '# instance_id =' or '# slot =' key"
            )
        key = (instance_id, slot)
        if key in out:
            raise PenmanError(f"expression at line {start_line}: duplicate key {key}")
        try:
            out[key] = parse_penman(body)
        except PenmanError as exc:
            raise PenmanError(f"expression at line {start_line}: {exc}") from exc
        expr_lines = []
        instance_id = slot = None

    lineno = 0
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped:
            flush(lineno)
            start_line = lineno + 1
            continue
        if stripped.startswith("#"):
            body = stripped[1:].strip()
            if "=" in body:
                key, _, value = body.partition("=")
                key, value = key.strip(), value.strip()
                if key == "instance_id":
                    instance_id = value
                elif key == "slot":
                    slot = value
            continue
        expr_lines.append(line)
    flush(lineno + 1)
    return out
