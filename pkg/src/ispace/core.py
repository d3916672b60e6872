"""Information-space programs.

An information space is a nested-conditional program over user tests.  The
textual form looks like a C conditional ladder:

    mutex Party { Dem, Rep }

    if (Dem) {
        page "dem-overview";
    } else if (Rep) {
        page "rep-overview";
    }

Tests are either bare flags (``Dem``, shorthand for ``Dem=true``) or
categorical (``State=CA``).  A ``mutex`` header declares that a set of tests
is mutually exclusive; tests sharing a key are implicitly exclusive even
without a header.  This module defines the AST, the parser and canonical
serializer, a JSON interchange form, sitemap ingestion, path enumeration,
and partial assignments of test outcomes.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Union


# ---------------------------------------------------------------------------
# errors

class SpaceError(Exception):
    """Base class for every domain error raised by this package."""


class DslSyntaxError(SpaceError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"syntax error at line {line}, col {col}: {message}")
        self.line = line
        self.col = col


class DuplicateArmError(SpaceError):
    pass


class DuplicateContentRefError(SpaceError):
    pass


class EmptyMapError(SpaceError):
    pass


class LabelCollisionError(SpaceError):
    pass


class InconsistentAssignmentError(SpaceError):
    pass


# ---------------------------------------------------------------------------
# AST

_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")

FLAG = "true"


@dataclass(frozen=True, order=True)
class Test:
    """A single user test: ``key=value``, with bare flags spelled key=true."""

    key: str
    value: str = FLAG

    @property
    def is_flag(self) -> bool:
        return self.value == FLAG

    def __str__(self) -> str:
        if self.is_flag:
            return self.key
        return f"{self.key}={_format_value(self.value)}"


@dataclass(frozen=True)
class Content:
    """A leaf: one deliverable unit of content, addressed by a unique ref."""

    ref: str
    payload: str = ""


@dataclass(frozen=True)
class Arm:
    test: Test
    body: "Node"


@dataclass(frozen=True)
class Chain:
    """An if/else-if ladder.  Arm order is significant; tests are distinct."""

    arms: tuple[Arm, ...]

    def __post_init__(self):
        if not self.arms:
            raise SpaceError("chain must have at least one arm")
        seen = set()
        for arm in self.arms:
            if arm.test in seen:
                raise DuplicateArmError(f"duplicate arm test {arm.test}")
            seen.add(arm.test)


@dataclass(frozen=True)
class Seq:
    """Sibling nodes presented in order.  Nested seqs flatten on construction."""

    children: tuple["Node", ...]

    def __post_init__(self):
        flat: list[Node] = []
        for child in self.children:
            if isinstance(child, Seq):
                flat.extend(child.children)
            else:
                flat.append(child)
        if not flat:
            raise SpaceError("seq must have at least one child")
        object.__setattr__(self, "children", tuple(flat))


Node = Union[Chain, Content, Seq]


def group_nodes(nodes: Iterable[Node]) -> Node | None:
    """Collapse a statement list: none -> None, one -> itself, many -> Seq."""
    items = [n for n in nodes if n is not None]
    if not items:
        return None
    if len(items) == 1:
        return items[0]
    return Seq(tuple(items))


@dataclass(frozen=True)
class MutexGroup:
    name: str
    members: frozenset[Test]

    def __post_init__(self):
        if len(self.members) < 2:
            raise SpaceError(f"mutex group {self.name!r} needs at least two members")


@dataclass(frozen=True)
class Program:
    """A whole information space: optional mutex headers plus a root node.

    ``root`` may be None for the void program (every path eliminated); the
    void program has no textual form, though it survives the JSON route.
    Structural equality ignores ``meta`` and mutex-header order (headers are
    normalized to name order at construction).
    """

    root: Node | None
    mutexes: tuple[MutexGroup, ...] = ()
    meta: Mapping[str, str] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(
            self, "mutexes", tuple(sorted(self.mutexes, key=lambda g: g.name))
        )
        names = [g.name for g in self.mutexes]
        if len(names) != len(set(names)):
            raise SpaceError("duplicate mutex group name")
        owner: dict[Test, str] = {}
        key_owner: dict[str, str] = {}
        for g in self.mutexes:
            for t in g.members:
                if owner.setdefault(t, g.name) != g.name:
                    raise SpaceError(f"test {t} appears in two mutex groups")
                if key_owner.setdefault(t.key, g.name) != g.name:
                    raise SpaceError(
                        f"key {t.key!r} is split across mutex groups "
                        f"{key_owner[t.key]!r} and {g.name!r}"
                    )
        refs = [c.ref for c in iter_nodes(self.root) if isinstance(c, Content)]
        if len(refs) != len(set(refs)):
            dupes = sorted({r for r in refs if refs.count(r) > 1})
            raise DuplicateContentRefError(f"duplicate content ref {dupes[0]!r}")

    def group_named(self, name: str) -> MutexGroup | None:
        for g in self.mutexes:
            if g.name == name:
                return g
        return None

    def group_of(self, test: Test) -> MutexGroup | None:
        for g in self.mutexes:
            if test in g.members:
                return g
        return None

    def test_keys(self) -> frozenset[str]:
        return frozenset(t.key for t in iter_tests(self.root))


def iter_nodes(node: Node | None) -> Iterator[Node]:
    if node is None:
        return
    yield node
    if isinstance(node, Chain):
        for arm in node.arms:
            yield from iter_nodes(arm.body)
    elif isinstance(node, Seq):
        for child in node.children:
            yield from iter_nodes(child)


def iter_tests(node: Node | None) -> Iterator[Test]:
    for n in iter_nodes(node):
        if isinstance(n, Chain):
            for arm in n.arms:
                yield arm.test


def count_nodes(program: Program) -> int:
    return sum(1 for _ in iter_nodes(program.root))


# ---------------------------------------------------------------------------
# tokenizer / parser

_KEYWORDS = {"if", "else", "mutex", "page"}

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<comment>\#[^\n]*)
  | (?P<string>"(?:[^"\\\n]|\\.)*")
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<punct>[{}();,=])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Token:
    kind: str  # "ident" | "string" | "punct" | "eof"
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    line, col, pos = 1, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise DslSyntaxError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        lexeme = m.group()
        if kind not in ("ws", "comment"):
            tokens.append(_Token(kind, lexeme, line, col))
        newlines = lexeme.count("\n")
        if newlines:
            line += newlines
            col = len(lexeme) - lexeme.rfind("\n")
        else:
            col += len(lexeme)
        pos = m.end()
    tokens.append(_Token("eof", "", line, col))
    return tokens


def _unquote(raw: str) -> str:
    body = raw[1:-1]
    return body.replace('\\"', '"').replace("\\\\", "\\")


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.pos = 0

    @property
    def cur(self) -> _Token:
        return self.tokens[self.pos]

    def error(self, message: str) -> DslSyntaxError:
        return DslSyntaxError(message, self.cur.line, self.cur.col)

    def advance(self) -> _Token:
        tok = self.cur
        self.pos += 1
        return tok

    def expect(self, text: str) -> _Token:
        if self.cur.kind == "punct" and self.cur.text == text:
            return self.advance()
        if self.cur.kind == "ident" and self.cur.text == text:
            return self.advance()
        raise self.error(f"expected {text!r}, found {self.cur.text!r}")

    def at(self, text: str) -> bool:
        return self.cur.kind in ("punct", "ident") and self.cur.text == text

    def parse_program(self) -> Program:
        groups: list[MutexGroup] = []
        while self.at("mutex"):
            groups.append(self.parse_mutex())
        stmts: list[Node] = []
        while self.cur.kind != "eof":
            stmts.append(self.parse_stmt())
        root = group_nodes(stmts)
        if root is None:
            raise self.error("empty program")
        return Program(root=root, mutexes=tuple(groups))

    def parse_mutex(self) -> MutexGroup:
        self.expect("mutex")
        name = self.parse_ident("mutex group name")
        self.expect("{")
        members = [self.parse_test()]
        while self.at(","):
            self.advance()
            members.append(self.parse_test())
        self.expect("}")
        if len(members) != len(set(members)):
            raise self.error(f"duplicate member in mutex group {name!r}")
        return MutexGroup(name, frozenset(members))

    def parse_ident(self, what: str) -> str:
        if self.cur.kind != "ident":
            raise self.error(f"expected {what}, found {self.cur.text!r}")
        if self.cur.text in _KEYWORDS:
            raise self.error(f"keyword {self.cur.text!r} cannot be used as {what}")
        return self.advance().text

    def parse_stmt(self) -> Node:
        if self.at("if"):
            return self.parse_chain()
        if self.at("page"):
            return self.parse_content()
        raise self.error(f"expected 'if' or 'page', found {self.cur.text!r}")

    def parse_chain(self) -> Chain:
        arms: list[Arm] = []
        tok = self.cur
        self.expect("if")
        while True:
            self.expect("(")
            test = self.parse_test()
            self.expect(")")
            body = self.parse_block()
            arms.append(Arm(test, body))
            if self.at("else"):
                self.advance()
                self.expect("if")
                continue
            break
        try:
            return Chain(tuple(arms))
        except DuplicateArmError as exc:
            raise DslSyntaxError(str(exc), tok.line, tok.col) from exc

    def parse_test(self) -> Test:
        key = self.parse_ident("test key")
        if self.at("="):
            self.advance()
            if self.cur.kind == "string":
                value = _unquote(self.advance().text)
            elif self.cur.kind == "ident":
                value = self.advance().text
            else:
                raise self.error("expected test value")
            return Test(key, value)
        return Test(key)

    def parse_block(self) -> Node:
        self.expect("{")
        stmts: list[Node] = []
        while not self.at("}"):
            if self.cur.kind == "eof":
                raise self.error("unterminated block")
            stmts.append(self.parse_stmt())
        if not stmts:
            raise self.error("empty block")
        self.expect("}")
        body = group_nodes(stmts)
        assert body is not None
        return body

    def parse_content(self) -> Content:
        self.expect("page")
        if self.cur.kind != "string":
            raise self.error("expected content ref string after 'page'")
        ref = _unquote(self.advance().text)
        payload = ""
        if self.cur.kind == "string":
            payload = _unquote(self.advance().text)
        self.expect(";")
        return Content(ref, payload)


def parse(text: str) -> Program:
    """Parse program text.  Raises DslSyntaxError with line/col on bad input."""
    return _Parser(text).parse_program()


# ---------------------------------------------------------------------------
# canonical serializer

def _quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _format_value(value: str) -> str:
    if _IDENT_RE.match(value) and value not in _KEYWORDS:
        return value
    return _quote(value)


def _format_test(test: Test) -> str:
    return str(test)


def serialize(program: Program) -> str:
    """Render a program in canonical text.

    Mutex headers come first, in group-name order with members sorted; the
    body indents two spaces per block and `else if` continues on the line of
    the closing brace.  parse(serialize(p)) is structurally equal to p for
    every non-void p; the void program has no textual form.
    """
    if program.root is None:
        raise SpaceError("cannot serialize a void program")
    out: list[str] = []
    for g in program.mutexes:
        members = ", ".join(_format_test(t) for t in sorted(g.members))
        out.append(f"mutex {g.name} {{ {members} }}")
    if program.mutexes:
        out.append("")
    _emit(program.root, out, 0)
    return "\n".join(out) + "\n"


def _emit(node: Node, out: list[str], depth: int) -> None:
    pad = "  " * depth
    if isinstance(node, Content):
        payload = f" {_quote(node.payload)}" if node.payload else ""
        out.append(f"{pad}page {_quote(node.ref)}{payload};")
    elif isinstance(node, Seq):
        for child in node.children:
            _emit(child, out, depth)
    elif isinstance(node, Chain):
        for i, arm in enumerate(node.arms):
            head = "if" if i == 0 else "} else if"
            out.append(f"{pad}{head} ({_format_test(arm.test)}) {{")
            _emit(arm.body, out, depth + 1)
        out.append(f"{pad}}}")
    else:
        raise SpaceError(f"unknown node {node!r}")


# ---------------------------------------------------------------------------
# JSON interchange

def test_to_json(test: Test) -> dict:
    return {"key": test.key, "value": test.value}


def test_from_json(data: dict) -> Test:
    if not isinstance(data, dict) or "key" not in data:
        raise SpaceError(f"malformed test JSON: {data!r}")
    return Test(str(data["key"]), str(data.get("value", FLAG)))


def node_to_json(node: Node) -> dict:
    if isinstance(node, Content):
        return {"kind": "content", "ref": node.ref, "payload": node.payload}
    if isinstance(node, Seq):
        return {"kind": "seq", "children": [node_to_json(c) for c in node.children]}
    if isinstance(node, Chain):
        return {
            "kind": "chain",
            "arms": [
                {"test": test_to_json(a.test), "body": node_to_json(a.body)}
                for a in node.arms
            ],
        }
    raise SpaceError(f"unknown node {node!r}")


def node_from_json(data: dict) -> Node:
    if not isinstance(data, dict):
        raise SpaceError(f"malformed node JSON: {data!r}")
    kind = data.get("kind")
    if kind == "content":
        return Content(str(data.get("ref", "")), str(data.get("payload", "")))
    if kind == "seq":
        children = data.get("children")
        if not isinstance(children, list):
            raise SpaceError("malformed seq JSON: missing children")
        return Seq(tuple(node_from_json(c) for c in children))
    if kind == "chain":
        arms = data.get("arms")
        if not isinstance(arms, list):
            raise SpaceError("malformed chain JSON: missing arms")
        built = []
        for a in arms:
            if not isinstance(a, dict) or "test" not in a or "body" not in a:
                raise SpaceError(f"malformed arm JSON: {a!r}")
            built.append(Arm(test_from_json(a["test"]), node_from_json(a["body"])))
        return Chain(tuple(built))
    raise SpaceError(f"unknown node kind {kind!r}")


def program_to_json(program: Program) -> dict:
    data: dict = {
        "mutex": [
            {"name": g.name, "members": [test_to_json(t) for t in sorted(g.members)]}
            for g in program.mutexes
        ],
        "root": node_to_json(program.root) if program.root is not None else None,
    }
    if program.meta:
        data["meta"] = dict(program.meta)
    return data


def program_from_json(data: dict) -> Program:
    if not isinstance(data, dict) or "root" not in data:
        raise SpaceError("malformed program JSON: missing root")
    groups = []
    for g in data.get("mutex", []):
        if not isinstance(g, dict) or "name" not in g or "members" not in g:
            raise SpaceError(f"malformed mutex JSON: {g!r}")
        groups.append(
            MutexGroup(str(g["name"]), frozenset(test_from_json(t) for t in g["members"]))
        )
    root = node_from_json(data["root"]) if data["root"] is not None else None
    return Program(root=root, mutexes=tuple(groups), meta=dict(data.get("meta", {})))


def dumps(program: Program, indent: int = 2) -> str:
    return json.dumps(program_to_json(program), indent=indent)


def loads(text: str) -> Program:
    return program_from_json(json.loads(text))


# ---------------------------------------------------------------------------
# sitemap ingestion

def ingest_sitemap(data: dict) -> Program:
    """Convert a labeled link-tree (site map JSON) into a program.

    Each internal node's children become one chain whose arm tests are the
    child labels (bare flags); a child with a ``page`` field becomes a
    content leaf.  An optional ``group`` field on a child assigns its label
    to a named mutex group, letting a map reproduce declared exclusions.
    """
    if not isinstance(data, dict):
        raise EmptyMapError("sitemap must be a JSON object")
    children = data.get("children")
    if not children:
        raise EmptyMapError("sitemap has no children")
    groups: dict[str, set[Test]] = {}
    root = _ingest_children(children, groups, path="/")
    mutexes = tuple(
        MutexGroup(name, frozenset(members)) for name, members in sorted(groups.items())
    )
    meta = {"title": str(data["label"])} if "label" in data else {}
    return Program(root=root, mutexes=mutexes, meta=meta)


def _ingest_children(children: list, groups: dict[str, set[Test]], path: str) -> Node:
    if not isinstance(children, list) or not children:
        raise EmptyMapError(f"empty child list at {path}")
    arms: list[Arm] = []
    seen: set[str] = set()
    for child in children:
        if not isinstance(child, dict) or "label" not in child:
            raise LabelCollisionError(f"unlabeled sitemap node at {path}")
        label = str(child["label"])
        if label in seen:
            raise LabelCollisionError(f"duplicate label {label!r} at {path}")
        seen.add(label)
        if not _IDENT_RE.match(label):
            raise LabelCollisionError(f"label {label!r} at {path} is not an identifier")
        test = Test(label)
        if "group" in child:
            groups.setdefault(str(child["group"]), set()).add(test)
        sub = child.get("children")
        page = child.get("page")
        if sub and page is not None:
            raise LabelCollisionError(f"node {label!r} at {path} has both page and children")
        if sub:
            body: Node = _ingest_children(sub, groups, path + label + "/")
        elif page is not None:
            body = Content(str(page), str(child.get("payload", "")))
        else:
            raise EmptyMapError(f"node {label!r} at {path} has neither page nor children")
        arms.append(Arm(test, body))
    return Chain(tuple(arms))


# ---------------------------------------------------------------------------
# path enumeration

Path = tuple[tuple[Test, ...], str]


def enumerate_paths(program: Program) -> tuple[Path, ...]:
    """All (test-sequence, content-ref) pairs, in document order."""
    out: list[Path] = []
    _walk_paths(program.root, (), out)
    return tuple(out)


def _walk_paths(node: Node | None, prefix: tuple[Test, ...], out: list[Path]) -> None:
    if node is None:
        return
    if isinstance(node, Content):
        out.append((prefix, node.ref))
    elif isinstance(node, Seq):
        for child in node.children:
            _walk_paths(child, prefix, out)
    elif isinstance(node, Chain):
        for arm in node.arms:
            _walk_paths(arm.body, prefix + (arm.test,), out)


# ---------------------------------------------------------------------------
# assignments

RawGiven = Union[Mapping[str, object], Iterable[tuple[str, object]]]


@dataclass(frozen=True)
class Assignment:
    """A partial assignment of test outcomes.

    ``chosen`` maps a key to its selected value; ``denied`` maps a key to the
    set of values ruled out.  A key may carry denials alongside no choice;
    a chosen value must never be in its own denied set.
    """

    chosen: tuple[tuple[str, str], ...] = ()
    denied: tuple[tuple[str, frozenset[str]], ...] = ()

    def __post_init__(self):
        cm = dict(self.chosen)
        dm = dict(self.denied)
        if len(cm) != len(self.chosen) or len(dm) != len(self.denied):
            raise InconsistentAssignmentError("duplicate key in assignment")
        for key, value in cm.items():
            if value in dm.get(key, frozenset()):
                raise InconsistentAssignmentError(
                    f"{key}={value} is both chosen and denied"
                )
        object.__setattr__(self, "chosen", tuple(sorted(cm.items())))
        object.__setattr__(
            self, "denied", tuple(sorted((k, frozenset(v)) for k, v in dm.items() if v))
        )

    @classmethod
    def make(
        cls,
        chosen: Mapping[str, str] | None = None,
        denied: Mapping[str, Iterable[str]] | None = None,
    ) -> "Assignment":
        return cls(
            tuple((chosen or {}).items()),
            tuple((k, frozenset(v)) for k, v in (denied or {}).items()),
        )

    @property
    def chosen_map(self) -> dict[str, str]:
        return dict(self.chosen)

    @property
    def denied_map(self) -> dict[str, frozenset[str]]:
        return dict(self.denied)

    def is_empty(self) -> bool:
        return not self.chosen and not self.denied

    def keys(self) -> frozenset[str]:
        return frozenset(k for k, _ in self.chosen) | frozenset(k for k, _ in self.denied)

    def decide(self, test: Test) -> bool | None:
        """True/False when this assignment settles the test, else None."""
        cm = self.chosen_map
        if test.key in cm:
            return cm[test.key] == test.value
        if test.value in self.denied_map.get(test.key, frozenset()):
            return False
        return None

    def merge(self, other: "Assignment") -> "Assignment":
        chosen = self.chosen_map
        for key, value in other.chosen:
            if chosen.setdefault(key, value) != value:
                raise InconsistentAssignmentError(
                    f"conflicting choices for {key}: "
                    f"{chosen[key]!r} versus {value!r}"
                )
        denied = {k: set(v) for k, v in self.denied}
        for key, values in other.denied:
            denied.setdefault(key, set()).update(values)
        return Assignment.make(chosen, denied)

    def to_json(self) -> dict:
        data: dict[str, object] = {}
        for key, value in self.chosen:
            data[key] = value
        for key, values in self.denied:
            marks = sorted(f"!{v}" for v in values)
            if key in data:
                data[key] = [data[key]] + marks
            else:
                data[key] = marks[0] if len(marks) == 1 else marks
        return data


EMPTY_ASSIGNMENT = Assignment()


def _given_pairs(given: RawGiven) -> Iterator[tuple[str, object]]:
    if isinstance(given, Mapping):
        yield from given.items()
    else:
        for pair in given:
            key, value = pair
            yield key, value


def resolve_given(program: Program, given: RawGiven) -> Assignment:
    """Resolve raw key/value pairs against a program into an Assignment.

    Values: a plain string chooses, a ``!``-prefixed string denies, booleans
    drive the flag value, and a list applies each entry in turn.  A key that
    names no test key but a declared mutex group is resolved through the
    group (``Party=Dem`` chooses member test ``Dem`` on a bare-flag program).
    Keys absent from the program pass through untouched.
    """
    keys = program.test_keys()
    chosen: dict[str, str] = {}
    denied: dict[str, set[str]] = {}

    def apply(key: str, value: str, deny: bool) -> None:
        test = _resolve_one(program, keys, key, value)
        if deny:
            denied.setdefault(test.key, set()).add(test.value)
        else:
            if chosen.setdefault(test.key, test.value) != test.value:
                raise InconsistentAssignmentError(
                    f"conflicting choices for {test.key}: "
                    f"{chosen[test.key]!r} versus {test.value!r}"
                )

    for key, raw in _given_pairs(given):
        entries = raw if isinstance(raw, list) else [raw]
        for entry in entries:
            if entry is True:
                apply(key, FLAG, deny=False)
            elif entry is False:
                apply(key, FLAG, deny=True)
            elif isinstance(entry, str) and entry.startswith("!"):
                apply(key, entry[1:], deny=True)
            elif isinstance(entry, str):
                apply(key, entry, deny=False)
            else:
                raise SpaceError(f"bad value {entry!r} for key {key!r}")

    for key, value in chosen.items():
        if value in denied.get(key, set()):
            raise InconsistentAssignmentError(f"{key}={value} is both chosen and denied")
    return Assignment.make(chosen, denied)


def _resolve_one(program: Program, keys: frozenset[str], key: str, value: str) -> Test:
    if key in keys:
        return Test(key, value)
    group = program.group_named(key)
    if group is not None:
        for member in sorted(group.members):
            if member.key == value or member.value == value:
                return member
        raise InconsistentAssignmentError(
            f"{value!r} is not a member of mutex group {key!r}"
        )
    return Test(key, value)


def assignment_from_json(program: Program, data: object) -> Assignment:
    """Parse the JSON wire form of a given mapping (dict or [key, value] pairs)."""
    if isinstance(data, Mapping):
        return resolve_given(program, data)
    if isinstance(data, list):
        pairs = []
        for item in data:
            if not isinstance(item, (list, tuple)) or len(item) != 2:
                raise SpaceError(f"bad assignment pair {item!r}")
            pairs.append((str(item[0]), item[1]))
        return resolve_given(program, pairs)
    raise SpaceError(f"bad assignment JSON: {data!r}")
