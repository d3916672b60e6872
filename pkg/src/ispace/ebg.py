"""Horn-clause theories, backward chaining, and explanation trees.

A theory file holds identified rules over function-free atoms:

    R2: complete(x) <= officeselect(x, "Congress") & member(x) & aspect(x).

A facts file holds identified ground atoms:

    F1: officeselect(x47, "Congress").

Lexically, a bare single lowercase letter is a variable; every other bare
identifier (``x47``) and every quoted string is a constant.  Proof search is
depth-first in rule-id order with facts tried before rules, so results are
deterministic and independent of declaration order.  A proof is returned as
an explanation tree: internal nodes cite the rule and substitution that
justify them, leaves cite facts.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator, Mapping, Sequence

from .core import DslSyntaxError, SpaceError


class DepthExceededError(SpaceError):
    pass


class UnknownPredicateError(SpaceError):
    pass


class MalformedTreeError(SpaceError):
    pass


# ---------------------------------------------------------------------------
# terms and atoms

@dataclass(frozen=True, order=True)
class Var:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True, order=True)
class Const:
    value: str

    def __str__(self) -> str:
        if re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", self.value) and not _is_var_name(
            self.value
        ):
            return self.value
        return '"' + self.value.replace("\\", "\\\\").replace('"', '\\"') + '"'


Term = Var | Const


@dataclass(frozen=True)
class Atom:
    pred: str
    args: tuple[Term, ...]

    def __str__(self) -> str:
        return f"{self.pred}({', '.join(str(a) for a in self.args)})"

    def is_ground(self) -> bool:
        return all(isinstance(a, Const) for a in self.args)

    def variables(self) -> list[str]:
        return [a.name for a in self.args if isinstance(a, Var)]


@dataclass(frozen=True)
class Rule:
    id: str
    head: Atom
    body: tuple[Atom, ...] = ()

    def __str__(self) -> str:
        if not self.body:
            return f"{self.id}: {self.head}."
        return f"{self.id}: {self.head} <= {' & '.join(str(b) for b in self.body)}."


@dataclass(frozen=True)
class Fact:
    id: str
    atom: Atom

    def __post_init__(self):
        if not self.atom.is_ground():
            raise SpaceError(f"fact {self.id} is not ground: {self.atom}")

    def __str__(self) -> str:
        return f"{self.id}: {self.atom}."


def _is_var_name(name: str) -> bool:
    return len(name) == 1 and name.islower()


def _id_key(identifier: str) -> tuple:
    m = re.fullmatch(r"([A-Za-z]+)(\d*)", identifier)
    if m is None:
        return (identifier, 0, identifier)
    return (m.group(1), int(m.group(2) or 0), identifier)


@dataclass(frozen=True)
class Theory:
    """Rules sorted by id (alpha part, then number), checked for id and
    arity consistency."""

    rules: tuple[Rule, ...]

    def __post_init__(self):
        ids = [r.id for r in self.rules]
        if len(ids) != len(set(ids)):
            raise SpaceError("duplicate rule id")
        object.__setattr__(
            self, "rules", tuple(sorted(self.rules, key=lambda r: _id_key(r.id)))
        )
        arity: dict[str, int] = {}
        for rule in self.rules:
            for atom in (rule.head, *rule.body):
                if arity.setdefault(atom.pred, len(atom.args)) != len(atom.args):
                    raise SpaceError(
                        f"predicate {atom.pred!r} used with conflicting arities"
                    )

    def rules_for(self, pred: str) -> tuple[Rule, ...]:
        return tuple(r for r in self.rules if r.head.pred == pred)

    def rule_by_id(self, rule_id: str) -> Rule | None:
        for r in self.rules:
            if r.id == rule_id:
                return r
        return None

    def predicates(self) -> frozenset[str]:
        preds = set()
        for rule in self.rules:
            preds.add(rule.head.pred)
            preds.update(b.pred for b in rule.body)
        return frozenset(preds)


@dataclass(frozen=True)
class FactSet:
    facts: tuple[Fact, ...]

    def __post_init__(self):
        ids = [f.id for f in self.facts]
        if len(ids) != len(set(ids)):
            raise SpaceError("duplicate fact id")
        object.__setattr__(
            self, "facts", tuple(sorted(self.facts, key=lambda f: _id_key(f.id)))
        )

    def facts_for(self, pred: str) -> tuple[Fact, ...]:
        return tuple(f for f in self.facts if f.atom.pred == pred)

    def fact_by_id(self, fact_id: str) -> Fact | None:
        for f in self.facts:
            if f.id == fact_id:
                return f
        return None

    def predicates(self) -> frozenset[str]:
        return frozenset(f.atom.pred for f in self.facts)


# ---------------------------------------------------------------------------
# parsing

_THEORY_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<comment>\#[^\n]*)
  | (?P<arrow><=)
  | (?P<string>"(?:[^"\\\n]|\\.)*")
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<punct>[():,&.])
    """,
    re.VERBOSE,
)


def _theory_tokens(text: str) -> Iterator[tuple[str, str, int, int]]:
    line, col, pos = 1, 1, 0
    while pos < len(text):
        m = _THEORY_TOKEN_RE.match(text, pos)
        if m is None:
            raise DslSyntaxError(f"unexpected character {text[pos]!r}", line, col)
        kind, lexeme = m.lastgroup, m.group()
        if kind not in ("ws", "comment"):
            yield kind, lexeme, line, col
        if "\n" in lexeme:
            line += lexeme.count("\n")
            col = len(lexeme) - lexeme.rfind("\n")
        else:
            col += len(lexeme)
        pos = m.end()
    yield "eof", "", line, col


class _ClauseParser:
    def __init__(self, text: str):
        self.tokens = list(_theory_tokens(text))
        self.pos = 0

    @property
    def cur(self):
        return self.tokens[self.pos]

    def error(self, message: str) -> DslSyntaxError:
        _, _, line, col = self.cur
        return DslSyntaxError(message, line, col)

    def advance(self):
        tok = self.cur
        self.pos += 1
        return tok

    def eat_punct(self, text: str):
        kind, lexeme, _, _ = self.cur
        if kind in ("punct", "arrow") and lexeme == text:
            return self.advance()
        raise self.error(f"expected {text!r}, found {lexeme!r}")

    def at(self, text: str) -> bool:
        kind, lexeme, _, _ = self.cur
        return kind in ("punct", "arrow") and lexeme == text

    def parse_term(self) -> Term:
        kind, lexeme, _, _ = self.cur
        if kind == "string":
            self.advance()
            return Const(lexeme[1:-1].replace('\\"', '"').replace("\\\\", "\\"))
        if kind == "ident":
            self.advance()
            return Var(lexeme) if _is_var_name(lexeme) else Const(lexeme)
        raise self.error(f"expected term, found {lexeme!r}")

    def parse_atom(self) -> Atom:
        kind, lexeme, _, _ = self.cur
        if kind != "ident":
            raise self.error(f"expected predicate, found {lexeme!r}")
        pred = self.advance()[1]
        self.eat_punct("(")
        args = [self.parse_term()]
        while self.at(","):
            self.advance()
            args.append(self.parse_term())
        self.eat_punct(")")
        return Atom(pred, tuple(args))

    def parse_clauses(self) -> list[tuple[str, Atom, tuple[Atom, ...]]]:
        clauses = []
        while self.cur[0] != "eof":
            kind, lexeme, _, _ = self.cur
            if kind != "ident":
                raise self.error(f"expected clause id, found {lexeme!r}")
            cid = self.advance()[1]
            self.eat_punct(":")
            head = self.parse_atom()
            body: tuple[Atom, ...] = ()
            if self.at("<="):
                self.advance()
                atoms = [self.parse_atom()]
                while self.at("&"):
                    self.advance()
                    atoms.append(self.parse_atom())
                body = tuple(atoms)
            self.eat_punct(".")
            clauses.append((cid, head, body))
        return clauses


def parse_theory(text: str) -> Theory:
    clauses = _ClauseParser(text).parse_clauses()
    return Theory(tuple(Rule(cid, head, body) for cid, head, body in clauses))


def parse_facts(text: str) -> FactSet:
    clauses = _ClauseParser(text).parse_clauses()
    facts = []
    for cid, head, body in clauses:
        if body:
            raise SpaceError(f"fact {cid} has a body; facts must be bare atoms")
        facts.append(Fact(cid, head))
    return FactSet(tuple(facts))


def parse_goal(text: str) -> Atom:
    parser = _ClauseParser(text)
    atom = parser.parse_atom()
    if parser.cur[0] != "eof":
        raise parser.error("trailing input after goal atom")
    return atom


# ---------------------------------------------------------------------------
# unification

Subst = dict[str, Term]


def resolve(term: Term, subst: Mapping[str, Term]) -> Term:
    # chains longer than the mapping must revisit a name; canonical tree
    # substitutions map variables to themselves, so stop there
    steps = 0
    while isinstance(term, Var) and term.name in subst:
        nxt = subst[term.name]
        if nxt == term:
            return term
        term = nxt
        steps += 1
        if steps > len(subst):
            return term
    return term


def unify_terms(a: Term, b: Term, subst: Subst) -> Subst | None:
    """Extend ``subst`` to make a and b equal, or return None.

    Terms are function-free, so the occurs check reduces to never binding a
    variable to itself; resolution before binding guarantees that.
    """
    a = resolve(a, subst)
    b = resolve(b, subst)
    if a == b:
        return subst
    if isinstance(a, Var):
        out = dict(subst)
        out[a.name] = b
        return out
    if isinstance(b, Var):
        out = dict(subst)
        out[b.name] = a
        return out
    return None


def unify_atoms(a: Atom, b: Atom, subst: Subst) -> Subst | None:
    if a.pred != b.pred or len(a.args) != len(b.args):
        return None
    out: Subst | None = subst
    for x, y in zip(a.args, b.args):
        out = unify_terms(x, y, out)
        if out is None:
            return None
    return out


def substitute(atom: Atom, subst: Mapping[str, Term]) -> Atom:
    return Atom(atom.pred, tuple(resolve(a, subst) for a in atom.args))


# ---------------------------------------------------------------------------
# explanation trees

@dataclass(frozen=True)
class FactLeaf:
    atom: Atom
    fact_id: str


@dataclass(frozen=True)
class RuleNode:
    atom: Atom
    rule_id: str
    substitution: tuple[tuple[str, Term], ...]  # over the rule's own variables
    children: tuple["TreeNode", ...]


TreeNode = FactLeaf | RuleNode


def tree_to_json(node: TreeNode) -> dict:
    if isinstance(node, FactLeaf):
        return {"kind": "fact", "fact": node.fact_id, "atom": atom_to_json(node.atom)}
    return {
        "kind": "rule",
        "rule": node.rule_id,
        "atom": atom_to_json(node.atom),
        "substitution": {name: term_to_json(t) for name, t in node.substitution},
        "children": [tree_to_json(c) for c in node.children],
    }


def tree_from_json(data: dict) -> TreeNode:
    if not isinstance(data, dict):
        raise MalformedTreeError(f"malformed tree JSON: {data!r}")
    kind = data.get("kind")
    if kind == "fact":
        return FactLeaf(atom_from_json(data["atom"]), str(data["fact"]))
    if kind == "rule":
        subst = tuple(
            sorted((str(k), term_from_json(v)) for k, v in data.get("substitution", {}).items())
        )
        return RuleNode(
            atom_from_json(data["atom"]),
            str(data["rule"]),
            subst,
            tuple(tree_from_json(c) for c in data.get("children", [])),
        )
    raise MalformedTreeError(f"unknown tree node kind {kind!r}")


def atom_to_json(atom: Atom) -> dict:
    return {"pred": atom.pred, "args": [term_to_json(a) for a in atom.args]}


def atom_from_json(data: dict) -> Atom:
    if not isinstance(data, dict) or "pred" not in data:
        raise MalformedTreeError(f"malformed atom JSON: {data!r}")
    return Atom(str(data["pred"]), tuple(term_from_json(a) for a in data.get("args", [])))


def term_to_json(term: Term) -> dict:
    if isinstance(term, Var):
        return {"var": term.name}
    return {"const": term.value}


def term_from_json(data: dict) -> Term:
    if isinstance(data, dict) and "var" in data:
        return Var(str(data["var"]))
    if isinstance(data, dict) and "const" in data:
        return Const(str(data["const"]))
    raise MalformedTreeError(f"malformed term JSON: {data!r}")


def tree_leaves(node: TreeNode) -> Iterator[FactLeaf]:
    if isinstance(node, FactLeaf):
        yield node
    else:
        for child in node.children:
            yield from tree_leaves(child)


def tree_depth(node: TreeNode) -> int:
    if isinstance(node, FactLeaf):
        return 0
    return 1 + max((tree_depth(c) for c in node.children), default=0)


# ---------------------------------------------------------------------------
# proof search

class _Search:
    def __init__(self, theory: Theory, facts: FactSet, max_depth: int):
        self.theory = theory
        self.facts = facts
        self.max_depth = max_depth
        self.depth_hit = False
        self.fresh = 0

    def rename(self, rule: Rule) -> tuple[dict[str, Var], Atom, tuple[Atom, ...]]:
        self.fresh += 1
        names = {}
        for atom in (rule.head, *rule.body):
            for name in atom.variables():
                names.setdefault(name, Var(f"{name}${self.fresh}"))
        remap = {name: var for name, var in names.items()}

        def rn(atom: Atom) -> Atom:
            return Atom(
                atom.pred,
                tuple(remap[a.name] if isinstance(a, Var) else a for a in atom.args),
            )

        return remap, rn(rule.head), tuple(rn(b) for b in rule.body)


# proof skeletons carry unresolved atoms; materialized under the final subst
@dataclass(frozen=True)
class _PendingFact:
    goal: Atom
    fact: Fact


@dataclass(frozen=True)
class _PendingRule:
    goal: Atom
    rule: Rule
    remap: Mapping[str, Var]
    children: tuple


def _prove(
    goal: Atom, depth: int, subst: Subst, search: _Search
) -> Iterator[tuple[Subst, object]]:
    for fact in search.facts.facts_for(goal.pred):
        out = unify_atoms(goal, fact.atom, subst)
        if out is not None:
            yield out, _PendingFact(goal, fact)
    if depth >= search.max_depth:
        if search.theory.rules_for(goal.pred):
            search.depth_hit = True
        return
    for rule in search.theory.rules_for(goal.pred):
        remap, head, body = search.rename(rule)
        out = unify_atoms(goal, head, subst)
        if out is None:
            continue
        for final, children in _prove_all(body, depth + 1, out, search):
            yield final, _PendingRule(goal, rule, remap, tuple(children))


def _prove_all(
    goals: Sequence[Atom], depth: int, subst: Subst, search: _Search
) -> Iterator[tuple[Subst, list]]:
    if not goals:
        yield subst, []
        return
    for mid, node in _prove(goals[0], depth, subst, search):
        for final, rest in _prove_all(goals[1:], depth, mid, search):
            yield final, [node] + rest


def _materialize(pending, subst: Subst) -> TreeNode:
    if isinstance(pending, _PendingFact):
        return FactLeaf(substitute(pending.goal, subst), pending.fact.id)
    node_subst = tuple(
        sorted(
            (name, resolve(var, subst))
            for name, var in pending.remap.items()
        )
    )
    return RuleNode(
        substitute(pending.goal, subst),
        pending.rule.id,
        node_subst,
        tuple(_materialize(c, subst) for c in pending.children),
    )


def _check_known(theory: Theory, facts: FactSet, goal: Atom) -> None:
    if goal.pred not in theory.predicates() | facts.predicates():
        raise UnknownPredicateError(f"unknown predicate {goal.pred!r}")


def explain(
    theory: Theory, facts: FactSet, goal: Atom, *, max_depth: int = 64
) -> TreeNode | None:
    """First proof of ``goal``, or None when the search space holds none.

    Raises DepthExceededError when the depth limit cut the search before
    any proof was found, since deeper proofs may exist.
    """
    _check_known(theory, facts, goal)
    search = _Search(theory, facts, max_depth)
    for subst, pending in _prove(goal, 0, {}, search):
        return _materialize(pending, subst)
    if search.depth_hit:
        raise DepthExceededError(f"no proof of {goal} within depth {max_depth}")
    return None


@dataclass(frozen=True)
class ExplainAllResult:
    trees: tuple[TreeNode, ...]
    depth_exceeded: bool = False
    solution_capped: bool = False

    def to_json(self) -> dict:
        return {
            "trees": [tree_to_json(t) for t in self.trees],
            "depth_exceeded": self.depth_exceeded,
            "solution_capped": self.solution_capped,
        }


def explain_all(
    theory: Theory,
    facts: FactSet,
    goal: Atom,
    *,
    max_depth: int = 64,
    max_solutions: int = 256,
) -> ExplainAllResult:
    """Every distinct proof of ``goal``, in search order, up to the caps.

    Partial results are flagged rather than silently truncated: the depth
    flag means some branch was cut short, the cap flag means enumeration
    stopped at ``max_solutions``.
    """
    _check_known(theory, facts, goal)
    search = _Search(theory, facts, max_depth)
    trees: list[TreeNode] = []
    capped = False
    for subst, pending in _prove(goal, 0, {}, search):
        if len(trees) >= max_solutions:
            capped = True
            break
        trees.append(_materialize(pending, subst))
    return ExplainAllResult(tuple(trees), search.depth_hit, capped)


# ---------------------------------------------------------------------------
# verification

@dataclass(frozen=True)
class VerifyResult:
    ok: bool
    path: tuple[int, ...] = ()
    reason: str | None = None


def verify_explanation(theory: Theory, facts: FactSet, tree: TreeNode) -> VerifyResult:
    """Re-derive every node: leaves must cite matching facts, internal nodes
    must follow from their cited rule under their recorded substitution."""
    return _verify_node(theory, facts, tree, ())


def _verify_node(
    theory: Theory, facts: FactSet, node: TreeNode, path: tuple[int, ...]
) -> VerifyResult:
    if isinstance(node, FactLeaf):
        fact = facts.fact_by_id(node.fact_id)
        if fact is None:
            return VerifyResult(False, path, f"no such fact {node.fact_id}")
        if fact.atom != node.atom:
            return VerifyResult(
                False, path, f"leaf atom {node.atom} does not match {fact}"
            )
        return VerifyResult(True)
    rule = theory.rule_by_id(node.rule_id)
    if rule is None:
        return VerifyResult(False, path, f"no such rule {node.rule_id}")
    if len(rule.body) != len(node.children):
        return VerifyResult(
            False,
            path,
            f"rule {rule.id} has {len(rule.body)} subgoals, "
            f"node has {len(node.children)} children",
        )
    subst = dict(node.substitution)
    if substitute(rule.head, subst) != node.atom:
        return VerifyResult(
            False, path, f"head of {rule.id} under substitution is not {node.atom}"
        )
    for i, (body_atom, child) in enumerate(zip(rule.body, node.children)):
        expected = substitute(body_atom, subst)
        child_atom = child.atom
        if expected != child_atom:
            return VerifyResult(
                False,
                path + (i,),
                f"subgoal {expected} of {rule.id} does not match child {child_atom}",
            )
        result = _verify_node(theory, facts, child, path + (i,))
        if not result.ok:
            return result
    return VerifyResult(True)


def unused_facts(facts: FactSet, tree: TreeNode) -> tuple[str, ...]:
    """Fact ids never cited by the tree; what the proof shows is irrelevant."""
    cited = {leaf.fact_id for leaf in tree_leaves(tree)}
    return tuple(
        f.id for f in facts.facts if f.id not in cited
    )
