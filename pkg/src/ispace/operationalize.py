"""From explanations to information-space programs.

Three steps connect a proof to a deliverable model.  ``generalize`` regresses
the proof through fresh copies of its own rules, keeping the constants the
rules demand and abstracting the ones the session supplied.  ``cut`` slices
the generalized tree along a frontier: everything above stays fixed
(compiled away), the subgoals on the frontier stay open for the user to
settle at runtime.  ``generate_model`` compiles the open subgoals into a
nested-conditional program, turning selection predicates into tests and
rule alternatives into chain arms, and attaches content from a binding
table keyed by the decisions along each path.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Mapping, Sequence

from .core import (
    Arm,
    Chain,
    Content,
    MutexGroup,
    Node,
    Program,
    SpaceError,
    Test,
    count_nodes,
)
from .ebg import (
    Atom,
    Const,
    FactLeaf,
    FactSet,
    MalformedTreeError,
    RuleNode,
    Subst,
    Term,
    Theory,
    TreeNode,
    Var,
    atom_from_json,
    atom_to_json,
    resolve,
    substitute,
    unify_atoms,
    verify_explanation,
)
from .factorize import Activity, evaluate_coverage


class FrontierMissError(SpaceError):
    pass


class UnboundSubgoalError(SpaceError):
    pass


class UnreachableBindingError(SpaceError):
    pass


# ---------------------------------------------------------------------------
# generalization (goal regression)

_CANONICAL_NAMES = "xyzwvutsrqponmlkjihgfedcba"


class _Fresh:
    def __init__(self):
        self.n = 0

    def rename(self, head: Atom, body: tuple[Atom, ...]):
        self.n += 1
        remap: dict[str, Var] = {}
        for atom in (head, *body):
            for name in atom.variables():
                remap.setdefault(name, Var(f"{name}@{self.n}"))

        def rn(atom: Atom) -> Atom:
            return Atom(
                atom.pred,
                tuple(remap[a.name] if isinstance(a, Var) else a for a in atom.args),
            )

        return remap, rn(head), tuple(rn(b) for b in body)


@dataclass
class _GenNode:
    atom: Atom
    by: str
    remap: Mapping[str, Var] | None
    children: list


def generalize(tree: TreeNode, theory: Theory) -> TreeNode:
    """Regress ``tree`` into its most general form over the same rules.

    Each internal node takes a fresh copy of its rule; parent body literals
    unify with child rule heads only, so constants contributed by facts fall
    away while constants written into the rules survive.  Remaining
    variables are renamed canonically (x, y, z, ...) in first-seen order.
    Raises MalformedTreeError when the tree does not follow the theory.
    """
    fresh = _Fresh()
    subst: Subst = {}

    def build(node: TreeNode, slot: Atom | None) -> _GenNode:
        nonlocal subst
        if isinstance(node, FactLeaf):
            if slot is not None:
                return _GenNode(slot, node.fact_id, None, [])
            general = Atom(
                node.atom.pred,
                tuple(Var(f"v{i}@0") for i in range(len(node.atom.args))),
            )
            return _GenNode(general, node.fact_id, None, [])
        rule = theory.rule_by_id(node.rule_id)
        if rule is None:
            raise MalformedTreeError(f"no such rule {node.rule_id}")
        if len(rule.body) != len(node.children):
            raise MalformedTreeError(
                f"rule {rule.id} expects {len(rule.body)} children, "
                f"tree node has {len(node.children)}"
            )
        remap, head, body = fresh.rename(rule.head, rule.body)
        if slot is not None:
            extended = unify_atoms(slot, head, subst)
            if extended is None:
                raise MalformedTreeError(
                    f"child rule {rule.id} does not fit subgoal {slot}"
                )
            subst = extended
        children = [build(child, body[i]) for i, child in enumerate(node.children)]
        return _GenNode(head, node.rule_id, remap, children)

    skeleton = build(tree, None)

    renames: dict[str, Var] = {}

    def canonical(term: Term) -> Term:
        term = resolve(term, subst)
        if isinstance(term, Const):
            return term
        if term.name not in renames:
            i = len(renames)
            if i < len(_CANONICAL_NAMES):
                renames[term.name] = Var(_CANONICAL_NAMES[i])
            else:
                renames[term.name] = Var(f"x{i}")
        return renames[term.name]

    def materialize(g: _GenNode) -> TreeNode:
        atom = Atom(g.atom.pred, tuple(canonical(a) for a in g.atom.args))
        if g.remap is None:
            if g.children:
                raise MalformedTreeError("leaf with children")
            return FactLeaf(atom, g.by)
        node_subst = tuple(
            sorted((name, canonical(var)) for name, var in g.remap.items())
        )
        return RuleNode(atom, g.by, node_subst, tuple(materialize(c) for c in g.children))

    return materialize(skeleton)


def reinstantiate(tree: TreeNode, binding: Mapping[str, Term]) -> TreeNode:
    """Substitute variables throughout a (generalized) tree."""

    def walk(node: TreeNode) -> TreeNode:
        atom = substitute(node.atom, binding)
        if isinstance(node, FactLeaf):
            return FactLeaf(atom, node.fact_id)
        subst = tuple((k, resolve(v, binding)) for k, v in node.substitution)
        return RuleNode(atom, node.rule_id, subst, tuple(walk(c) for c in node.children))

    return walk(tree)


def check_generalization(
    tree: TreeNode,
    generalized: TreeNode,
    theory: Theory,
    facts: FactSet,
) -> bool:
    """Soundness check, in two halves.

    The generalized tree must follow the rules on its own terms: every
    node's atom and children are exactly its rule under the recorded
    substitution, so no leaf claims more generality than the rules license.
    And reinstantiated with the original goal's bindings it must reproduce
    the concrete tree and verify against the theory and facts.
    """
    if not _rule_consistent(generalized, theory):
        return False
    binding = _match_atom(generalized.atom, tree.atom, {})
    if binding is None:
        return False
    replayed = reinstantiate(generalized, binding)
    full = _match_tree(replayed, tree, dict(binding))
    if full is None:
        return False
    return verify_explanation(theory, facts, reinstantiate(generalized, full)).ok


def _rule_consistent(node: TreeNode, theory: Theory) -> bool:
    if isinstance(node, FactLeaf):
        return True
    rule = theory.rule_by_id(node.rule_id)
    if rule is None or len(rule.body) != len(node.children):
        return False
    subst = dict(node.substitution)
    if substitute(rule.head, subst) != node.atom:
        return False
    for body_atom, child in zip(rule.body, node.children):
        if substitute(body_atom, subst) != child.atom:
            return False
    return all(_rule_consistent(c, theory) for c in node.children)


def _match_atom(general: Atom, concrete: Atom, binding: dict) -> dict | None:
    if general.pred != concrete.pred or len(general.args) != len(concrete.args):
        return None
    out = dict(binding)
    for g, c in zip(general.args, concrete.args):
        if isinstance(g, Var):
            if out.setdefault(g.name, c) != c:
                return None
        elif g != c:
            return None
    return out


def _match_tree(general: TreeNode, concrete: TreeNode, binding: dict) -> dict | None:
    out = _match_atom(general.atom, concrete.atom, binding)
    if out is None:
        return None
    g_children = general.children if isinstance(general, RuleNode) else ()
    c_children = concrete.children if isinstance(concrete, RuleNode) else ()
    if len(g_children) != len(c_children):
        return None
    for g, c in zip(g_children, c_children):
        out = _match_tree(g, c, out)
        if out is None:
            return None
    return out


# ---------------------------------------------------------------------------
# frontier cuts

@dataclass(frozen=True)
class FrontierSpec:
    """Where to stop compiling: at the root, at the leaves, at the topmost
    nodes matching named predicates, or at a fixed depth."""

    mode: str
    predicates: frozenset[str] = frozenset()
    depth: int = 0

    def __post_init__(self):
        if self.mode not in ("root", "leaves", "preds", "depth"):
            raise SpaceError(f"unknown frontier mode {self.mode!r}")
        if self.mode == "preds" and not self.predicates:
            raise SpaceError("preds frontier needs at least one predicate")
        if self.mode == "depth" and self.depth < 0:
            raise SpaceError("depth frontier must be non-negative")

    @classmethod
    def parse(cls, text: str) -> "FrontierSpec":
        text = text.strip()
        if text == "root":
            return cls("root")
        if text == "leaves":
            return cls("leaves")
        if text.startswith("preds:"):
            names = [p.strip() for p in text[len("preds:"):].split(",") if p.strip()]
            return cls("preds", predicates=frozenset(names))
        if text.startswith("depth:"):
            raw = text[len("depth:"):].strip()
            if not raw.isdigit():
                raise SpaceError(f"bad depth in frontier {text!r}")
            return cls("depth", depth=int(raw))
        raise SpaceError(f"bad frontier spec {text!r}")

    def __str__(self) -> str:
        if self.mode == "preds":
            return "preds:" + ",".join(sorted(self.predicates))
        if self.mode == "depth":
            return f"depth:{self.depth}"
        return self.mode


@dataclass(frozen=True)
class OpenSlot:
    index: int


@dataclass(frozen=True)
class FixedNode:
    atom: Atom
    by: str  # rule id, or fact id at a leaf
    children: tuple["FixedNode | OpenSlot", ...] = ()


@dataclass(frozen=True)
class OperationalizedExplanation:
    """A generalized explanation split at a frontier.

    ``fixed`` is the compiled-away region (an OpenSlot at the very top when
    the cut is at the root); ``open_subgoals`` lists the frontier atoms in
    left-to-right order.  Together they reconstruct a cut of the tree.
    """

    id: str
    goal: Atom
    fixed: "FixedNode | OpenSlot"
    open_subgoals: tuple[Atom, ...]

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "goal": atom_to_json(self.goal),
            "open": [atom_to_json(a) for a in self.open_subgoals],
            "fixed": _fixed_to_json(self.fixed),
        }

    @classmethod
    def from_json(cls, data: dict) -> "OperationalizedExplanation":
        if not isinstance(data, dict) or "goal" not in data or "fixed" not in data:
            raise SpaceError(f"malformed operationalized explanation JSON")
        return cls(
            id=str(data.get("id", "e1")),
            goal=atom_from_json(data["goal"]),
            fixed=_fixed_from_json(data["fixed"]),
            open_subgoals=tuple(atom_from_json(a) for a in data.get("open", [])),
        )


def _fixed_to_json(node: "FixedNode | OpenSlot") -> dict:
    if isinstance(node, OpenSlot):
        return {"open": node.index}
    return {
        "atom": atom_to_json(node.atom),
        "by": node.by,
        "children": [_fixed_to_json(c) for c in node.children],
    }


def _fixed_from_json(data: dict) -> "FixedNode | OpenSlot":
    if not isinstance(data, dict):
        raise SpaceError(f"malformed fixed-region JSON: {data!r}")
    if "open" in data:
        return OpenSlot(int(data["open"]))
    return FixedNode(
        atom_from_json(data["atom"]),
        str(data["by"]),
        tuple(_fixed_from_json(c) for c in data.get("children", [])),
    )


def cut(tree: TreeNode, frontier: FrontierSpec, op_id: str = "e1") -> OperationalizedExplanation:
    """Split a generalized tree at a frontier into fixed and open regions."""
    opens: list[Atom] = []

    def take(atom: Atom) -> OpenSlot:
        opens.append(atom)
        return OpenSlot(len(opens) - 1)

    def walk(node: TreeNode, depth: int) -> FixedNode | OpenSlot:
        if frontier.mode == "preds" and node.atom.pred in frontier.predicates:
            return take(node.atom)
        if frontier.mode == "depth" and depth == frontier.depth:
            return take(node.atom)
        if isinstance(node, FactLeaf):
            return FixedNode(node.atom, node.fact_id)
        return FixedNode(
            node.atom, node.rule_id, tuple(walk(c, depth + 1) for c in node.children)
        )

    if frontier.mode == "root":
        fixed: FixedNode | OpenSlot = take(tree.atom)
    elif frontier.mode == "leaves":
        fixed = walk(tree, 0)  # no node matches; whole tree stays fixed
    else:
        fixed = walk(tree, 0)
        if frontier.mode == "preds" and not opens:
            raise FrontierMissError(
                f"no node matches predicates {sorted(frontier.predicates)}"
            )
    return OperationalizedExplanation(op_id, tree.atom, fixed, tuple(opens))


# ---------------------------------------------------------------------------
# content bindings

@dataclass(frozen=True)
class BindingEntry:
    decisions: tuple[tuple[str, str], ...]  # sorted key/value pairs
    ref: str
    payload: str = ""


@dataclass(frozen=True)
class ContentBinding:
    entries: tuple[BindingEntry, ...] = ()

    def __post_init__(self):
        seen_tuples = set()
        seen_refs = set()
        for entry in self.entries:
            if entry.decisions in seen_tuples:
                raise SpaceError(f"duplicate binding tuple {dict(entry.decisions)!r}")
            if entry.ref in seen_refs:
                raise SpaceError(f"duplicate binding ref {entry.ref!r}")
            seen_tuples.add(entry.decisions)
            seen_refs.add(entry.ref)

    @classmethod
    def from_json(cls, data: object) -> "ContentBinding":
        if not isinstance(data, list):
            raise SpaceError("binding file must hold a JSON list")
        entries = []
        for item in data:
            if not isinstance(item, dict) or "tuple" not in item or "page" not in item:
                raise SpaceError(f"malformed binding entry {item!r}")
            decisions = tuple(
                sorted(
                    (str(k), "true" if v is True else str(v))
                    for k, v in item["tuple"].items()
                )
            )
            entries.append(
                BindingEntry(decisions, str(item["page"]), str(item.get("payload", "")))
            )
        return cls(tuple(entries))

    def lookup(self, decided: Mapping[str, str]) -> tuple[int, BindingEntry] | None:
        want = tuple(sorted(decided.items()))
        for i, entry in enumerate(self.entries):
            if entry.decisions == want:
                return i, entry
        return None

    def values_for(self, key: str) -> list[str]:
        """Constants bound to ``key`` across entries, first appearance first."""
        out: list[str] = []
        for entry in self.entries:
            for k, v in entry.decisions:
                if k == key and v not in out:
                    out.append(v)
        return out


EMPTY_BINDING = ContentBinding(())


# ---------------------------------------------------------------------------
# model generation

def _selection_key(atom: Atom) -> str | None:
    if atom.pred.endswith("select") and len(atom.pred) > len("select") and len(atom.args) == 2:
        return atom.pred[: -len("select")].capitalize()
    return None


def _slug(decided: Mapping[str, str]) -> str:
    parts = [f"{k}-{v}" for k, v in decided.items()]
    text = "-".join(parts).lower()
    text = re.sub(r"[^a-z0-9]+", "-", text).strip("-")
    return text or "all"


class _Generator:
    def __init__(
        self,
        theory: Theory,
        bindings: ContentBinding,
        strict: bool,
        max_depth: int,
    ):
        self.theory = theory
        self.bindings = bindings
        self.strict = strict
        self.max_depth = max_depth
        self.fresh = _Fresh()
        self.groups: dict[str, set[Test]] = {}
        self.used: set[int] = set()

    # -- content -----------------------------------------------------------

    def content_for(self, decided: dict[str, str]) -> Content:
        hit = self.bindings.lookup(decided)
        if hit is not None:
            index, entry = hit
            self.used.add(index)
            return Content(entry.ref, entry.payload)
        return Content("todo-" + _slug(decided), "[placeholder]")

    def placeholder(self, decided: dict[str, str], pred: str) -> Content:
        if self.strict:
            raise UnboundSubgoalError(
                f"no rule or binding constant determines subgoal {pred!r}"
            )
        return self.content_for(decided)

    # -- expansion ---------------------------------------------------------

    def expand(
        self,
        alts: list[tuple[Atom, ...]],
        decided: dict[str, str],
        origin: str | None,
        depth: int,
    ) -> Node:
        if depth > self.max_depth:
            raise SpaceError(f"model expansion exceeded depth {self.max_depth}")
        if all(not alt for alt in alts):
            return self.content_for(decided)
        if any(not alt for alt in alts):
            raise SpaceError(
                "rule alternatives complete at different points; cannot factor"
            )
        merged = _merge_firsts(alts)
        if merged is not None:
            goal, rests = merged
            return self.expand_goal(goal, rests, decided, origin, depth)
        return self.diverge(alts, decided, origin, depth)

    def expand_goal(
        self,
        goal: Atom,
        rests: list[tuple[Atom, ...]],
        decided: dict[str, str],
        origin: str | None,
        depth: int,
    ) -> Node:
        key = _selection_key(goal)
        if key is not None:
            value = goal.args[1]
            if isinstance(value, Const):
                body = self.expand(rests, {**decided, key: value.value}, None, depth + 1)
                return Chain((Arm(Test(key, value.value), body),))
            values = self.bindings.values_for(key)
            if not values:
                return self.placeholder(decided, goal.pred)
            arms = []
            for v in values:
                theta = {value.name: Const(v)}
                arms.append(
                    Arm(
                        Test(key, v),
                        self.expand(
                            [tuple(substitute(a, theta) for a in rest) for rest in rests],
                            {**decided, key: v},
                            None,
                            depth + 1,
                        ),
                    )
                )
            return Chain(tuple(arms))

        rules = self.theory.rules_for(goal.pred)
        if not rules:
            return self.placeholder(decided, goal.pred)
        alternatives: list[tuple[Atom, ...]] = []
        for rule in rules:
            _, head, body = self.fresh.rename(rule.head, rule.body)
            theta = unify_atoms(head, goal, {})
            if theta is None:
                continue
            for rest in rests:
                alternatives.append(
                    tuple(substitute(a, theta) for a in body)
                    + tuple(substitute(a, theta) for a in rest)
                )
        if not alternatives:
            return self.placeholder(decided, goal.pred)
        next_origin = goal.pred if len(rules) > 1 else origin
        return self.expand(alternatives, decided, next_origin, depth + 1)

    def diverge(
        self,
        alts: list[tuple[Atom, ...]],
        decided: dict[str, str],
        origin: str | None,
        depth: int,
    ) -> Node:
        firsts = [alt[0] for alt in alts]
        sel_keys = {_selection_key(f) for f in firsts}
        if len(sel_keys) == 1 and None not in sel_keys:
            key = sel_keys.pop()
            if not all(isinstance(f.args[1], Const) for f in firsts):
                raise SpaceError(
                    f"cannot factor mixed constant/variable selections for {key}"
                )
            buckets: dict[str, list[tuple[Atom, ...]]] = {}
            for alt in alts:
                buckets.setdefault(alt[0].args[1].value, []).append(alt)
            arms = []
            for value, bucket in buckets.items():
                merged = _merge_firsts(bucket)
                if merged is None:
                    raise SpaceError(f"cannot align alternatives for {key}={value}")
                _, rests = merged
                arms.append(
                    Arm(
                        Test(key, value),
                        self.expand(rests, {**decided, key: value}, None, depth + 1),
                    )
                )
            return Chain(tuple(arms))

        if None in sel_keys and len({f.pred for f in firsts}) > 1:
            if any(_selection_key(f) is not None for f in firsts):
                raise SpaceError("cannot factor selections against derived subgoals")
            buckets2: dict[str, list[tuple[Atom, ...]]] = {}
            for alt in alts:
                buckets2.setdefault(alt[0].pred, []).append(alt)
            flag_tests = [Test(pred.capitalize()) for pred in buckets2]
            if origin is not None and len(flag_tests) >= 2:
                self.groups.setdefault(origin.capitalize(), set()).update(flag_tests)
            arms = []
            for pred, bucket in buckets2.items():
                arms.append(
                    Arm(
                        Test(pred.capitalize()),
                        self.expand(
                            bucket,
                            {**decided, pred.capitalize(): "true"},
                            None,
                            depth + 1,
                        ),
                    )
                )
            return Chain(tuple(arms))
        raise SpaceError("cannot factor alternatives that diverge incompatibly")


def _match_modulo(a: Atom, b: Atom, fwd: dict, rev: dict) -> bool:
    """Extend the variable bijection fwd/rev so a maps onto b, or fail."""
    if a.pred != b.pred or len(a.args) != len(b.args):
        return False
    for x, y in zip(a.args, b.args):
        if isinstance(x, Const) or isinstance(y, Const):
            if x != y:
                return False
            continue
        if fwd.setdefault(x.name, y.name) != y.name:
            return False
        if rev.setdefault(y.name, x.name) != x.name:
            return False
    return True


def _merge_firsts(
    alts: list[tuple[Atom, ...]]
) -> tuple[Atom, list[tuple[Atom, ...]]] | None:
    """When every alternative opens with the same literal (modulo a variable
    bijection), rewrite them all over the first alternative's variables and
    split off the shared literal."""
    base = alts[0][0]
    rests: list[tuple[Atom, ...]] = [alts[0][1:]]
    for alt in alts[1:]:
        fwd: dict = {}
        rev: dict = {}
        if not _match_modulo(alt[0], base, fwd, rev):
            return None
        remap = {name: Var(target) for name, target in fwd.items()}
        rests.append(tuple(substitute(a, remap) for a in alt[1:]))
    return base, rests


def generate_model(
    theory: Theory,
    ops: Sequence[OperationalizedExplanation],
    bindings: ContentBinding = EMPTY_BINDING,
    *,
    strict: bool = False,
    max_depth: int = 64,
    require_bindings_reachable: bool = True,
) -> Program:
    """Compile operationalized explanations into a program.

    Open subgoals expand in order; selection predicates become tests keyed
    by their name (``officeselect`` asks ``Office``), rule alternatives
    become chain arms, and completed paths look their decision set up in
    ``bindings`` (falling back to placeholder content).  Multiple
    explanations sit under a top-level ``explanation`` switch.  With
    ``strict`` a subgoal nothing determines raises UnboundSubgoalError
    instead of becoming a placeholder.
    """
    if not ops:
        raise SpaceError("no operationalized explanations to compile")
    ids = [op.id for op in ops]
    if len(ids) != len(set(ids)):
        raise SpaceError("duplicate explanation id")
    gen = _Generator(theory, bindings, strict, max_depth)

    def compile_op(op: OperationalizedExplanation, decided: dict[str, str]) -> Node:
        if isinstance(op.fixed, OpenSlot):
            return gen.content_for(decided)  # nothing fixed: the whole goal stays open
        if not op.open_subgoals:
            return gen.content_for(decided)  # nothing open: a complete replay
        return gen.expand([tuple(op.open_subgoals)], decided, None, 0)

    if len(ops) == 1:
        root: Node = compile_op(ops[0], {})
    else:
        arms = []
        for op in ops:
            body = compile_op(op, {"explanation": op.id})
            arms.append(Arm(Test("explanation", op.id), body))
        root = Chain(tuple(arms))

    if require_bindings_reachable:
        missed = [
            dict(e.decisions)
            for i, e in enumerate(bindings.entries)
            if i not in gen.used
        ]
        if missed:
            raise UnreachableBindingError(
                f"binding tuples match no complete path: {missed!r}"
            )
    mutexes = tuple(
        MutexGroup(name, frozenset(members))
        for name, members in sorted(gen.groups.items())
        if len(members) >= 2
    )
    return Program(root=root, mutexes=mutexes)


# ---------------------------------------------------------------------------
# operationality assessment

@dataclass(frozen=True)
class AssessmentRow:
    frontier: FrontierSpec
    personable_ratio: float
    complete_ratio: float
    model_size: int

    def to_json(self) -> dict:
        return {
            "frontier": str(self.frontier),
            "personable_ratio": self.personable_ratio,
            "complete_ratio": self.complete_ratio,
            "model_size": self.model_size,
        }


@dataclass(frozen=True)
class AssessmentReport:
    rows: tuple[AssessmentRow, ...]

    def to_json(self) -> dict:
        return {"rows": [r.to_json() for r in self.rows]}


def assess_operationality(
    theory: Theory,
    tree: TreeNode,
    frontiers: Sequence[FrontierSpec],
    probes: Sequence[Activity],
    bindings: ContentBinding = EMPTY_BINDING,
    *,
    max_depth: int = 64,
) -> AssessmentReport:
    """Generate one model per frontier and score it against the probes.

    Rows are ranked by personable ratio (descending), then by model size
    (ascending), keeping the given order for full ties.  Binding tuples a
    frontier's model cannot reach are ignored here; reachability is enforced
    when a chosen model is finally generated.
    """
    generalized = generalize(tree, theory)
    rows = []
    for i, frontier in enumerate(frontiers):
        op = cut(generalized, frontier, op_id=f"e{i + 1}")
        model = generate_model(
            theory,
            [op],
            bindings,
            strict=False,
            max_depth=max_depth,
            require_bindings_reachable=False,
        )
        coverage = evaluate_coverage(model, probes)
        rows.append(
            (
                AssessmentRow(
                    frontier,
                    coverage.personable_ratio,
                    coverage.complete_ratio,
                    count_nodes(model),
                ),
                i,
            )
        )
    rows.sort(key=lambda pair: (-pair[0].personable_ratio, pair[0].model_size, pair[1]))
    return AssessmentReport(tuple(r for r, _ in rows))
