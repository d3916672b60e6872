"""Partial evaluation of information-space programs.

Specializing a program against a partial assignment hoists the arms the
assignment settles and drops the arms it rules out, producing a smaller
residual program over the remaining undecided tests.  Assignments are first
closed under mutual exclusion: choosing one member of a mutex family denies
every other member, both for declared groups and for tests sharing a key.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .core import (
    Arm,
    Assignment,
    Chain,
    Content,
    InconsistentAssignmentError,
    Node,
    Program,
    Seq,
    SpaceError,
    Test,
    group_nodes,
    iter_tests,
)


class BudgetExceededError(SpaceError):
    pass


@dataclass(frozen=True)
class SpecializationResult:
    residual: Program
    applied: Assignment
    dropped_arms: int
    hoisted_chains: int


def propagate_mutex(program: Program, assignment: Assignment) -> Assignment:
    """Close an assignment under the program's mutual exclusions.

    Each chosen test denies every conflicting test: other values of the same
    key, and the other members of its declared group.  Raises
    InconsistentAssignmentError when propagation contradicts a choice.
    """
    chosen = assignment.chosen_map
    denied = {k: set(v) for k, v in assignment.denied}

    values_by_key: dict[str, set[str]] = {}
    for test in iter_tests(program.root):
        values_by_key.setdefault(test.key, set()).add(test.value)
    for group in program.mutexes:
        for member in group.members:
            values_by_key.setdefault(member.key, set()).add(member.value)

    for key, value in chosen.items():
        for other in values_by_key.get(key, set()):
            if other != value:
                denied.setdefault(key, set()).add(other)
        group = program.group_of(Test(key, value))
        if group is not None:
            for member in group.members:
                if member == Test(key, value):
                    continue
                if chosen.get(member.key) == member.value:
                    raise InconsistentAssignmentError(
                        f"{key}={value} and {member.key}={member.value} "
                        f"are both chosen from mutex group {group.name!r}"
                    )
                denied.setdefault(member.key, set()).add(member.value)

    for key, value in chosen.items():
        if value in denied.get(key, set()):
            raise InconsistentAssignmentError(
                f"choice {key}={value} is denied by mutual exclusion"
            )
    return Assignment.make(chosen, denied)


class _Counters:
    def __init__(self):
        self.dropped = 0
        self.hoisted = 0


def specialize(program: Program, assignment: Assignment) -> SpecializationResult:
    """Partially evaluate ``program`` against ``assignment``.

    The assignment is propagated first; the applied (closed) form is
    returned alongside the residual.  An arm whose test is settled true is
    hoisted in place of its chain (the remaining arms, settled or not, are
    alternatives the choice discards); settled-false arms are dropped; a
    chain whose every arm vanishes disappears.  The residual is itself a
    valid program, possibly void.
    """
    applied = propagate_mutex(program, assignment)
    counters = _Counters()
    root = _spec_node(program.root, applied, counters)
    residual = Program(root=root, mutexes=program.mutexes, meta=dict(program.meta))
    return SpecializationResult(
        residual=residual,
        applied=applied,
        dropped_arms=counters.dropped,
        hoisted_chains=counters.hoisted,
    )


def _spec_node(node: Node | None, a: Assignment, counters: _Counters) -> Node | None:
    if node is None or isinstance(node, Content):
        return node
    if isinstance(node, Seq):
        children = [_spec_node(c, a, counters) for c in node.children]
        return group_nodes(c for c in children if c is not None)
    if isinstance(node, Chain):
        kept: list[Arm] = []
        for i, arm in enumerate(node.arms):
            verdict = a.decide(arm.test)
            if verdict is True:
                counters.hoisted += 1
                counters.dropped += len(node.arms) - 1
                return _spec_node(arm.body, a, counters)
            if verdict is False:
                counters.dropped += 1
                continue
            body = _spec_node(arm.body, a, counters)
            if body is None:
                counters.dropped += 1
                continue
            kept.append(Arm(arm.test, body))
        if not kept:
            return None
        return Chain(tuple(kept))
    raise SpaceError(f"unknown node {node!r}")


def is_complete(program: Program) -> bool:
    """A program is complete when no tests remain: nothing left to ask."""
    return not any(True for _ in iter_tests(program.root))


def specializes_to(
    general: Program, specific: Program, budget: int = 20000
) -> Assignment | None:
    """Search for an assignment carrying ``general`` onto ``specific``.

    Candidate assignments range over the keys present in ``general`` but
    absent from ``specific``; per key the options are each value chosen or
    the whole key denied.  Candidates are tried smallest first, so the
    returned witness is minimal in the number of keys it settles.  Returns
    None when the search space is exhausted without a match; raises
    BudgetExceededError when ``budget`` candidates were tried first.
    """
    general_values: dict[str, set[str]] = {}
    for test in iter_tests(general.root):
        general_values.setdefault(test.key, set()).add(test.value)
    candidate_keys = sorted(set(general_values) - set(specific.test_keys()))

    tried = 0
    for size in range(len(candidate_keys) + 1):
        for keys in itertools.combinations(candidate_keys, size):
            option_lists = []
            for key in keys:
                values = sorted(general_values[key])
                options: list[tuple[str, object]] = [(key, v) for v in values]
                options.append((key, frozenset(values)))  # deny them all
                option_lists.append(options)
            for combo in itertools.product(*option_lists):
                if tried >= budget:
                    raise BudgetExceededError(
                        f"no witness within {budget} candidates"
                    )
                tried += 1
                chosen = {k: v for k, v in combo if isinstance(v, str)}
                denied = {k: v for k, v in combo if isinstance(v, frozenset)}
                try:
                    candidate = Assignment.make(chosen, denied)
                    residual = specialize(general, candidate).residual
                except InconsistentAssignmentError:
                    continue
                if residual == specific:
                    return candidate
    return None
