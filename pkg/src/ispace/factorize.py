"""Classifying anticipated activities against a program's factorization.

An activity is what one user brings to a session: some tests already
settled, perhaps a demanded question order, and whether the user expects to
keep interacting afterwards.  Classification asks whether the program's
nesting serves that activity:

  Personable     the residual still offers choices, and any demanded order
                 matches the residual's nesting level by level
  UnderFactored  the demanded order asks a question the nesting cannot ask
                 at that level; no residual serves the activity
  OverFactored   the givens settle everything, so only a complete
                 evaluation remains and interaction is thwarted

Coverage aggregates verdicts over an activity file and is the go/no-go
measure for shipping a factorization.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .core import (
    Assignment,
    Chain,
    Node,
    Program,
    Seq,
    SpaceError,
    resolve_given,
)
from .specialize import is_complete, propagate_mutex, specialize


class Verdict(enum.Enum):
    PERSONABLE = "Personable"
    UNDER_FACTORED = "UnderFactored"
    OVER_FACTORED = "OverFactored"


@dataclass(frozen=True)
class Activity:
    """One anticipated use of the space.  ``given`` stays raw; resolution
    against the program happens at classification time."""

    id: str
    given: Mapping[str, object] = field(default_factory=dict)
    required_root_order: tuple[str, ...] | None = None
    expects_interaction: bool = True
    note: str = ""

    @classmethod
    def from_json(cls, data: dict) -> "Activity":
        if not isinstance(data, dict) or "id" not in data:
            raise SpaceError(f"malformed activity JSON: {data!r}")
        order = data.get("required_root_order")
        return cls(
            id=str(data["id"]),
            given=dict(data.get("given", {})),
            required_root_order=tuple(str(k) for k in order) if order else None,
            expects_interaction=bool(data.get("expects_interaction", True)),
            note=str(data.get("note", "")),
        )


def load_activities(text: str) -> list[Activity]:
    data = json.loads(text)
    if not isinstance(data, list):
        raise SpaceError("activity file must hold a JSON list")
    acts = [Activity.from_json(item) for item in data]
    ids = [a.id for a in acts]
    if len(ids) != len(set(ids)):
        raise SpaceError("duplicate activity id")
    return acts


@dataclass(frozen=True)
class FactorizationVerdict:
    activity_id: str
    verdict: Verdict
    residual: Program | None  # witness for Personable / OverFactored
    violated_key: str | None = None  # witness for UnderFactored
    note: str = ""

    def to_json(self) -> dict:
        from .core import program_to_json

        data: dict = {"activity": self.activity_id, "verdict": self.verdict.value}
        if self.violated_key is not None:
            data["violated_key"] = self.violated_key
        if self.residual is not None:
            data["residual"] = program_to_json(self.residual)
        if self.note:
            data["note"] = self.note
        return data


def classify(program: Program, activity: Activity) -> FactorizationVerdict:
    """Classify one activity.  Raises InconsistentAssignmentError when the
    activity's givens contradict each other under mutual exclusion."""
    assignment = resolve_given(program, activity.given)
    applied = propagate_mutex(program, assignment)
    residual = specialize(program, assignment).residual

    if activity.required_root_order:
        demanded = [
            key
            for key in activity.required_root_order
            if not _order_key_decided(program, applied, key)
        ]
        violated = _order_violation(program, residual.root, demanded)
        if violated is not None:
            return FactorizationVerdict(
                activity.id, Verdict.UNDER_FACTORED, None,
                violated_key=violated, note=activity.note,
            )

    if is_complete(residual):
        return FactorizationVerdict(
            activity.id, Verdict.OVER_FACTORED, residual, note=activity.note
        )
    return FactorizationVerdict(
        activity.id, Verdict.PERSONABLE, residual, note=activity.note
    )


def _order_key_decided(program: Program, applied: Assignment, key: str) -> bool:
    chosen = applied.chosen_map
    if key in chosen:
        return True
    group = program.group_named(key)
    if group is not None:
        return any(chosen.get(m.key) == m.value for m in group.members)
    return False


def _top_chains(node: Node | None) -> list[Chain]:
    if node is None:
        return []
    if isinstance(node, Chain):
        return [node]
    if isinstance(node, Seq):
        out: list[Chain] = []
        for child in node.children:
            out.extend(_top_chains(child))
        return out
    return []  # content asks nothing


def _chain_matches_key(program: Program, chain: Chain, key: str) -> bool:
    if all(arm.test.key == key for arm in chain.arms):
        return True
    group = program.group_named(key)
    if group is not None:
        return all(arm.test in group.members for arm in chain.arms)
    return False


def _order_violation(
    program: Program, root: Node | None, demanded: Sequence[str]
) -> str | None:
    """First demanded key some same-level chain cannot ask, else None.

    Level k of the residual must ask demanded[k]: every chain at that level
    has to test the demanded key (directly or through its declared group).
    Levels with no chains left satisfy any remaining demands vacuously.
    """
    level = _top_chains(root)
    for key in demanded:
        if not level:
            return None
        for chain in level:
            if not _chain_matches_key(program, chain, key):
                return key
        level = [
            c for chain in level for arm in chain.arms for c in _top_chains(arm.body)
        ]
    return None


@dataclass(frozen=True)
class CoverageReport:
    total: int
    personable: int
    complete_only: int
    unsupported: int
    verdicts: tuple[FactorizationVerdict, ...]
    errors: tuple[tuple[str, str], ...] = ()  # (activity id, reason)

    @property
    def personable_ratio(self) -> float:
        return self.personable / self.total if self.total else 0.0

    @property
    def complete_ratio(self) -> float:
        return self.complete_only / self.total if self.total else 0.0

    def to_json(self) -> dict:
        return {
            "total": self.total,
            "personable": self.personable,
            "complete_only": self.complete_only,
            "unsupported": self.unsupported,
            "personable_ratio": self.personable_ratio,
            "complete_ratio": self.complete_ratio,
            "verdicts": [v.to_json() for v in self.verdicts],
            "errors": [{"activity": a, "reason": r} for a, r in self.errors],
        }


def evaluate_coverage(program: Program, activities: Sequence[Activity]) -> CoverageReport:
    """Classify every activity; failures count as unsupported, not crashes."""
    verdicts: list[FactorizationVerdict] = []
    errors: list[tuple[str, str]] = []
    personable = complete_only = unsupported = 0
    for activity in activities:
        try:
            verdict = classify(program, activity)
        except SpaceError as exc:
            unsupported += 1
            errors.append((activity.id, str(exc)))
            continue
        verdicts.append(verdict)
        if verdict.verdict is Verdict.PERSONABLE:
            personable += 1
        elif verdict.verdict is Verdict.OVER_FACTORED:
            complete_only += 1
        else:
            unsupported += 1
    return CoverageReport(
        total=len(activities),
        personable=personable,
        complete_only=complete_only,
        unsupported=unsupported,
        verdicts=tuple(verdicts),
        errors=tuple(errors),
    )
