import random

import pytest

from ispace.core import (
    Assignment,
    Chain,
    Content,
    InconsistentAssignmentError,
    Program,
    enumerate_paths,
    parse,
    resolve_given,
    serialize,
)
from ispace.specialize import (
    BudgetExceededError,
    is_complete,
    propagate_mutex,
    specialize,
    specializes_to,
)

from genprog import oracle_paths, random_assignment, random_program


def given(program, mapping):
    return resolve_given(program, mapping)


# ---------------------------------------------------------------------------
# mutex propagation

def test_propagate_declared_group(congress):
    applied = propagate_mutex(congress, given(congress, {"Dem": True}))
    assert applied.chosen_map == {"Dem": "true"}
    assert applied.denied_map["Rep"] == frozenset({"true"})


def test_propagate_same_key(pigments):
    applied = propagate_mutex(pigments, given(pigments, {"Category": "Blue"}))
    assert applied.denied_map["Category"] == frozenset({"Yellow", "Red"})


def test_propagate_rejects_two_choices_in_group(congress):
    with pytest.raises(InconsistentAssignmentError):
        propagate_mutex(congress, Assignment.make({"Dem": "true", "Rep": "true"}))


def test_propagate_rejects_denied_choice(pigments):
    with pytest.raises(InconsistentAssignmentError):
        propagate_mutex(
            pigments, Assignment.make({"Category": "Blue"}, {"Category": {"Blue"}})
        )


def test_propagate_unknown_key_is_inert(congress):
    applied = propagate_mutex(congress, Assignment.make({"County": "Kings"}))
    assert applied.chosen_map == {"County": "Kings"}
    assert "County" not in applied.denied_map


# ---------------------------------------------------------------------------
# specialization

def test_specialize_party_matches_golden(congress, congress_dem):
    result = specialize(congress, given(congress, {"Party": "Dem"}))
    assert result.residual == congress_dem
    assert result.hoisted_chains == 2
    assert result.dropped_arms == 2


def test_specialize_flag_spelling_matches_group_spelling(congress):
    by_flag = specialize(congress, given(congress, {"Dem": True}))
    by_group = specialize(congress, given(congress, {"Party": "Dem"}))
    assert by_flag.residual == by_group.residual


def test_specialize_user1(congress):
    residual = specialize(congress, given(congress, {"Dem": True, "NY": True})).residual
    paths = enumerate_paths(residual)
    assert [(tuple(map(str, t)), ref) for t, ref in paths] == [
        (("Sen",), "sen-dem-ny"),
        (("Repr",), "repr-dem-ny"),
    ]


def test_specialize_to_completion(congress):
    residual = specialize(
        congress, given(congress, {"Sen": True, "Dem": True, "CA": True})
    ).residual
    assert residual.root == Content("sen-dem-ca")
    assert is_complete(residual)


def test_specialize_identity(congress, pigments):
    for program in (congress, pigments):
        assert specialize(program, Assignment()).residual == program


def test_specialize_composition_and_commutativity(congress):
    a = given(congress, {"Dem": True})
    b = given(congress, {"NY": True})
    ab = given(congress, {"Dem": True, "NY": True})
    one_shot = specialize(congress, ab).residual
    assert specialize(specialize(congress, a).residual, b).residual == one_shot
    assert specialize(specialize(congress, b).residual, a).residual == one_shot


def test_specialize_denial_prunes_arm(congress):
    residual = specialize(congress, given(congress, {"Party": "!Dem"})).residual
    tests = {str(arm.test) for arm in residual.root.arms[0].body.arms}
    assert tests == {"Rep"}


def test_specialize_total_denial_is_void(congress):
    assignment = given(congress, {"Sen": False, "Repr": False})
    residual = specialize(congress, assignment).residual
    assert residual.root is None
    assert is_complete(residual)
    assert enumerate_paths(residual) == ()


def test_specialize_applied_is_closure(congress):
    result = specialize(congress, given(congress, {"Dem": True}))
    assert result.applied.denied_map["Rep"] == frozenset({"true"})


def test_residual_closure_reparses(congress):
    residual = specialize(congress, given(congress, {"Party": "Dem"})).residual
    assert parse(serialize(residual)) == residual


def test_inner_key_chosen_keeps_outer_chain(pigments):
    residual = specialize(pigments, given(pigments, {"Pigment": "Orpiment"})).residual
    assert isinstance(residual.root, Chain)
    assert [str(a.test) for a in residual.root.arms] == ["Category=Yellow"]
    inner = residual.root.arms[0].body
    assert {str(a.test) for a in inner.arms} == {
        "Detail=History",
        "Detail=Composition",
        "Detail=Preparation",
    }


# ---------------------------------------------------------------------------
# reverse search

def test_specializes_to_finds_party_witness(congress, congress_dem):
    witness = specializes_to(congress, congress_dem)
    assert witness is not None
    assert witness.chosen_map == {"Dem": "true"}
    assert specialize(congress, witness).residual == congress_dem


def test_specializes_to_reflexive(congress, pigments):
    for program in (congress, pigments):
        witness = specializes_to(program, program)
        assert witness == Assignment()


def test_specializes_to_complete_leaf(congress):
    specific = specialize(
        congress, given(congress, {"Sen": True, "Dem": True, "CA": True})
    ).residual
    witness = specializes_to(congress, specific)
    assert witness is not None
    assert specialize(congress, witness).residual == specific
    assert len(witness.chosen_map) == 3


def test_specializes_to_unrelated_is_none(congress):
    stranger = Program(root=Content("not-here"))
    assert specializes_to(congress, stranger) is None


def test_specializes_to_budget(congress):
    stranger = Program(root=Content("not-here"))
    with pytest.raises(BudgetExceededError):
        specializes_to(congress, stranger, budget=3)


# ---------------------------------------------------------------------------
# randomized spot checks (the large seeded suites live in the acceptance run)

def test_random_closure_sample():
    rng = random.Random(97)
    for _ in range(150):
        program = random_program(rng)
        assignment = random_assignment(rng, program)
        try:
            residual = specialize(program, assignment).residual
        except InconsistentAssignmentError:
            continue
        if residual.root is None:
            continue
        assert parse(serialize(residual)) == residual


def test_random_oracle_sample():
    rng = random.Random(203)
    for _ in range(150):
        program = random_program(rng)
        assignment = random_assignment(rng, program)
        try:
            result = specialize(program, assignment)
        except InconsistentAssignmentError:
            continue
        assert enumerate_paths(result.residual) == oracle_paths(program, result.applied)
