import json

import pytest

from ispace.core import Content, MutexGroup, Test, SpaceError, count_nodes
from ispace.ebg import (
    Atom,
    Const,
    FactLeaf,
    MalformedTreeError,
    RuleNode,
    Var,
    explain,
    parse_facts,
    parse_goal,
    parse_theory,
    tree_from_json,
    tree_to_json,
)
from ispace.factorize import load_activities
from ispace.operationalize import (
    BindingEntry,
    ContentBinding,
    FrontierMissError,
    FrontierSpec,
    FixedNode,
    OperationalizedExplanation,
    OpenSlot,
    UnboundSubgoalError,
    UnreachableBindingError,
    assess_operationality,
    check_generalization,
    cut,
    generalize,
    generate_model,
    reinstantiate,
)
from ispace.specialize import is_complete

from conftest import fixture_text


@pytest.fixture(scope="module")
def nancy_tree(theory, nancy_facts):
    return explain(theory, nancy_facts, parse_goal("politicalinfo(x47)"))


@pytest.fixture(scope="module")
def nancy_general(theory, nancy_tree):
    return generalize(nancy_tree, theory)


@pytest.fixture(scope="module")
def nancy_bindings():
    return ContentBinding.from_json(json.loads(fixture_text("nancy_bindings.json")))


# ---------------------------------------------------------------------------
# goal regression

def test_fact_constants_abstract_rule_constants_survive():
    theory = parse_theory('R1: g(x) <= p(x, "c").\n')
    facts = parse_facts('F1: p("a", "c").\n')
    tree = explain(theory, facts, parse_goal('g("a")'))
    general = generalize(tree, theory)
    assert general == RuleNode(
        Atom("g", (Var("x"),)),
        "R1",
        (("x", Var("x")),),
        (FactLeaf(Atom("p", (Var("x"), Const("c"))), "F1"),),
    )


def test_lone_fact_generalizes_fully():
    theory = parse_theory("R1: unused(x) <= unused(x).\n")
    facts = parse_facts('F1: q("a", "b").\n')
    tree = explain(theory, facts, parse_goal('q("a", "b")'))
    general = generalize(tree, theory)
    assert general == FactLeaf(Atom("q", (Var("x"), Var("y"))), "F1")


def test_nancy_generalization_structure(nancy_general):
    x = Var("x")
    assert nancy_general.atom == Atom("politicalinfo", (x,))
    (complete,) = nancy_general.children
    office, member, aspect = complete.children
    assert office == FactLeaf(Atom("officeselect", (x, Const("Congress"))), "F1")
    (senator,) = member.children
    assert senator.children[0].atom == Atom("branchselect", (x, Const("Senate")))
    assert senator.children[1].atom == Atom("stateselect", (x, Var("y")))
    assert senator.children[2].atom == Atom("seatselect", (x, Const("Junior Seat")))
    assert aspect.children[0].atom == Atom(
        "aspectselect", (x, Const("Committee Memberships"))
    )


def test_nancy_generalization_has_no_session_constants(nancy_general):
    text = json.dumps(tree_to_json(nancy_general))
    assert "x47" not in text
    assert "North Carolina" not in text


def test_reinstantiation_recovers_original(nancy_general, nancy_tree):
    binding = {"x": Const("x47"), "y": Const("North Carolina")}
    assert reinstantiate(nancy_general, binding) == nancy_tree


def test_check_generalization_accepts(theory, nancy_facts, nancy_tree, nancy_general):
    assert check_generalization(nancy_tree, nancy_general, theory, nancy_facts)


def test_check_generalization_rejects_overclaim(theory, nancy_facts, nancy_tree):
    # claim more generality than the rules license: a free aspect variable
    data = tree_to_json(generalize(nancy_tree, theory))
    aspect_leaf = data["children"][0]["children"][2]["children"][0]
    aspect_leaf["atom"]["args"][1] = {"var": "z"}
    doctored = tree_from_json(data)
    assert not check_generalization(nancy_tree, doctored, theory, nancy_facts)


def test_president_generalization_keeps_office(theory, president_facts):
    tree = explain(theory, president_facts, parse_goal("politicalinfo(x58)"))
    general = generalize(tree, theory)
    (complete,) = general.children
    assert complete.rule_id == "R3"
    assert complete.children[0].atom == Atom(
        "officeselect", (Var("x"), Const("President"))
    )


def test_generalize_rejects_foreign_rule(theory, nancy_tree):
    data = tree_to_json(nancy_tree)
    data["rule"] = "R999"
    with pytest.raises(MalformedTreeError):
        generalize(tree_from_json(data), theory)


def test_generalize_rejects_wrong_child_count(theory, nancy_tree):
    data = tree_to_json(nancy_tree)
    data["children"] = []
    with pytest.raises(MalformedTreeError):
        generalize(tree_from_json(data), theory)


# ---------------------------------------------------------------------------
# frontiers and cuts

def test_frontier_parse_and_str():
    assert FrontierSpec.parse("root").mode == "root"
    assert FrontierSpec.parse("leaves").mode == "leaves"
    spec = FrontierSpec.parse("preds: member , aspect")
    assert spec.predicates == frozenset({"member", "aspect"})
    assert str(spec) == "preds:aspect,member"
    assert FrontierSpec.parse("depth:2").depth == 2
    assert str(FrontierSpec.parse("depth:2")) == "depth:2"


def test_frontier_parse_rejects_garbage():
    for bad in ("bogus", "depth:x", "depth:-1", "preds:"):
        with pytest.raises(SpaceError):
            FrontierSpec.parse(bad)


def test_cut_at_root(nancy_general):
    op = cut(nancy_general, FrontierSpec("root"))
    assert op.fixed == OpenSlot(0)
    assert op.open_subgoals == (Atom("politicalinfo", (Var("x"),)),)
    assert op.goal == Atom("politicalinfo", (Var("x"),))


def test_cut_at_leaves_keeps_everything(nancy_general):
    op = cut(nancy_general, FrontierSpec("leaves"))
    assert op.open_subgoals == ()
    assert isinstance(op.fixed, FixedNode)
    assert op.fixed.by == "R1"

    def count(node):
        if isinstance(node, OpenSlot):
            return 0
        return 1 + sum(count(c) for c in node.children)

    assert count(op.fixed) == 10  # 5 rule nodes + 5 fact leaves


def test_cut_at_predicates(nancy_general):
    op = cut(nancy_general, FrontierSpec("preds", frozenset({"member", "aspect"})))
    x = Var("x")
    assert op.open_subgoals == (Atom("member", (x,)), Atom("aspect", (x,)))
    (complete,) = op.fixed.children
    office, member_slot, aspect_slot = complete.children
    assert isinstance(office, FixedNode) and office.by == "F1"
    assert member_slot == OpenSlot(0)
    assert aspect_slot == OpenSlot(1)


def test_cut_at_depth_two(nancy_general):
    op = cut(nancy_general, FrontierSpec("depth", depth=2))
    assert [a.pred for a in op.open_subgoals] == ["officeselect", "member", "aspect"]


def test_cut_depth_zero_equals_root(nancy_general):
    assert cut(nancy_general, FrontierSpec("depth", depth=0)).fixed == OpenSlot(0)


def test_cut_miss_raises(nancy_general):
    with pytest.raises(FrontierMissError):
        cut(nancy_general, FrontierSpec("preds", frozenset({"adselect"})))


def test_operationalized_json_round_trip(nancy_general):
    for spec in ("root", "leaves", "preds:member,aspect", "depth:2"):
        op = cut(nancy_general, FrontierSpec.parse(spec), op_id="e7")
        assert OperationalizedExplanation.from_json(op.to_json()) == op


# ---------------------------------------------------------------------------
# content bindings

def test_binding_from_json(nancy_bindings):
    (entry,) = nancy_bindings.entries
    assert entry.ref == "nc-junior-committees"
    assert entry.decisions[0] == ("Aspect", "Committee Memberships")
    assert dict(entry.decisions)["Senator"] == "true"


def test_binding_rejects_duplicates():
    entry = BindingEntry((("A", "1"),), "p1")
    with pytest.raises(SpaceError, match="tuple"):
        ContentBinding((entry, BindingEntry((("A", "1"),), "p2")))
    with pytest.raises(SpaceError, match="ref"):
        ContentBinding((entry, BindingEntry((("A", "2"),), "p1")))


def test_binding_lookup_is_exact(nancy_bindings):
    full = {
        "Senator": "true",
        "Branch": "Senate",
        "State": "North Carolina",
        "Seat": "Junior Seat",
        "Aspect": "Committee Memberships",
    }
    assert nancy_bindings.lookup(full)[0] == 0
    partial = dict(full)
    del partial["Senator"]
    assert nancy_bindings.lookup(partial) is None


def test_binding_values_for(nancy_bindings):
    assert nancy_bindings.values_for("State") == ["North Carolina"]
    assert nancy_bindings.values_for("Zip") == []


# ---------------------------------------------------------------------------
# model generation

@pytest.fixture(scope="module")
def preds_model(theory, nancy_general, nancy_bindings):
    op = cut(nancy_general, FrontierSpec("preds", frozenset({"member", "aspect"})))
    return generate_model(theory, [op], nancy_bindings)


def test_preds_model_top_level_is_member_choice(preds_model):
    arms = preds_model.root.arms
    assert [a.test for a in arms] == [Test("Representative"), Test("Senator")]
    assert preds_model.mutexes == (
        MutexGroup("Member", frozenset({Test("Representative"), Test("Senator")})),
    )


def test_preds_model_unbound_branch_gets_placeholder(preds_model):
    representative = preds_model.root.arms[0].body
    assert representative == Content("todo-representative-true", "[placeholder]")


def test_preds_model_senator_spine(preds_model):
    senator = preds_model.root.arms[1].body
    (branch_arm,) = senator.arms
    assert branch_arm.test == Test("Branch", "Senate")
    (state_arm,) = branch_arm.body.arms
    assert state_arm.test == Test("State", "North Carolina")
    seat_arms = state_arm.body.arms
    assert [a.test.value for a in seat_arms] == ["Junior Seat", "Senior Seat"]
    aspect_arms = seat_arms[0].body.arms
    assert [a.test for a in aspect_arms] == [
        Test("Aspect", "Education"),
        Test("Aspect", "Committee Memberships"),
        Test("Aspect", "Home City"),
    ]


def test_preds_model_binds_known_content(preds_model):
    junior = preds_model.root.arms[1].body.arms[0].body.arms[0].body.arms[0]
    bound = junior.body.arms[1].body
    assert bound.ref == "nc-junior-committees"
    assert bound.payload.startswith("Committee memberships")
    education = junior.body.arms[0].body
    assert education.ref.startswith("todo-")
    assert education.payload == "[placeholder]"


def test_strict_mode_rejects_unbound_subgoal(theory, nancy_general, nancy_bindings):
    op = cut(nancy_general, FrontierSpec("preds", frozenset({"member", "aspect"})))
    with pytest.raises(UnboundSubgoalError, match="representative"):
        generate_model(theory, [op], nancy_bindings, strict=True)


def test_unreachable_binding_rejected(theory, nancy_general):
    op = cut(nancy_general, FrontierSpec("preds", frozenset({"member", "aspect"})))
    stray = ContentBinding.from_json(
        [{"tuple": {"Senator": True, "Seat": "Middle Seat"}, "page": "p9"}]
    )
    with pytest.raises(UnreachableBindingError):
        generate_model(theory, [op], stray)
    # tolerated when reachability is waived
    model = generate_model(theory, [op], stray, require_bindings_reachable=False)
    assert count_nodes(model) > 0


def test_root_cut_yields_single_content(theory, nancy_general):
    op = cut(nancy_general, FrontierSpec("root"))
    model = generate_model(theory, [op])
    assert model.root == Content("todo-all", "[placeholder]")
    assert is_complete(model)


def test_no_ops_rejected(theory):
    with pytest.raises(SpaceError):
        generate_model(theory, [])


def test_duplicate_op_ids_rejected(theory, nancy_general):
    op = cut(nancy_general, FrontierSpec("root"))
    with pytest.raises(SpaceError, match="duplicate"):
        generate_model(theory, [op, op])


def test_replay_switch_over_three_sessions(theory, nancy_facts, president_facts, virginia_facts):
    bindings = ContentBinding.from_json(json.loads(fixture_text("switch_bindings.json")))
    ops = []
    for i, (facts, who) in enumerate(
        [(nancy_facts, "x47"), (president_facts, "x58"), (virginia_facts, "x99")]
    ):
        tree = explain(theory, facts, parse_goal(f"politicalinfo({who})"))
        general = generalize(tree, theory)
        ops.append(cut(general, FrontierSpec("leaves"), op_id=f"e{i + 1}"))
    model = generate_model(theory, ops, bindings)
    arms = model.root.arms
    assert [a.test for a in arms] == [
        Test("explanation", "e1"),
        Test("explanation", "e2"),
        Test("explanation", "e3"),
    ]
    assert [a.body.ref for a in arms] == [
        "replay-nc-junior-committees",
        "replay-president-education",
        "replay-va-senior-home",
    ]
    assert all(isinstance(a.body, Content) for a in arms)


def test_var_selection_enumerates_binding_values(theory, nancy_general):
    two_states = ContentBinding.from_json(
        [
            {
                "tuple": {
                    "Senator": True,
                    "Branch": "Senate",
                    "State": "North Carolina",
                    "Seat": "Junior Seat",
                    "Aspect": "Education",
                },
                "page": "nc-edu",
            },
            {
                "tuple": {
                    "Senator": True,
                    "Branch": "Senate",
                    "State": "Virginia",
                    "Seat": "Senior Seat",
                    "Aspect": "Home City",
                },
                "page": "va-home",
            },
        ]
    )
    op = cut(nancy_general, FrontierSpec("preds", frozenset({"member", "aspect"})))
    model = generate_model(theory, [op], two_states)
    senator = model.root.arms[1].body
    state_arms = senator.arms[0].body.arms
    assert [a.test for a in state_arms] == [
        Test("State", "North Carolina"),
        Test("State", "Virginia"),
    ]


# ---------------------------------------------------------------------------
# operationality assessment

def test_assessment_ranks_interactive_frontiers_first(theory, nancy_tree, nancy_bindings):
    probes = load_activities(fixture_text("probes_nancy.json"))
    frontiers = [
        FrontierSpec("root"),
        FrontierSpec("leaves"),
        FrontierSpec("preds", frozenset({"member", "aspect"})),
        FrontierSpec("depth", depth=2),
    ]
    report = assess_operationality(theory, nancy_tree, frontiers, probes, nancy_bindings)
    order = [str(r.frontier) for r in report.rows]
    assert order == ["preds:aspect,member", "depth:2", "root", "leaves"]
    assert report.rows[0].personable_ratio == 1.0
    assert report.rows[1].personable_ratio == 1.0
    assert report.rows[0].model_size < report.rows[1].model_size
    assert report.rows[2].personable_ratio == 0.0
    data = report.to_json()
    assert [row["frontier"] for row in data["rows"]] == order
