"""Constraint grammar: template parsing, canonical printing, the arithmetic
expression sub-language, action matching, and sequence validation."""

from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cgplan.constraints import (
    HARD,
    INTENT_MAX_LEN,
    INTENT_MIN_LEN,
    MATH_MAX_STEPS,
    SOFT,
    AttackTerritory,
    BinOp,
    ConstraintSequence,
    IntentConstraintPair,
    MathAssign,
    MoveTroops,
    Num,
    PlaceTroops,
    ReinforceTerritory,
    Var,
    action_from_constraint,
    constraint_territories,
    eval_expr,
    expr_variables,
    filter_valid,
    parse_constraint,
    parse_expr,
    print_constraint,
    print_expr,
    satisfies,
    target_territory,
    validate,
)
from cgplan.engine import Action, Phase
from cgplan.errors import (
    DivisionByZero,
    EmptySequence,
    NonNumericTroops,
    ParseError,
    UndefinedVariable,
)

from conftest import state_on
from oracles import rat, rat_eval


def pair(step_id: int, intent: str, text: str, placement=None) -> IntentConstraintPair:
    return IntentConstraintPair(step_id, intent, text, parse_constraint(text), placement)


# -- troop templates -----------------------------------------------------------


def test_place_quoted_canonical():
    c = parse_constraint("Place '3' troops on Country 'Red_A'")
    assert c == PlaceTroops(n=3, territory="Red_A")


def test_place_bare_tokens_without_country_keyword():
    assert parse_constraint("place 3 troops on Red_A") == PlaceTroops(n=3, territory="Red_A")


def test_place_case_insensitive_keywords_preserve_territory_case():
    c = parse_constraint("PLACE '12' TROOPS ON COUNTRY 'Green_B'")
    assert c == PlaceTroops(n=12, territory="Green_B")


def test_place_mixed_quoting_and_padding():
    assert parse_constraint("  Place '2' troops on Green_B  ") == PlaceTroops(2, "Green_B")


def test_attack_quoted_canonical():
    c = parse_constraint("Attack Country 'Blue_B' from Country 'Red_C' with '2' troops")
    assert c == AttackTerritory(dst="Blue_B", src="Red_C", n=2)


def test_attack_bare_tokens():
    c = parse_constraint("attack Blue_B from Red_C with 2 troops")
    assert c == AttackTerritory(dst="Blue_B", src="Red_C", n=2)


def test_move_quoted_canonical():
    c = parse_constraint("Move '4' troops to Country 'Red_B' from Country 'Red_A'")
    assert c == MoveTroops(n=4, dst="Red_B", src="Red_A")


def test_reinforce_quoted_canonical():
    c = parse_constraint("Add '5' troops to reinforce Country 'Green_C'")
    assert c == ReinforceTerritory(n=5, territory="Green_C")


def test_reinforce_bare_lowercase():
    c = parse_constraint("add 1 troops to reinforce Yellow_D")
    assert c == ReinforceTerritory(n=1, territory="Yellow_D")


@pytest.mark.parametrize(
    "text",
    [
        "Place troops on Country 'Red_A'",
        "Attack Country 'Blue_B' from Country 'Red_C'",
        "Move troops to Red_B from Red_A",
        "Add troops to reinforce Red_A",
    ],
)
def test_missing_troop_count_raises(text):
    with pytest.raises(NonNumericTroops):
        parse_constraint(text)


@pytest.mark.parametrize("count", ["'0'", "'-3'", "'many'", "''", "'2.5'"])
def test_bad_troop_count_raises(count):
    with pytest.raises(NonNumericTroops):
        parse_constraint(f"Place {count} troops on Country 'Red_A'")


def test_non_numeric_troops_is_a_parse_error():
    assert issubclass(NonNumericTroops, ParseError)


@pytest.mark.parametrize(
    "text",
    [
        "Conquer the whole board",
        "",
        "Place '3' troops",
        "Place '3' troops on Country '9Lands'",
        "Place '3' troops on Country ''",
        "Attack 'Blue_B' with '2' troops",
    ],
)
def test_unrecognized_or_bad_risk_text_raises(text):
    with pytest.raises(ParseError):
        parse_constraint(text, "risk")


def test_risk_domain_rejects_assignments_and_math_rejects_templates():
    with pytest.raises(ParseError):
        parse_constraint("x = 1 + 2", "risk")
    with pytest.raises(ParseError):
        parse_constraint("Place '3' troops on Country 'Red_A'", "math")


def test_auto_domain_dispatches_on_shape():
    assert isinstance(parse_constraint("x = 1 + 2"), MathAssign)
    assert isinstance(parse_constraint("Place '1' troops on Red_A"), PlaceTroops)


def test_unknown_domain_rejected():
    with pytest.raises(ValueError):
        parse_constraint("x = 1", "prolog")


# -- canonical printing and round trips ----------------------------------------

CANONICAL = [
    (PlaceTroops(3, "Red_A"), "Place '3' troops on Country 'Red_A'"),
    (AttackTerritory("Blue_B", "Red_C", 2), "Attack Country 'Blue_B' from Country 'Red_C' with '2' troops"),
    (MoveTroops(4, "Red_B", "Red_A"), "Move '4' troops to Country 'Red_B' from Country 'Red_A'"),
    (ReinforceTerritory(5, "Green_C"), "Add '5' troops to reinforce Country 'Green_C'"),
    (MathAssign("total", BinOp("+", Var("blue"), Var("white"))), "total = blue + white"),
]


@pytest.mark.parametrize("ast,text", CANONICAL)
def test_print_is_canonical(ast, text):
    assert print_constraint(ast) == text


@pytest.mark.parametrize("ast,text", CANONICAL)
def test_parse_inverts_print(ast, text):
    assert parse_constraint(text) == ast


@pytest.mark.parametrize("ast,text", CANONICAL)
def test_print_is_a_fixed_point(ast, text):
    assert print_constraint(parse_constraint(text)) == text


TERRITORY_NAMES = st.sampled_from(["Red_A", "Red_B", "Green_C", "Yellow_D", "Blue_A", "Purple_E", "X", "x_1"])
TROOPS = st.integers(min_value=1, max_value=200)


@st.composite
def troop_constraints(draw):
    kind = draw(st.sampled_from(["place", "attack", "move", "reinforce"]))
    n = draw(TROOPS)
    a = draw(TERRITORY_NAMES)
    b = draw(TERRITORY_NAMES)
    if kind == "place":
        return PlaceTroops(n, a)
    if kind == "attack":
        return AttackTerritory(dst=a, src=b, n=n)
    if kind == "move":
        return MoveTroops(n=n, dst=a, src=b)
    return ReinforceTerritory(n, a)


@given(troop_constraints())
@settings(max_examples=200)
def test_troop_round_trip_property(c):
    assert parse_constraint(print_constraint(c)) == c


# -- arithmetic expressions ------------------------------------------------------


def test_assignment_parse_shape():
    c = parse_constraint("total = blue + white", "math")
    assert c == MathAssign("total", BinOp("+", Var("blue"), Var("white")))


def test_precedence_binds_product_tighter():
    c = parse_constraint("x = 2 + 3 * 4", "math")
    assert c.expr == BinOp("+", Num(Fraction(2)), BinOp("*", Num(Fraction(3)), Num(Fraction(4))))
    assert eval_expr(c.expr, {}) == 14


def test_parentheses_override_precedence():
    e = parse_expr("(2 + 3) * 4")
    assert e == BinOp("*", BinOp("+", Num(Fraction(2)), Num(Fraction(3))), Num(Fraction(4)))
    assert eval_expr(e, {}) == 20


def test_left_associativity():
    e = parse_expr("10 - 3 - 2")
    assert e == BinOp("-", BinOp("-", Num(Fraction(10)), Num(Fraction(3))), Num(Fraction(2)))
    assert eval_expr(e, {}) == 5
    assert eval_expr(parse_expr("8 / 4 / 2"), {}) == 1


def test_division_is_exact_rational():
    assert eval_expr(parse_expr("7 / 2"), {}) == Fraction(7, 2)
    assert eval_expr(parse_expr("1 / 3 * 3"), {}) == 1
    assert eval_expr(parse_expr("1 / 3 + 1 / 3 + 1 / 3"), {}) == 1


def test_variables_resolve_from_environment():
    e = parse_expr("blue / 2 + blue")
    assert eval_expr(e, {"blue": Fraction(2)}) == 3
    assert expr_variables(e) == {"blue"}


def test_undefined_variable_carries_name_and_step():
    with pytest.raises(UndefinedVariable) as exc:
        eval_expr(Var("y"), {}, step_id=5)
    assert exc.value.name == "y"
    assert exc.value.step_id == 5


def test_division_by_zero_carries_step():
    with pytest.raises(DivisionByZero) as exc:
        eval_expr(parse_expr("1 / (2 - 2)"), {}, step_id=3)
    assert exc.value.step_id == 3


@pytest.mark.parametrize(
    "text",
    [
        "x = ",
        "x = 2 +",
        "x = (2 + 3",
        "x = 2 3",
        "x = 2 $ 3",
        "9x = 2",
        "a = 1 = 2",
        "= 2",
    ],
)
def test_malformed_assignments_raise(text):
    with pytest.raises(ParseError):
        parse_constraint(text, "math")


def test_parse_error_reports_a_position():
    with pytest.raises(ParseError) as exc:
        parse_expr("2$3")
    assert exc.value.position == 1


PRINT_CASES = [
    (BinOp("+", Num(Fraction(2)), BinOp("*", Num(Fraction(3)), Num(Fraction(4)))), "2 + 3 * 4"),
    (BinOp("*", BinOp("+", Num(Fraction(2)), Num(Fraction(3))), Num(Fraction(4))), "(2 + 3) * 4"),
    (BinOp("-", Num(Fraction(5)), BinOp("-", Num(Fraction(3)), Num(Fraction(1)))), "5 - (3 - 1)"),
    (BinOp("-", BinOp("-", Num(Fraction(5)), Num(Fraction(3))), Num(Fraction(1))), "5 - 3 - 1"),
    (BinOp("*", Num(Fraction(2)), BinOp("/", Num(Fraction(3)), Num(Fraction(4)))), "2 * (3 / 4)"),
    (BinOp("/", BinOp("*", Num(Fraction(2)), Num(Fraction(3))), Num(Fraction(4))), "2 * 3 / 4"),
    (BinOp("+", Var("a"), BinOp("+", Var("b"), Var("c"))), "a + (b + c)"),
]


@pytest.mark.parametrize("ast,text", PRINT_CASES)
def test_print_expr_minimal_parentheses(ast, text):
    assert print_expr(ast) == text
    assert parse_expr(text) == ast


def test_non_integer_literal_prints_as_ratio():
    assert print_expr(Num(Fraction(1, 2))) == "(1 / 2)"


INT_LITERALS = st.integers(min_value=0, max_value=999).map(lambda n: Num(Fraction(n)))
VAR_NAMES = st.sampled_from(["a", "b", "blue", "white", "total", "x_1"])


def int_exprs():
    return st.recursive(
        INT_LITERALS | VAR_NAMES.map(Var),
        lambda children: st.builds(BinOp, st.sampled_from("+-*/"), children, children),
        max_leaves=12,
    )


@given(int_exprs())
@settings(max_examples=300)
def test_expr_round_trip_property(e):
    assert parse_expr(print_expr(e)) == e


@given(int_exprs())
@settings(max_examples=200)
def test_eval_matches_big_integer_oracle(e):
    env = {name: Fraction(i + 2, 3) for i, name in enumerate(sorted(expr_variables(e)))}
    oracle_env = {name: rat(v.numerator, v.denominator) for name, v in env.items()}
    try:
        expected = rat_eval(e, oracle_env)
    except ZeroDivisionError:
        with pytest.raises(DivisionByZero):
            eval_expr(e, env)
        return
    got = eval_expr(e, env)
    assert (got.numerator, got.denominator) == expected


# -- matching actions against constraints ---------------------------------------


def test_action_from_constraint_mappings():
    assert action_from_constraint(PlaceTroops(3, "Red_A")) == Action.place("Red_A", 3)
    assert action_from_constraint(AttackTerritory("Blue_B", "Red_C", 2)) == Action.attack("Red_C", "Blue_B", 2)
    assert action_from_constraint(MoveTroops(4, "Red_B", "Red_A")) == Action.move("Red_A", "Red_B", 4)
    assert action_from_constraint(ReinforceTerritory(5, "Green_C")) == Action.reinforce("Green_C", 5)


def test_hard_mode_requires_exact_action():
    c = PlaceTroops(3, "Red_A")
    assert satisfies(c, None, Action.place("Red_A", 3), HARD)
    assert not satisfies(c, None, Action.place("Red_A", 2), HARD)
    assert not satisfies(c, None, Action.place("Red_B", 3), HARD)
    assert not satisfies(c, None, Action.reinforce("Red_A", 3), HARD)


def test_soft_mode_frees_counts_and_origins():
    c = AttackTerritory(dst="Blue_B", src="Red_C", n=2)
    assert satisfies(c, None, Action.attack("Red_C", "Blue_B", 9), SOFT)
    assert satisfies(c, None, Action.attack("Green_A", "Blue_B", 1), SOFT)
    assert not satisfies(c, None, Action.attack("Red_C", "Blue_A", 2), SOFT)
    assert not satisfies(c, None, Action.move("Red_C", "Blue_B", 2), SOFT)

    p = PlaceTroops(3, "Red_A")
    assert satisfies(p, None, Action.place("Red_A", 14), SOFT)
    assert not satisfies(p, None, Action.place("Red_B", 3), SOFT)

    m = MoveTroops(4, "Red_B", "Red_A")
    assert satisfies(m, None, Action.move("Green_A", "Red_B", 1), SOFT)
    r = ReinforceTerritory(5, "Green_C")
    assert satisfies(r, None, Action.reinforce("Green_C", 1), SOFT)


def test_hard_mode_is_default_and_unknown_mode_rejected():
    c = PlaceTroops(3, "Red_A")
    assert satisfies(c, None, Action.place("Red_A", 3))
    with pytest.raises(ValueError):
        satisfies(c, None, Action.place("Red_A", 3), "fuzzy")


@given(troop_constraints())
@settings(max_examples=100)
def test_hard_satisfaction_implies_soft(c):
    a = action_from_constraint(c)
    assert satisfies(c, None, a, HARD)
    assert satisfies(c, None, a, SOFT)


def test_territory_accessors():
    assert constraint_territories(PlaceTroops(3, "Red_A")) == ("Red_A",)
    assert constraint_territories(AttackTerritory("Blue_B", "Red_C", 2)) == ("Blue_B", "Red_C")
    assert constraint_territories(MoveTroops(4, "Red_B", "Red_A")) == ("Red_B", "Red_A")
    assert target_territory(AttackTerritory("Blue_B", "Red_C", 2)) == "Blue_B"
    assert target_territory(ReinforceTerritory(5, "Green_C")) == "Green_C"


# -- pair and sequence serialization ---------------------------------------------


def test_pair_json_round_trip_with_placement():
    p = pair(2, "Secure the northern passage early", "Place '3' troops on Country 'Red_A'", ("Red_A", 3))
    d = p.to_json()
    assert d == {
        "step_id": 2,
        "intent": "Secure the northern passage early",
        "constraint": "Place '3' troops on Country 'Red_A'",
        "placement": ["Red_A", 3],
    }
    assert IntentConstraintPair.from_json(d) == p


def test_pair_json_round_trip_without_placement():
    p = pair(1, "Work the arithmetic chain", "x = 1 + 2")
    d = p.to_json()
    assert "placement" not in d
    assert IntentConstraintPair.from_json(d) == p


def test_sequence_json_round_trip_and_k():
    seq = ConstraintSequence(
        (
            pair(1, "Open with pressure on the red continent", "Place '2' troops on Red_A"),
            pair(2, "Then mass on the second red province", "Place '1' troops on Red_B"),
        )
    )
    assert seq.K == 2
    assert [type(c) for c in seq.constraints()] == [PlaceTroops, PlaceTroops]
    assert ConstraintSequence.from_json(seq.to_json()) == seq


# -- sequence validation ----------------------------------------------------------


def placement_state(g, reserve=10):
    return state_on(g, {}, {}, phase=Phase.INITIAL_PLACEMENT, reserve={"White": reserve, "Black": 0, "Grey": 0})


def test_structural_validation_without_state_or_map():
    assert validate(pair(1, "Stake out the first stronghold", "Place '4' troops on Atlantis"))
    assert not validate(pair(1, "", "Place '4' troops on Red_A"))


def test_missing_and_overlong_intents_are_dropped(g):
    raw = [
        pair(1, "   ", "Place '1' troops on Red_A"),
        pair(2, "ok", "Place '1' troops on Red_B"),
        pair(3, "x" * (INTENT_MAX_LEN + 1), "Place '1' troops on Red_C"),
        pair(4, "abc", "Place '1' troops on Yellow_A"),
        pair(5, "y" * INTENT_MAX_LEN, "Place '1' troops on Yellow_B"),
    ]
    seq, dropped = filter_valid(raw, placement_state(g), g)
    assert [p.constraint_ast.territory for p in seq.pairs] == ["Yellow_A", "Yellow_B"]
    assert [(d.step_id, reason) for d, reason in dropped] == [
        (1, "MissingIntent"),
        (2, "IntentLength"),
        (3, "IntentLength"),
    ]
    assert len("abc") == INTENT_MIN_LEN


def test_unknown_territory_dropped(g):
    raw = [
        pair(1, "March on lands beyond the map edge", "Place '1' troops on Atlantis"),
        pair(2, "Hold what the charts actually show", "Place '1' troops on Red_A"),
    ]
    seq, dropped = filter_valid(raw, placement_state(g), g)
    assert [r for _, r in dropped] == ["UnknownTerritory"]
    assert seq.K == 1


def test_duplicate_target_dropped(g):
    raw = [
        pair(1, "First claim on the northern keep", "Place '1' troops on Red_A"),
        pair(2, "Second claim on the same keep", "Place '2' troops on Red_A"),
    ]
    seq, dropped = filter_valid(raw, placement_state(g), g)
    assert seq.K == 1
    assert dropped[0][1] == "DuplicateTerritory"


def test_placement_infeasible_out_of_phase_or_owned(g):
    reinf = state_on(g, {"Red_A": "White"}, {"Red_A": 3}, phase=Phase.REINFORCE,
                     reserve={"White": 5, "Black": 0, "Grey": 0})
    assert not validate(pair(1, "Stack the keep before the horns sound", "Place '1' troops on Red_B"), reinf, g)

    occupied = state_on(g, {"Red_A": "Black"}, {"Red_A": 2},
                        reserve={"White": 5, "Black": 0, "Grey": 0})
    assert not validate(pair(1, "Take the keep the enemy already holds", "Place '1' troops on Red_A"), occupied, g)


def test_placement_reserve_is_tracked_across_the_sequence(g):
    raw = [
        pair(1, "Spend most of the reserve up north", "Place '2' troops on Red_A"),
        pair(2, "Then overspend on the second keep", "Place '2' troops on Red_B"),
        pair(3, "Fit the last troop somewhere useful", "Place '1' troops on Red_C"),
    ]
    seq, dropped = filter_valid(raw, placement_state(g, reserve=3), g)
    assert [p.constraint_ast.territory for p in seq.pairs] == ["Red_A", "Red_C"]
    assert dropped[0][1] == "Feasibility"


def test_reinforce_requires_phase_and_ownership(g):
    s = state_on(g, {"Red_A": "White", "Red_B": "Black"}, {"Red_A": 3, "Red_B": 2},
                 phase=Phase.REINFORCE, reserve={"White": 4, "Black": 0, "Grey": 0})
    assert validate(pair(1, "Thicken the garrison we already hold", "Add '4' troops to reinforce Red_A"), s, g)
    assert not validate(pair(1, "Reinforce a keep the enemy holds", "Add '1' troops to reinforce Red_B"), s, g)
    assert not validate(pair(1, "Reinforce beyond the muster", "Add '5' troops to reinforce Red_A"), s, g)
    placing = placement_state(g)
    assert not validate(pair(1, "Reinforce before the muster phase", "Add '1' troops to reinforce Red_A"), placing, g)


def test_attack_feasibility_uses_engine_legality(g):
    s = state_on(g, {"Red_C": "White", "Blue_B": "Black"}, {"Red_C": 3, "Blue_B": 2},
                 phase=Phase.ATTACK, reserve={"White": 0, "Black": 0, "Grey": 0})
    assert validate(pair(1, "Strike across the strait in force", "Attack Blue_B from Red_C with 2 troops"), s, g)
    assert not validate(pair(1, "Strike with the whole garrison", "Attack Blue_B from Red_C with 3 troops"), s, g)
    assert not validate(pair(1, "Strike out of an empty keep", "Attack Blue_B from Red_A with 1 troops"), s, g)


def test_math_step_limit(g):
    raw = [pair(i, f"Chain the working, step {i}", f"v{i} = {i}") for i in range(1, MATH_MAX_STEPS + 2)]
    seq, dropped = filter_valid(raw)
    assert seq.K == MATH_MAX_STEPS
    assert [r for _, r in dropped] == ["StepLimit"]


def test_math_unbound_variable_names_the_culprit():
    raw = [
        pair(1, "Start from the known quantity", "x = 2"),
        pair(2, "Lean on a symbol never bound", "y = x + z"),
        pair(3, "Continue from the good prefix", "w = x * 2"),
    ]
    seq, dropped = filter_valid(raw)
    assert [p.constraint_ast.var for p in seq.pairs] == ["x", "w"]
    assert dropped[0][1] == "UndefinedVariable:z"


def test_kept_pairs_are_renumbered_from_one(g):
    raw = [
        pair(7, "Claim the first keep on the list", "Place '1' troops on Red_A"),
        pair(9, "", "Place '1' troops on Red_B"),
        pair(11, "Claim the second keep on the list", "Place '1' troops on Red_C"),
    ]
    seq, dropped = filter_valid(raw, placement_state(g), g)
    assert [p.step_id for p in seq.pairs] == [1, 2]
    assert [p.constraint_ast.territory for p in seq.pairs] == ["Red_A", "Red_C"]
    assert [d.step_id for d, _ in dropped] == [9]


def test_all_dropped_raises_empty_sequence(g):
    raw = [pair(1, "", "Place '1' troops on Red_A")]
    with pytest.raises(EmptySequence):
        filter_valid(raw, placement_state(g), g)
