"""Constraint language: four troop-order templates plus arithmetic assignments.

Grammar keywords are case-insensitive and slot quoting is optional, so both
``Place '5' troops on Country 'Green_C'`` and ``Place 5 troops on Green_C``
parse to the same AST. ``print_constraint`` emits the fully quoted canonical
form; parse ∘ print is the identity on ASTs. Arithmetic is exact
(``fractions.Fraction``); no floats anywhere in evaluation.

Also home to intent/constraint pairs and the sequence validator: field
presence, intent length bounds, grammar, and feasibility against a live
state (unoccupied target, cumulative reserve, no duplicate territories).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace
from fractions import Fraction

from .engine import Action, GameState, Phase, is_legal
from .errors import DivisionByZero, EmptySequence, NonNumericTroops, ParseError, UndefinedVariable
from .riskmap import MapGraph

INTENT_MIN_LEN = 3
INTENT_MAX_LEN = 500
MATH_MAX_STEPS = 7

# -- AST ---------------------------------------------------------------------


@dataclass(frozen=True)
class PlaceTroops:
    """Place 'n' troops on Country 'X'"""

    n: int
    territory: str


@dataclass(frozen=True)
class AttackTerritory:
    """Attack Country 'X' from Country 'Y' with 'n' troops"""

    dst: str
    src: str
    n: int


@dataclass(frozen=True)
class MoveTroops:
    """Move 'n' troops to Country 'X' from Country 'Y'"""

    n: int
    dst: str
    src: str


@dataclass(frozen=True)
class ReinforceTerritory:
    """Add 'n' troops to reinforce Country 'X'"""

    n: int
    territory: str


@dataclass(frozen=True)
class Num:
    value: Fraction


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * /
    left: "Expr"
    right: "Expr"


Expr = Num | Var | BinOp


@dataclass(frozen=True)
class MathAssign:
    """var = expr"""

    var: str
    expr: Expr


TroopConstraint = PlaceTroops | AttackTerritory | MoveTroops | ReinforceTerritory
Constraint = TroopConstraint | MathAssign

_NAME = r"[A-Za-z_][A-Za-z0-9_]*"
_NAME_RE = re.compile(rf"^{_NAME}$")

# A slot is a single-quoted string or a bare token; quotes are stripped after
# matching. The troop-count slot is optional in the pattern so that a missing
# count surfaces as NonNumericTroops rather than a generic mismatch.
_SLOT = r"'[^']*'|[A-Za-z0-9_]+"

_TROOP_PATTERNS: tuple[tuple[re.Pattern, str], ...] = (
    (
        re.compile(rf"^\s*place(?:\s+(?P<n>{_SLOT}))?\s+troops\s+on\s+(?:country\s+)?(?P<t>{_SLOT})\s*$", re.I),
        "place",
    ),
    (
        re.compile(
            rf"^\s*attack\s+(?:country\s+)?(?P<dst>{_SLOT})\s+from\s+(?:country\s+)?(?P<src>{_SLOT})"
            rf"(?:\s+with\s+(?P<n>{_SLOT})\s+troops)?\s*$",
            re.I,
        ),
        "attack",
    ),
    (
        re.compile(
            rf"^\s*move(?:\s+(?P<n>{_SLOT}))?\s+troops\s+to\s+(?:country\s+)?(?P<dst>{_SLOT})"
            rf"\s+from\s+(?:country\s+)?(?P<src>{_SLOT})\s*$",
            re.I,
        ),
        "move",
    ),
    (
        re.compile(
            rf"^\s*add(?:\s+(?P<n>{_SLOT}))?\s+troops\s+to\s+reinforce\s+(?:country\s+)?(?P<t>{_SLOT})\s*$",
            re.I,
        ),
        "reinforce",
    ),
)


def _strip_quotes(raw: str) -> str:
    if len(raw) >= 2 and raw[0] == "'" and raw[-1] == "'":
        return raw[1:-1]
    return raw


def _troop_count(m: re.Match, text: str) -> int:
    raw = m.group("n")
    if raw is None:
        raise NonNumericTroops("troop count missing", text.lower().find("troops"))
    value = _strip_quotes(raw)
    if not re.fullmatch(r"\d+", value) or int(value) < 1:
        raise NonNumericTroops(f"troop count must be a positive integer, got {value!r}", m.start("n"))
    return int(value)


def _territory_slot(m: re.Match, group: str) -> str:
    value = _strip_quotes(m.group(group))
    if not _NAME_RE.match(value):
        raise ParseError(f"bad territory token {value!r}", m.start(group))
    return value


def parse_constraint(text: str, domain: str = "auto") -> Constraint:
    """Parse constraint text into its AST.

    ``domain``: "risk" (troop templates only), "math" (assignments only), or
    "auto". Raises ParseError with a character position on malformed input;
    a troop template whose count slot is missing or not a positive integer
    raises NonNumericTroops.
    """
    if domain not in ("auto", "risk", "math"):
        raise ValueError(f"unknown domain {domain!r}")
    if domain in ("auto", "risk"):
        for pattern, kind in _TROOP_PATTERNS:
            m = pattern.match(text)
            if m is None:
                continue
            n = _troop_count(m, text)
            if kind == "place":
                return PlaceTroops(n=n, territory=_territory_slot(m, "t"))
            if kind == "attack":
                return AttackTerritory(dst=_territory_slot(m, "dst"), src=_territory_slot(m, "src"), n=n)
            if kind == "move":
                return MoveTroops(n=n, dst=_territory_slot(m, "dst"), src=_territory_slot(m, "src"))
            return ReinforceTerritory(n=n, territory=_territory_slot(m, "t"))
    if domain in ("auto", "math") and "=" in text:
        return _parse_assignment(text)
    raise ParseError(f"unrecognized constraint {text!r}", 0)


def print_constraint(c: Constraint) -> str:
    if isinstance(c, PlaceTroops):
        return f"Place '{c.n}' troops on Country '{c.territory}'"
    if isinstance(c, AttackTerritory):
        return f"Attack Country '{c.dst}' from Country '{c.src}' with '{c.n}' troops"
    if isinstance(c, MoveTroops):
        return f"Move '{c.n}' troops to Country '{c.dst}' from Country '{c.src}'"
    if isinstance(c, ReinforceTerritory):
        return f"Add '{c.n}' troops to reinforce Country '{c.territory}'"
    if isinstance(c, MathAssign):
        return f"{c.var} = {print_expr(c.expr)}"
    raise TypeError(f"not a constraint: {c!r}")


def constraint_territories(c: TroopConstraint) -> tuple[str, ...]:
    """Territories a troop constraint mentions, target first."""
    if isinstance(c, (PlaceTroops, ReinforceTerritory)):
        return (c.territory,)
    return (c.dst, c.src)


def target_territory(c: TroopConstraint) -> str:
    return constraint_territories(c)[0]


# -- arithmetic sub-language ---------------------------------------------------

_TOKEN_RE = re.compile(rf"\s*(?:(?P<num>\d+)|(?P<name>{_NAME})|(?P<op>[-+*/()=]))")


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            if text[pos:].strip() == "":
                break
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    return tokens


class _ExprParser:
    """Recursive descent: expr := term (('+'|'-') term)*, term := atom (('*'|'/') atom)*."""

    def __init__(self, tokens: list[tuple[str, str, int]], text_len: int):
        self.tokens = tokens
        self.i = 0
        self.text_len = text_len

    def peek(self) -> tuple[str, str, int] | None:
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def next(self) -> tuple[str, str, int]:
        tok = self.peek()
        if tok is None:
            raise ParseError("unexpected end of expression", self.text_len)
        self.i += 1
        return tok

    def expr(self) -> Expr:
        node = self.term()
        while (tok := self.peek()) and tok[0] == "op" and tok[1] in "+-":
            self.next()
            node = BinOp(tok[1], node, self.term())
        return node

    def term(self) -> Expr:
        node = self.atom()
        while (tok := self.peek()) and tok[0] == "op" and tok[1] in "*/":
            self.next()
            node = BinOp(tok[1], node, self.atom())
        return node

    def atom(self) -> Expr:
        kind, value, pos = self.next()
        if kind == "num":
            return Num(Fraction(int(value)))
        if kind == "name":
            return Var(value)
        if kind == "op" and value == "(":
            node = self.expr()
            tok = self.next()
            if tok[0] != "op" or tok[1] != ")":
                raise ParseError("expected ')'", tok[2])
            return node
        raise ParseError(f"unexpected token {value!r}", pos)


def parse_expr(text: str) -> Expr:
    tokens = _tokenize(text)
    parser = _ExprParser(tokens, len(text))
    node = parser.expr()
    if (tok := parser.peek()) is not None:
        raise ParseError(f"trailing input {tok[1]!r}", tok[2])
    return node


def _parse_assignment(text: str) -> MathAssign:
    lhs, _, rhs = text.partition("=")
    var = lhs.strip()
    if not _NAME_RE.match(var):
        raise ParseError(f"bad assignment target {var!r}", 0)
    if "=" in rhs:
        raise ParseError("multiple '=' in assignment", text.index("=", text.index("=") + 1))
    return MathAssign(var=var, expr=parse_expr(rhs.strip()))


_PRECEDENCE = {"+": 1, "-": 1, "*": 2, "/": 2}


def print_expr(e: Expr) -> str:
    """Minimal-parentheses rendering; parse_expr(print_expr(e)) == e for
    ASTs whose literals are integers (the only literals the grammar admits)."""
    if isinstance(e, Num):
        if e.value.denominator != 1:
            return f"({e.value.numerator} / {e.value.denominator})"
        return str(e.value)
    if isinstance(e, Var):
        return e.name
    prec = _PRECEDENCE[e.op]
    left = print_expr(e.left)
    if isinstance(e.left, BinOp) and _PRECEDENCE[e.left.op] < prec:
        left = f"({left})"
    right = print_expr(e.right)
    # Operators are left-associative, so the right operand needs parentheses
    # at equal precedence too: a - (b - c) must keep its grouping.
    if isinstance(e.right, BinOp) and _PRECEDENCE[e.right.op] <= prec:
        right = f"({right})"
    return f"{left} {e.op} {right}"


def eval_expr(e: Expr, env: dict[str, Fraction], step_id: int = 0) -> Fraction:
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Var):
        if e.name not in env:
            raise UndefinedVariable(e.name, step_id)
        return env[e.name]
    left = eval_expr(e.left, env, step_id)
    right = eval_expr(e.right, env, step_id)
    if e.op == "+":
        return left + right
    if e.op == "-":
        return left - right
    if e.op == "*":
        return left * right
    if right == 0:
        raise DivisionByZero(step_id)
    return left / right


def expr_variables(e: Expr) -> set[str]:
    if isinstance(e, Num):
        return set()
    if isinstance(e, Var):
        return {e.name}
    return expr_variables(e.left) | expr_variables(e.right)


# -- matching actions against constraints -------------------------------------

HARD = "hard"
SOFT = "soft"


def action_from_constraint(c: TroopConstraint) -> Action:
    """The unique action a hard-mode constraint admits."""
    if isinstance(c, PlaceTroops):
        return Action.place(c.territory, c.n)
    if isinstance(c, AttackTerritory):
        return Action.attack(c.src, c.dst, c.n)
    if isinstance(c, MoveTroops):
        return Action.move(c.src, c.dst, c.n)
    return Action.reinforce(c.territory, c.n)


def satisfies(c: TroopConstraint, s: GameState | None, a: Action, mode: str = HARD) -> bool:
    """Indicator: is action ``a`` consistent with constraint ``c``?

    Hard mode: the action equals the constraint's action exactly. Soft mode:
    same action kind aimed at the same target territory; troop counts (and
    attack/move origins) are left free. ``s`` is accepted for signature
    symmetry with other indicator functions; matching is state-free.
    """
    if mode == HARD:
        return a == action_from_constraint(c)
    if mode != SOFT:
        raise ValueError(f"unknown mode {mode!r}")
    if isinstance(c, PlaceTroops):
        return a.kind == "place" and a.territory == c.territory
    if isinstance(c, AttackTerritory):
        return a.kind == "attack" and a.dst == c.dst
    if isinstance(c, MoveTroops):
        return a.kind == "move" and a.dst == c.dst
    return a.kind == "reinforce" and a.territory == c.territory


# -- intent/constraint pairs and sequence validation ---------------------------


@dataclass(frozen=True)
class IntentConstraintPair:
    step_id: int
    intent: str
    constraint_text: str
    constraint_ast: Constraint
    placement: tuple[str, int] | None = None

    def to_json(self) -> dict:
        d = {"step_id": self.step_id, "intent": self.intent, "constraint": self.constraint_text}
        if self.placement is not None:
            d["placement"] = [self.placement[0], self.placement[1]]
        return d

    @staticmethod
    def from_json(d: dict, domain: str = "auto") -> "IntentConstraintPair":
        placement = d.get("placement")
        return IntentConstraintPair(
            step_id=int(d["step_id"]),
            intent=str(d["intent"]),
            constraint_text=str(d["constraint"]),
            constraint_ast=parse_constraint(str(d["constraint"]), domain),
            placement=(str(placement[0]), int(placement[1])) if placement else None,
        )


@dataclass(frozen=True)
class ConstraintSequence:
    pairs: tuple[IntentConstraintPair, ...]

    @property
    def K(self) -> int:
        return len(self.pairs)

    def constraints(self) -> tuple[Constraint, ...]:
        return tuple(p.constraint_ast for p in self.pairs)

    def to_json(self) -> list:
        return [p.to_json() for p in self.pairs]

    @staticmethod
    def from_json(items: list, domain: str = "auto") -> "ConstraintSequence":
        return ConstraintSequence(tuple(IntentConstraintPair.from_json(d, domain) for d in items))


class _SequenceContext:
    """Running feasibility state while filtering a sequence in order."""

    def __init__(self, state: GameState | None):
        self.remaining_reserve = state.reserve.get(state.current_player, 0) if state else None
        self.used_territories: set[str] = set()
        self.bound_vars: set[str] = set()
        self.math_steps = 0


def _check_pair(
    pair: IntentConstraintPair,
    state: GameState | None,
    g: MapGraph | None,
    ctx: _SequenceContext,
) -> str | None:
    """Reason the pair is invalid, or None if it validates. Mutates ctx on
    acceptance."""
    if not pair.intent or not pair.intent.strip():
        return "MissingIntent"
    if not (INTENT_MIN_LEN <= len(pair.intent) <= INTENT_MAX_LEN):
        return "IntentLength"
    c = pair.constraint_ast

    if isinstance(c, MathAssign):
        if ctx.math_steps >= MATH_MAX_STEPS:
            return "StepLimit"
        unbound = expr_variables(c.expr) - ctx.bound_vars
        if unbound:
            return f"UndefinedVariable:{sorted(unbound)[0]}"
        ctx.math_steps += 1
        ctx.bound_vars.add(c.var)
        return None

    # Troop constraints.
    target = target_territory(c)
    if g is not None:
        for t in constraint_territories(c):
            if t not in set(g.territories):
                return "UnknownTerritory"
    if target in ctx.used_territories:
        return "DuplicateTerritory"
    if state is not None and g is not None:
        if isinstance(c, PlaceTroops):
            if state.phase != Phase.INITIAL_PLACEMENT or state.owner.get(target) is not None:
                return "Feasibility"
            if ctx.remaining_reserve is not None and c.n > ctx.remaining_reserve:
                return "Feasibility"
            ctx.remaining_reserve -= c.n
        elif isinstance(c, ReinforceTerritory):
            if state.phase != Phase.REINFORCE or state.owner.get(target) != state.current_player:
                return "Feasibility"
            if ctx.remaining_reserve is not None and c.n > ctx.remaining_reserve:
                return "Feasibility"
            ctx.remaining_reserve -= c.n
        else:
            if not is_legal(state, action_from_constraint(c), g):
                return "Feasibility"
    ctx.used_territories.add(target)
    return None


def validate(pair: IntentConstraintPair, state: GameState | None = None, g: MapGraph | None = None) -> bool:
    """Single-pair validation outside any sequence context."""
    return _check_pair(pair, state, g, _SequenceContext(state)) is None


def filter_valid(
    raw_pairs: list[IntentConstraintPair],
    state: GameState | None = None,
    g: MapGraph | None = None,
) -> tuple[ConstraintSequence, list[tuple[IntentConstraintPair, str]]]:
    """Keep validating pairs in order, renumbering step_ids 1..K; return the
    sequence plus (pair, reason) for every drop. Raises EmptySequence when
    nothing survives."""
    ctx = _SequenceContext(state)
    kept: list[IntentConstraintPair] = []
    dropped: list[tuple[IntentConstraintPair, str]] = []
    for pair in raw_pairs:
        reason = _check_pair(pair, state, g, ctx)
        if reason is None:
            kept.append(replace(pair, step_id=len(kept) + 1))
        else:
            dropped.append((pair, reason))
    if not kept:
        raise EmptySequence(f"no valid pairs out of {len(raw_pairs)}")
    return ConstraintSequence(tuple(kept)), dropped
