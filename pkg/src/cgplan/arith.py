"""Arithmetic domain: exact evaluation of assignment chains and scoring.

A solution is a chain of ``var = expr`` constraints evaluated with exact
rationals; the final answer is the last assignment's value and must be an
integer. A deterministic oracle judge stands in for the model judge in
tests — both expose the same scoring interface.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from fractions import Fraction

from .constraints import (
    ConstraintSequence,
    IntentConstraintPair,
    MathAssign,
    eval_expr,
    expr_variables,
    print_constraint,
)
from .errors import NonIntegerAnswer
from .gateway import LmGateway, LmRequest, parse_judge_score

log = logging.getLogger(__name__)


@dataclass
class MathEnv:
    """Ordered variable bindings; rebinding is allowed but warned."""

    bindings: dict[str, Fraction] = field(default_factory=dict)
    order: list[str] = field(default_factory=list)

    def bind(self, name: str, value: Fraction) -> None:
        if name in self.bindings:
            log.warning("variable %r rebound (old %s, new %s)", name, self.bindings[name], value)
            self.order.remove(name)
        self.bindings[name] = value
        self.order.append(name)

    def last_bound(self) -> str | None:
        return self.order[-1] if self.order else None


@dataclass(frozen=True)
class MathProblem:
    question: str
    gt_answer: int
    answer_var: str | None = None

    @staticmethod
    def from_json(d: dict) -> "MathProblem":
        return MathProblem(
            question=d["question"], gt_answer=int(d["gt_answer"]), answer_var=d.get("answer_var")
        )


def load_problems(path: str) -> list[MathProblem]:
    problems = []
    with open(path) as f:
        for line in f:
            line = line.strip()
            if line:
                problems.append(MathProblem.from_json(json.loads(line)))
    return problems


def eval_chain(seq: ConstraintSequence) -> MathEnv:
    """Evaluate assignments in step order. Raises UndefinedVariable or
    DivisionByZero with the offending step id."""
    env = MathEnv()
    for pair in seq.pairs:
        c = pair.constraint_ast
        if not isinstance(c, MathAssign):
            raise TypeError(f"step {pair.step_id} is not an assignment: {pair.constraint_text!r}")
        env.bind(c.var, eval_expr(c.expr, env.bindings, pair.step_id))
    return env


def final_answer(env: MathEnv, seq: ConstraintSequence | None = None, answer_var: str | None = None) -> int:
    """Value of the answer variable (default: last assignment); must be an
    exact integer."""
    if not env.bindings:
        raise ValueError("empty environment has no answer")
    name = answer_var if answer_var is not None else env.last_bound()
    if name not in env.bindings:
        raise ValueError(f"answer variable {name!r} is unbound")
    value = env.bindings[name]
    if value.denominator != 1:
        raise NonIntegerAnswer(f"{name} = {value} is not an integer")
    return int(value)


def solve(seq: ConstraintSequence, answer_var: str | None = None) -> int:
    return final_answer(eval_chain(seq), seq, answer_var)


# -- judges ---------------------------------------------------------------------


def oracle_step_score(problem: MathProblem, step: IntentConstraintPair, env: MathEnv, seq: ConstraintSequence | None = None) -> float:
    """Deterministic stand-in for the model judge.

    1.0 when the step evaluates cleanly over the current bindings; 0.0 when
    it cannot (unbound variable, division by zero); 0.5 when it evaluates
    but binds a variable no later step ever reads (a dead end) — judged
    against ``seq`` when given.
    """
    c = step.constraint_ast
    if not isinstance(c, MathAssign):
        return 0.0
    try:
        eval_expr(c.expr, env.bindings, step.step_id)
    except Exception:
        return 0.0
    if seq is not None:
        later = [p for p in seq.pairs if p.step_id > step.step_id]
        if later:
            used_later = set()
            for p in later:
                if isinstance(p.constraint_ast, MathAssign):
                    used_later |= expr_variables(p.constraint_ast.expr)
            if c.var not in used_later:
                return 0.5
    return 1.0


def lm_step_score(gateway: LmGateway, question: str, step_text: str, template_id: str = "StepEvalMath") -> float:
    """Model judge: render the step-evaluation prompt and parse the score."""
    resp = gateway.complete(
        LmRequest(template_id=template_id, variables={"question": question, "Step": step_text})
    )
    return parse_judge_score(resp.text)


# -- planning-domain adapter (search over assignment prefixes) -------------------


@dataclass(frozen=True)
class MathState:
    """Search state: the prefix of accepted steps (indices into the sequence)."""

    taken: tuple[int, ...] = ()


class MathDomain:
    """Planning domain over an extracted assignment sequence.

    Actions are the remaining steps, applied in order; the state value is
    the judge score of the latest step (oracle judge by default, model
    judge when a gateway is supplied).
    """

    def __init__(self, problem: MathProblem, seq: ConstraintSequence, gateway: LmGateway | None = None):
        self.problem = problem
        self.seq = seq
        self.gateway = gateway

    def legal(self, state: MathState) -> list[int]:
        nxt = len(state.taken)
        return [nxt] if nxt < self.seq.K else []

    def apply(self, state: MathState, a: int) -> MathState:
        return MathState(taken=state.taken + (a,))

    def is_terminal(self, state: MathState) -> bool:
        return len(state.taken) >= self.seq.K

    def plan_complete(self, state: MathState) -> bool:
        return self.is_terminal(state)

    def action_key(self, a: int) -> str:
        return f"step:{a:04d}"

    def _env_for(self, state: MathState) -> MathEnv:
        env = MathEnv()
        for idx in state.taken:
            pair = self.seq.pairs[idx]
            c = pair.constraint_ast
            try:
                env.bind(c.var, eval_expr(c.expr, env.bindings, pair.step_id))
            except Exception:
                break
        return env

    def state_value(self, state: MathState) -> float:
        if not state.taken:
            return 0.0
        last = self.seq.pairs[state.taken[-1]]
        prefix = MathState(taken=state.taken[:-1])
        env = self._env_for(prefix)
        if self.gateway is not None:
            return lm_step_score(self.gateway, self.problem.question, print_constraint(last.constraint_ast))
        return oracle_step_score(self.problem, last, env, self.seq)

    def final_value(self, state: MathState) -> float:
        return self.state_value(state)

    def satisfies(self, pair: IntentConstraintPair, state: MathState, a: int, mode: str) -> bool:
        """A step action satisfies its constraint when it applies exactly
        that pair (the sequence is the plan; mode has no looser reading)."""
        return self.seq.pairs[a] is pair or self.seq.pairs[a].constraint_text == pair.constraint_text

    def satisfying_actions(self, state: MathState, pair: IntentConstraintPair, mode: str) -> list[int]:
        return [a for a in self.legal(state) if self.satisfies(pair, state, a, mode)]

    def propose(self, state: MathState, pair: IntentConstraintPair | None, k_gen: int) -> list[tuple[int, float | None]]:
        return [(a, None) for a in self.legal(state)]


def solve_with_search(problem: MathProblem, seq: ConstraintSequence, cfg=None, gateway: LmGateway | None = None) -> int:
    """Run the guided search over the extracted chain, then evaluate it."""
    from .search import SearchConfig, cg_mcts

    domain = MathDomain(problem, seq, gateway)
    cfg = cfg if cfg is not None else SearchConfig(mode="hard")
    cg_mcts(MathState(), seq, problem.question, cfg, domain)
    return solve(seq, problem.answer_var)
