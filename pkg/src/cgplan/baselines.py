"""Reference strategies run through the same harness as the guided planner:
direct prompting, chain-of-thought (with and without rejection sampling),
plain and CoT-seeded MCTS, and a two-stage constraint-optimization pipeline
(enumerate feasible deployments, rank by goals-only fitness).
"""

from __future__ import annotations

import itertools
import json
import time
from dataclasses import dataclass, field, replace

from .constraints import ConstraintSequence
from .engine import Action, GameState, apply as engine_apply
from .errors import EnumerationBudgetExceeded, IllegalAction, MalformedResponse
from .extraction import StrategyInput, _candidate_arrays, extract, map_status
from .fitness import (
    ConstraintSpecParams,
    FitnessWeights,
    goals_only_fitness,
    params_for_constraint,
    violation_flags,
)
from .gateway import LmGateway, LmRequest, parse_weights
from .riskmap import MapGraph
from .search import PlanResult, PlanStep, RiskDomain, SearchConfig, Telemetry, cg_mcts

DIRECT = "direct"
COT = "cot"
COT_RS = "cot_rs"
MCTS_PLAIN = "mcts_plain"
MCTS_COT = "mcts_cot"
CONSTRAINT_OPT = "constraint_opt"

BASELINE_KINDS = (DIRECT, COT, COT_RS, MCTS_PLAIN, MCTS_COT, CONSTRAINT_OPT)


@dataclass(frozen=True)
class BaselineConfig:
    weights: FitnessWeights = FitnessWeights()
    retry_cap: int = 5  # CoT+RS regeneration attempts
    rollout_budget: int = 16  # plain/CoT MCTS rollouts
    enum_budget: int = 200_000  # deployment-enumeration cap
    elicit_weights: bool = False  # ask the model for goal weights
    search: SearchConfig = field(
        default_factory=lambda: SearchConfig(constraint_filter=False, rollout_budget=16)
    )


@dataclass
class FeasibleSet:
    deployments: list[tuple[tuple[str, int], ...]]
    active_constraints: list[ConstraintSpecParams]


def run_baseline(
    kind: str,
    input: StrategyInput,
    g: MapGraph,
    gateway: LmGateway | None = None,
    cfg: BaselineConfig = BaselineConfig(),
) -> PlanResult:
    if kind not in BASELINE_KINDS:
        raise ValueError(f"unknown baseline kind {kind!r}")
    if input.state is None:
        raise ValueError("baselines plan over a risk state")
    started = time.perf_counter()
    if kind == DIRECT:
        result = _prompted_placements(input, g, gateway, "DirectPlace", pick="first")
    elif kind == COT:
        result = _prompted_placements(input, g, gateway, "CotPlace", pick="last")
    elif kind == COT_RS:
        result = _cot_rejection_sampling(input, g, gateway, cfg)
    elif kind == MCTS_PLAIN:
        result = _mcts_plain(input, g, cfg)
    elif kind == MCTS_COT:
        result = _mcts_cot(input, g, gateway, cfg)
    else:
        result = _constraint_opt(input, g, gateway, cfg)
    result.telemetry.wall_ms = (time.perf_counter() - started) * 1000.0
    return result


# -- prompted placement baselines -------------------------------------------------


def parse_placement_array(text: str, pick: str = "first") -> list[tuple[str, int]]:
    """Find a JSON array of [country, troops] pairs in free text."""
    found = []
    for slice_ in _candidate_arrays(text):
        try:
            doc = json.loads(slice_)
        except json.JSONDecodeError:
            continue
        if (
            isinstance(doc, list)
            and doc
            and all(
                isinstance(item, list)
                and len(item) == 2
                and isinstance(item[0], str)
                and isinstance(item[1], int)
                and not isinstance(item[1], bool)
                for item in doc
            )
        ):
            found.append([(t, n) for t, n in doc])
            if pick == "first":
                break
    if not found:
        raise MalformedResponse(f"no placement array in response: {text[:120]!r}")
    return found[0] if pick == "first" else found[-1]


def _placement_plan(placements: list[tuple[str, int]], attempts: int = 0) -> PlanResult:
    actions = [Action.place(t, n) for t, n in placements]
    per_step = [PlanStep(intent=None, constraint=None, action=a, value=0.0) for a in actions]
    telemetry = Telemetry(rollouts=0)
    telemetry.attempts = attempts
    return PlanResult(actions=actions, a_star=actions[0] if actions else None, per_step=per_step, telemetry=telemetry)


def _complete_prompt(input: StrategyInput, gateway: LmGateway, template_id: str, temperature: float = 0.0) -> str:
    req = LmRequest(
        template_id=template_id,
        variables={"Strategy_Description": input.description, "mapStatus": map_status(input.state)},
        temperature=temperature,
    )
    return gateway.complete(req).text


def _prompted_placements(input, g, gateway, template_id, pick) -> PlanResult:
    if gateway is None:
        raise ValueError("this baseline needs a gateway")
    text = _complete_prompt(input, gateway, template_id)
    return _placement_plan(parse_placement_array(text, pick), attempts=1)


def plan_is_legal(state: GameState, actions: list[Action], g: MapGraph) -> bool:
    try:
        for a in actions:
            state = engine_apply(state, a, g)
    except IllegalAction:
        return False
    return True


def _cot_rejection_sampling(input, g, gateway, cfg: BaselineConfig) -> PlanResult:
    """Regenerate until the parsed plan replays legally, up to the retry cap."""
    if gateway is None:
        raise ValueError("this baseline needs a gateway")
    last_error = None
    for attempt in range(1, cfg.retry_cap + 1):
        # Attempt index nudges temperature so a live model resamples.
        temperature = 0.0 if attempt == 1 else 0.3
        try:
            placements = parse_placement_array(
                _complete_prompt(input, gateway, "CotPlace", temperature), pick="last"
            )
        except MalformedResponse as e:
            last_error = e
            continue
        plan = _placement_plan(placements, attempts=attempt)
        if plan_is_legal(input.state, plan.actions, g):
            return plan
    raise MalformedResponse(f"no legal plan within {cfg.retry_cap} attempts: {last_error}")


# -- search baselines --------------------------------------------------------------


def _mcts_plain(input, g, cfg: BaselineConfig) -> PlanResult:
    domain = RiskDomain(g, input.state.current_player, weights=cfg.weights, strategy=input.description)
    search_cfg = replace(cfg.search, constraint_filter=False, rollout_budget=cfg.rollout_budget)
    return cg_mcts(input.state, None, input.description, search_cfg, domain)


def _mcts_cot(input, g, gateway, cfg: BaselineConfig) -> PlanResult:
    """Plain search whose proposals are conditioned on a chain-of-thought
    trace instead of extracted constraints."""
    if gateway is None:
        raise ValueError("this baseline needs a gateway")
    trace = _complete_prompt(input, gateway, "CotPlace")
    domain = RiskDomain(
        g,
        input.state.current_player,
        weights=cfg.weights,
        gateway=gateway,
        strategy=trace,
        proposal_source="gateway",
    )
    search_cfg = replace(cfg.search, constraint_filter=False, rollout_budget=cfg.rollout_budget)
    return cg_mcts(input.state, None, trace, search_cfg, domain)


# -- constraint-optimization baseline ------------------------------------------------


def enumerate_deployments(state: GameState, g: MapGraph, budget: int) -> list[tuple[tuple[str, int], ...]]:
    """All complete deployments of the current player's reserve over distinct
    unoccupied territories. Bounded by ``budget``; exceeding it is an error."""
    player = state.current_player
    reserve = state.reserve.get(player, 0)
    open_territories = sorted(t for t in g.territories if state.owner.get(t) is None)
    out: list[tuple[tuple[str, int], ...]] = []

    def recurse(idx: int, remaining: int, chosen: list[tuple[str, int]]):
        if remaining == 0:
            out.append(tuple(chosen))
            if len(out) > budget:
                raise EnumerationBudgetExceeded(f"more than {budget} deployments")
            return
        if idx >= len(open_territories):
            return
        # Skip this territory entirely, or place 1..remaining troops on it.
        recurse(idx + 1, remaining, chosen)
        for n in range(1, remaining + 1):
            chosen.append((open_territories[idx], n))
            recurse(idx + 1, remaining - n, chosen)
            chosen.pop()

    if reserve > 0:
        recurse(0, reserve, [])
    return out


def apply_deployment(state: GameState, deployment: tuple[tuple[str, int], ...], g: MapGraph) -> GameState:
    for t, n in deployment:
        state = engine_apply(state, Action.place(t, n), g)
    return state


def _deployment_feasible(
    state: GameState,
    deployment: tuple[tuple[str, int], ...],
    params_list: list[ConstraintSpecParams],
    g: MapGraph,
) -> bool:
    final = apply_deployment(state, deployment, g)
    p = state.current_player
    return all(not any(violation_flags(final, p, params, g)) for params in params_list)


def maximal_feasible_subset(
    constraints: list[ConstraintSpecParams],
    state: GameState,
    g: MapGraph,
    budget: int = 200_000,
) -> FeasibleSet:
    """Feasible deployments under the largest satisfiable constraint subset.

    Tries the full set first, then subsets in decreasing size; at equal size
    the subset keeping the earliest-extracted constraints wins (drop the
    latest first)."""
    all_deployments = enumerate_deployments(state, g, budget)
    for size in range(len(constraints), -1, -1):
        for kept in itertools.combinations(range(len(constraints)), size):
            params_list = [constraints[i] for i in kept]
            feasible = [d for d in all_deployments if _deployment_feasible(state, d, params_list, g)]
            if feasible:
                return FeasibleSet(deployments=feasible, active_constraints=params_list)
    return FeasibleSet(deployments=[], active_constraints=[])


def rank_by_goals(
    feasible: FeasibleSet,
    state: GameState,
    g: MapGraph,
    weights: FitnessWeights = FitnessWeights(),
) -> tuple[tuple[str, int], ...]:
    """Argmax of goals-only fitness over the feasible set; ties go to the
    lexicographically smaller deployment."""
    if not feasible.deployments:
        raise ValueError("empty feasible set")
    p = state.current_player
    best, best_score = None, None
    for d in sorted(feasible.deployments):
        score = goals_only_fitness(apply_deployment(state, d, g), p, g, weights)
        if best_score is None or score > best_score:
            best, best_score = d, score
    return best


def _constraint_opt(input, g, gateway, cfg: BaselineConfig) -> PlanResult:
    if gateway is None:
        raise ValueError("this baseline needs a gateway")
    extraction = extract(input, gateway, g)
    params_list = [
        params_for_constraint(p.constraint_ast)
        for p in extraction.sequence.pairs
    ]
    weights = cfg.weights
    if cfg.elicit_weights:
        resp = gateway.complete(
            LmRequest(template_id="JudgeWeightElicit", variables={"Strategy_Description": input.description})
        )
        elicited = parse_weights(resp.text)
        if elicited is not None:
            weights = FitnessWeights.with_default_penalty(elicited)
    feasible = maximal_feasible_subset(params_list, input.state, g, cfg.enum_budget)
    deployment = rank_by_goals(feasible, input.state, g, weights)
    plan = _placement_plan(list(deployment), attempts=1)
    plan.telemetry.rollouts = 0
    return plan


def plan_from_sequence(seq: ConstraintSequence) -> list[Action]:
    """Direct translation of a constraint sequence into actions (no search)."""
    from .constraints import action_from_constraint

    return [action_from_constraint(p.constraint_ast) for p in seq.pairs]
