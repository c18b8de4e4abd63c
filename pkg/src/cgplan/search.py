"""Constraint-guided Monte Carlo tree search.

One rollout per extracted constraint: rollout k descends the tree by a
modified UCB, expands a leaf with model-proposed actions filtered by
legality and satisfaction of constraint k, evaluates the new children, and
backs the best value up the path. The planner is domain-agnostic: a
domain adapter supplies legality, transition, proposal, matching, and
evaluation; Risk and arithmetic adapters live in their own modules.
"""

from __future__ import annotations

import math
import statistics
import time
from dataclasses import dataclass, field

from .constraints import (
    ConstraintSequence,
    HARD,
    IntentConstraintPair,
    MathAssign,
    SOFT,
    action_from_constraint,
    parse_constraint,
    print_constraint,
    satisfies,
)
from .engine import Action, GameState, apply as engine_apply, is_terminal as engine_terminal, legal_actions
from .errors import EmptySequence, NoLegalAction
from .extraction import map_status
from .fitness import ConstraintSpecParams, EMPTY_PARAMS, FitnessWeights, fitness
from .gateway import LOGPROB_FLOOR, LmGateway, action_logprob, propose_actions
from .riskmap import MapGraph

EQ4 = "eq4"  # Q + c_uct*sqrt(ln(1+N)/(1+Na)) + lambda*logprob
ALG1 = "alg1"  # Q + c_uct + lambda*sqrt(ln(1+N)/(1+Na))


@dataclass(frozen=True)
class SearchConfig:
    c_uct: float = 1.414
    ucb_lambda: float = 0.2
    K_gen: int = 5
    K_expand: int = 3
    mode: str = HARD
    depth_guided: bool = False
    constraint_filter: bool = True
    rollout_budget: int | None = None  # None: one rollout per constraint
    ucb_form: str = EQ4
    logprob_floor: float = LOGPROB_FLOOR

    def __post_init__(self):
        if self.c_uct <= 0 or self.ucb_lambda <= 0 or self.K_gen < 1 or self.K_expand < 1:
            raise ValueError("c_uct, ucb_lambda, K_gen, K_expand must be positive")
        if self.K_expand > self.K_gen:
            raise ValueError("K_expand must not exceed K_gen")
        if self.mode not in (HARD, SOFT):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.ucb_form not in (EQ4, ALG1):
            raise ValueError(f"unknown ucb_form {self.ucb_form!r}")
        if self.rollout_budget is not None and self.rollout_budget < 1:
            raise ValueError("rollout_budget must be positive")

    def to_json(self) -> dict:
        return {
            "c_uct": self.c_uct,
            "ucb_lambda": self.ucb_lambda,
            "K_gen": self.K_gen,
            "K_expand": self.K_expand,
            "mode": self.mode,
            "depth_guided": self.depth_guided,
            "constraint_filter": self.constraint_filter,
            "rollout_budget": self.rollout_budget,
            "ucb_form": self.ucb_form,
            "logprob_floor": self.logprob_floor,
        }

    @staticmethod
    def from_json(d: dict) -> "SearchConfig":
        return SearchConfig(**{k: d[k] for k in d if k in SearchConfig.__dataclass_fields__})


class SearchNode:
    """Tree node: per-action visit counts, mean values, cached logprobs."""

    __slots__ = ("state", "children", "N_v", "N_va", "Q", "logprobs", "parent", "created_by", "guided_pair", "eval_value", "depth")

    def __init__(self, state, parent=None, created_by=None, guided_pair=None, depth=0):
        self.state = state
        self.children: dict[str, tuple[object, "SearchNode"]] | None = None  # action key -> (action, node)
        self.N_v = 0
        self.N_va: dict[str, int] = {}
        self.Q: dict[str, float] = {}
        self.logprobs: dict[str, float] = {}
        self.parent = parent
        self.created_by = created_by
        self.guided_pair: IntentConstraintPair | None = guided_pair
        self.eval_value: float | None = None
        self.depth = depth


def ucb_score(node: SearchNode, action_key: str, cfg: SearchConfig, lm_logprob: float) -> float:
    q = node.Q.get(action_key, 0.0)
    explore = math.sqrt(math.log(1 + node.N_v) / (1 + node.N_va.get(action_key, 0)))
    if cfg.ucb_form == ALG1:
        return q + cfg.c_uct + cfg.ucb_lambda * explore
    return q + cfg.c_uct * explore + cfg.ucb_lambda * lm_logprob


def backup(path: list[tuple[SearchNode, str]], value: float) -> None:
    """Incremental-mean update along (node, action key) pairs."""
    for node, key in path:
        node.N_v += 1
        n = node.N_va.get(key, 0) + 1
        node.N_va[key] = n
        q = node.Q.get(key, 0.0)
        node.Q[key] = q + (value - q) / n


@dataclass
class PlanStep:
    intent: str | None
    constraint: str | None
    action: object
    value: float

    def to_json(self) -> dict:
        action_json = self.action.to_json() if hasattr(self.action, "to_json") else str(self.action)
        return {"intent": self.intent, "constraint": self.constraint, "action": action_json, "value": self.value}


@dataclass
class Telemetry:
    rollouts: int = 0
    attempts: int = 0  # generation attempts for retry-style planners
    wall_ms: float = 0.0
    branching: dict[int, list[int]] = field(default_factory=dict)
    violations: list[str] = field(default_factory=list)

    def record_expansion(self, depth: int, n_children: int) -> None:
        self.branching.setdefault(depth, []).append(n_children)

    def to_json(self) -> dict:
        return {
            "rollouts": self.rollouts,
            "attempts": self.attempts,
            "wall_ms": self.wall_ms,
            "branching": {str(d): counts for d, counts in sorted(self.branching.items())},
            "violations": list(self.violations),
        }


@dataclass
class PlanResult:
    actions: list
    a_star: object | None
    per_step: list[PlanStep]
    telemetry: Telemetry
    plan_value: float | None = None

    def to_json(self) -> dict:
        return {
            "actions": [a.to_json() if hasattr(a, "to_json") else str(a) for a in self.actions],
            "a_star": self.a_star.to_json() if hasattr(self.a_star, "to_json") else None,
            "per_step": [s.to_json() for s in self.per_step],
            "telemetry": self.telemetry.to_json(),
            "plan_value": self.plan_value,
        }


def branching_telemetry(result: PlanResult) -> dict[int, tuple[float, float]]:
    """Per-depth (mean, standard deviation) of created-children counts."""
    out = {}
    for depth, counts in sorted(result.telemetry.branching.items()):
        mean = statistics.mean(counts)
        sd = statistics.pstdev(counts) if len(counts) > 1 else 0.0
        out[depth] = (mean, sd)
    return out


# -- Risk domain adapter ---------------------------------------------------------


class RiskDomain:
    """Planning domain for one player's turn on the Risk board.

    ``proposal_source`` selects where candidate actions come from:
    "gateway" asks the language model (ActionPropose template),
    "exhaustive" enumerates the full legal set (deterministic, model-free).
    """

    def __init__(
        self,
        g: MapGraph,
        player: str,
        weights: FitnessWeights = FitnessWeights(),
        params: ConstraintSpecParams = EMPTY_PARAMS,
        gateway: LmGateway | None = None,
        strategy: str = "",
        proposal_source: str = "exhaustive",
    ):
        if proposal_source not in ("exhaustive", "gateway"):
            raise ValueError(f"unknown proposal source {proposal_source!r}")
        if proposal_source == "gateway" and gateway is None:
            raise ValueError("gateway proposal source needs a gateway")
        self.g = g
        self.player = player
        self.weights = weights
        self.params = params
        self.gateway = gateway
        self.strategy = strategy
        self.proposal_source = proposal_source

    def legal(self, state: GameState) -> list[Action]:
        if state.current_player != self.player:
            return []
        return legal_actions(state, self.g)

    def apply(self, state: GameState, a: Action) -> GameState:
        return engine_apply(state, a, self.g)

    def is_terminal(self, state: GameState) -> bool:
        return engine_terminal(state) or state.current_player != self.player

    def plan_complete(self, state: GameState) -> bool:
        """A placement plan is complete once the reserve is spent (or the
        turn has left the planner's hands)."""
        if self.is_terminal(state):
            return True
        return state.reserve.get(self.player, 0) == 0

    def action_key(self, a: Action) -> str:
        return a.key()

    def state_value(self, state: GameState) -> float:
        return fitness(state, self.player, self.g, self.weights, self.params)

    def final_value(self, state: GameState) -> float:
        return self.state_value(state)

    def satisfies(self, pair: IntentConstraintPair, state: GameState, a: Action, mode: str) -> bool:
        c = pair.constraint_ast
        if isinstance(c, MathAssign):
            return False
        return satisfies(c, state, a, mode)

    def satisfying_actions(self, state: GameState, pair: IntentConstraintPair, mode: str) -> list[Action]:
        c = pair.constraint_ast
        if isinstance(c, MathAssign):
            return []
        if mode == HARD:
            a = action_from_constraint(c)
            return [a] if a in set(self.legal(state)) else []
        return [a for a in self.legal(state) if satisfies(c, state, a, mode)]

    def propose(self, state: GameState, pair: IntentConstraintPair | None, k_gen: int) -> list[tuple[Action, float | None]]:
        if self.proposal_source == "exhaustive":
            acts = sorted(self.legal(state), key=lambda a: a.key())
            return [(a, None) for a in acts]
        constraint_text = pair.constraint_text if pair is not None else ""
        proposals, resp = propose_actions(
            self.gateway, self.strategy, map_status(state), constraint_text, k_gen
        )
        proposals = proposals[:k_gen]
        out = []
        for p in proposals:
            try:
                a = _action_from_key(p.action_key)
            except ValueError:
                continue
            lp = action_logprob(p.action_key, proposals, resp)
            out.append((a, lp))
        return out


def _action_from_key(key: str) -> Action:
    """Inverse of Action.key(); raises ValueError on malformed keys."""
    if key == "end_phase":
        return Action.end_phase()
    parts = key.split(":")
    if len(parts) != 3:
        raise ValueError(f"bad action key {key!r}")
    kind, middle, n_raw = parts
    try:
        n = int(n_raw)
    except ValueError as e:
        raise ValueError(f"bad troop count in {key!r}") from e
    if kind in ("place", "reinforce"):
        return Action(kind, territory=middle, n=n)
    if kind in ("attack", "move"):
        src, sep, dst = middle.partition(">")
        if not sep or not src or not dst:
            raise ValueError(f"bad endpoints in {key!r}")
        return Action(kind, src=src, dst=dst, n=n)
    raise ValueError(f"unknown action kind in {key!r}")


# -- the search itself -------------------------------------------------------------


def expand(
    node: SearchNode,
    pair: IntentConstraintPair | None,
    cfg: SearchConfig,
    domain,
    telemetry: Telemetry | None = None,
) -> list[SearchNode]:
    """Create children for a leaf node under the rollout's constraint.

    Proposal set ∩ legal ∩ satisfying, falling back to the full legal
    satisfying set when that intersection is empty; at most K_expand
    children. Raises NoLegalAction when nothing qualifies.
    """
    proposals = domain.propose(node.state, pair, cfg.K_gen)
    legal = {domain.action_key(a) for a in domain.legal(node.state)}
    use_filter = cfg.constraint_filter and pair is not None

    candidates: list[tuple[object, float | None]] = []
    for a, lp in proposals:
        key = domain.action_key(a)
        if key not in legal:
            continue
        if use_filter and not domain.satisfies(pair, node.state, a, cfg.mode):
            continue
        candidates.append((a, lp))
    if not candidates:
        if use_filter:
            fallback = domain.satisfying_actions(node.state, pair, cfg.mode)
        else:
            fallback = [a for a in domain.legal(node.state)]
        candidates = [(a, None) for a in sorted(fallback, key=domain.action_key)]
    if not candidates:
        node.children = {}
        if telemetry is not None:
            telemetry.record_expansion(node.depth, 0)
        raise NoLegalAction(f"no legal satisfying action at depth {node.depth}")

    n_candidates = len(candidates)
    candidates = candidates[: cfg.K_expand]
    node.children = {}
    for a, lp in candidates:
        key = domain.action_key(a)
        child = SearchNode(
            state=domain.apply(node.state, a),
            parent=node,
            created_by=a,
            guided_pair=pair,
            depth=node.depth + 1,
        )
        node.children[key] = (a, child)
        node.logprobs[key] = lp if lp is not None else max(cfg.logprob_floor, math.log(1 / n_candidates))
    if telemetry is not None:
        telemetry.record_expansion(node.depth, len(node.children))
    return [child for _, child in node.children.values()]


def _step_value(node: SearchNode, pair: IntentConstraintPair | None, cfg: SearchConfig, domain) -> float:
    """Shaped reward for arriving at ``node``: satisfaction indicator of its
    creating action, plus the domain value of its state."""
    indicator = 0.0
    if pair is not None and node.created_by is not None:
        if domain.satisfies(pair, node.parent.state if node.parent else None, node.created_by, cfg.mode):
            indicator = 1.0
    return indicator + domain.state_value(node.state)


def _select_action(node: SearchNode, cfg: SearchConfig) -> str:
    best_key, best_score = None, None
    for key in sorted(node.children):
        score = ucb_score(node, key, cfg, node.logprobs.get(key, cfg.logprob_floor))
        if best_score is None or score > best_score:
            best_key, best_score = key, score
    return best_key


class _BestPlan:
    """Registry of the best complete plan discovered during search."""

    def __init__(self):
        self.value: float | None = None
        self.keys: tuple[str, ...] | None = None
        self.leaf: SearchNode | None = None

    def offer(self, leaf: SearchNode, value: float, domain) -> None:
        keys = []
        node = leaf
        while node.created_by is not None:
            keys.append(domain.action_key(node.created_by))
            node = node.parent
        keys = tuple(reversed(keys))
        if self.value is None or value > self.value or (value == self.value and keys < self.keys):
            self.value, self.keys, self.leaf = value, keys, leaf


def cg_mcts(
    s0,
    seq: ConstraintSequence | None,
    D: str = "",
    cfg: SearchConfig = SearchConfig(),
    domain=None,
) -> PlanResult:
    """Run constraint-guided MCTS from ``s0`` and return the plan.

    Rollout k is guided by constraint k; the rollout count equals the
    constraint count unless ``cfg.rollout_budget`` overrides it (in which
    case constraints are cycled, or ignored entirely when the sequence is
    empty and filtering is disabled).
    """
    if domain is None:
        raise ValueError("a planning domain is required")
    if D and hasattr(domain, "strategy") and not domain.strategy:
        domain.strategy = D
    K = seq.K if seq is not None else 0
    if K == 0 and (cfg.constraint_filter or cfg.rollout_budget is None):
        raise EmptySequence("constraint sequence is empty")
    if domain.is_terminal(s0):
        raise NoLegalAction("root state is terminal")

    started = time.perf_counter()
    telemetry = Telemetry()
    root = SearchNode(state=s0, depth=0)
    best = _BestPlan()
    depth_cap = K if cfg.depth_guided and K > 0 else None
    R = cfg.rollout_budget if cfg.rollout_budget is not None else K

    for k in range(R):
        pair = seq.pairs[k % K] if K else None
        _rollout(root, pair, cfg, domain, telemetry, best, depth_cap)
        telemetry.rollouts += 1

    a_star = _argmax_root_action(root)
    actions, per_step, plan_value = _extract_plan(root, best, cfg, domain)
    if cfg.mode == SOFT:
        _log_violations(per_step, telemetry)
    telemetry.wall_ms = (time.perf_counter() - started) * 1000.0
    return PlanResult(actions=actions, a_star=a_star, per_step=per_step, telemetry=telemetry, plan_value=plan_value)


def _rollout(root, pair, cfg, domain, telemetry, best, depth_cap) -> None:
    v = root
    path: list[tuple[SearchNode, str]] = []
    while True:
        at_cap = depth_cap is not None and v.depth >= depth_cap
        if domain.is_terminal(v.state) or at_cap or (v.children is not None and not v.children):
            backup(path, _step_value(v, pair, cfg, domain))
            return
        if v.children is None:
            try:
                children = expand(v, pair, cfg, domain, telemetry)
            except NoLegalAction:
                backup(path, _step_value(v, pair, cfg, domain))
                return
            best_key, best_val = None, None
            for key in sorted(v.children):
                _, child = v.children[key]
                child.eval_value = _step_value(child, pair, cfg, domain)
                if domain.plan_complete(child.state):
                    best.offer(child, domain.final_value(child.state), domain)
                if best_val is None or child.eval_value > best_val:
                    best_key, best_val = key, child.eval_value
            backup(path + [(v, best_key)], best_val)
            return
        key = _select_action(v, cfg)
        path.append((v, key))
        v = v.children[key][1]


def _argmax_root_action(root: SearchNode):
    if not root.children:
        return None
    ranked = sorted(
        root.children,
        key=lambda key: (-root.N_va.get(key, 0), -root.Q.get(key, 0.0), key),
    )
    return root.children[ranked[0]][0]


def _extract_plan(root, best: _BestPlan, cfg, domain):
    """The best complete plan discovered, else greedy descent by visits."""
    if best.leaf is not None:
        chain: list[SearchNode] = []
        node = best.leaf
        while node.created_by is not None:
            chain.append(node)
            node = node.parent
        chain.reverse()
        return [n.created_by for n in chain], [_plan_step(n) for n in chain], best.value

    actions, per_step = [], []
    v = root
    while v.children:
        ranked = sorted(
            v.children,
            key=lambda key: (-v.N_va.get(key, 0), -v.Q.get(key, 0.0), key),
        )
        action, child = v.children[ranked[0]]
        actions.append(action)
        per_step.append(_plan_step(child))
        v = child
    return actions, per_step, (domain.final_value(v.state) if actions else None)


def _plan_step(node: SearchNode) -> PlanStep:
    pair = node.guided_pair
    return PlanStep(
        intent=pair.intent if pair else None,
        constraint=pair.constraint_text if pair else None,
        action=node.created_by,
        value=node.eval_value if node.eval_value is not None else 0.0,
    )


def _log_violations(per_step: list[PlanStep], telemetry: Telemetry) -> None:
    """In soft mode, note every step whose action deviates from the exact
    action its constraint names."""
    for step in per_step:
        if step.constraint is None or not isinstance(step.action, Action):
            continue
        try:
            c = parse_constraint(step.constraint)
        except Exception:
            continue
        if isinstance(c, MathAssign):
            continue
        if not satisfies(c, None, step.action, HARD):
            telemetry.violations.append(f"{step.action.key()} deviates from {print_constraint(c)!r}")
