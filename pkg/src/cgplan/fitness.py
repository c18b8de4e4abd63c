"""Deployment fitness: weighted goal scores minus violation penalties.

``fitness`` scores a board state for one player as Σᵢ wᵢ·gᵢ − λ·Σₘ cₘ with
six goal scores in [0,1] and nine binary violation flags. The penalty
weight λ exceeds Σᵢ wᵢ, so one violation outweighs everything the goals
can contribute.

Degenerate denominators: a goal whose denominator is 0 scores 0, except
the concentration goal g₃, which scores 1 when the player holds at most
one territory (nothing to spread).
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .constraints import (
    AttackTerritory,
    MoveTroops,
    PlaceTroops,
    ReinforceTerritory,
    TroopConstraint,
)
from .engine import GameState
from .riskmap import CONTINENT_ORDER, MapGraph, continent_of, diameter, territories_of

DEFAULT_MAX_ENEMIES = 2


@dataclass(frozen=True)
class FitnessWeights:
    """Six non-negative goal weights and the violation penalty."""

    w: tuple[float, float, float, float, float, float] = (1.0,) * 6
    penalty_lambda: float = 60.0

    def __post_init__(self):
        if len(self.w) != 6 or any(wi < 0 for wi in self.w):
            raise ValueError("need six non-negative goal weights")
        if self.penalty_lambda <= sum(self.w):
            raise ValueError("penalty_lambda must exceed the weight sum")

    @staticmethod
    def with_default_penalty(w: tuple[float, ...]) -> "FitnessWeights":
        return FitnessWeights(w=tuple(w), penalty_lambda=10.0 * sum(w))

    def to_json(self) -> dict:
        return {"w": list(self.w), "penalty_lambda": self.penalty_lambda}

    @staticmethod
    def from_json(d: dict) -> "FitnessWeights":
        return FitnessWeights(w=tuple(float(x) for x in d["w"]), penalty_lambda=float(d["penalty_lambda"]))


@dataclass(frozen=True)
class ConstraintSpecParams:
    """Parameters feeding the nine violation predicates. Empty sets and None
    integers deactivate their predicate."""

    required_continents: frozenset[str] = frozenset()
    forbidden_continents: frozenset[str] = frozenset()
    reach_targets: frozenset[str] = frozenset()
    defend_continents: tuple[tuple[str, int], ...] = ()  # (continent, min troops)
    min_countries: int | None = None
    min_continents: int | None = None
    min_troops_per_country: int | None = None
    max_continents: int | None = None

    def __post_init__(self):
        conts = set(CONTINENT_ORDER)
        for group in (self.required_continents, self.forbidden_continents, self.reach_targets):
            if not set(group) <= conts:
                raise ValueError(f"unknown continent in {sorted(group)}")
        for cont, n in self.defend_continents:
            if cont not in conts or n < 0:
                raise ValueError(f"bad defend entry ({cont}, {n})")
        for v in (self.min_countries, self.min_continents, self.min_troops_per_country, self.max_continents):
            if v is not None and v < 0:
                raise ValueError("integer parameters must be >= 0")

    def to_json(self) -> dict:
        return {
            "required_continents": sorted(self.required_continents),
            "forbidden_continents": sorted(self.forbidden_continents),
            "reach_targets": sorted(self.reach_targets),
            "defend_continents": [[c, n] for c, n in self.defend_continents],
            "min_countries": self.min_countries,
            "min_continents": self.min_continents,
            "min_troops_per_country": self.min_troops_per_country,
            "max_continents": self.max_continents,
        }

    @staticmethod
    def from_json(d: dict) -> "ConstraintSpecParams":
        return ConstraintSpecParams(
            required_continents=frozenset(d.get("required_continents", ())),
            forbidden_continents=frozenset(d.get("forbidden_continents", ())),
            reach_targets=frozenset(d.get("reach_targets", ())),
            defend_continents=tuple((c, int(n)) for c, n in d.get("defend_continents", ())),
            min_countries=d.get("min_countries"),
            min_continents=d.get("min_continents"),
            min_troops_per_country=d.get("min_troops_per_country"),
            max_continents=d.get("max_continents"),
        )


EMPTY_PARAMS = ConstraintSpecParams()


@dataclass(frozen=True)
class RewardConfig:
    gamma: float = 1.0
    horizon: int = 10

    def __post_init__(self):
        if not 0 < self.gamma <= 1:
            raise ValueError("gamma must be in (0, 1]")
        if self.horizon < 1:
            raise ValueError("horizon must be positive")


def load_fitness_config(path: str) -> tuple[FitnessWeights, ConstraintSpecParams]:
    with open(path) as f:
        doc = json.load(f)
    weights = FitnessWeights.from_json(doc["weights"]) if "weights" in doc else FitnessWeights()
    params = ConstraintSpecParams.from_json(doc["params"]) if "params" in doc else EMPTY_PARAMS
    return weights, params


# -- goal scores ---------------------------------------------------------------


def _enemy_adjacent(v: GameState, p: str, g: MapGraph, t: str) -> bool:
    for nb in g.neighbors(t):
        holder = v.owner.get(nb)
        if holder is not None and holder != p:
            return True
    return False


def _continents_present(g: MapGraph) -> list[str]:
    seen = []
    for t in g.territories:
        c = continent_of(t)
        if c not in seen:
            seen.append(c)
    return seen


def _controlled_continents(v: GameState, p: str, g: MapGraph) -> list[str]:
    on_map = set(g.territories)
    out = []
    for c in _continents_present(g):
        members = [t for t in territories_of(c) if t in on_map]
        if members and all(v.owner.get(t) == p for t in members):
            out.append(c)
    return out


def _border_of_continent(g: MapGraph, c: str) -> list[str]:
    on_map = set(g.territories)
    members = [t for t in territories_of(c) if t in on_map]
    return [t for t in members if any(continent_of(nb) != c for nb in g.neighbors(t))]


def goal_scores(
    v: GameState, p: str, g: MapGraph, max_enemies: int | None = None
) -> tuple[float, float, float, float, float, float]:
    """The six goal scores, each in [0, 1]. ``max_enemies`` defaults to the
    number of opposing seats in the roster."""
    owned = [t for t in g.territories if v.owner.get(t) == p]
    enemy_held = {t for t in g.territories if v.owner.get(t) not in (None, p)}

    # g1: of the territories that touch enemy ground and are not enemy-held
    # themselves (i.e. the player could hold them), how many does p hold?
    frontier = [t for t in g.territories if t not in enemy_held and _enemy_adjacent(v, p, g, t)]
    held_frontier = [t for t in frontier if v.owner.get(t) == p]
    g1 = len(held_frontier) / len(frontier) if frontier else 0.0

    # g2: share of the map controlled.
    g2 = len(owned) / len(g.territories)

    # g3: troop concentration — 1 minus mean pairwise normalized distance
    # over the territories where p has troops.
    occupied = [t for t in owned if v.troops.get(t, 0) > 0]
    if len(occupied) <= 1:
        g3 = 1.0
    else:
        dmax = diameter(g)
        total = 0
        for i, u in enumerate(occupied):
            du = g._bfs_from(u)
            for w in occupied[i + 1 :]:
                total += du[w]
        pairs = len(occupied) * (len(occupied) - 1) // 2
        g3 = 1.0 - (total / pairs) / dmax

    # g4: share of p's troops stationed next to the enemy.
    total_troops = sum(v.troops.get(t, 0) for t in owned)
    frontline_troops = sum(v.troops.get(t, 0) for t in owned if _enemy_adjacent(v, p, g, t))
    g4 = frontline_troops / total_troops if total_troops else 0.0

    # g5: on fully controlled continents, share of troops sitting on the border.
    controlled = _controlled_continents(v, p, g)
    cont_troops = sum(v.troops.get(t, 0) for c in controlled for t in territories_of(c) if t in set(g.territories))
    border_troops = sum(v.troops.get(t, 0) for c in controlled for t in _border_of_continent(g, c))
    g5 = border_troops / cont_troops if cont_troops else 0.0

    # g6: exposure — fewer distinct enemy players on the border is better.
    adjacent_enemies = set()
    for t in owned:
        for nb in g.neighbors(t):
            holder = v.owner.get(nb)
            if holder is not None and holder != p:
                adjacent_enemies.add(holder)
    if max_enemies is None:
        max_enemies = max(1, len(v.players) - 1)
    g6 = max(0.0, 1.0 - len(adjacent_enemies) / max_enemies)

    return (g1, g2, g3, g4, g5, g6)


# -- violation flags -----------------------------------------------------------


def violation_flags(
    v: GameState, p: str, params: ConstraintSpecParams, g: MapGraph
) -> tuple[bool, bool, bool, bool, bool, bool, bool, bool, bool]:
    """Nine binary violation indicators; inactive predicates report False."""
    on_map = set(g.territories)
    owned = [t for t in g.territories if v.owner.get(t) == p]
    troops_on = lambda c: sum(v.troops.get(t, 0) for t in territories_of(c) if t in on_map and v.owner.get(t) == p)
    touched = {continent_of(t) for t in owned if v.troops.get(t, 0) > 0}

    # c1: a required continent carries no troops of p.
    c1 = any(troops_on(c) == 0 for c in params.required_continents)
    # c2: a forbidden continent carries troops of p.
    c2 = any(troops_on(c) > 0 for c in params.forbidden_continents)
    # c3: a reach-target continent is neither occupied nor one directed move away.
    c3 = False
    for target in params.reach_targets:
        if target in touched:
            continue
        reachable = any(
            continent_of(dst) == target
            for src in owned
            if v.troops.get(src, 0) > 0
            for dst in g.neighbors_out(src)
        )
        if not reachable:
            c3 = True
            break
    # c4: some border territory of a continent under defense orders is not
    # held by p (with at least one troop).
    c4 = any(
        any(v.owner.get(t) != p or v.troops.get(t, 0) < 1 for t in _border_of_continent(g, c))
        for c, _ in params.defend_continents
    )
    # c5: a continent under defense orders holds fewer troops than ordered.
    c5 = any(troops_on(c) < need for c, need in params.defend_continents)
    # c6: fewer countries than required.
    c6 = params.min_countries is not None and len(owned) < params.min_countries
    # c7: troops spread over fewer continents than required.
    c7 = params.min_continents is not None and len(touched) < params.min_continents
    # c8: some owned country is garrisoned below the required minimum.
    c8 = params.min_troops_per_country is not None and any(
        v.troops.get(t, 0) < params.min_troops_per_country for t in owned
    )
    # c9: troops spread over more continents than allowed.
    c9 = params.max_continents is not None and len(touched) > params.max_continents
    return (c1, c2, c3, c4, c5, c6, c7, c8, c9)


def fitness(
    v: GameState,
    p: str,
    g: MapGraph,
    weights: FitnessWeights = FitnessWeights(),
    params: ConstraintSpecParams = EMPTY_PARAMS,
) -> float:
    goals = goal_scores(v, p, g)
    flags = violation_flags(v, p, params, g)
    return sum(w * gi for w, gi in zip(weights.w, goals)) - weights.penalty_lambda * sum(flags)


def goals_only_fitness(
    v: GameState, p: str, g: MapGraph, weights: FitnessWeights = FitnessWeights()
) -> float:
    return sum(w * gi for w, gi in zip(weights.w, goal_scores(v, p, g)))


# -- reward shaping --------------------------------------------------------------


def step_reward(satisfied: bool, f_value: float) -> float:
    """r = 1{constraint satisfied} + F."""
    return (1.0 if satisfied else 0.0) + f_value


def discounted_return(rewards: list[float], gamma: float) -> float:
    total = 0.0
    factor = 1.0
    for r in rewards:
        total += factor * r
        factor *= gamma
    return total


# -- deriving violation parameters from constraint sequences ---------------------


def params_for_constraint(c: TroopConstraint) -> ConstraintSpecParams:
    """Fixed mapping from one troop constraint to violation parameters:
    placement/reinforcement targets make their continent required; attack and
    move targets make their continent a reach target."""
    if isinstance(c, (PlaceTroops, ReinforceTerritory)):
        return ConstraintSpecParams(required_continents=frozenset({continent_of(c.territory)}))
    if isinstance(c, (AttackTerritory, MoveTroops)):
        return ConstraintSpecParams(reach_targets=frozenset({continent_of(c.dst)}))
    raise TypeError(f"not a troop constraint: {c!r}")


def merge_params(items: list[ConstraintSpecParams]) -> ConstraintSpecParams:
    """Union the sets; take the tightest bound where integers conflict."""
    req: set[str] = set()
    forb: set[str] = set()
    reach: set[str] = set()
    defend: dict[str, int] = {}
    mins = {"min_countries": None, "min_continents": None, "min_troops_per_country": None}
    max_cont = None
    for it in items:
        req |= it.required_continents
        forb |= it.forbidden_continents
        reach |= it.reach_targets
        for c, n in it.defend_continents:
            defend[c] = max(defend.get(c, 0), n)
        for name in mins:
            val = getattr(it, name)
            if val is not None:
                mins[name] = val if mins[name] is None else max(mins[name], val)
        if it.max_continents is not None:
            max_cont = it.max_continents if max_cont is None else min(max_cont, it.max_continents)
    return ConstraintSpecParams(
        required_continents=frozenset(req),
        forbidden_continents=frozenset(forb),
        reach_targets=frozenset(reach),
        defend_continents=tuple(sorted(defend.items())),
        max_continents=max_cont,
        **mins,
    )


def params_from_constraints(constraints: list[TroopConstraint]) -> ConstraintSpecParams:
    return merge_params([params_for_constraint(c) for c in constraints])
