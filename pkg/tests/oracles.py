"""Independent reference implementations used only by tests.

Everything here is deliberately written from scratch in a different style
from the package (networkx for graph work, (numerator, denominator) integer
pairs for rationals, explicit enumeration for dice and deployments) so that
agreement between package and oracle is meaningful evidence.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction

import networkx as nx

from cgplan.engine import Action, GameState, apply as engine_apply
from cgplan.riskmap import MapGraph


def undirected_graph(g: MapGraph) -> nx.Graph:
    G = nx.Graph()
    G.add_nodes_from(g.territories)
    for u, v in list(g.intra_edges) + list(g.inter_edges):
        G.add_edge(u, v)
    return G


def oracle_distance(g: MapGraph, u: str, v: str) -> int:
    return nx.shortest_path_length(undirected_graph(g), u, v)


def oracle_diameter(g: MapGraph) -> int:
    return nx.diameter(undirected_graph(g))


def _continent(territory: str) -> str:
    return territory.split("_")[0]


def _directed_graph(g: MapGraph) -> nx.DiGraph:
    G = nx.DiGraph()
    G.add_nodes_from(g.territories)
    for u, v in g.intra_edges:
        G.add_edge(u, v)
        G.add_edge(v, u)
    for u, v in g.inter_edges:
        G.add_edge(u, v)
    return G


def oracle_goal_scores(v: GameState, p: str, g: MapGraph, max_enemies: int | None = None):
    """Reference computation of the six goal scores."""
    G = undirected_graph(g)
    terr = list(g.territories)
    owner = {t: v.owner.get(t) for t in terr}
    troops = {t: v.troops.get(t, 0) for t in terr}
    mine = [t for t in terr if owner[t] == p]
    enemy = [t for t in terr if owner[t] is not None and owner[t] != p]

    def touches_enemy(t):
        return any(nb in set(enemy) for nb in G.neighbors(t))

    candidates = [t for t in terr if t not in set(enemy) and touches_enemy(t)]
    g1 = (sum(1 for t in candidates if owner[t] == p) / len(candidates)) if candidates else 0.0

    g2 = len(mine) / len(terr)

    stationed = [t for t in mine if troops[t] > 0]
    if len(stationed) <= 1:
        g3 = 1.0
    else:
        dist_sum, n_pairs = 0, 0
        for a, b in itertools.combinations(stationed, 2):
            dist_sum += nx.shortest_path_length(G, a, b)
            n_pairs += 1
        g3 = 1.0 - (dist_sum / n_pairs) / nx.diameter(G)

    my_troops = sum(troops[t] for t in mine)
    front = sum(troops[t] for t in mine if touches_enemy(t))
    g4 = front / my_troops if my_troops else 0.0

    continents: dict[str, list[str]] = {}
    for t in terr:
        continents.setdefault(_continent(t), []).append(t)
    full = [c for c, ts in continents.items() if all(owner[t] == p for t in ts)]
    in_full = sum(troops[t] for c in full for t in continents[c])
    on_border = sum(
        troops[t]
        for c in full
        for t in continents[c]
        if any(_continent(nb) != c for nb in G.neighbors(t))
    )
    g5 = on_border / in_full if in_full else 0.0

    foes = set()
    for t in mine:
        for nb in G.neighbors(t):
            if owner[nb] is not None and owner[nb] != p:
                foes.add(owner[nb])
    if max_enemies is None:
        max_enemies = max(1, len(v.players) - 1)
    g6 = max(0.0, 1.0 - len(foes) / max_enemies)

    return (g1, g2, g3, g4, g5, g6)


def oracle_violation_flags(v: GameState, p: str, params, g: MapGraph):
    """Reference computation of the nine violation indicators."""
    G = undirected_graph(g)
    D = _directed_graph(g)
    terr = list(g.territories)
    owner = {t: v.owner.get(t) for t in terr}
    troops = {t: v.troops.get(t, 0) for t in terr}
    mine = [t for t in terr if owner[t] == p]
    continents: dict[str, list[str]] = {}
    for t in terr:
        continents.setdefault(_continent(t), []).append(t)

    def my_troops_on(c):
        return sum(troops[t] for t in continents.get(c, []) if owner[t] == p)

    spread = {_continent(t) for t in mine if troops[t] > 0}

    c1 = any(my_troops_on(c) == 0 for c in params.required_continents)
    c2 = any(my_troops_on(c) > 0 for c in params.forbidden_continents)

    c3 = False
    for want in params.reach_targets:
        if want in spread:
            continue
        one_step = False
        for src in mine:
            if troops[src] == 0:
                continue
            for dst in D.successors(src):
                if _continent(dst) == want:
                    one_step = True
        if not one_step:
            c3 = True

    c4 = False
    for c, _need in params.defend_continents:
        for t in continents.get(c, []):
            if any(_continent(nb) != c for nb in G.neighbors(t)):
                if owner[t] != p or troops[t] < 1:
                    c4 = True

    c5 = any(my_troops_on(c) < need for c, need in params.defend_continents)
    c6 = params.min_countries is not None and len(mine) < params.min_countries
    c7 = params.min_continents is not None and len(spread) < params.min_continents
    c8 = params.min_troops_per_country is not None and any(
        troops[t] < params.min_troops_per_country for t in mine
    )
    c9 = params.max_continents is not None and len(spread) > params.max_continents
    return (c1, c2, c3, c4, c5, c6, c7, c8, c9)


def oracle_fitness(v: GameState, p: str, g: MapGraph, weights, params) -> float:
    goals = oracle_goal_scores(v, p, g)
    flags = oracle_violation_flags(v, p, params, g)
    return sum(w * x for w, x in zip(weights.w, goals)) - weights.penalty_lambda * sum(flags)


# -- dice --------------------------------------------------------------------------


def combat_loss_distribution(n_attacker_dice: int, n_defender_dice: int) -> dict[tuple[int, int], Fraction]:
    """Exact distribution of (attacker losses, defender losses) for one
    round, enumerating every die outcome. Ties go to the defender."""
    out: dict[tuple[int, int], int] = {}
    total = 0
    for attack in itertools.product(range(1, 7), repeat=n_attacker_dice):
        for defend in itertools.product(range(1, 7), repeat=n_defender_dice):
            a_sorted = sorted(attack, reverse=True)
            d_sorted = sorted(defend, reverse=True)
            a_loss = d_loss = 0
            for a, d in zip(a_sorted, d_sorted):
                if a > d:
                    d_loss += 1
                else:
                    a_loss += 1
            out[(a_loss, d_loss)] = out.get((a_loss, d_loss), 0) + 1
            total += 1
    return {k: Fraction(n, total) for k, n in out.items()}


def combat_losses_for_rolls(attack_rolls: list[int], defend_rolls: list[int]) -> tuple[int, int]:
    a_sorted = sorted(attack_rolls, reverse=True)
    d_sorted = sorted(defend_rolls, reverse=True)
    a_loss = d_loss = 0
    for a, d in zip(a_sorted, d_sorted):
        if a > d:
            d_loss += 1
        else:
            a_loss += 1
    return a_loss, d_loss


# -- exact rationals ---------------------------------------------------------------


def rat(n: int, d: int = 1) -> tuple[int, int]:
    if d == 0:
        raise ZeroDivisionError
    if d < 0:
        n, d = -n, -d
    g = math.gcd(abs(n), d) or 1
    return (n // g, d // g)


def rat_add(a, b):
    return rat(a[0] * b[1] + b[0] * a[1], a[1] * b[1])


def rat_sub(a, b):
    return rat(a[0] * b[1] - b[0] * a[1], a[1] * b[1])


def rat_mul(a, b):
    return rat(a[0] * b[0], a[1] * b[1])


def rat_div(a, b):
    if b[0] == 0:
        raise ZeroDivisionError
    return rat(a[0] * b[1], a[1] * b[0])


def rat_eval(node, env: dict[str, tuple[int, int]]) -> tuple[int, int]:
    """Evaluate a package expression AST with big-integer pair arithmetic."""
    from cgplan.constraints import BinOp, Num, Var

    if isinstance(node, Num):
        return rat(node.value.numerator, node.value.denominator)
    if isinstance(node, Var):
        return env[node.name]
    if isinstance(node, BinOp):
        left = rat_eval(node.left, env)
        right = rat_eval(node.right, env)
        return {"+": rat_add, "-": rat_sub, "*": rat_mul, "/": rat_div}[node.op](left, right)
    raise TypeError(f"unexpected node {node!r}")


# -- brute-force planning -----------------------------------------------------------


def all_deployments(state: GameState, g: MapGraph):
    """Every unordered complete deployment of the mover's reserve."""
    player = state.current_player
    reserve = state.reserve.get(player, 0)
    open_terr = sorted(t for t in g.territories if state.owner.get(t) is None)
    results = []

    def walk(i, left, acc):
        if left == 0:
            results.append(tuple(acc))
            return
        if i == len(open_terr):
            return
        walk(i + 1, left, acc)
        for n in range(1, left + 1):
            acc.append((open_terr[i], n))
            walk(i + 1, left - n, acc)
            acc.pop()

    if reserve:
        walk(0, reserve, [])
    return results


def apply_placements(state: GameState, deployment, g: MapGraph) -> GameState:
    for t, n in deployment:
        state = engine_apply(state, Action.place(t, n), g)
    return state


def best_deployment_by_fitness(state: GameState, g: MapGraph, weights, params):
    """(best fitness, lexicographically-first argmax deployment) by exhaustive
    search, using the package's fitness function as the objective."""
    from cgplan.fitness import fitness

    player = state.current_player
    best_val, best_dep = None, None
    for dep in sorted(all_deployments(state, g)):
        val = fitness(apply_placements(state, dep, g), player, g, weights, params)
        if best_val is None or val > best_val:
            best_val, best_dep = val, dep
    return best_val, best_dep


def count_search_nodes(state: GameState, g: MapGraph) -> int:
    """Number of nodes in the full ordered placement tree (root included),
    counting the end-phase child under every completed deployment."""
    player = state.current_player

    def walk(s) -> int:
        if s.current_player != player:
            return 1
        reserve = s.reserve.get(player, 0)
        if reserve == 0:
            return 2  # this node plus its single end-phase child
        total = 1
        open_terr = [t for t in g.territories if s.owner.get(t) is None]
        for t in open_terr:
            for n in range(1, reserve + 1):
                total += walk(engine_apply(s, Action.place(t, n), g))
        return total

    return walk(state)


def naive_max_feasible_subset(params_list, state: GameState, g: MapGraph):
    """Reference for the two-stage baseline: largest constraint subset with a
    nonempty feasible deployment set, earliest-kept subset at equal size."""
    from cgplan.fitness import violation_flags

    deployments = all_deployments(state, g)
    player = state.current_player

    def feasible_under(kept):
        out = []
        for dep in deployments:
            end = apply_placements(state, dep, g)
            if all(not any(violation_flags(end, player, params_list[i], g)) for i in kept):
                out.append(dep)
        return out

    for size in range(len(params_list), -1, -1):
        for kept in itertools.combinations(range(len(params_list)), size):
            found = feasible_under(kept)
            if found:
                return list(kept), found
    return [], []
