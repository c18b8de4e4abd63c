"""Turn-based Risk state machine.

States are immutable values; ``apply`` returns a successor. Combat is one
dice round per Attack action, resolved from the state's seed so a replayed
action sequence reproduces the same final state bit for bit.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field, replace
from enum import Enum

from .errors import IllegalAction
from .riskmap import ALL_TERRITORIES, MapGraph, continent_of, territories_of

WHITE = "White"
BLACK = "Black"
GREY = "Grey"

# Canonical seating order; turn rotation follows this order filtered to the roster.
PLAYER_ORDER = (WHITE, BLACK, GREY)

DEFAULT_INITIAL_RESERVE = 14

# Bonus armies for holding a full continent. The custom map publishes no
# table, so these scale with continent size and stay configurable.
DEFAULT_CONTINENT_BONUS = {"Red": 2, "Green": 3, "Purple": 3, "Yellow": 2, "Blue": 2}


class Phase(str, Enum):
    INITIAL_PLACEMENT = "InitialPlacement"
    REINFORCE = "Reinforce"
    ATTACK = "Attack"
    FREEMOVE = "Freemove"


@dataclass(frozen=True)
class Action:
    """One game action. ``kind`` selects the variant; unused fields are None.

    Variants: place (territory, n), attack (from/to, n committed troops),
    move (from/to, n), reinforce (territory, n), end_phase.
    """

    kind: str
    territory: str | None = None
    src: str | None = None
    dst: str | None = None
    n: int = 0

    @staticmethod
    def place(territory: str, n: int) -> "Action":
        return Action("place", territory=territory, n=n)

    @staticmethod
    def attack(src: str, dst: str, n: int) -> "Action":
        return Action("attack", src=src, dst=dst, n=n)

    @staticmethod
    def move(src: str, dst: str, n: int) -> "Action":
        return Action("move", src=src, dst=dst, n=n)

    @staticmethod
    def reinforce(territory: str, n: int) -> "Action":
        return Action("reinforce", territory=territory, n=n)

    @staticmethod
    def end_phase() -> "Action":
        return Action("end_phase")

    def key(self) -> str:
        """Canonical serialization; doubles as the deterministic sort key."""
        if self.kind == "place":
            return f"place:{self.territory}:{self.n}"
        if self.kind == "attack":
            return f"attack:{self.src}>{self.dst}:{self.n}"
        if self.kind == "move":
            return f"move:{self.src}>{self.dst}:{self.n}"
        if self.kind == "reinforce":
            return f"reinforce:{self.territory}:{self.n}"
        return "end_phase"

    def to_json(self) -> dict:
        d: dict = {"kind": self.kind}
        if self.territory is not None:
            d["territory"] = self.territory
        if self.src is not None:
            d["from"] = self.src
        if self.dst is not None:
            d["to"] = self.dst
        if self.kind != "end_phase":
            d["n"] = self.n
        return d

    @staticmethod
    def from_json(d: dict) -> "Action":
        return Action(
            kind=d["kind"],
            territory=d.get("territory"),
            src=d.get("from"),
            dst=d.get("to"),
            n=int(d.get("n", 0)),
        )


@dataclass(frozen=True)
class GameState:
    """Full game snapshot. Fully observed; troops[t] > 0 iff t is owned."""

    owner: dict[str, str | None]
    troops: dict[str, int]
    phase: Phase
    current_player: str
    reserve: dict[str, int]
    turn: int = 0
    rng_seed: int = 0

    @property
    def players(self) -> tuple[str, ...]:
        roster = set(self.reserve)
        ordered = [p for p in PLAYER_ORDER if p in roster]
        ordered += sorted(roster - set(PLAYER_ORDER))
        return tuple(ordered)

    def owned_by(self, player: str) -> tuple[str, ...]:
        return tuple(t for t in ALL_TERRITORIES if self.owner.get(t) == player)

    def active_players(self) -> tuple[str, ...]:
        """Players still placing or still holding at least one territory."""
        return tuple(
            p
            for p in self.players
            if (self.phase == Phase.INITIAL_PLACEMENT and self.reserve.get(p, 0) > 0)
            or any(o == p for o in self.owner.values())
        )

    def to_json(self) -> dict:
        return {
            "owner": {t: self.owner.get(t) for t in ALL_TERRITORIES},
            "troops": {t: self.troops.get(t, 0) for t in ALL_TERRITORIES},
            "phase": self.phase.value,
            "current_player": self.current_player,
            "reserve": {p: self.reserve[p] for p in self.players},
            "turn": self.turn,
            "rng_seed": self.rng_seed,
        }

    @staticmethod
    def from_json(d: dict) -> "GameState":
        owner = {t: d["owner"].get(t) for t in ALL_TERRITORIES}
        troops = {t: int(d["troops"].get(t, 0)) for t in ALL_TERRITORIES}
        return GameState(
            owner=owner,
            troops=troops,
            phase=Phase(d["phase"]),
            current_player=d["current_player"],
            reserve={p: int(n) for p, n in d["reserve"].items()},
            turn=int(d.get("turn", 0)),
            rng_seed=int(d.get("rng_seed", 0)),
        )


@dataclass
class HistoryTrajectory:
    """Append-only log of (observation snapshot, action) pairs."""

    steps: list[tuple[dict, dict]] = field(default_factory=list)

    def append(self, state: GameState, action: Action) -> None:
        self.steps.append((state.to_json(), action.to_json()))

    def __len__(self) -> int:
        return len(self.steps)

    def to_json(self) -> list:
        return [{"observation": obs, "action": act} for obs, act in self.steps]

    @staticmethod
    def from_json(items: list) -> "HistoryTrajectory":
        h = HistoryTrajectory()
        h.steps = [(item["observation"], item["action"]) for item in items]
        return h


def new_game(
    players: tuple[str, ...] = PLAYER_ORDER,
    initial_reserve: int = DEFAULT_INITIAL_RESERVE,
    seed: int = 0,
) -> GameState:
    """Empty board, everyone holding their initial reserve, first player to act."""
    return GameState(
        owner={t: None for t in ALL_TERRITORIES},
        troops={t: 0 for t in ALL_TERRITORIES},
        phase=Phase.INITIAL_PLACEMENT,
        current_player=players[0],
        reserve={p: initial_reserve for p in players},
        turn=0,
        rng_seed=seed,
    )


def is_terminal(s: GameState) -> bool:
    """True once at most one player still holds territory (placement done)."""
    if s.phase == Phase.INITIAL_PLACEMENT:
        return False
    holders = {o for o in s.owner.values() if o is not None}
    return len(holders) <= 1


def legal_actions(s: GameState, g: MapGraph) -> list[Action]:
    """Every action the current player may take, EndPhase included where the
    phase permits. Empty only at terminal states."""
    if is_terminal(s):
        return []
    p = s.current_player
    out: list[Action] = []
    if s.phase == Phase.INITIAL_PLACEMENT:
        reserve = s.reserve.get(p, 0)
        open_territories = [t for t in g.territories if s.owner.get(t) is None]
        for t in open_territories:
            for n in range(1, reserve + 1):
                out.append(Action.place(t, n))
        # Placement must exhaust the reserve; EndPhase opens up only when
        # nothing more can be placed.
        if reserve == 0 or not open_territories:
            out.append(Action.end_phase())
        return out
    if s.phase == Phase.REINFORCE:
        reserve = s.reserve.get(p, 0)
        for t in s.owned_by(p):
            for n in range(1, reserve + 1):
                out.append(Action.reinforce(t, n))
        if reserve == 0:
            out.append(Action.end_phase())
        return out
    if s.phase == Phase.ATTACK:
        for src in s.owned_by(p):
            if s.troops[src] < 2:
                continue
            for dst in g.neighbors_out(src):
                holder = s.owner.get(dst)
                if holder is None or holder == p:
                    continue
                for n in range(1, s.troops[src]):
                    out.append(Action.attack(src, dst, n))
        out.append(Action.end_phase())
        return out
    # Freemove: shuffle troops between own connected territories.
    for src in s.owned_by(p):
        if s.troops[src] < 2:
            continue
        for dst in g.neighbors_out(src):
            if s.owner.get(dst) == p:
                for n in range(1, s.troops[src]):
                    out.append(Action.move(src, dst, n))
    out.append(Action.end_phase())
    return out


def is_legal(s: GameState, a: Action, g: MapGraph) -> bool:
    p = s.current_player
    if is_terminal(s):
        return False
    if a.kind == "end_phase":
        if s.phase in (Phase.INITIAL_PLACEMENT, Phase.REINFORCE):
            no_room = s.phase == Phase.INITIAL_PLACEMENT and all(
                s.owner.get(t) is not None for t in g.territories
            )
            return s.reserve.get(p, 0) == 0 or no_room
        return True
    if a.n < 1:
        return False
    if a.kind == "place":
        return (
            s.phase == Phase.INITIAL_PLACEMENT
            and a.territory in s.owner
            and s.owner[a.territory] is None
            and a.n <= s.reserve.get(p, 0)
        )
    if a.kind == "reinforce":
        return (
            s.phase == Phase.REINFORCE
            and s.owner.get(a.territory) == p
            and a.n <= s.reserve.get(p, 0)
        )
    if a.kind == "attack":
        return (
            s.phase == Phase.ATTACK
            and s.owner.get(a.src) == p
            and s.troops.get(a.src, 0) >= 2
            and a.n <= s.troops[a.src] - 1
            and g.has_directed_edge(a.src, a.dst)
            and s.owner.get(a.dst) not in (None, p)
        )
    if a.kind == "move":
        return (
            s.phase == Phase.FREEMOVE
            and s.owner.get(a.src) == p
            and s.owner.get(a.dst) == p
            and s.troops.get(a.src, 0) >= 2
            and a.n <= s.troops[a.src] - 1
            and g.has_directed_edge(a.src, a.dst)
        )
    return False


def resolve_combat(attacker_troops: int, defender_troops: int, rng: random.Random) -> tuple[int, int]:
    """One combat round. Attacker rolls min(n, 3) dice, defender min(m, 2);
    dice are drawn attacker-first (part of the replay contract), sorted
    descending, compared pairwise, ties to the defender.

    Returns (attacker_losses, defender_losses).
    """
    a_dice = sorted((rng.randint(1, 6) for _ in range(min(attacker_troops, 3))), reverse=True)
    d_dice = sorted((rng.randint(1, 6) for _ in range(min(defender_troops, 2))), reverse=True)
    a_loss = d_loss = 0
    for a, d in zip(a_dice, d_dice):
        if a > d:
            d_loss += 1
        else:
            a_loss += 1
    return a_loss, d_loss


def reinforcement_allowance(
    s: GameState,
    p: str,
    bonus: dict[str, int] | None = None,
) -> int:
    """floor(owned/3) with a minimum of 3, plus bonuses for full continents.
    Zero for an eliminated player."""
    bonus = DEFAULT_CONTINENT_BONUS if bonus is None else bonus
    owned = s.owned_by(p)
    if not owned:
        return 0
    allowance = max(3, len(owned) // 3)
    owned_set = set(owned)
    for cont in ("Red", "Green", "Purple", "Yellow", "Blue"):
        if set(territories_of(cont)) <= owned_set:
            allowance += bonus.get(cont, 0)
    return allowance


def _next_player(s: GameState) -> str:
    order = [p for p in s.players if p in set(s.active_players())]
    if s.current_player not in order:
        order = list(s.players)
    idx = order.index(s.current_player)
    return order[(idx + 1) % len(order)]


def _advance_phase(s: GameState, bonus: dict[str, int] | None = None) -> GameState:
    if s.phase == Phase.INITIAL_PLACEMENT:
        nxt = _next_player(s)
        order = s.players
        if order.index(nxt) <= order.index(s.current_player):
            # Everyone has placed; the real turns begin.
            first = next(p for p in order if any(o == p for o in s.owner.values()))
            reserve = dict(s.reserve)
            reserve[first] = reinforcement_allowance(s, first, bonus)
            return replace(s, phase=Phase.REINFORCE, current_player=first, reserve=reserve, turn=1)
        return replace(s, current_player=nxt)
    if s.phase == Phase.REINFORCE:
        return replace(s, phase=Phase.ATTACK)
    if s.phase == Phase.ATTACK:
        return replace(s, phase=Phase.FREEMOVE)
    # Freemove ends the turn.
    nxt = _next_player(s)
    order = s.players
    turn = s.turn + (1 if order.index(nxt) <= order.index(s.current_player) else 0)
    reserve = dict(s.reserve)
    reserve[nxt] = reserve.get(nxt, 0) + reinforcement_allowance(s, nxt, bonus)
    return replace(s, phase=Phase.REINFORCE, current_player=nxt, reserve=reserve, turn=turn)


def apply(s: GameState, a: Action, g: MapGraph, bonus: dict[str, int] | None = None) -> GameState:
    """Successor state for a legal action; raises IllegalAction otherwise."""
    if not is_legal(s, a, g):
        raise IllegalAction(f"{a.key()} is not legal in phase {s.phase.value} for {s.current_player}")
    p = s.current_player
    if a.kind == "end_phase":
        return _advance_phase(s, bonus)
    owner = dict(s.owner)
    troops = dict(s.troops)
    reserve = dict(s.reserve)
    if a.kind == "place":
        owner[a.territory] = p
        troops[a.territory] = a.n
        reserve[p] -= a.n
        return replace(s, owner=owner, troops=troops, reserve=reserve)
    if a.kind == "reinforce":
        troops[a.territory] += a.n
        reserve[p] -= a.n
        return replace(s, owner=owner, troops=troops, reserve=reserve)
    if a.kind == "move":
        troops[a.src] -= a.n
        troops[a.dst] += a.n
        return replace(s, owner=owner, troops=troops)
    # Attack: one seeded combat round; capture on defender wipe-out.
    rng = random.Random(s.rng_seed)
    a_loss, d_loss = resolve_combat(a.n, troops[a.dst], rng)
    next_seed = rng.getrandbits(63)
    troops[a.src] -= a_loss
    troops[a.dst] -= d_loss
    if troops[a.dst] == 0:
        survivors = a.n - a_loss
        owner[a.dst] = p
        troops[a.dst] = survivors
        troops[a.src] -= survivors
    return replace(s, owner=owner, troops=troops, rng_seed=next_seed)


def apply_sequence(s: GameState, actions: list[Action], g: MapGraph) -> GameState:
    for a in actions:
        s = apply(s, a, g)
    return s


# -- scripted opponents -----------------------------------------------------


def _border_territories(s: GameState, p: str, g: MapGraph) -> list[str]:
    """Owned territories adjacent (undirected) to an enemy-held territory."""
    borders = []
    for t in s.owned_by(p):
        for nb in g.neighbors(t):
            holder = s.owner.get(nb)
            if holder is not None and holder != p:
                borders.append(t)
                break
    return borders


def _weakest(territories: list[str], troops: dict[str, int]) -> str:
    return min(territories, key=lambda t: (troops.get(t, 0), t))


def _initial_placement_actions(s: GameState, p: str, g: MapGraph) -> list[Action]:
    reserve = s.reserve.get(p, 0)
    open_territories = [t for t in g.territories if s.owner.get(t) is None]
    if not open_territories or reserve == 0:
        return [Action.end_phase()]
    # Claim the continent with the most open ground, spreading troops evenly.
    by_cont: dict[str, list[str]] = {}
    for t in open_territories:
        by_cont.setdefault(continent_of(t), []).append(t)
    cont = max(by_cont, key=lambda c: (len(by_cont[c]), c))
    targets = sorted(by_cont[cont])[: min(3, len(by_cont[cont]))]
    base, extra = divmod(reserve, len(targets))
    actions = []
    for i, t in enumerate(targets):
        n = base + (1 if i < extra else 0)
        if n > 0:
            actions.append(Action.place(t, n))
    actions.append(Action.end_phase())
    return actions


def heuristic_opponent_turn(s: GameState, p: str, g: MapGraph) -> list[Action]:
    """Scripted full turn for an AI seat, deterministic given the state seed.

    Reinforces the weakest border, attacks only with a 2:1 local advantage,
    and freemoves surplus interior troops toward the weakest border. The
    list is built against a simulated copy, so replaying it on ``s`` is
    legal step by step.
    """
    if s.current_player != p:
        raise IllegalAction(f"not {p}'s turn")
    if s.phase == Phase.INITIAL_PLACEMENT:
        return _initial_placement_actions(s, p, g)

    actions: list[Action] = []
    sim = s

    def push(a: Action):
        nonlocal sim
        actions.append(a)
        sim = apply(sim, a, g)

    if sim.phase == Phase.REINFORCE:
        reserve = sim.reserve.get(p, 0)
        if reserve > 0:
            owned = list(sim.owned_by(p))
            if owned:
                borders = _border_territories(sim, p, g) or owned
                push(Action.reinforce(_weakest(borders, sim.troops), reserve))
        push(Action.end_phase())

    if sim.phase == Phase.ATTACK and not is_terminal(sim):
        while True:
            options = []
            for src in sim.owned_by(p):
                avail = sim.troops[src] - 1
                if avail < 1:
                    continue
                for dst in g.neighbors_out(src):
                    holder = sim.owner.get(dst)
                    if holder is None or holder == p:
                        continue
                    if avail >= 2 * sim.troops[dst]:
                        options.append(Action.attack(src, dst, min(avail, 3)))
            if not options:
                break
            push(min(options, key=lambda a: a.key()))
            if is_terminal(sim):
                return actions
        push(Action.end_phase())

    if sim.phase == Phase.FREEMOVE and not is_terminal(sim):
        borders = set(_border_territories(sim, p, g))
        interior = [t for t in sim.owned_by(p) if t not in borders and sim.troops[t] >= 2]
        if interior and borders:
            src = max(interior, key=lambda t: (sim.troops[t], t))
            target = _weakest(sorted(borders), sim.troops)
            step = _first_step_toward(sim, p, g, src, target)
            if step is not None:
                push(Action.move(src, step, sim.troops[src] - 1))
        push(Action.end_phase())
    return actions


def _first_step_toward(s: GameState, p: str, g: MapGraph, src: str, target: str) -> str | None:
    """First hop of a shortest directed path from src to target through owned
    territory; None when no such path exists."""
    if src == target:
        return None
    parent: dict[str, str] = {src: src}
    queue = deque([src])
    while queue:
        u = queue.popleft()
        for w in g.neighbors_out(u):
            if w in parent or s.owner.get(w) != p:
                continue
            parent[w] = u
            if w == target:
                node = w
                while parent[node] != src:
                    node = parent[node]
                return node
            queue.append(w)
    return None


def play_out_opponents(s: GameState, g: MapGraph, human: str = WHITE, max_turns: int = 200) -> GameState:
    """Advance scripted seats until it is the human's turn again (or terminal)."""
    guard = 0
    while not is_terminal(s) and s.current_player != human:
        for a in heuristic_opponent_turn(s, s.current_player, g):
            s = apply(s, a, g)
            if is_terminal(s):
                return s
        guard += 1
        if guard > max_turns:
            raise IllegalAction("opponent loop exceeded the turn guard")
    return s
