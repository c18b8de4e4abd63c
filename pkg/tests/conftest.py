"""Shared fixtures: the default board, small boards for exhaustive tests,
canned game states, and scripted model gateways."""

from __future__ import annotations

import json
from dataclasses import replace
from pathlib import Path

import pytest

from cgplan.engine import GameState, Phase, new_game
from cgplan.gateway import LmGateway, MockProvider
from cgplan.riskmap import MapGraph, build_default_map

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def g() -> MapGraph:
    return build_default_map()


def subboard(g: MapGraph, keep: set[str]) -> MapGraph:
    """Induced subgraph of the default board over ``keep``."""
    return MapGraph(
        territories=tuple(t for t in g.territories if t in keep),
        intra_edges=tuple((u, v) for u, v in g.intra_edges if u in keep and v in keep),
        inter_edges=tuple((u, v) for u, v in g.inter_edges if u in keep and v in keep),
    )


@pytest.fixture(scope="session")
def red_yellow_board(g) -> MapGraph:
    """Seven connected territories spanning two continents."""
    return subboard(g, {"Red_A", "Red_B", "Red_C", "Yellow_A", "Yellow_B", "Yellow_C", "Yellow_D"})


@pytest.fixture
def empty_state() -> GameState:
    return new_game(seed=0)


@pytest.fixture
def small_state() -> GameState:
    """Full board, but a 3-troop reserve so enumeration stays tiny."""
    return new_game(initial_reserve=3, seed=0)


def state_on(g: MapGraph, owner: dict, troops: dict, phase=Phase.INITIAL_PLACEMENT,
             current="White", reserve=None, seed=0) -> GameState:
    """A hand-authored position on ``g`` (unlisted territories unowned)."""
    full_owner = {t: owner.get(t) for t in g.territories}
    full_troops = {t: troops.get(t, 0) for t in g.territories}
    return GameState(
        owner=full_owner,
        troops=full_troops,
        phase=phase,
        current_player=current,
        reserve=reserve or {"White": 0, "Black": 0, "Grey": 0},
        turn=0 if phase == Phase.INITIAL_PLACEMENT else 1,
        rng_seed=seed,
    )


def mock_gateway(script: dict) -> LmGateway:
    return LmGateway(MockProvider(script))


def extraction_reply(rows: list[dict]) -> str:
    """A scripted extraction response wrapping the given step rows."""
    return "Here is the plan.\n" + json.dumps(rows, indent=1)


def risk_rows(*placements: tuple[str, int], start_id: int = 1) -> list[dict]:
    """Extraction rows that place ``n`` troops on each named territory."""
    rows = []
    for i, (terr, n) in enumerate(placements, start=start_id):
        rows.append(
            {
                "step_id": i,
                "intent": f"Build up position number {i} as planned",
                "constraint": f"Place '{n}' troops on Country '{terr}'",
                "placement": [terr, n],
            }
        )
    return rows
