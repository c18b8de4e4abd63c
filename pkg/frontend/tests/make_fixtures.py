"""Regenerate the frontend test fixtures from the real service and engine.

Run from the repository root with the Python package installed:

    python3 frontend/tests/make_fixtures.py

Every payload the UI tests render is captured verbatim from server
responses (or from the engine's own serialization for the phase-control
states), so the snapshots track the true wire format.
"""

from __future__ import annotations

import json
import tempfile
from pathlib import Path

from fastapi.testclient import TestClient

from cgplan.engine import GameState, Phase, legal_actions
from cgplan.gateway import LmGateway, MockProvider
from cgplan.riskmap import build_default_map
from cgplan.service import ServiceConfig, create_app

FIXTURES = Path(__file__).parent / "fixtures"

ROWS = [
    {
        "step_id": 1,
        "intent": "Build up position number 1 as planned",
        "constraint": "Place '7' troops on Country 'Red_B'",
        "placement": ["Red_B", 7],
    },
    {
        "step_id": 2,
        "intent": "Build up position number 2 as planned",
        "constraint": "Place '7' troops on Country 'Red_C'",
        "placement": ["Red_C", 7],
    },
]

SCRIPT = {"RiskExtract": "Here is the plan.\n" + json.dumps(ROWS, indent=1)}


def write(name: str, doc) -> None:
    path = FIXTURES / name
    path.write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n", encoding="utf-8")
    print(f"wrote {path}")


def session_fixtures() -> None:
    with tempfile.TemporaryDirectory() as tmp:
        app = create_app(ServiceConfig(sessions_dir=tmp), LmGateway(MockProvider(SCRIPT)))
        client = TestClient(app)
        created = client.post("/sessions", json={"mode": "Aligned", "seed": 0})
        created.raise_for_status()
        sid = created.json()["session_id"]
        write("initial_state.json", created.json()["state"])
        proposal = client.post(
            f"/sessions/{sid}/intent",
            json={"strategy_text": "Take and hold the red continent"},
        )
        proposal.raise_for_status()
        write("proposal.json", proposal.json())
        accepted = client.post(f"/sessions/{sid}/plan/accept")
        accepted.raise_for_status()
        write("post_accept_state.json", accepted.json()["state"])


def control_fixtures() -> None:
    g = build_default_map()

    def snap(name: str, state: GameState) -> None:
        write(name, {"state": state.to_json(), "actions": [a.to_json() for a in legal_actions(state, g)]})

    two_sided = dict(
        owner={"Red_A": "White", "Yellow_A": "Black"},
        troops={"Red_A": 3, "Yellow_A": 2},
        reserve={"White": 0, "Black": 0},
        current_player="White",
    )
    snap(
        "controls_reinforce.json",
        GameState(phase=Phase.REINFORCE, **{**two_sided, "reserve": {"White": 3, "Black": 0}}),
    )
    snap(
        "controls_attack.json",
        GameState(
            phase=Phase.ATTACK,
            owner={"Red_A": "White", "Red_B": "White", "Red_C": "Black"},
            troops={"Red_A": 3, "Red_B": 5, "Red_C": 2},
            reserve={"White": 0, "Black": 0},
            current_player="White",
        ),
    )
    # Attack phase where nothing is in reach: only ending the phase is legal.
    snap("controls_attack_empty.json", GameState(phase=Phase.ATTACK, **two_sided))
    # Freemove with a single owned territory: nothing to shuffle.
    snap("controls_freemove_single.json", GameState(phase=Phase.FREEMOVE, **two_sided))


def main() -> None:
    FIXTURES.mkdir(exist_ok=True)
    session_fixtures()
    control_fixtures()


if __name__ == "__main__":
    main()
