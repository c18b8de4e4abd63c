"""Walk one interactive planning session end to end, fully offline.

Spins up the HTTP service in-process with a scripted model, creates a
session, submits a strategy, prints the proposed plan as intent/constraint
step cards, accepts it, and shows the board after the opponents reply.

Usage:
    python3 scripts/demo_session.py [--mode Aligned] [--seed 0]
        [--strategy "Take and hold the red continent"]
"""

import argparse
import json
import sys

from fastapi.testclient import TestClient

from cgplan.gateway import LmGateway, MockProvider
from cgplan.service import ServiceConfig, create_app

DEFAULT_STRATEGY = "Take and hold the red continent"
DEFAULT_ROWS = [
    {"step_id": 1, "intent": "anchor the forward red province", "constraint": "Place '7' troops on Country 'Red_B'"},
    {"step_id": 2, "intent": "lock the second red approach", "constraint": "Place '7' troops on Country 'Red_C'"},
]


def board_lines(state: dict) -> list[str]:
    owner, troops = state["owner"], state["troops"]
    held = [(t, owner[t], troops[t]) for t in sorted(owner) if owner[t] is not None]
    lines = [f"  phase={state['phase']}  to-move={state['current_player']}  reserve={state['reserve']}"]
    if held:
        lines += [f"    {t:<10} {p:<6} {n:>2} troops" for t, p, n in held]
    else:
        lines.append("    (the whole map is unclaimed)")
    return lines


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--mode", default="Aligned", choices=["Aligned", "Agnostic", "Adversarial"])
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--strategy", default=DEFAULT_STRATEGY)
    parser.add_argument("--sessions-dir", default="demo_sessions")
    args = parser.parse_args(argv)

    script = {"RiskExtract": "Here is the plan.\n" + json.dumps(DEFAULT_ROWS, indent=1)}
    client = TestClient(create_app(ServiceConfig(sessions_dir=args.sessions_dir), LmGateway(MockProvider(script))))

    r = client.post("/sessions", json={"mode": args.mode, "seed": args.seed})
    r.raise_for_status()
    sid = r.json()["session_id"]
    print(f"session {sid} ({args.mode}, seed {args.seed})")
    print("\n".join(board_lines(client.get(f"/sessions/{sid}").json()["state"])))

    strategy = args.strategy if args.mode != "Agnostic" else ""
    print(f'\nsubmitting intent: "{strategy or "(none — free planning)"}"')
    r = client.post(f"/sessions/{sid}/intent", json={"strategy_text": strategy})
    r.raise_for_status()
    proposal = r.json()
    telemetry = proposal["telemetry"]
    print(
        f"plan ready: {len(proposal['steps'])} steps, {telemetry['rollouts']} rollouts, "
        f"constraint filter {'on' if telemetry['constraint_filter'] else 'off'}"
    )
    print(f"fitness {proposal['fitness_before']:+.3f} -> {proposal['fitness_after']:+.3f}")
    for step in proposal["steps"]:
        action = step["action"]
        target = action.get("territory") or action.get("to") or ""
        troops = f" x{action['n']}" if "n" in action else ""
        print(f"  [{step['step_id']}] {action['kind']} {target}{troops}")
        print(f"      intent:     {step['intent'] or '(free search)'}")
        print(f"      constraint: {step['constraint'] or '(none)'}")

    r = client.post(f"/sessions/{sid}/plan/accept")
    r.raise_for_status()
    print("\nplan accepted; opponents have replied:")
    body = client.get(f"/sessions/{sid}").json()
    print("\n".join(board_lines(body["state"])))
    history = client.get(f"/sessions/{sid}/history").json()
    kinds = [h["action"]["kind"] for h in history["steps"]]
    print(f"\n{len(kinds)} moves so far: {', '.join(kinds)}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
