"""Measure how constraint filtering narrows the search frontier.

Generates placement strategies with scripted candidate proposals (one
on-target action plus decoys per step), then runs each strategy twice under
identical budgets: once with the constraint filter on, once off. Prints the
per-depth mean branching factor for both runs.

Usage:
    python3 scripts/branching_study.py --n 20 --seed 7 [--out branching.json]
"""

import argparse
import json
import random
import statistics
import sys

from cgplan.constraints import ConstraintSequence, IntentConstraintPair, parse_constraint
from cgplan.engine import new_game
from cgplan.gateway import LmGateway, MockProvider
from cgplan.riskmap import build_default_map
from cgplan.search import RiskDomain, SearchConfig, cg_mcts


def make_strategy(rng: random.Random, territories: list[str], index: int) -> dict:
    k = 2 + index % 3
    targets = rng.sample(territories, k)
    steps = []
    for t in targets:
        n = rng.randint(1, 3)
        decoys = rng.sample([x for x in territories if x not in targets], 4)
        steps.append(
            {
                "constraint": f"Place '{n}' troops on Country '{t}'",
                "proposals": [f"place:{t}:{n}"] + [f"place:{d}:1" for d in decoys],
            }
        )
    return {
        "name": f"strategy-{index:02d}",
        "strategy": "Garrison " + ", ".join(targets) + " in that order and hold the line",
        "steps": steps,
    }


def run_pair(entry: dict, g) -> dict[str, dict[int, list[int]]]:
    by_constraint = {s["constraint"]: s["proposals"] for s in entry["steps"]}

    def propose(req, prompt):
        keys = by_constraint[req.variables["constraint"]]
        return json.dumps({"proposals": [{"action": k, "logprob": -0.5} for k in keys]})

    pairs = tuple(
        IntentConstraintPair(i + 1, f"step {i + 1}", s["constraint"], parse_constraint(s["constraint"]))
        for i, s in enumerate(entry["steps"])
    )
    seq = ConstraintSequence(pairs)
    out = {}
    for label, cfg in (
        ("guided", SearchConfig()),
        ("free", SearchConfig(constraint_filter=False, rollout_budget=seq.K)),
    ):
        gateway = LmGateway(MockProvider({"ActionPropose": propose}))
        domain = RiskDomain(
            g, "White", gateway=gateway, proposal_source="gateway", strategy=entry["strategy"]
        )
        result = cg_mcts(new_game(seed=0), seq, entry["strategy"], cfg, domain)
        out[label] = result.telemetry.branching
    return out


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n", type=int, default=20, help="number of generated strategies")
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--out", help="write per-depth results as JSON")
    args = parser.parse_args(argv)

    g = build_default_map()
    territories = sorted(g.territories)
    rng = random.Random(args.seed)

    per_depth: dict[str, dict[int, list[float]]] = {"guided": {}, "free": {}}
    for i in range(args.n):
        entry = make_strategy(rng, territories, i)
        branching = run_pair(entry, g)
        for label, depths in branching.items():
            for depth, counts in depths.items():
                per_depth[label].setdefault(depth, []).append(statistics.mean(counts))

    depths = sorted(set(per_depth["guided"]) | set(per_depth["free"]))
    print(f"{'depth':>5}  {'guided':>10}  {'free':>10}  {'reduction':>9}")
    rows = []
    for d in depths:
        guided = statistics.mean(per_depth["guided"].get(d, [0.0]))
        free = statistics.mean(per_depth["free"].get(d, [0.0]))
        reduction = (1 - guided / free) if free else 0.0
        rows.append({"depth": d, "guided_mean": guided, "free_mean": free, "reduction": reduction})
        print(f"{d:>5}  {guided:>10.3f}  {free:>10.3f}  {reduction:>8.1%}")

    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(rows, fh, indent=2)
            fh.write("\n")
        print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
