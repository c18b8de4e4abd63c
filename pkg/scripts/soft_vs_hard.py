"""Compare strict and advisory constraint enforcement on the same strategies.

Builds a batch of placement strategies whose ground truth is the constraint
sequence itself, plans each one twice (hard mode enforces every constraint
exactly; soft mode treats them as guidance and may trade exactness for
fitness), scores both runs against the ground truth, and prints the two
reports plus a paired per-example delta table (soft minus hard).

Usage:
    python3 scripts/soft_vs_hard.py --n 12 --seed 3 [--out-dir reports/]
"""

import argparse
import random
import sys
from pathlib import Path

from cgplan.constraints import ConstraintSequence, IntentConstraintPair, parse_constraint
from cgplan.engine import new_game
from cgplan.harness import EvalRecord, aggregate, compare_modes, score_example, write_report
from cgplan.riskmap import build_default_map
from cgplan.search import HARD, SOFT, RiskDomain, SearchConfig, cg_mcts


def random_partition(rng: random.Random, total: int, parts: int) -> list[int]:
    cuts = sorted(rng.sample(range(1, total), parts - 1)) if parts > 1 else []
    bounds = [0] + cuts + [total]
    return [b - a for a, b in zip(bounds, bounds[1:])]


def make_example(rng: random.Random, territories: list[str], index: int, reserve: int) -> dict:
    k = rng.randint(2, 4)
    targets = rng.sample(territories, k)
    counts = random_partition(rng, reserve, k)
    gt = list(zip(targets, counts))
    pairs = tuple(
        IntentConstraintPair(
            i + 1,
            f"secure {t} with a garrison of {n}",
            f"Place '{n}' troops on Country '{t}'",
            parse_constraint(f"Place '{n}' troops on Country '{t}'"),
        )
        for i, (t, n) in enumerate(gt)
    )
    return {"id": f"case-{index:02d}", "gt": gt, "sequence": ConstraintSequence(pairs)}


def plan_and_score(example: dict, g, mode: str) -> EvalRecord:
    cfg = SearchConfig(mode=mode)
    result = cg_mcts(new_game(seed=0), example["sequence"], "", cfg, RiskDomain(g, "White"))
    predicted = [(a.territory, a.n) for a in result.actions if a.kind == "place"]
    return EvalRecord(
        example_id=example["id"],
        predicted=predicted,
        metrics=score_example(predicted, example["gt"]),
        branching=result.telemetry.branching,
        wall_ms=result.telemetry.wall_ms,
    )


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n", type=int, default=12, help="number of generated strategies")
    parser.add_argument("--seed", type=int, default=3)
    parser.add_argument("--out-dir", help="also write hard/, soft/ reports under this directory")
    args = parser.parse_args(argv)

    g = build_default_map()
    state = new_game(seed=0)
    reserve = state.reserve[state.current_player]
    territories = sorted(t for t in g.territories if state.owner.get(t) is None)
    rng = random.Random(args.seed)
    examples = [make_example(rng, territories, i, reserve) for i in range(args.n)]

    reports = {}
    for mode in (HARD, SOFT):
        records = [plan_and_score(e, g, mode) for e in examples]
        reports[mode] = aggregate(records)
        print(f"== {mode} mode ==")
        print(reports[mode].to_text())

    delta = compare_modes(reports[HARD], reports[SOFT])
    print("== soft minus hard ==")
    print(delta.to_text())

    if args.out_dir:
        base = Path(args.out_dir)
        for mode in (HARD, SOFT):
            write_report(reports[mode], base / mode)
        print(f"wrote {base}/{HARD}/report.* and {base}/{SOFT}/report.*")
    return 0


if __name__ == "__main__":
    sys.exit(main())
