"""Command-line entry points: constraint extraction, planning, reference
strategies, dataset evaluation, and the HTTP service."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .baselines import BASELINE_KINDS, BaselineConfig, run_baseline
from .engine import GameState
from .extraction import StrategyInput, extract
from .fitness import FitnessWeights, params_from_constraints
from .gateway import LmGateway, ProviderConfig
from .harness import aggregate, evaluate_examples, ingest_ci, write_report
from .riskmap import build_default_map, map_from_json
from .search import RiskDomain, SearchConfig, cg_mcts

log = logging.getLogger(__name__)


def _gateway(args) -> LmGateway:
    if getattr(args, "replay", None):
        return LmGateway.for_replay(args.replay)
    if getattr(args, "provider_config", None):
        record_to = getattr(args, "record", None)
        return LmGateway.recording(ProviderConfig.from_file(args.provider_config), record_to)
    raise SystemExit("need --replay LOG or --provider-config FILE for model access")


def _load_config(path: str | None) -> tuple[SearchConfig, FitnessWeights]:
    if not path:
        return SearchConfig(), FitnessWeights()
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    search = SearchConfig.from_json(doc.get("search", {}))
    weights = FitnessWeights.from_json(doc["weights"]) if "weights" in doc else FitnessWeights()
    return search, weights


def _load_state(path: str) -> GameState:
    return GameState.from_json(json.loads(Path(path).read_text(encoding="utf-8")))


def _load_map(args):
    if getattr(args, "map", None):
        return map_from_json(json.loads(Path(args.map).read_text(encoding="utf-8")))
    return build_default_map()


def _emit(doc: dict, out: str | None) -> None:
    text = json.dumps(doc, indent=2, sort_keys=True)
    if out:
        Path(out).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)


def cmd_extract(args) -> int:
    g = _load_map(args)
    gateway = _gateway(args)
    state = _load_state(args.state_file) if args.state_file else None
    strategy = Path(args.strategy_file).read_text(encoding="utf-8").strip()
    inp = StrategyInput(description=strategy, domain=args.domain, state=state, question=strategy if args.domain == "math" else None)
    result = extract(inp, gateway, g)
    _emit(
        {
            "pairs": result.sequence.to_json(),
            "dropped": result.dropped,
            "K": result.K,
        },
        args.out,
    )
    return 0


def cmd_plan(args) -> int:
    from .constraints import ConstraintSequence

    g = _load_map(args)
    state = _load_state(args.state)
    doc = json.loads(Path(args.pairs).read_text(encoding="utf-8"))
    seq = ConstraintSequence.from_json(doc["pairs"] if isinstance(doc, dict) else doc)
    search_cfg, weights = _load_config(args.config)
    params = params_from_constraints([p.constraint_ast for p in seq.pairs])
    gateway = _gateway(args) if args.proposals == "gateway" else None
    domain = RiskDomain(
        g,
        state.current_player,
        weights=weights,
        params=params,
        gateway=gateway,
        proposal_source=args.proposals,
    )
    result = cg_mcts(state, seq, "", search_cfg, domain)
    _emit(result.to_json(), args.out)
    if args.telemetry:
        Path(args.telemetry).write_text(
            json.dumps(result.telemetry.to_json(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
    return 0


def cmd_baseline(args) -> int:
    g = _load_map(args)
    gateway = _gateway(args) if args.kind not in ("mcts_plain",) else None
    state = _load_state(args.state_file)
    strategy = Path(args.strategy_file).read_text(encoding="utf-8").strip()
    inp = StrategyInput(description=strategy, domain="risk", state=state)
    result = run_baseline(args.kind, inp, g, gateway, BaselineConfig())
    _emit(result.to_json(), args.out)
    return 0


def cmd_eval(args) -> int:
    g = _load_map(args)
    search_cfg, weights = _load_config(args.config)
    ingest = ingest_ci(args.dataset)
    if ingest.errors:
        log.warning("dataset: %d rows skipped", len(ingest.errors))
    if not ingest.examples:
        raise SystemExit("dataset has no valid examples")

    if args.method == "mcts-const":
        gateway = _gateway(args)

        def plan_fn(ex):
            extraction = extract(
                StrategyInput(description=ex.strategy_text, domain="risk", state=ex.initial_state),
                gateway,
                g,
            )
            seq = extraction.sequence
            params = params_from_constraints([p.constraint_ast for p in seq.pairs])
            domain = RiskDomain(
                g, ex.initial_state.current_player, weights=weights, params=params,
            )
            return cg_mcts(ex.initial_state, seq, ex.strategy_text, search_cfg, domain)

    elif args.method in BASELINE_KINDS:
        gateway = _gateway(args) if args.method != "mcts_plain" else None
        cfg = BaselineConfig(weights=weights)

        def plan_fn(ex):
            inp = StrategyInput(description=ex.strategy_text, domain="risk", state=ex.initial_state)
            return run_baseline(args.method, inp, g, gateway, cfg)

    else:
        raise SystemExit(f"unknown method {args.method!r}")

    records = evaluate_examples(ingest.examples, plan_fn, max_workers=args.workers)
    report = aggregate(records)
    json_path, text_path = write_report(report, args.report)
    print(report.to_text())
    print(f"wrote {json_path} and {text_path}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import ServiceConfig, create_app

    search_cfg, weights = _load_config(args.config)
    cfg = ServiceConfig(
        sessions_dir=args.sessions_dir,
        weights=weights,
        search=search_cfg,
        auth_token=args.auth_token,
    )
    app = create_app(cfg, _gateway(args), _load_map(args))
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cgplan", description="constraint-guided planning toolkit")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_gateway_args(p):
        p.add_argument("--replay", help="replay log (JSONL) for deterministic model responses")
        p.add_argument("--provider-config", help="live provider config JSON")
        p.add_argument("--record", help="record live responses to this replay log")

    p = sub.add_parser("extract", help="turn strategy text into intent/constraint pairs")
    p.add_argument("--domain", choices=["risk", "math"], default="risk")
    p.add_argument("--strategy-file", required=True)
    p.add_argument("--state-file")
    p.add_argument("--map")
    p.add_argument("--out")
    add_gateway_args(p)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("plan", help="run the guided search over extracted pairs")
    p.add_argument("--state", required=True)
    p.add_argument("--pairs", required=True, help="extraction output JSON")
    p.add_argument("--config")
    p.add_argument("--map")
    p.add_argument("--proposals", choices=["exhaustive", "gateway"], default="exhaustive")
    p.add_argument("--out")
    p.add_argument("--telemetry")
    add_gateway_args(p)
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("baseline", help="run a reference strategy")
    p.add_argument("--kind", choices=list(BASELINE_KINDS), required=True)
    p.add_argument("--strategy-file", required=True)
    p.add_argument("--state-file", required=True)
    p.add_argument("--map")
    p.add_argument("--out")
    add_gateway_args(p)
    p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("eval", help="score a method over a strategy dataset")
    p.add_argument("--dataset", required=True)
    p.add_argument("--method", default="mcts-const")
    p.add_argument("--config")
    p.add_argument("--map")
    p.add_argument("--report", required=True, help="output directory")
    p.add_argument("--workers", type=int, default=1)
    add_gateway_args(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("serve", help="start the HTTP session service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--config")
    p.add_argument("--map")
    p.add_argument("--sessions-dir", default="sessions")
    p.add_argument("--auth-token")
    add_gateway_args(p)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
