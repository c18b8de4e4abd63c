"""Evaluation harness: commander's-intent dataset ingestion, per-example
placement metrics (precision/recall/F1, territory hit-rate, length buckets,
troop-count error), aggregation into machine- and human-readable reports,
and paired comparison of two runs over the same example set.
"""

from __future__ import annotations

import json
import logging
import math
import statistics
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .engine import Action, GameState
from .errors import MismatchedExampleSets, SchemaError
from .search import PlanResult

log = logging.getLogger(__name__)

SHORTER = "shorter"
EQUAL = "equal"
LONGER = "longer"
BUCKETS = (SHORTER, EQUAL, LONGER)

Placement = tuple[str, int]


@dataclass(frozen=True)
class CiExample:
    """One natural-language strategy with its ground-truth deployment."""

    id: str
    strategy_text: str
    gt_placements: tuple[Placement, ...]
    initial_state: GameState

    def __post_init__(self):
        territories = [t for t, _ in self.gt_placements]
        if len(set(territories)) != len(territories):
            raise SchemaError(f"{self.id}: duplicate ground-truth territory")
        if any(n < 1 for _, n in self.gt_placements):
            raise SchemaError(f"{self.id}: troop counts must be >= 1")

    @staticmethod
    def from_json(d: dict) -> "CiExample":
        try:
            gt = tuple((str(t), int(n)) for t, n in d["gt"])
            return CiExample(
                id=str(d["id"]),
                strategy_text=str(d["strategy"]),
                gt_placements=gt,
                initial_state=GameState.from_json(d["state"]),
            )
        except SchemaError:
            raise
        except (KeyError, TypeError, ValueError) as e:
            raise SchemaError(f"bad example row: {e}") from e

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "strategy": self.strategy_text,
            "state": self.initial_state.to_json(),
            "gt": [[t, n] for t, n in self.gt_placements],
        }


@dataclass(frozen=True)
class Metrics:
    precision: float
    recall: float
    f1: float
    accuracy_contrib: float
    length_bucket: str
    troop_mae: float | None  # mean |pred-gt| over matched territories; None if no match

    def to_json(self) -> dict:
        return {
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "accuracy_contrib": self.accuracy_contrib,
            "length_bucket": self.length_bucket,
            "troop_mae": self.troop_mae,
        }


@dataclass
class EvalRecord:
    example_id: str
    predicted: list[Placement]
    metrics: Metrics
    branching: dict[int, list[int]] = field(default_factory=dict)
    wall_ms: float = 0.0

    def to_json(self) -> dict:
        return {
            "example_id": self.example_id,
            "predicted": [[t, n] for t, n in self.predicted],
            "metrics": self.metrics.to_json(),
            "telemetry": {
                "branching": {str(d): c for d, c in sorted(self.branching.items())},
                "wall_ms": self.wall_ms,
            },
        }

    @staticmethod
    def from_json(d: dict) -> "EvalRecord":
        m = d["metrics"]
        return EvalRecord(
            example_id=d["example_id"],
            predicted=[(t, n) for t, n in d["predicted"]],
            metrics=Metrics(
                precision=m["precision"],
                recall=m["recall"],
                f1=m["f1"],
                accuracy_contrib=m["accuracy_contrib"],
                length_bucket=m["length_bucket"],
                troop_mae=m.get("troop_mae"),
            ),
            branching={int(k): list(v) for k, v in d["telemetry"]["branching"].items()},
            wall_ms=d["telemetry"]["wall_ms"],
        )


# -- ingestion --------------------------------------------------------------------


@dataclass
class IngestResult:
    examples: list[CiExample]
    errors: list[str]  # "line <n>: <reason>" per skipped row


def ingest_ci(path: str | Path) -> IngestResult:
    """Read a JSON-lines dataset of strategy examples.

    Malformed rows are skipped and collected as error strings, never fatal.
    """
    examples: list[CiExample] = []
    errors: list[str] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                examples.append(CiExample.from_json(json.loads(line)))
            except (json.JSONDecodeError, SchemaError) as e:
                errors.append(f"line {lineno}: {e}")
    if errors:
        log.warning("skipped %d malformed dataset rows", len(errors))
    return IngestResult(examples=examples, errors=errors)


def write_ci(examples: list[CiExample], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for ex in examples:
            fh.write(json.dumps(ex.to_json(), sort_keys=True) + "\n")


# -- per-example scoring -----------------------------------------------------------


def score_example(pred: list[Placement], gt: list[Placement]) -> Metrics:
    """Territory-set metrics for one example.

    Precision and recall are over predicted vs ground-truth territory sets;
    accuracy is the hit-rate |P∩G|/|G|. Troop counts feed only the separate
    mean-absolute-error figure, computed over matched territories.
    """
    p_set = {t for t, _ in pred}
    g_set = {t for t, _ in gt}
    hit = p_set & g_set
    precision = len(hit) / len(p_set) if p_set else 0.0
    recall = len(hit) / len(g_set) if g_set else 0.0
    f1 = (2 * precision * recall / (precision + recall)) if (precision + recall) else 0.0
    accuracy = len(hit) / len(g_set) if g_set else 0.0
    if len(pred) < len(gt):
        bucket = SHORTER
    elif len(pred) == len(gt):
        bucket = EQUAL
    else:
        bucket = LONGER
    pred_n = {t: n for t, n in pred}
    gt_n = {t: n for t, n in gt}
    troop_mae = (
        sum(abs(pred_n[t] - gt_n[t]) for t in hit) / len(hit) if hit else None
    )
    return Metrics(
        precision=precision,
        recall=recall,
        f1=f1,
        accuracy_contrib=accuracy,
        length_bucket=bucket,
        troop_mae=troop_mae,
    )


def placements_from_plan(result: PlanResult) -> list[Placement]:
    """Territory/troop pairs from a plan's placement actions."""
    return [
        (a.territory, a.n)
        for a in result.actions
        if isinstance(a, Action) and a.kind in ("place", "reinforce")
    ]


def evaluate_example(example: CiExample, plan_fn) -> EvalRecord:
    """Run one planner call and score it; planner failures score zero."""
    predicted: list[Placement] = []
    branching: dict[int, list[int]] = {}
    wall_ms = 0.0
    try:
        result = plan_fn(example)
        predicted = placements_from_plan(result)
        branching = {d: list(c) for d, c in result.telemetry.branching.items()}
        wall_ms = result.telemetry.wall_ms
    except Exception as e:  # scored as a miss, not a crash
        log.warning("example %s failed: %s", example.id, e)
    return EvalRecord(
        example_id=example.id,
        predicted=predicted,
        metrics=score_example(predicted, list(example.gt_placements)),
        branching=branching,
        wall_ms=wall_ms,
    )


def evaluate_examples(examples: list[CiExample], plan_fn, max_workers: int = 1) -> list[EvalRecord]:
    """Score every example; examples are independent, so >1 worker runs
    them on a thread pool."""
    if max_workers <= 1:
        return [evaluate_example(ex, plan_fn) for ex in examples]
    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        return list(pool.map(lambda ex: evaluate_example(ex, plan_fn), examples))


# -- aggregation -------------------------------------------------------------------


@dataclass
class Report:
    n_examples: int
    accuracy: float
    macro_precision: float
    macro_recall: float
    macro_f1: float
    bucket_counts: dict[str, int]
    branching: dict[int, tuple[float, float]]  # depth -> (mean, standard error)
    mean_wall_ms: float
    troop_mae: float | None
    records: list[EvalRecord]

    def bucket_fractions(self) -> dict[str, Fraction]:
        """Exact bucket fractions; they always sum to one."""
        return {b: Fraction(self.bucket_counts[b], self.n_examples) for b in BUCKETS}

    def to_json(self) -> dict:
        return {
            "n_examples": self.n_examples,
            "accuracy": self.accuracy,
            "macro_precision": self.macro_precision,
            "macro_recall": self.macro_recall,
            "macro_f1": self.macro_f1,
            "bucket_counts": dict(self.bucket_counts),
            "bucket_percent": {
                b: 100.0 * c / self.n_examples for b, c in self.bucket_counts.items()
            },
            "branching": {
                str(d): {"mean": m, "stderr": se} for d, (m, se) in sorted(self.branching.items())
            },
            "mean_wall_ms": self.mean_wall_ms,
            "troop_mae": self.troop_mae,
            "records": [r.to_json() for r in self.records],
        }

    def to_text(self) -> str:
        """Aligned human-readable table."""
        rows = [
            ("examples", f"{self.n_examples}"),
            ("accuracy", f"{self.accuracy:.4f}"),
            ("macro precision", f"{self.macro_precision:.4f}"),
            ("macro recall", f"{self.macro_recall:.4f}"),
            ("macro F1", f"{self.macro_f1:.4f}"),
            ("mean wall ms", f"{self.mean_wall_ms:.2f}"),
            ("troop MAE", "n/a" if self.troop_mae is None else f"{self.troop_mae:.4f}"),
        ]
        for b in BUCKETS:
            pct = 100.0 * self.bucket_counts[b] / self.n_examples
            rows.append((f"bucket {b}", f"{self.bucket_counts[b]} ({pct:.1f}%)"))
        for depth, (mean, se) in sorted(self.branching.items()):
            rows.append((f"branching d={depth}", f"{mean:.3f} ± {se:.3f}"))
        width = max(len(name) for name, _ in rows)
        return "\n".join(f"{name:<{width}}  {value}" for name, value in rows) + "\n"


def aggregate(records: list[EvalRecord]) -> Report:
    """Collapse per-example records into one report (order-independent)."""
    if not records:
        raise ValueError("aggregate needs at least one record")
    ordered = sorted(records, key=lambda r: r.example_id)
    n = len(ordered)
    bucket_counts = {b: 0 for b in BUCKETS}
    for r in ordered:
        bucket_counts[r.metrics.length_bucket] += 1
    per_depth: dict[int, list[float]] = {}
    for r in ordered:
        for depth, counts in r.branching.items():
            if counts:
                per_depth.setdefault(depth, []).append(statistics.mean(counts))
    branching = {}
    for depth, means in per_depth.items():
        mean = statistics.mean(means)
        stderr = statistics.stdev(means) / math.sqrt(len(means)) if len(means) > 1 else 0.0
        branching[depth] = (mean, stderr)
    maes = [r.metrics.troop_mae for r in ordered if r.metrics.troop_mae is not None]
    return Report(
        n_examples=n,
        accuracy=statistics.mean(r.metrics.accuracy_contrib for r in ordered),
        macro_precision=statistics.mean(r.metrics.precision for r in ordered),
        macro_recall=statistics.mean(r.metrics.recall for r in ordered),
        macro_f1=statistics.mean(r.metrics.f1 for r in ordered),
        bucket_counts=bucket_counts,
        branching=branching,
        mean_wall_ms=statistics.mean(r.wall_ms for r in ordered),
        troop_mae=statistics.mean(maes) if maes else None,
        records=ordered,
    )


def write_report(report: Report, directory: str | Path, stem: str = "report") -> tuple[Path, Path]:
    """Emit the machine (JSON) and human (aligned text) report files."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    json_path = directory / f"{stem}.json"
    text_path = directory / f"{stem}.txt"
    json_path.write_text(json.dumps(report.to_json(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    text_path.write_text(report.to_text(), encoding="utf-8")
    return json_path, text_path


# -- paired comparison -------------------------------------------------------------


@dataclass
class DeltaRow:
    example_id: str
    d_accuracy: float
    d_precision: float
    d_recall: float
    d_f1: float

    def to_json(self) -> dict:
        return {
            "example_id": self.example_id,
            "d_accuracy": self.d_accuracy,
            "d_precision": self.d_precision,
            "d_recall": self.d_recall,
            "d_f1": self.d_f1,
        }


@dataclass
class DeltaTable:
    rows: list[DeltaRow]
    mean_d_accuracy: float
    mean_d_precision: float
    mean_d_recall: float
    mean_d_f1: float

    def to_json(self) -> dict:
        return {
            "rows": [r.to_json() for r in self.rows],
            "summary": {
                "mean_d_accuracy": self.mean_d_accuracy,
                "mean_d_precision": self.mean_d_precision,
                "mean_d_recall": self.mean_d_recall,
                "mean_d_f1": self.mean_d_f1,
            },
        }

    def to_text(self) -> str:
        header = f"{'example':<16}{'d_acc':>9}{'d_prec':>9}{'d_rec':>9}{'d_f1':>9}"
        lines = [header]
        for r in self.rows:
            lines.append(
                f"{r.example_id:<16}{r.d_accuracy:>9.4f}{r.d_precision:>9.4f}{r.d_recall:>9.4f}{r.d_f1:>9.4f}"
            )
        lines.append(
            f"{'MEAN':<16}{self.mean_d_accuracy:>9.4f}{self.mean_d_precision:>9.4f}"
            f"{self.mean_d_recall:>9.4f}{self.mean_d_f1:>9.4f}"
        )
        return "\n".join(lines) + "\n"


def compare_modes(report_a: Report, report_b: Report) -> DeltaTable:
    """Paired per-example metric deltas (B minus A) over the same example set."""
    by_id_a = {r.example_id: r for r in report_a.records}
    by_id_b = {r.example_id: r for r in report_b.records}
    if set(by_id_a) != set(by_id_b):
        only_a = sorted(set(by_id_a) - set(by_id_b))
        only_b = sorted(set(by_id_b) - set(by_id_a))
        raise MismatchedExampleSets(f"example sets differ (only A: {only_a[:5]}, only B: {only_b[:5]})")
    rows = []
    for eid in sorted(by_id_a):
        ma, mb = by_id_a[eid].metrics, by_id_b[eid].metrics
        rows.append(
            DeltaRow(
                example_id=eid,
                d_accuracy=mb.accuracy_contrib - ma.accuracy_contrib,
                d_precision=mb.precision - ma.precision,
                d_recall=mb.recall - ma.recall,
                d_f1=mb.f1 - ma.f1,
            )
        )
    return DeltaTable(
        rows=rows,
        mean_d_accuracy=statistics.mean(r.d_accuracy for r in rows),
        mean_d_precision=statistics.mean(r.d_precision for r in rows),
        mean_d_recall=statistics.mean(r.d_recall for r in rows),
        mean_d_f1=statistics.mean(r.d_f1 for r in rows),
    )
