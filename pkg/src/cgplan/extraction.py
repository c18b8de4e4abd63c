"""Intent/constraint extraction: prompt the model, parse its step block,
validate and filter into a ConstraintSequence.

The parser is deliberately tolerant of the wrapper around the JSON array
(``Constraint-of-thoughts [...]``, ``json{...}``, or a bare array) and of
field-name casing, because model output varies on both.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .constraints import (
    ConstraintSequence,
    IntentConstraintPair,
    PlaceTroops,
    ReinforceTerritory,
    filter_valid,
    parse_constraint,
)
from .engine import GameState
from .errors import EmptySequence, ExtractionParseError, ParseError
from .gateway import LmGateway, LmRequest
from .riskmap import MapGraph

RETRY_TEMPERATURE = 0.3


@dataclass(frozen=True)
class StrategyInput:
    """What the planner was told: a strategy description plus domain context."""

    description: str
    domain: str = "risk"  # "risk" | "math"
    state: GameState | None = None  # risk only
    question: str | None = None  # math only

    def __post_init__(self):
        if not self.description or not self.description.strip():
            raise ValueError("strategy description must be non-empty")
        if self.domain not in ("risk", "math"):
            raise ValueError(f"unknown domain {self.domain!r}")


@dataclass
class ExtractionResult:
    sequence: ConstraintSequence
    raw_response: str
    dropped: list[tuple[dict, str]] = field(default_factory=list)

    @property
    def K(self) -> int:
        return self.sequence.K


def map_status(state: GameState) -> str:
    """The board snapshot injected into prompts (canonical JSON)."""
    return json.dumps(state.to_json(), sort_keys=True)


def _candidate_arrays(text: str):
    """Yield each balanced [...] slice of the text, left to right."""
    i = 0
    n = len(text)
    while i < n:
        start = text.find("[", i)
        if start == -1:
            return
        depth = 0
        in_str = False
        escape = False
        for j in range(start, n):
            ch = text[j]
            if in_str:
                if escape:
                    escape = False
                elif ch == "\\":
                    escape = True
                elif ch == '"':
                    in_str = False
                continue
            if ch == '"':
                in_str = True
            elif ch == "[":
                depth += 1
            elif ch == "]":
                depth -= 1
                if depth == 0:
                    yield text[start : j + 1]
                    break
        else:
            return  # unbalanced to end of text
        i = start + 1


def parse_cot_block(text: str) -> list[dict]:
    """Extract the first JSON array of step objects from a model response.

    Accepts the wrapped form (``Constraint-of-thoughts [...]`` in any of its
    observed spellings) or a bare array. Field names are matched
    case-insensitively. Raises ExtractionParseError when no parsable array
    of objects exists.
    """
    for slice_ in _candidate_arrays(text):
        try:
            doc = json.loads(slice_)
        except json.JSONDecodeError:
            continue
        if not isinstance(doc, list) or not doc:
            continue
        if not all(isinstance(item, dict) for item in doc):
            continue
        return [_normalize_keys(item) for item in doc]
    raise ExtractionParseError(f"no step array found in response: {text[:120]!r}")


def _normalize_keys(item: dict) -> dict:
    return {str(k).lower(): v for k, v in item.items()}


def _build_pairs(
    raws: list[dict], domain: str
) -> tuple[list[IntentConstraintPair], list[tuple[dict, str]]]:
    pairs: list[IntentConstraintPair] = []
    dropped: list[tuple[dict, str]] = []
    for raw in raws:
        if not all(k in raw for k in ("step_id", "intent", "constraint")):
            dropped.append((raw, "MissingFields"))
            continue
        try:
            step_id = int(raw["step_id"])
        except (TypeError, ValueError):
            dropped.append((raw, "MissingFields"))
            continue
        try:
            ast = parse_constraint(str(raw["constraint"]), domain)
        except ParseError as e:
            dropped.append((raw, f"Grammar:{type(e).__name__}"))
            continue
        placement = None
        echo = raw.get("placement")
        if echo is not None:
            if (
                not isinstance(echo, (list, tuple))
                or len(echo) != 2
                or not isinstance(echo[1], int)
                or isinstance(echo[1], bool)
            ):
                dropped.append((raw, "PlacementEcho"))
                continue
            placement = (str(echo[0]), echo[1])
            if isinstance(ast, (PlaceTroops, ReinforceTerritory)) and (
                placement[0] != ast.territory or placement[1] != ast.n
            ):
                dropped.append((raw, "PlacementEcho"))
                continue
        pairs.append(
            IntentConstraintPair(
                step_id=step_id,
                intent=str(raw["intent"]),
                constraint_text=str(raw["constraint"]),
                constraint_ast=ast,
                placement=placement,
            )
        )
    return pairs, dropped


def extract(
    input: StrategyInput,
    gateway: LmGateway,
    g: MapGraph | None = None,
    temperature: float = 0.0,
) -> ExtractionResult:
    """Run the full extraction pipeline against the gateway.

    An empty surviving sequence triggers one retry at a raised temperature
    before the error surfaces.
    """
    try:
        return _extract_once(input, gateway, g, temperature)
    except EmptySequence:
        return _extract_once(input, gateway, g, RETRY_TEMPERATURE)


def _extract_once(
    input: StrategyInput, gateway: LmGateway, g: MapGraph | None, temperature: float
) -> ExtractionResult:
    if input.domain == "risk":
        if input.state is None:
            raise ValueError("risk extraction needs a state")
        req = LmRequest(
            template_id="RiskExtract",
            variables={"Strategy_Description": input.description, "mapStatus": map_status(input.state)},
            temperature=temperature,
        )
    else:
        req = LmRequest(
            template_id="MathExtract",
            variables={"question": input.question if input.question is not None else input.description},
            temperature=temperature,
        )
    resp = gateway.complete(req)
    raws = parse_cot_block(resp.text)
    pairs, dropped = _build_pairs(raws, input.domain)
    if not pairs:
        raise EmptySequence(f"all {len(raws)} raw pairs were rejected before filtering")
    sequence, late_dropped = filter_valid(pairs, input.state, g)
    dropped.extend((p.to_json(), reason) for p, reason in late_dropped)
    return ExtractionResult(sequence=sequence, raw_response=resp.text, dropped=dropped)
