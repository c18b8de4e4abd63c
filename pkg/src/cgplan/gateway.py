"""Language-model gateway: prompt templates, providers, replay, logprobs.

Requests are canonicalized (sorted-key JSON) and hashed so a recorded
session can be replayed byte-for-byte offline. Three providers ship:
a live HTTP client, a replay provider that serves a recorded log, and a
scripted mock for tests.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
import os
import threading
import time
from dataclasses import dataclass
from functools import cache
from importlib import resources

from .errors import (
    LogprobUnavailable,
    MalformedResponse,
    MissingReplayEntry,
    ProviderError,
    UnboundVariable,
)

log = logging.getLogger(__name__)

# template id -> (bundled file, placeholder names)
TEMPLATES: dict[str, tuple[str, tuple[str, ...]]] = {
    "RiskExtract": ("risk_extract.txt", ("Strategy_Description", "mapStatus")),
    "MathExtract": ("math_extract.txt", ("question",)),
    "CadExtract": ("cad_extract.txt", ("language_description",)),
    "StepEvalMath": ("step_eval_math.txt", ("question", "Step")),
    "StepEvalCad": ("step_eval_cad.txt", ("question", "Step")),
    "ActionPropose": ("action_propose.txt", ("Strategy_Description", "mapStatus", "constraint", "k")),
    "JudgeWeightElicit": ("judge_weight_elicit.txt", ("Strategy_Description",)),
    "DirectPlace": ("direct_place.txt", ("Strategy_Description", "mapStatus")),
    "CotPlace": ("cot_place.txt", ("Strategy_Description", "mapStatus")),
}

LOGPROB_FLOOR = -20.0


@cache
def _template_text(template_id: str) -> str:
    filename, _ = TEMPLATES[template_id]
    return resources.files("cgplan.templates").joinpath(filename).read_text()


def render_template(template_id: str, variables: dict[str, str]) -> str:
    """Instantiate a bundled template. Placeholders are replaced by exact
    token (``{name}``), never by brace formatting — template bodies contain
    literal JSON braces."""
    if template_id not in TEMPLATES:
        raise KeyError(f"unknown template id {template_id!r}")
    text = _template_text(template_id)
    _, placeholders = TEMPLATES[template_id]
    for name in placeholders:
        if name not in variables:
            raise UnboundVariable(f"placeholder {{{name}}} unbound for {template_id}")
        text = text.replace("{" + name + "}", str(variables[name]))
    return text


@dataclass(frozen=True)
class LmRequest:
    template_id: str
    variables: dict[str, str]
    temperature: float = 0.0
    max_tokens: int = 1024
    want_logprobs: bool = False

    def to_json(self) -> dict:
        return {
            "template_id": self.template_id,
            "variables": dict(self.variables),
            "temperature": self.temperature,
            "max_tokens": self.max_tokens,
            "want_logprobs": self.want_logprobs,
        }

    @staticmethod
    def from_json(d: dict) -> "LmRequest":
        return LmRequest(
            template_id=d["template_id"],
            variables=dict(d["variables"]),
            temperature=float(d.get("temperature", 0.0)),
            max_tokens=int(d.get("max_tokens", 1024)),
            want_logprobs=bool(d.get("want_logprobs", False)),
        )


def canonical_request(req: LmRequest) -> str:
    """Canonical serialization: sorted keys, no whitespace — stable across
    map-insertion order and platforms."""
    return json.dumps(req.to_json(), sort_keys=True, separators=(",", ":"))


def request_hash(req: LmRequest) -> str:
    return hashlib.sha256(canonical_request(req).encode()).hexdigest()


@dataclass
class LmResponse:
    text: str
    token_logprobs: list[tuple[str, float]] | None = None
    provider: str = ""
    latency_ms: float = 0.0

    def to_json(self) -> dict:
        return {
            "text": self.text,
            "token_logprobs": [[t, lp] for t, lp in self.token_logprobs] if self.token_logprobs else None,
            "provider": self.provider,
            "latency_ms": self.latency_ms,
        }

    @staticmethod
    def from_json(d: dict) -> "LmResponse":
        lps = d.get("token_logprobs")
        return LmResponse(
            text=d["text"],
            token_logprobs=[(t, float(lp)) for t, lp in lps] if lps else None,
            provider=d.get("provider", ""),
            latency_ms=float(d.get("latency_ms", 0.0)),
        )


class ReplayLog:
    """Append-only request/response store; JSONL on disk, hash-keyed in memory."""

    def __init__(self, path: str | None = None):
        self.path = path
        self._entries: dict[str, LmResponse] = {}
        self._lock = threading.Lock()
        if path is not None and os.path.exists(path):
            with open(path) as f:
                for line in f:
                    line = line.strip()
                    if not line:
                        continue
                    rec = json.loads(line)
                    self._entries[rec["request_hash"]] = LmResponse.from_json(rec["response"])

    def __len__(self) -> int:
        return len(self._entries)

    def get(self, req: LmRequest) -> LmResponse | None:
        return self._entries.get(request_hash(req))

    def append(self, req: LmRequest, resp: LmResponse) -> None:
        h = request_hash(req)
        with self._lock:
            self._entries[h] = resp
            if self.path is not None:
                rec = {"request_hash": h, "request": req.to_json(), "response": resp.to_json()}
                with open(self.path, "a") as f:
                    f.write(json.dumps(rec, sort_keys=True) + "\n")


@dataclass(frozen=True)
class ProviderConfig:
    provider: str
    endpoint: str
    model: str
    api_key_env: str = ""
    timeout: float = 60.0

    @staticmethod
    def from_file(path: str) -> "ProviderConfig":
        with open(path) as f:
            d = json.load(f)
        return ProviderConfig(
            provider=d["provider"],
            endpoint=d["endpoint"],
            model=d["model"],
            api_key_env=d.get("api_key_env", ""),
            timeout=float(d.get("timeout", 60.0)),
        )


class LiveProvider:
    """Chat-completions HTTP client (OpenAI-compatible wire shape)."""

    name = "live"

    def __init__(self, config: ProviderConfig):
        import httpx  # deferred so offline use never needs it at import time

        self.config = config
        headers = {}
        key = os.environ.get(config.api_key_env, "") if config.api_key_env else ""
        if key:
            headers["Authorization"] = f"Bearer {key}"
        self._client = httpx.Client(timeout=config.timeout, headers=headers)

    def complete(self, req: LmRequest, prompt: str) -> LmResponse:
        body = {
            "model": self.config.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": req.temperature,
            "max_tokens": req.max_tokens,
        }
        if req.want_logprobs:
            body["logprobs"] = True
        started = time.monotonic()
        try:
            r = self._client.post(self.config.endpoint, json=body)
            r.raise_for_status()
            doc = r.json()
        except Exception as e:  # httpx errors, JSON errors, HTTP status errors
            raise ProviderError(f"live completion failed: {e}") from e
        latency = (time.monotonic() - started) * 1000.0
        try:
            choice = doc["choices"][0]
            text = choice["message"]["content"]
        except (KeyError, IndexError, TypeError) as e:
            raise MalformedResponse(f"unexpected completion payload: {e}") from e
        logprobs = None
        content = (choice.get("logprobs") or {}).get("content")
        if req.want_logprobs and content:
            logprobs = [(item["token"], float(item["logprob"])) for item in content]
        return LmResponse(text=text, token_logprobs=logprobs, provider=self.name, latency_ms=latency)


class ReplayProvider:
    """Serves recorded responses only; unknown requests are an error."""

    name = "replay"

    def __init__(self, replay_log: ReplayLog):
        self.replay_log = replay_log

    def complete(self, req: LmRequest, prompt: str) -> LmResponse:
        resp = self.replay_log.get(req)
        if resp is None:
            raise MissingReplayEntry(f"no recorded response for {request_hash(req)} ({req.template_id})")
        return resp


class MockProvider:
    """Deterministic scripted provider for tests.

    ``script`` maps a template id to a response text, a list of texts
    (consumed in order, last repeats), or a callable ``(req, prompt) -> text``.
    """

    name = "mock"

    def __init__(self, script: dict):
        self.script = dict(script)
        self._cursor: dict[str, int] = {}
        self._lock = threading.Lock()

    def complete(self, req: LmRequest, prompt: str) -> LmResponse:
        if req.template_id not in self.script:
            raise ProviderError(f"mock has no script for {req.template_id}")
        entry = self.script[req.template_id]
        if callable(entry):
            text = entry(req, prompt)
        elif isinstance(entry, list):
            with self._lock:
                i = self._cursor.get(req.template_id, 0)
                self._cursor[req.template_id] = i + 1
            text = entry[min(i, len(entry) - 1)]
        else:
            text = entry
        return LmResponse(text=text, provider=self.name, latency_ms=0.0)


class LmGateway:
    """Renders templates, dispatches to a provider, optionally records."""

    def __init__(self, provider, replay_log: ReplayLog | None = None, record: bool = False):
        self.provider = provider
        self.replay_log = replay_log
        self.record = record

    def complete(self, req: LmRequest) -> LmResponse:
        prompt = render_template(req.template_id, req.variables)
        resp = self.provider.complete(req, prompt)
        if self.record and self.replay_log is not None:
            self.replay_log.append(req, resp)
        return resp

    @staticmethod
    def for_replay(path: str) -> "LmGateway":
        return LmGateway(ReplayProvider(ReplayLog(path)))

    @staticmethod
    def recording(config: ProviderConfig, path: str) -> "LmGateway":
        return LmGateway(LiveProvider(config), replay_log=ReplayLog(path), record=True)


# -- response parsing helpers --------------------------------------------------


def _first_json_object(text: str) -> dict | None:
    """First balanced JSON object in free text (judge outputs are flat)."""
    start = text.find("{")
    while start != -1:
        depth = 0
        for i in range(start, len(text)):
            if text[i] == "{":
                depth += 1
            elif text[i] == "}":
                depth -= 1
                if depth == 0:
                    try:
                        return json.loads(text[start : i + 1])
                    except json.JSONDecodeError:
                        break
        start = text.find("{", start + 1)
    return None


def parse_judge_score(text: str) -> float:
    """Extract {"score": x}; out-of-range values are clamped with a warning."""
    doc = _first_json_object(text)
    if doc is None or "score" not in doc:
        raise MalformedResponse(f"no score object in judge response: {text[:120]!r}")
    try:
        score = float(doc["score"])
    except (TypeError, ValueError) as e:
        raise MalformedResponse(f"non-numeric score: {doc['score']!r}") from e
    if not 0.0 <= score <= 1.0:
        clamped = min(1.0, max(0.0, score))
        log.warning("judge score %s out of range; clamped to %s", score, clamped)
        return clamped
    return score


def parse_weights(text: str) -> tuple[float, ...] | None:
    """Extract {"weights": [w1..w6]}; None when absent or malformed."""
    doc = _first_json_object(text)
    if doc is None:
        return None
    ws = doc.get("weights")
    if not isinstance(ws, list) or len(ws) != 6:
        return None
    try:
        vals = tuple(float(w) for w in ws)
    except (TypeError, ValueError):
        return None
    if any(w < 0 for w in vals):
        return None
    return vals


@dataclass(frozen=True)
class ActionProposal:
    action_key: str
    logprob: float | None = None


def parse_proposals(text: str) -> list[ActionProposal]:
    doc = _first_json_object(text)
    if doc is None or not isinstance(doc.get("proposals"), list):
        raise MalformedResponse(f"no proposals object in response: {text[:120]!r}")
    out = []
    for item in doc["proposals"]:
        if not isinstance(item, dict) or "action" not in item:
            raise MalformedResponse(f"bad proposal entry: {item!r}")
        lp = item.get("logprob")
        out.append(ActionProposal(action_key=str(item["action"]), logprob=None if lp is None else float(lp)))
    return out


def propose_actions(
    gateway: LmGateway,
    strategy: str,
    map_status: str,
    constraint_text: str,
    k: int,
    temperature: float = 0.0,
) -> tuple[list[ActionProposal], LmResponse]:
    req = LmRequest(
        template_id="ActionPropose",
        variables={
            "Strategy_Description": strategy,
            "mapStatus": map_status,
            "constraint": constraint_text,
            "k": str(k),
        },
        temperature=temperature,
    )
    resp = gateway.complete(req)
    return parse_proposals(resp.text), resp


def action_logprob(
    action_key: str,
    proposals: list[ActionProposal],
    response: LmResponse | None = None,
    floor: float = LOGPROB_FLOOR,
) -> float:
    """log P(action | state, constraint) from a proposal round.

    Scripted/provider logprobs win; otherwise the mean token logprob of the
    response; otherwise the uniform surrogate log(1/len(proposals)). Actions
    the model never proposed sit at the floor.
    """
    for p in proposals:
        if p.action_key == action_key:
            if p.logprob is not None:
                return p.logprob
            if response is not None and response.token_logprobs:
                lps = [lp for _, lp in response.token_logprobs]
                return sum(lps) / len(lps)
            if not proposals:
                raise LogprobUnavailable("no proposals to normalize over")
            return max(floor, math.log(1.0 / len(proposals)))
    return floor
