"""Provider-agnostic chat access with deterministic record/replay.

Live calls speak the OpenAI-compatible chat-completions wire format.  Every
request canonicalizes to a digest; record mode persists one fixture file per
digest and replay mode answers from those files with zero network activity,
which is what makes the whole pipeline testable offline.
"""
from __future__ import annotations

import base64
import hashlib
import json
import math
import os
import re
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable

ENV_BASE_URL = "SOCNAVGEN_LLM_BASE_URL"
ENV_API_KEY = "SOCNAVGEN_LLM_API_KEY"
ENV_MODEL = "SOCNAVGEN_LLM_MODEL"

DEFAULT_MODEL = "gpt-4o"

# Flat per-image token cost, the order of magnitude of a high-detail image.
# Overridable via estimate_request_tokens(image_tokens=...).
IMAGE_TOKEN_COST = 1100

WORDS_PER_TOKEN = 1.33


class GatewayError(Exception):
    pass


class TransportError(GatewayError):
    pass


class CredentialMissing(GatewayError):
    pass


class FixtureMiss(GatewayError):
    def __init__(self, digest: str):
        self.digest = digest
        super().__init__(f"no fixture recorded for digest {digest}")


class NoParsableBlock(GatewayError):
    """Response held no fenced block (or trailing text) that parses as JSON."""


class MissingKeys(GatewayError):
    def __init__(self, keys: list[str]):
        self.keys = list(keys)
        super().__init__(
            "parsed block is missing required key(s): " + ", ".join(self.keys)
        )


class RetriesExhausted(GatewayError):
    """All repair attempts failed; ``errors`` carries one message per attempt."""

    def __init__(self, errors: list[str]):
        self.errors = list(errors)
        super().__init__(
            f"{len(self.errors)} attempt(s) failed: " + " | ".join(self.errors)
        )


@dataclass(frozen=True)
class ImageAttachment:
    path: str
    caption: str = ""


@dataclass(frozen=True)
class ChatRequest:
    system_prompt: str
    turns: tuple[tuple[str, str], ...]
    image: ImageAttachment | None = None
    temperature: float = 0.0
    max_output_tokens: int = 2048
    model_id: str = DEFAULT_MODEL

    def __post_init__(self) -> None:
        if not self.turns:
            raise ValueError("ChatRequest needs at least one turn")
        if not math.isfinite(self.temperature):
            raise ValueError("temperature must be finite")

    def with_turns(self, extra: list[tuple[str, str]]) -> "ChatRequest":
        return replace(self, turns=self.turns + tuple(tuple(t) for t in extra))


@dataclass(frozen=True)
class ChatResponse:
    text: str
    input_tokens: int = 0
    output_tokens: int = 0
    latency: float = 0.0

    def __post_init__(self) -> None:
        if self.input_tokens < 0 or self.output_tokens < 0:
            raise ValueError("token counts must be >= 0")


@dataclass
class Fixture:
    digest: str
    response: ChatResponse
    note: str = ""
    request_summary: dict = field(default_factory=dict)


def _image_digest(image: ImageAttachment) -> str:
    p = Path(image.path)
    if p.exists():
        return hashlib.sha256(p.read_bytes()).hexdigest()
    # Requests may reference images by logical name only (e.g. in tests).
    return hashlib.sha256(image.path.encode("utf-8")).hexdigest()


def canonical_digest(req: ChatRequest) -> str:
    """Stable hex digest of the request's full sampling-relevant content.

    Temperature and max_output_tokens are included: they change sampling, so
    fixtures recorded at different settings must not alias.
    """
    payload = {
        "model_id": req.model_id,
        "system_prompt": req.system_prompt,
        "turns": [[role, text] for role, text in req.turns],
        "image": None if req.image is None else {
            "content_sha256": _image_digest(req.image),
            "caption": req.image.caption,
        },
        "temperature": req.temperature,
        "max_output_tokens": req.max_output_tokens,
    }
    blob = json.dumps(payload, sort_keys=True, ensure_ascii=False)
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def estimate_tokens(text: str) -> int:
    """Whitespace word count scaled by 1.33, rounded up.

    Deliberately not a real tokenizer: it only backs budget-bracketing
    assertions, and those need monotonicity, not exactness.
    """
    words = len(text.split())
    return math.ceil(words * WORDS_PER_TOKEN)


def estimate_request_tokens(req: ChatRequest, image_tokens: int = IMAGE_TOKEN_COST) -> int:
    total = estimate_tokens(req.system_prompt)
    for _, text in req.turns:
        total += estimate_tokens(text)
    if req.image is not None:
        total += image_tokens + estimate_tokens(req.image.caption)
    return total


@dataclass(frozen=True)
class CostModel:
    """Price per million tokens; defaults track a frontier-model price sheet."""

    input_per_mtok: float = 2.50
    output_per_mtok: float = 10.00

    def cost(self, input_tokens: int, output_tokens: int) -> float:
        return (input_tokens * self.input_per_mtok
                + output_tokens * self.output_per_mtok) / 1_000_000.0


_FENCE_RE = re.compile(r"```[a-zA-Z0-9_-]*\s*\n(.*?)```", re.DOTALL)


def extract_code_block(text: str) -> str:
    """First fenced code block, or the whole text when nothing is fenced."""
    m = _FENCE_RE.search(text)
    if m:
        return m.group(1).strip()
    return text.strip()


def extract_structured(resp: ChatResponse | str, section_schema: list[str]) -> dict:
    """Parse the response's fenced JSON block and check required keys.

    Raises :class:`NoParsableBlock` / :class:`MissingKeys`; either message is
    phrased so it can be appended verbatim as a repair turn.
    """
    text = resp.text if isinstance(resp, ChatResponse) else resp
    candidates = [m.group(1) for m in _FENCE_RE.finditer(text)]
    candidates.append(text.strip())
    doc = None
    for cand in candidates:
        try:
            doc = json.loads(cand)
            break
        except json.JSONDecodeError:
            continue
    if not isinstance(doc, dict):
        raise NoParsableBlock(
            "no fenced code block (or trailing text) parsed as a JSON object; "
            "reply with a single ```json block"
        )
    missing = [k for k in section_schema if k not in doc]
    if missing:
        raise MissingKeys(missing)
    return doc


class FixtureStore:
    """One JSON file per digest under a fixtures directory."""

    def __init__(self, root: str | Path):
        self.root = Path(root)

    def path_for(self, digest: str) -> Path:
        return self.root / f"{digest}.json"

    def get(self, digest: str) -> Fixture:
        path = self.path_for(digest)
        if not path.exists():
            raise FixtureMiss(digest)
        doc = json.loads(path.read_text(encoding="utf-8"))
        r = doc["response"]
        return Fixture(
            digest=doc["digest"],
            response=ChatResponse(
                text=r["text"],
                input_tokens=int(r.get("input_tokens", 0)),
                output_tokens=int(r.get("output_tokens", 0)),
                latency=float(r.get("latency", 0.0)),
            ),
            note=doc.get("note", ""),
            request_summary=doc.get("request", {}),
        )

    def put(self, req: ChatRequest, resp: ChatResponse, note: str = "") -> str:
        digest = canonical_digest(req)
        self.root.mkdir(parents=True, exist_ok=True)
        doc = {
            "digest": digest,
            "note": note,
            "request": {
                "model_id": req.model_id,
                "system_prompt": req.system_prompt,
                "turns": [[role, text] for role, text in req.turns],
                "image": None if req.image is None else {
                    "path": req.image.path,
                    "caption": req.image.caption,
                    "content_sha256": _image_digest(req.image),
                },
                "temperature": req.temperature,
                "max_output_tokens": req.max_output_tokens,
            },
            "response": {
                "text": resp.text,
                "input_tokens": resp.input_tokens,
                "output_tokens": resp.output_tokens,
                "latency": resp.latency,
            },
        }
        self.path_for(digest).write_text(
            json.dumps(doc, indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
        )
        return digest


def _openai_payload(req: ChatRequest) -> dict:
    messages: list[dict] = [{"role": "system", "content": req.system_prompt}]
    for i, (role, text) in enumerate(req.turns):
        if req.image is not None and i == 0 and role == "user":
            content: list[dict] = [{"type": "text", "text": text}]
            img = Path(req.image.path)
            if img.exists():
                b64 = base64.b64encode(img.read_bytes()).decode("ascii")
                suffix = img.suffix.lstrip(".").lower() or "png"
                content.append({
                    "type": "image_url",
                    "image_url": {"url": f"data:image/{suffix};base64,{b64}"},
                })
            if req.image.caption:
                content.append({"type": "text", "text": req.image.caption})
            messages.append({"role": role, "content": content})
        else:
            messages.append({"role": role, "content": text})
    return {
        "model": req.model_id,
        "messages": messages,
        "temperature": req.temperature,
        "max_tokens": req.max_output_tokens,
    }


def http_transport(req: ChatRequest) -> ChatResponse:
    """POST to the configured OpenAI-compatible chat-completions endpoint."""
    import httpx

    base_url = os.environ.get(ENV_BASE_URL)
    api_key = os.environ.get(ENV_API_KEY)
    if not base_url or not api_key:
        raise CredentialMissing(
            f"live mode needs {ENV_BASE_URL} and {ENV_API_KEY} in the environment"
        )
    url = base_url.rstrip("/") + "/chat/completions"
    started = time.monotonic()
    try:
        r = httpx.post(
            url,
            json=_openai_payload(req),
            headers={"Authorization": f"Bearer {api_key}"},
            timeout=120.0,
        )
        r.raise_for_status()
        doc = r.json()
    except Exception as exc:  # noqa: BLE001 - every transport failure maps here
        raise TransportError(f"chat completion failed: {exc}") from exc
    latency = time.monotonic() - started
    try:
        text = doc["choices"][0]["message"]["content"]
        usage = doc.get("usage", {})
    except (KeyError, IndexError, TypeError) as exc:
        raise TransportError(f"malformed completion response: {exc!r}") from exc
    return ChatResponse(
        text=text if isinstance(text, str) else json.dumps(text),
        input_tokens=int(usage.get("prompt_tokens", estimate_request_tokens(req))),
        output_tokens=int(usage.get("completion_tokens", estimate_tokens(text))),
        latency=latency,
    )


class LLMGateway:
    """complete() in one of three modes: live, record, replay.

    ``transport`` is injectable so record mode can run against a scripted
    responder in tests and fixture-regeneration tooling.
    """

    MODES = ("live", "record", "replay")

    def __init__(
        self,
        mode: str = "replay",
        fixtures_dir: str | Path = "fixtures/llm",
        transport: Callable[[ChatRequest], ChatResponse] | None = None,
        cost_model: CostModel | None = None,
    ):
        if mode not in self.MODES:
            raise ValueError(f"mode must be one of {self.MODES}, got {mode!r}")
        self.mode = mode
        self.store = FixtureStore(fixtures_dir)
        self.transport = transport or http_transport
        self.cost_model = cost_model or CostModel()
        self.calls = 0
        self.input_tokens = 0
        self.output_tokens = 0

    def _account(self, req: ChatRequest, resp: ChatResponse) -> None:
        self.calls += 1
        self.input_tokens += resp.input_tokens or estimate_request_tokens(req)
        self.output_tokens += resp.output_tokens or estimate_tokens(resp.text)

    def spent(self) -> float:
        return self.cost_model.cost(self.input_tokens, self.output_tokens)

    def complete(self, req: ChatRequest, mode: str | None = None) -> ChatResponse:
        mode = mode or self.mode
        if mode == "replay":
            fixture = self.store.get(canonical_digest(req))
            self._account(req, fixture.response)
            return fixture.response
        resp = self.transport(req)
        if mode == "record":
            self.store.put(req, resp)
        self._account(req, resp)
        return resp

    def query_with_repair(
        self,
        req: ChatRequest,
        validator: Callable[[ChatResponse], object],
        max_attempts: int = 3,
    ):
        """Loop complete -> validate; append the error text and retry on failure.

        Returns (validated_value, attempt_count).  Never issues more than
        ``max_attempts`` completions; raises :class:`RetriesExhausted` with
        every attempt's error message when all fail.
        """
        if max_attempts < 1:
            raise ValueError("max_attempts must be >= 1")
        errors: list[str] = []
        current = req
        for attempt in range(1, max_attempts + 1):
            resp = self.complete(current)
            try:
                return validator(resp), attempt
            except Exception as exc:  # noqa: BLE001 - validator failures drive repair
                errors.append(str(exc))
                if attempt < max_attempts:
                    current = current.with_turns([
                        ("assistant", resp.text),
                        ("user",
                         f"Your previous answer was invalid: {exc} "
                         "Please correct it and reply in the same format."),
                    ])
        raise RetriesExhausted(errors)
