"""Generator, classifier, and scorer backends.

HTTP clients speak the JSON wire protocol (POST /generate, /classify, /score)
with bounded retries and exponential backoff; every request carries a
request_id the service must echo. Mock backends implement the same call
surface in-process so the whole pipeline runs without any model service:

* IdentityGenerator  -- returns the original span texts as fills
* GoldLookupClassifier -- labels a span by exact (frame, span text) lookup
  against gold annotations, else "Not an FE"
* UniformScorer -- token NLLs of a uniform distribution over a fixed vocab
"""
from __future__ import annotations

import logging
import math
import time
import uuid
from dataclasses import dataclass
from typing import Iterable, Sequence

import requests

from .lexicon import Lexicon, SentenceRecord

log = logging.getLogger(__name__)

NOT_AN_FE = "Not an FE"


class BackendError(Exception):
    """Backend call failed after exhausting retries."""

    def __init__(self, message: str, request_id: str | None = None):
        super().__init__(message)
        self.request_id = request_id


class ProtocolError(BackendError):
    """Backend answered, but outside the wire contract."""


def new_request_id() -> str:
    return uuid.uuid4().hex


@dataclass(frozen=True)
class RetryPolicy:
    attempts: int = 3
    base_delay: float = 0.5
    max_delay: float = 8.0
    sleep: callable = time.sleep  # injectable for tests

    def delay(self, attempt: int) -> float:
        return min(self.base_delay * (2**attempt), self.max_delay)


class HttpBackend:
    """Shared POST-with-retries plumbing for the three wire endpoints."""

    def __init__(
        self,
        base_url: str,
        retry: RetryPolicy = RetryPolicy(),
        timeout: float = 60.0,
        session: requests.Session | None = None,
    ) -> None:
        self.base_url = base_url.rstrip("/")
        self.retry = retry
        self.timeout = timeout
        self.session = session or requests.Session()
        self.calls = 0

    @property
    def id(self) -> str:
        return self.base_url

    def _post(self, path: str, payload: dict) -> dict:
        self.calls += 1
        request_id = payload.get("request_id") or new_request_id()
        payload["request_id"] = request_id
        url = f"{self.base_url}{path}"
        last_error: Exception | None = None
        for attempt in range(self.retry.attempts):
            try:
                resp = self.session.post(url, json=payload, timeout=self.timeout)
                if resp.status_code >= 500:
                    raise requests.HTTPError(f"{resp.status_code} from {url}")
                if resp.status_code >= 400:
                    raise ProtocolError(
                        f"{url} rejected request: {resp.status_code} {resp.text[:500]}",
                        request_id=request_id,
                    )
                body = resp.json()
                if body.get("request_id") != request_id:
                    raise ProtocolError(
                        f"{url} did not echo request_id {request_id}", request_id=request_id
                    )
                return body
            except ProtocolError:
                raise
            except (requests.RequestException, ValueError) as exc:
                last_error = exc
                if attempt + 1 < self.retry.attempts:
                    self.retry.sleep(self.retry.delay(attempt))
        raise BackendError(
            f"{url} failed after {self.retry.attempts} attempts: {last_error}",
            request_id=request_id,
        )


class HttpGeneratorBackend(HttpBackend):
    def generate(self, request) -> list[dict]:
        body = self._post("/generate", request.to_wire())
        candidates = body.get("candidates")
        if not isinstance(candidates, list):
            raise ProtocolError("generator response missing 'candidates' list")
        return candidates


class HttpClassifierBackend(HttpBackend):
    def classify(self, request) -> dict:
        body = self._post("/classify", request.to_wire())
        if "label" not in body:
            raise ProtocolError("classifier response missing 'label'")
        return {"label": body["label"], "score": float(body.get("score", 0.0))}


class HttpScorerBackend(HttpBackend):
    def score_nll(self, texts: Sequence[str]) -> list[dict]:
        body = self._post("/score", {"texts": list(texts), "mode": "nll"})
        items = body.get("items")
        if not isinstance(items, list) or len(items) != len(texts):
            raise ProtocolError("scorer response items do not match request texts")
        return items

    def score_pairwise(self, texts: Sequence[str], references: Sequence[str]) -> list[dict]:
        body = self._post(
            "/score", {"texts": list(texts), "mode": "pairwise", "references": list(references)}
        )
        items = body.get("items")
        if not isinstance(items, list) or len(items) != len(texts):
            raise ProtocolError("scorer response items do not match request texts")
        return items


# -- in-process mocks --------------------------------------------------------

class IdentityGenerator:
    """Echoes the original masked span texts back as fills."""

    id = "mock-identity"

    def __init__(self) -> None:
        self.calls = 0

    def generate(self, request) -> list[dict]:
        self.calls += 1
        fills = list(request.masked.original_fills)
        return [{"fills": list(fills)} for _ in range(request.n)]


class StaticGenerator:
    """Returns canned responses; useful for parser and failure-path tests."""

    id = "mock-static"

    def __init__(self, responses: Iterable[dict]):
        self.responses = list(responses)
        self.calls = 0

    def generate(self, request) -> list[dict]:
        self.calls += 1
        return [dict(r) for r in self.responses[: request.n]]


class GoldLookupClassifier:
    """Oracle classifier: a span is labeled with the FE recorded for its exact
    text under the same frame in the gold corpus, else "Not an FE"."""

    id = "mock-gold-lookup"

    def __init__(self, table: dict[tuple[str, str], str]):
        self.table = dict(table)
        self.calls = 0

    @classmethod
    def from_records(cls, records: Iterable[SentenceRecord]) -> "GoldLookupClassifier":
        table: dict[tuple[str, str], str] = {}
        for rec in records:
            for fe in rec.fes:
                table.setdefault((rec.frame, rec.text[fe.start : fe.end]), fe.name)
        return cls(table)

    @classmethod
    def from_sentences(cls, sentences, lexicon: Lexicon) -> "GoldLookupClassifier":
        table: dict[tuple[str, str], str] = {}
        for sent in sentences:
            frame = lexicon.frame_of_lu(sent.lu).name
            for fs in sent.fe_spans:
                table.setdefault((frame, fs.span.slice(sent.text)), lexicon.fe(fs.fe).name)
        return cls(table)

    def classify(self, request) -> dict:
        self.calls += 1
        span_text = request.text[request.fe_span.start : request.fe_span.end]
        label = self.table.get((request.frame_name, span_text), NOT_AN_FE)
        return {"label": label, "score": 1.0}


class UniformScorer:
    """Degenerate language model: every token is uniformly likely over a fixed
    vocabulary, so NLL is ``tokens * ln(vocab)``. Deterministic by design."""

    id = "mock-uniform"

    def __init__(self, vocab_size: int = 50_000):
        self.vocab_size = vocab_size
        self.calls = 0

    def _tokens(self, text: str) -> int:
        return len(text.split())

    def score_nll(self, texts: Sequence[str]) -> list[dict]:
        self.calls += 1
        lv = math.log(self.vocab_size)
        return [
            {"nll": self._tokens(t) * lv, "token_count": self._tokens(t)} for t in texts
        ]

    def score_pairwise(self, texts: Sequence[str], references: Sequence[str]) -> list[dict]:
        self.calls += 1
        lv = math.log(self.vocab_size)
        return [{"score": -self._tokens(ref) * lv} for ref in references]


class FlakyBackend:
    """Wraps another backend, failing the first ``failures`` calls. Test aid for
    the unverifiable-candidate path."""

    def __init__(self, inner, failures: int = 1, exc: Exception | None = None):
        self.inner = inner
        self.remaining = failures
        self.exc = exc or BackendError("injected failure")
        self.id = getattr(inner, "id", "flaky")

    def _maybe_fail(self):
        if self.remaining > 0:
            self.remaining -= 1
            raise self.exc

    def generate(self, request):
        self._maybe_fail()
        return self.inner.generate(request)

    def classify(self, request):
        self._maybe_fail()
        return self.inner.classify(request)

    def score_nll(self, texts):
        self._maybe_fail()
        return self.inner.score_nll(texts)
