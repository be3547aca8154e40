"""FastAPI app exposing the generator/classifier/scorer wire protocol.

Contract highlights: every response echoes the client's request_id;
schema-invalid requests get 400 with the offending field path; model failures
get 500 with the request_id echoed; /classify labels never leave the request
frame's FE inventory plus "Not an FE".
"""
from __future__ import annotations

import logging

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse

from .config import BackendConfig
from .corpus import CorpusIndex, load_corpus_index
from .nullmodel import NullClassifier, NullGenerator, NullScorer
from .schemas import (
    ClassifyRequest,
    ClassifyResponse,
    GenerateRequest,
    GenerateResponse,
    ScoreRequest,
    ScoreResponse,
)

log = logging.getLogger(__name__)


def _build_models(config: BackendConfig):
    """Instantiate only the models whose endpoints are served."""
    index = (
        load_corpus_index(config.corpus_path) if config.corpus_path else CorpusIndex.empty()
    )
    generator = classifier = scorer = None
    if config.mode == "null":
        if "generate" in config.endpoints:
            generator = NullGenerator(index)
        if "classify" in config.endpoints:
            classifier = NullClassifier(index)
        if "score" in config.endpoints:
            scorer = NullScorer(vocab_size=config.vocab_size)
    else:
        from . import hfmodels

        if "generate" in config.endpoints:
            generator = hfmodels.HfGenerator(config.generator_model, device=config.device)
        if "classify" in config.endpoints:
            classifier = hfmodels.HfClassifier(
                config.classifier_model, device=config.device, frame_fes=index.frame_fes
            )
        if "score" in config.endpoints:
            scorer = hfmodels.HfScorer(config.scorer_model, device=config.device)
    return generator, classifier, scorer


def _model_failure(request_id: str | None, exc: Exception) -> JSONResponse:
    log.exception("model failure")
    return JSONResponse(
        status_code=500, content={"error": str(exc), "request_id": request_id}
    )


def create_app(config: BackendConfig | None = None) -> FastAPI:
    config = config or BackendConfig()
    generator, classifier, scorer = _build_models(config)
    app = FastAPI(title="modelbackend", version="0.1.0")

    @app.exception_handler(RequestValidationError)
    async def on_validation_error(request: Request, exc: RequestValidationError):
        first = exc.errors()[0] if exc.errors() else {}
        field_path = ".".join(str(part) for part in first.get("loc", ()))
        request_id = None
        if isinstance(exc.body, dict):
            value = exc.body.get("request_id")
            request_id = value if isinstance(value, str) else None
        return JSONResponse(
            status_code=400,
            content={
                "error": "request does not match the endpoint schema",
                "field_path": field_path,
                "detail": first.get("msg", ""),
                "request_id": request_id,
            },
        )

    @app.get("/healthz")
    async def healthz():
        return {
            "status": "ok",
            "mode": config.mode,
            "endpoints": list(config.endpoints),
        }

    if "generate" in config.endpoints:

        @app.post("/generate", response_model=GenerateResponse)
        async def generate(request: GenerateRequest):
            try:
                return generator.generate(request)
            except Exception as exc:
                return _model_failure(request.request_id, exc)

    if "classify" in config.endpoints:

        @app.post("/classify", response_model=ClassifyResponse)
        async def classify(request: ClassifyRequest):
            try:
                return classifier.classify(request)
            except Exception as exc:
                return _model_failure(request.request_id, exc)

    if "score" in config.endpoints:

        @app.post("/score", response_model=ScoreResponse)
        async def score(request: ScoreRequest):
            try:
                return scorer.score(request)
            except Exception as exc:
                return _model_failure(request.request_id, exc)

    return app


def serve(config: BackendConfig, host: str = "127.0.0.1", port: int = 8600) -> None:
    import uvicorn

    uvicorn.run(create_app(config), host=host, port=port)
