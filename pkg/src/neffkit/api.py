"""HTTP JSON API over one loaded model.

Three endpoints under /api/v1 -- model metadata, per-patient prediction,
and the development n_eff distribution -- shaped exactly for the what-if
explorer. Handlers are stateless and the model snapshot is immutable, so
any number of requests can run concurrently.

Response bodies are rendered by this package's own JSON writer rather
than the framework's, for two reasons: floats must round-trip at 17
significant digits, and identical requests must produce byte-identical
responses (the UI contract is frozen by golden-file tests).
"""

from __future__ import annotations

import json
import uuid

from fastapi import FastAPI, Request, Response
from starlette.exceptions import HTTPException as StarletteHTTPException

from . import jsonio
from .errors import (
    BinaryOutOfDomain,
    MissingCovariate,
    NeffkitError,
    UnknownCovariate,
)
from .fit import FittedModel
from .workflow import predict_record

API_PREFIX = "/api/v1"


def _json_response(obj, status_code: int = 200) -> Response:
    return Response(
        content=jsonio.dump_bytes(obj),
        status_code=status_code,
        media_type="application/json",
    )


def _error_response(status: int, code: str, message: str, field: str | None = None) -> Response:
    body = {"status": status, "code": code, "message": message, "field": field}
    return _json_response(body, status_code=status)


def model_document(model: FittedModel) -> dict:
    stats = model.covariate_stats or {}
    covariates = []
    for cov in model.design_spec.covariates:
        entry = {"name": cov.name, "kind": cov.kind, "center": cov.center}
        s = stats.get(cov.name, {})
        entry["dev_min"] = s.get("dev_min")
        entry["dev_max"] = s.get("dev_max")
        entry["dev_mean"] = s.get("dev_mean")
        covariates.append(entry)
    return {
        "model_name": model.model_name,
        "family": model.family.name,
        "covariates": covariates,
        "n_dev": model.n_dev,
        "p": model.p,
        "thresholds": list(model.thresholds),
    }


def create_app(model: FittedModel, cors_origins: list[str] | None = None) -> FastAPI:
    """Build the API application around one immutable fitted model."""
    if model.design_spec is None:
        raise ValueError("API serving requires a model with a design spec")
    app = FastAPI(openapi_url=None, docs_url=None, redoc_url=None)

    if cors_origins:
        from fastapi.middleware.cors import CORSMiddleware

        app.add_middleware(
            CORSMiddleware,
            allow_origins=cors_origins,
            allow_methods=["GET", "POST"],
            allow_headers=["*"],
        )

    # Rendered once: responses for fixed GET endpoints never change, so the
    # exact bytes are reused for every request.
    model_doc = jsonio.dump_bytes(model_document(model))
    if model.dev_neff is None:
        raise ValueError("API serving requires a model with a development n_eff summary")
    dist_doc = jsonio.dump_bytes(model.dev_neff.to_document())

    @app.get(API_PREFIX + "/model")
    def get_model() -> Response:
        return Response(content=model_doc, media_type="application/json")

    @app.get(API_PREFIX + "/neff-distribution")
    def get_distribution() -> Response:
        return Response(content=dist_doc, media_type="application/json")

    @app.post(API_PREFIX + "/predict")
    async def post_predict(request: Request) -> Response:
        raw = await request.body()
        try:
            body = json.loads(raw)
        except (json.JSONDecodeError, UnicodeDecodeError):
            return _error_response(400, "MalformedBody", "request body is not valid JSON")
        if not isinstance(body, dict) or not isinstance(body.get("covariates"), dict):
            return _error_response(
                400, "MalformedBody", "body must be an object with a 'covariates' object"
            )
        covariates = body["covariates"]
        for name, value in covariates.items():
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                return _error_response(
                    400, "MalformedBody", f"covariate {name!r} must be a number", field=name
                )
        try:
            result = predict_record(model, covariates)
        except UnknownCovariate as err:
            return _error_response(
                422, "UnknownCovariate", f"model has no covariate {err.name!r}", field=err.name
            )
        except MissingCovariate as err:
            return _error_response(
                422, "MissingCovariate", f"covariate {err.name!r} is required", field=err.name
            )
        except BinaryOutOfDomain as err:
            return _error_response(
                422,
                "BinaryOutOfDomain",
                f"covariate {err.name!r} must be 0 or 1, got {err.value}",
                field=err.name,
            )
        except NeffkitError as err:
            return _error_response(422, type(err).__name__, str(err))
        return _json_response(result)

    @app.exception_handler(StarletteHTTPException)
    async def http_error(request: Request, exc: StarletteHTTPException) -> Response:
        code = "NotFound" if exc.status_code == 404 else "HttpError"
        return _error_response(exc.status_code, code, str(exc.detail))

    @app.exception_handler(Exception)
    async def internal_error(request: Request, exc: Exception) -> Response:
        # Never leak internals; log correlation happens via the opaque id.
        return _error_response(500, "InternalError", f"internal error {uuid.uuid4().hex[:12]}")

    return app


def mount_static(app: FastAPI, directory: str) -> None:
    """Serve the explorer's built assets below / (API routes keep precedence)."""
    from fastapi.staticfiles import StaticFiles

    app.mount("/", StaticFiles(directory=directory, html=True), name="static")


__all__ = ["create_app", "mount_static", "model_document", "API_PREFIX"]
