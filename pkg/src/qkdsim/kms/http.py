"""HTTP/1.1 JSON front end for the key-delivery service.

Path shape and payloads follow the key-delivery API the service models:

    GET  /api/v1/keys/{slave_SAE_ID}/status
    POST /api/v1/keys/{slave_SAE_ID}/enc_keys   {"number": n, "size": 256}
    POST /api/v1/keys/{master_SAE_ID}/dec_keys  {"key_IDs": [{"key_ID": "<uuid>"}]}

Callers authenticate with a static bearer token registered per SAE; the
token identifies the calling SAE, which must be the pair peer of the SAE
named in the path.
"""

from __future__ import annotations

import uuid

from fastapi import FastAPI, Header, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from qkdsim.errors import (
    InvalidArgumentError,
    KeyExhaustedError,
    KeyNotFoundError,
    PairNotFoundError,
)
from qkdsim.kms.service import KmsService, SaeId


class EncKeysRequest(BaseModel):
    number: int = 1
    size: int = 256


class KeyIdEntry(BaseModel):
    key_ID: str


class DecKeysRequest(BaseModel):
    key_IDs: list[KeyIdEntry] = Field(default_factory=list)


def build_app(service: KmsService) -> FastAPI:
    """Build the API application over a configured service instance."""
    app = FastAPI(title="qkdsim key delivery", docs_url=None, redoc_url=None)
    tokens: dict[str, SaeId] = {}
    for handle in service.pairs.values():
        for sae, token in ((handle.sae_a, handle.token_a), (handle.sae_b, handle.token_b)):
            if token:
                tokens[token] = sae

    def caller_from(authorization: str | None) -> SaeId:
        if not authorization or not authorization.startswith("Bearer "):
            raise PermissionError("missing bearer token")
        sae = tokens.get(authorization.removeprefix("Bearer "))
        if sae is None:
            raise PermissionError("unknown bearer token")
        return sae

    @app.exception_handler(PermissionError)
    async def _unauthorized(_req: Request, exc: PermissionError) -> JSONResponse:
        return JSONResponse(status_code=401, content={"message": str(exc)})

    @app.exception_handler(PairNotFoundError)
    async def _pair_missing(_req: Request, exc: PairNotFoundError) -> JSONResponse:
        return JSONResponse(status_code=404, content={"message": str(exc)})

    @app.exception_handler(KeyNotFoundError)
    async def _key_missing(_req: Request, exc: KeyNotFoundError) -> JSONResponse:
        return JSONResponse(status_code=404, content={"message": str(exc)})

    @app.exception_handler(InvalidArgumentError)
    async def _bad_argument(_req: Request, exc: InvalidArgumentError) -> JSONResponse:
        return JSONResponse(status_code=400, content={"message": str(exc)})

    @app.exception_handler(KeyExhaustedError)
    async def _exhausted(_req: Request, exc: KeyExhaustedError) -> JSONResponse:
        return JSONResponse(status_code=503, content={"message": str(exc)})

    @app.get("/api/v1/keys/{slave_sae_id}/status")
    async def status(
        slave_sae_id: str, authorization: str | None = Header(default=None)
    ) -> dict:
        caller = caller_from(authorization)
        return service.get_status(caller, slave_sae_id).to_json()

    @app.post("/api/v1/keys/{slave_sae_id}/enc_keys")
    async def enc_keys(
        slave_sae_id: str,
        body: EncKeysRequest,
        authorization: str | None = Header(default=None),
    ) -> dict:
        caller = caller_from(authorization)
        container = service.get_enc_keys(caller, slave_sae_id, body.number, body.size)
        return container.to_json()

    @app.post("/api/v1/keys/{master_sae_id}/dec_keys")
    async def dec_keys(
        master_sae_id: str,
        body: DecKeysRequest,
        authorization: str | None = Header(default=None),
    ) -> dict:
        caller = caller_from(authorization)
        try:
            key_ids = [uuid.UUID(entry.key_ID) for entry in body.key_IDs]
        except ValueError as exc:
            raise InvalidArgumentError(f"malformed key_ID: {exc}") from exc
        container = service.get_dec_keys(caller, master_sae_id, key_ids)
        return container.to_json()

    return app
