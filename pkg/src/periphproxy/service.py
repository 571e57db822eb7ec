"""HTTP services: the proxy-generation endpoint and the calibration API.

Both are FastAPI apps. The proxy endpoint enforces a token-bucket rate
limit; calibration sessions are server-authoritative and serialize
concurrent submissions per session.
"""

from __future__ import annotations

import base64
import io
import json
import threading
import time
import uuid
from pathlib import Path

import numpy as np
from fastapi import FastAPI, Form, HTTPException, Request, UploadFile
from fastapi.responses import JSONResponse
from PIL import Image

from periphproxy.calibration import (
    CalibrationSession,
    InvalidChoice,
    ParamSpec,
    SessionComplete,
    default_param_specs,
)
from periphproxy.enhancer import EnhancementParams, generate_proxy
from periphproxy.fixtures import pear_and_apple
from periphproxy.pipeline import (
    FileStubSegmenter,
    NoDotFound,
    NoTarget,
    run_pipeline,
)
from periphproxy.regions import RasterRegion, detection_from_json

DEFAULT_RATE_LIMIT = 10.0  # requests per second


class TokenBucket:
    """Simple thread-safe token bucket; capacity equals the refill rate."""

    def __init__(self, rate_per_s: float):
        self.rate = rate_per_s
        self.capacity = max(rate_per_s, 1.0)
        self.tokens = self.capacity
        self.updated = time.monotonic()
        self._lock = threading.Lock()

    def try_acquire(self) -> bool:
        with self._lock:
            now = time.monotonic()
            self.tokens = min(
                self.capacity, self.tokens + (now - self.updated) * self.rate
            )
            self.updated = now
            if self.tokens >= 1.0:
                self.tokens -= 1.0
                return True
            return False


def _png_bytes(raster: np.ndarray) -> bytes:
    buf = io.BytesIO()
    Image.fromarray(np.asarray(raster, dtype=np.uint8)).save(buf, format="PNG")
    return buf.getvalue()


def _png_b64(raster: np.ndarray) -> str:
    return base64.b64encode(_png_bytes(raster)).decode("ascii")


def _decode_png(data: bytes) -> np.ndarray:
    return np.asarray(Image.open(io.BytesIO(data)).convert("RGB"))


def _region_from_b64(png_b64: str, mask_b64: str | None) -> RasterRegion:
    raster = _decode_png(base64.b64decode(png_b64))
    if mask_b64:
        mask_img = Image.open(io.BytesIO(base64.b64decode(mask_b64))).convert("L")
        mask = np.asarray(mask_img) > 0
        return RasterRegion(raster, mask)
    return RasterRegion.full(raster)


def create_proxy_app(
    params: EnhancementParams | None = None,
    rate_limit: float = DEFAULT_RATE_LIMIT,
) -> FastAPI:
    """Proxy-generation service: POST /proxy, GET /healthz."""
    app = FastAPI(title="periphproxy")
    base_params = params or EnhancementParams()
    bucket = TokenBucket(rate_limit)

    @app.get("/healthz")
    def healthz() -> dict:
        return {"status": "ok"}

    @app.middleware("http")
    async def rate_limiter(request: Request, call_next):
        if request.url.path == "/proxy" and not bucket.try_acquire():
            return JSONResponse({"error": "rate limit exceeded"}, status_code=429)
        return await call_next(request)

    @app.post("/proxy")
    async def proxy(
        frame: UploadFile,
        gaze: str = Form(...),
        strategy: str = Form("msc"),
        detections: str = Form(...),
        params: str | None = Form(None),
        seed: int = Form(42),
    ):
        try:
            frame_arr = _decode_png(await frame.read())
        except Exception:
            raise HTTPException(422, "frame is not a decodable image")

        if gaze == "decode":
            gaze_px = None
        else:
            try:
                x, y = gaze.split(",")
                gaze_px = (float(x), float(y))
            except ValueError:
                raise HTTPException(422, "gaze must be 'x,y' or 'decode'")

        try:
            dets = [detection_from_json(obj) for obj in json.loads(detections)]
        except (json.JSONDecodeError, KeyError, ValueError):
            raise HTTPException(422, "malformed detections JSON")

        req_params = base_params
        if params:
            try:
                merged = {**base_params.to_json(), **json.loads(params)}
                req_params = EnhancementParams.from_json(merged)
            except (json.JSONDecodeError, TypeError, ValueError):
                raise HTTPException(422, "malformed params JSON")

        try:
            result = run_pipeline(
                frame_arr,
                gaze_px,
                FileStubSegmenter(dets),
                strategy=strategy,
                params=req_params,
                seed=seed,
            )
        except (NoTarget, NoDotFound) as exc:
            return JSONResponse(
                {"error": type(exc).__name__, "detail": str(exc)}, status_code=404
            )
        except ValueError as exc:
            raise HTTPException(422, str(exc))

        return {
            "proxy": _png_b64(result.proxy.proxy.raster),
            "skipped": result.proxy.skipped,
            "reason": result.proxy.skip_reason,
            "target_id": result.target_id,
            "reference_id": result.reference.source_id,
            "timings": result.timings.to_json(),
        }

    return app


class _SessionStore:
    def __init__(self) -> None:
        self._sessions: dict[str, dict] = {}
        self._lock = threading.Lock()

    def create(self, session: CalibrationSession, stimulus: dict) -> str:
        sid = uuid.uuid4().hex[:12]
        with self._lock:
            self._sessions[sid] = {
                "session": session,
                "stimulus": stimulus,
                "lock": threading.Lock(),
            }
        return sid

    def get(self, sid: str) -> dict:
        with self._lock:
            entry = self._sessions.get(sid)
        if entry is None:
            raise HTTPException(404, f"unknown session {sid!r}")
        return entry


def _render_candidate(
    stimulus: dict, session: CalibrationSession, param: str, value: float
) -> np.ndarray:
    """Render a proxy with one candidate value; others at current baselines."""
    current = {
        s.spec.name: (s.fixed_value if s.fixed_value is not None else s.baseline)
        for s in session.states
    }
    current[param] = value
    known = {f.name for f in EnhancementParams.__dataclass_fields__.values()}
    params = EnhancementParams(**{k: v for k, v in current.items() if k in known})
    result = generate_proxy(
        stimulus["target"],
        stimulus["reference"],
        params=params,
        apply_skip_rules=False,
    )
    return result.proxy.raster


def create_calibration_app(
    specs: list[ParamSpec] | None = None,
    static_dir: str | Path | None = None,
) -> FastAPI:
    """Calibration session service plus optional static frontend assets."""
    app = FastAPI(title="periphproxy-calibration")
    store = _SessionStore()
    default_specs = specs or default_param_specs()

    @app.get("/healthz")
    def healthz() -> dict:
        return {"status": "ok"}

    @app.post("/session")
    def create_session(body: dict | None = None) -> dict:
        body = body or {}
        if "specs" in body:
            try:
                session_specs = [ParamSpec(**s) for s in body["specs"]]
            except (TypeError, ValueError) as exc:
                raise HTTPException(422, f"bad specs: {exc}")
        else:
            session_specs = list(default_specs)

        stim = body.get("stimulus") or {}
        if "target_png" in stim and "reference_png" in stim:
            try:
                target = _region_from_b64(
                    stim["target_png"], stim.get("target_mask_png")
                )
                reference = _region_from_b64(
                    stim["reference_png"], stim.get("reference_mask_png")
                )
            except Exception:
                raise HTTPException(422, "stimulus images are not decodable PNGs")
        else:
            target, reference = pear_and_apple()

        session = CalibrationSession(specs=session_specs)
        sid = store.create(session, {"target": target, "reference": reference})
        return {
            "id": sid,
            "specs": [
                {"name": s.name, "default": s.default, "min": s.min, "max": s.max}
                for s in session_specs
            ],
        }

    @app.get("/session/{sid}/comparison")
    def get_comparison(sid: str) -> dict:
        entry = store.get(sid)
        session: CalibrationSession = entry["session"]
        with entry["lock"]:
            try:
                comparison = session.next_comparison()
            except SessionComplete:
                return {"done": True}
            proxy_a = _render_candidate(
                entry["stimulus"], session, comparison.param, comparison.option_a
            )
            proxy_b = _render_candidate(
                entry["stimulus"], session, comparison.param, comparison.option_b
            )
        stim: RasterRegion = entry["stimulus"]["target"]
        ref: RasterRegion = entry["stimulus"]["reference"]
        return {
            "done": False,
            "param": comparison.param,
            "option_a": comparison.option_a,
            "option_b": comparison.option_b,
            "param_index": comparison.param_index,
            "comparison_index": comparison.comparison_index,
            "n_params": len(session.states),
            "stimulus_target": _png_b64(stim.raster),
            "stimulus_reference": _png_b64(ref.raster),
            "proxy_a": _png_b64(proxy_a),
            "proxy_b": _png_b64(proxy_b),
        }

    @app.post("/session/{sid}/choice")
    def post_choice(sid: str, body: dict) -> dict:
        entry = store.get(sid)
        session: CalibrationSession = entry["session"]
        with entry["lock"]:
            try:
                comparison = session.next_comparison()
            except SessionComplete:
                raise HTTPException(409, "session already complete")
            if "param" in body and body["param"] != comparison.param:
                raise HTTPException(409, "choice is for a different parameter")
            if (
                "comparison_index" in body
                and body["comparison_index"] != comparison.comparison_index
            ):
                raise HTTPException(409, "out-of-order or duplicate choice")
            try:
                session.submit_choice(float(body["value"]))
            except (KeyError, TypeError):
                raise HTTPException(422, "body must contain a numeric 'value'")
            except InvalidChoice as exc:
                raise HTTPException(422, str(exc))
        return {"accepted": True, "done": session.done}

    @app.get("/session/{sid}/result")
    def get_result(sid: str) -> dict:
        entry = store.get(sid)
        session: CalibrationSession = entry["session"]
        with entry["lock"]:
            return session.result()

    if static_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="ui")

    return app
