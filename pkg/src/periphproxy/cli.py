"""Command-line interface exposing every capability for scripting."""

from __future__ import annotations

import json
import os
import sys
from pathlib import Path

import click
import numpy as np

from periphproxy.calibration import ParamSpec, default_param_specs
from periphproxy.colorspace import LabColor
from periphproxy.enhancer import (
    EnhancementParams,
    PaletteDistances,
    ProxyResult,
    generate_proxy,
    palette_distances,
)
from periphproxy.gaze import (
    ClassifierConfig,
    DisplayRect,
    classify,
    load_trace,
    peripherality,
)
from periphproxy.pipeline import (
    FileStubSegmenter,
    RemoteSegmenter,
    run_pipeline,
)
from periphproxy.quantizer import DEFAULT_K, DEFAULT_SEED, Palette, quantize
from periphproxy.reference import find_neighbors, msc_reference
from periphproxy.regions import (
    RasterRegion,
    load_detections,
    load_image,
    load_mask,
    save_image,
)


def _fail(code: str, message: str) -> None:
    json.dump({"error": code, "detail": message}, sys.stderr)
    sys.stderr.write("\n")
    sys.exit(1)


def _emit(payload: dict, out: str | None) -> None:
    text = json.dumps(payload, indent=2)
    if out:
        Path(out).write_text(text + "\n")
    else:
        click.echo(text)


def _palette_json(p: Palette) -> dict:
    return {
        "k": p.k,
        "centroids": [[c.L, c.a, c.b] for c in p.centroids],
        "weights": p.weights,
    }


def _palette_from_json(obj: dict) -> Palette:
    return Palette(
        centroids=[LabColor(*c) for c in obj["centroids"]],
        weights=obj["weights"],
        k=obj["k"],
    )


def _distances_json(d: PaletteDistances) -> dict:
    return {
        "deltaE_total": d.deltaE_total,
        "deltaL": d.deltaL,
        "deltaC": d.deltaC,
        "alpha": d.alpha,
    }


def _proxy_result_json(r: ProxyResult) -> dict:
    return {
        "skipped": r.skipped,
        "reason": r.skip_reason,
        "reference_id": r.reference_id,
        "burst_ms": r.burst_ms,
        "distances": _distances_json(r.distances),
        "target_palette": _palette_json(r.target_palette),
        "reference_palette": _palette_json(r.reference_palette),
        "timings_ms": r.timings_ms,
    }


def _load_region(image: str, mask: str | None) -> RasterRegion:
    raster = load_image(image)
    if mask:
        return RasterRegion(raster, load_mask(mask))
    return RasterRegion.full(raster)


def _load_params(path: str | None) -> EnhancementParams:
    path = path or os.environ.get("PERIPHPROXY_PARAMS")
    if path:
        return EnhancementParams.load(path)
    return EnhancementParams()


@click.group()
def main() -> None:
    """Peripheral proxy generation, gaze analytics, and calibration."""


@main.command("quantize")
@click.option("--image", required=True, type=click.Path(exists=True))
@click.option("--mask", type=click.Path(exists=True))
@click.option("--k", default=DEFAULT_K, show_default=True)
@click.option("--seed", default=DEFAULT_SEED, show_default=True)
@click.option("--out", required=True, help="output PNG path")
def quantize_cmd(image: str, mask: str | None, k: int, seed: int, out: str) -> None:
    """Quantize a masked image; writes PNG and prints the palette JSON."""
    try:
        region = _load_region(image, mask)
        result = quantize(region, k=k, seed=seed)
    except Exception as exc:
        _fail(type(exc).__name__, str(exc))
    save_image(result.raster, out)
    _emit({"palette": _palette_json(result.palette), "out": out}, None)


@main.command("enhance")
@click.option("--target", required=True, type=click.Path(exists=True))
@click.option("--target-mask", type=click.Path(exists=True))
@click.option("--reference", required=True, type=click.Path(exists=True))
@click.option("--reference-mask", type=click.Path(exists=True))
@click.option("--params", "params_path", type=click.Path(exists=True))
@click.option("--seed", default=DEFAULT_SEED, show_default=True)
@click.option("--k", default=DEFAULT_K, show_default=True)
@click.option("--out", required=True, help="output proxy PNG path")
def enhance_cmd(
    target: str,
    target_mask: str | None,
    reference: str,
    reference_mask: str | None,
    params_path: str | None,
    seed: int,
    k: int,
    out: str,
) -> None:
    """Run the full target/reference enhancement pipeline."""
    try:
        result = generate_proxy(
            _load_region(target, target_mask),
            _load_region(reference, reference_mask),
            params=_load_params(params_path),
            seed=seed,
            k=k,
        )
    except Exception as exc:
        _fail(type(exc).__name__, str(exc))
    save_image(result.proxy.raster, out)
    _emit({**_proxy_result_json(result), "out": out}, None)


@main.command("analyze")
@click.option("--target-palette", required=True, type=click.Path(exists=True))
@click.option("--reference-palette", required=True, type=click.Path(exists=True))
def analyze_cmd(target_palette: str, reference_palette: str) -> None:
    """Palette-level distances between two palette JSON files."""
    try:
        with open(target_palette) as fh:
            obj = json.load(fh)
            tp = _palette_from_json(obj.get("palette", obj))
        with open(reference_palette) as fh:
            obj = json.load(fh)
            rp = _palette_from_json(obj.get("palette", obj))
        dist = palette_distances(tp, rp)
    except Exception as exc:
        _fail(type(exc).__name__, str(exc))
    _emit(_distances_json(dist), None)


@main.command("msc")
@click.option("--frame", required=True, type=click.Path(exists=True))
@click.option("--detections", required=True, type=click.Path(exists=True))
@click.option("--target-id", required=True)
@click.option("--expansion", default=0.5, show_default=True)
@click.option("--seed", default=DEFAULT_SEED, show_default=True)
def msc_cmd(
    frame: str, detections: str, target_id: str, expansion: float, seed: int
) -> None:
    """Most-similar-color reference selection for one target."""
    try:
        frame_arr = load_image(frame)
        dets = load_detections(detections)
        target = next((d for d in dets if d.id == target_id), None)
        if target is None:
            _fail("UnknownTarget", f"no detection with id {target_id!r}")
        neighbors = find_neighbors(dets, target, expansion)
        choice = msc_reference(frame_arr, target, neighbors, seed=seed)
    except Exception as exc:
        _fail(type(exc).__name__, str(exc))
    _emit(
        {
            "reference_id": choice.source_id,
            "distance": choice.distance,
            "neighbors": [d.id for d in neighbors],
        },
        None,
    )


@main.command("pipeline")
@click.option("--frame", required=True, type=click.Path(exists=True))
@click.option("--gaze", required=True, help="'x,y' or 'decode'")
@click.option("--detections", type=click.Path(exists=True))
@click.option("--backend", help="segmentation backend URL")
@click.option(
    "--strategy",
    default="msc",
    type=click.Choice(["msc", "screenshot", "baseline"]),
    show_default=True,
)
@click.option("--params", "params_path", type=click.Path(exists=True))
@click.option("--seed", default=DEFAULT_SEED, show_default=True)
@click.option("--out", help="output proxy PNG path")
def pipeline_cmd(
    frame: str,
    gaze: str,
    detections: str | None,
    backend: str | None,
    strategy: str,
    params_path: str | None,
    seed: int,
    out: str | None,
) -> None:
    """Run the end-to-end frame-to-proxy pipeline with profiling."""
    if (detections is None) == (backend is None):
        _fail("BadArguments", "provide exactly one of --detections or --backend")
    try:
        frame_arr = load_image(frame)
        if gaze == "decode":
            gaze_px = None
        else:
            x, y = gaze.split(",")
            gaze_px = (float(x), float(y))
        segmenter = (
            FileStubSegmenter(detections) if detections else RemoteSegmenter(backend)
        )
        result = run_pipeline(
            frame_arr,
            gaze_px,
            segmenter,
            strategy=strategy,
            params=_load_params(params_path),
            seed=seed,
        )
    except Exception as exc:
        _fail(type(exc).__name__, str(exc))
    if out:
        save_image(result.proxy.proxy.raster, out)
    _emit(
        {
            **_proxy_result_json(result.proxy),
            "target_id": result.target_id,
            "reference_id": result.reference.source_id,
            "timings": result.timings.to_json(),
            "out": out,
        },
        None,
    )


@main.command("gaze-metrics")
@click.option("--log", "log_path", required=True, type=click.Path(exists=True))
@click.option("--display", required=True, help="cx,cy,w,h in degrees")
@click.option("--velocity-threshold", default=30.0, show_default=True)
@click.option("--dispersion-threshold", default=1.0, show_default=True)
@click.option("--min-fixation-ms", default=50.0, show_default=True)
@click.option("--max-saccade-ms", default=30.0, show_default=True)
def gaze_metrics_cmd(
    log_path: str,
    display: str,
    velocity_threshold: float,
    dispersion_threshold: float,
    min_fixation_ms: float,
    max_saccade_ms: float,
) -> None:
    """Classify a gaze log and report display-peripherality metrics."""
    try:
        cx, cy, w, h = (float(v) for v in display.split(","))
        rect = DisplayRect(cx, cy, w, h)
        cfg = ClassifierConfig(
            velocity_threshold_deg_per_s=velocity_threshold,
            dispersion_threshold_deg=dispersion_threshold,
            min_fixation_ms=min_fixation_ms,
            max_saccade_ms=max_saccade_ms,
        )
        events = classify(load_trace(log_path), cfg)
        report = peripherality(events, rect)
    except Exception as exc:
        _fail(type(exc).__name__, str(exc))
    _emit(report.to_json(), None)


def _bind_parts(bind: str) -> tuple[str, int]:
    host, _, port = bind.rpartition(":")
    return host or "127.0.0.1", int(port)


@main.command("serve")
@click.option(
    "--bind",
    default=lambda: os.environ.get("PERIPHPROXY_BIND", "127.0.0.1:8000"),
    show_default="127.0.0.1:8000",
)
@click.option("--params", "params_path", type=click.Path(exists=True))
@click.option("--rate-limit", default=10.0, show_default=True)
def serve_cmd(bind: str, params_path: str | None, rate_limit: float) -> None:
    """Serve the proxy-generation endpoint."""
    import uvicorn

    from periphproxy.service import create_proxy_app

    host, port = _bind_parts(bind)
    app = create_proxy_app(params=_load_params(params_path), rate_limit=rate_limit)
    uvicorn.run(app, host=host, port=port)


@main.command("calibrate-serve")
@click.option(
    "--bind",
    default=lambda: os.environ.get("PERIPHPROXY_BIND", "127.0.0.1:8001"),
    show_default="127.0.0.1:8001",
)
@click.option("--specs", "specs_path", type=click.Path(exists=True))
@click.option("--static-dir", type=click.Path(exists=True), help="frontend assets")
def calibrate_serve_cmd(
    bind: str, specs_path: str | None, static_dir: str | None
) -> None:
    """Serve the calibration session API (and optional web frontend)."""
    import uvicorn

    from periphproxy.service import create_calibration_app

    if specs_path:
        with open(specs_path) as fh:
            specs = [ParamSpec(**s) for s in json.load(fh)]
    else:
        specs = default_param_specs()
    host, port = _bind_parts(bind)
    app = create_calibration_app(specs=specs, static_dir=static_dir)
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
