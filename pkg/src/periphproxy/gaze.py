"""Gaze-event classification and display-peripherality metrics.

Velocity thresholding (I-VT) splits off saccades, dispersion
thresholding (I-DT) confirms fixations within the remaining spans.
Fixation centroids get an ambient value relative to the display
rectangle, which drives the real-world vs in-display time accounting.

Gaze directions are (yaw, pitch) in degrees; angular distances are
planar Euclidean in that chart.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

FIXATION = "Fixation"
SACCADE = "Saccade"

ZONE_WORLD = "World"
ZONE_DISPLAY = "Display"
ZONE_TRANSITION = "Transition"

AMBIENT_RAMP_DEG = 10.0


class TooFewSamples(ValueError):
    """Raised when a trace is too short to classify."""


@dataclass(frozen=True)
class GazeSample:
    t: float  # milliseconds
    yaw: float
    pitch: float
    hit: str | None = None


@dataclass
class GazeEvent:
    kind: str  # FIXATION or SACCADE
    t_start: float
    t_end: float
    centroid: tuple[float, float] | None = None  # fixations only
    zone: str | None = None

    @property
    def duration_ms(self) -> float:
        return self.t_end - self.t_start


@dataclass(frozen=True)
class DisplayRect:
    """Angular display rectangle: center and extents in degrees."""

    center_yaw: float
    center_pitch: float
    width: float = 20.0
    height: float = 20.0

    def __post_init__(self) -> None:
        if self.width <= 0 or self.height <= 0:
            raise ValueError("display extents must be positive")


@dataclass
class ClassifierConfig:
    velocity_threshold_deg_per_s: float = 30.0
    dispersion_threshold_deg: float = 1.0
    min_fixation_ms: float = 50.0
    max_saccade_ms: float = 30.0


@dataclass
class PeripheralityReport:
    tW: float  # seconds of real-world fixation
    tD: float  # seconds of in-display fixation
    ratio: float  # tW / tD (inf when tD == 0)
    transitions: int
    total: float  # seconds spanned by the classified events

    def to_json(self) -> dict:
        return {
            "tW": self.tW,
            "tD": self.tD,
            "ratio": self.ratio if math.isfinite(self.ratio) else None,
            "transitions": self.transitions,
            "total": self.total,
        }


def _angular_distance(a: tuple[float, float], b: tuple[float, float]) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


def _fixations_in_span(
    samples: list[GazeSample], cfg: ClassifierConfig
) -> list[GazeEvent]:
    """I-DT over a low-velocity span: grow windows while dispersion holds."""
    events: list[GazeEvent] = []
    i = 0
    n = len(samples)
    while i < n:
        j = i + 1
        min_yaw = max_yaw = samples[i].yaw
        min_pitch = max_pitch = samples[i].pitch
        while j < n:
            s = samples[j]
            ny0, ny1 = min(min_yaw, s.yaw), max(max_yaw, s.yaw)
            np0, np1 = min(min_pitch, s.pitch), max(max_pitch, s.pitch)
            if (ny1 - ny0) + (np1 - np0) > cfg.dispersion_threshold_deg:
                break
            min_yaw, max_yaw, min_pitch, max_pitch = ny0, ny1, np0, np1
            j += 1
        window = samples[i:j]
        duration = window[-1].t - window[0].t
        if duration >= cfg.min_fixation_ms:
            centroid = (
                sum(s.yaw for s in window) / len(window),
                sum(s.pitch for s in window) / len(window),
            )
            events.append(GazeEvent(FIXATION, window[0].t, window[-1].t, centroid))
            i = j
        else:
            i += 1
    return events


def classify(
    trace: list[GazeSample], cfg: ClassifierConfig | None = None
) -> list[GazeEvent]:
    """Classify a time-ordered trace into fixations and saccades.

    Sub-threshold spans are emitted as neither (gaps are allowed).
    """
    cfg = cfg or ClassifierConfig()
    if len(trace) < 2:
        raise TooFewSamples("need at least 2 samples")
    for a, b in zip(trace, trace[1:]):
        if b.t <= a.t:
            raise ValueError("samples must be strictly time-ordered")

    # velocity per inter-sample interval, deg/s
    fast = []
    for a, b in zip(trace, trace[1:]):
        v = _angular_distance((a.yaw, a.pitch), (b.yaw, b.pitch)) / (b.t - a.t) * 1000.0
        fast.append(v > cfg.velocity_threshold_deg_per_s)

    events: list[GazeEvent] = []
    i = 0
    n = len(fast)
    while i < n:
        j = i
        while j < n and fast[j] == fast[i]:
            j += 1
        span = trace[i : j + 1]
        if fast[i]:
            duration = span[-1].t - span[0].t
            if duration <= cfg.max_saccade_ms:
                events.append(GazeEvent(SACCADE, span[0].t, span[-1].t))
        else:
            events.extend(_fixations_in_span(span, cfg))
        i = j
    return events


def ambient_value(direction: tuple[float, float], rect: DisplayRect) -> float:
    """Gradient membership of a gaze direction relative to the display.

    1 inside the rectangle, 0 at >= 10 degrees from its boundary, and a
    linear ramp in between. Distance is measured to the nearest edge.
    """
    dx = max(abs(direction[0] - rect.center_yaw) - rect.width / 2.0, 0.0)
    dy = max(abs(direction[1] - rect.center_pitch) - rect.height / 2.0, 0.0)
    d = math.hypot(dx, dy)
    if d <= 0:
        return 1.0
    if d >= AMBIENT_RAMP_DEG:
        return 0.0
    return 1.0 - d / AMBIENT_RAMP_DEG


def zone_of(direction: tuple[float, float], rect: DisplayRect) -> str:
    a = ambient_value(direction, rect)
    if a >= 1.0:
        return ZONE_DISPLAY
    if a <= 0.0:
        return ZONE_WORLD
    return ZONE_TRANSITION


def peripherality(events: list[GazeEvent], rect: DisplayRect) -> PeripheralityReport:
    """Aggregate world/display fixation time and transition count.

    Transition-zone fixations count toward neither tW nor tD. A
    transition is a saccade whose nearest flanking fixations sit in
    different {World, Display} zones.
    """
    for ev in events:
        if ev.kind == FIXATION and ev.centroid is not None:
            ev.zone = zone_of(ev.centroid, rect)

    tW = sum(e.duration_ms for e in events if e.zone == ZONE_WORLD) / 1000.0
    tD = sum(e.duration_ms for e in events if e.zone == ZONE_DISPLAY) / 1000.0

    transitions = 0
    for idx, ev in enumerate(events):
        if ev.kind != SACCADE:
            continue
        before = next(
            (e for e in reversed(events[:idx]) if e.kind == FIXATION), None
        )
        after = next((e for e in events[idx + 1 :] if e.kind == FIXATION), None)
        if before is None or after is None:
            continue
        zones = {before.zone, after.zone}
        if zones == {ZONE_WORLD, ZONE_DISPLAY}:
            transitions += 1

    total = (events[-1].t_end - events[0].t_start) / 1000.0 if events else 0.0
    ratio = tW / tD if tD > 0 else math.inf
    return PeripheralityReport(tW, tD, ratio, transitions, total)


@dataclass(frozen=True)
class AngularTarget:
    id: str
    yaw: float
    pitch: float


def flashlight_select(
    direction: tuple[float, float],
    objects: list[AngularTarget],
    cone_half_angle_deg: float,
) -> str | None:
    """Closest object within the gaze cone, or None if the cone is empty."""
    best: tuple[float, str] | None = None
    for obj in objects:
        d = _angular_distance(direction, (obj.yaw, obj.pitch))
        if d <= cone_half_angle_deg and (best is None or (d, obj.id) < best):
            best = (d, obj.id)
    return best[1] if best else None


def load_trace(path: str | Path) -> list[GazeSample]:
    """Read a gaze log: JSON Lines, one sample per line {t, yaw, pitch, hit?}."""
    samples = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            samples.append(
                GazeSample(
                    t=float(obj["t"]),
                    yaw=float(obj["yaw"]),
                    pitch=float(obj["pitch"]),
                    hit=obj.get("hit"),
                )
            )
    return samples


def save_trace(samples: list[GazeSample], path: str | Path) -> None:
    with open(path, "w") as fh:
        for s in samples:
            obj = {"t": s.t, "yaw": s.yaw, "pitch": s.pitch}
            if s.hit is not None:
                obj["hit"] = s.hit
            fh.write(json.dumps(obj) + "\n")
