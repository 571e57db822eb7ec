"""Human-in-the-loop parameter calibration.

Per-parameter dichotomous binary search driven by two-alternative forced
choices: the baseline is compared against the opposite bound of its
range, then against midpoints of the shrinking interval, with at most
three comparisons per parameter. Parameters are tuned strictly
sequentially; fixed values carry forward.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

MAX_COMPARISONS = 3


class SessionComplete(RuntimeError):
    """Raised when a comparison is requested after the session is done."""


class InvalidChoice(ValueError):
    """Raised when a submitted value is not one of the offered pair."""


class EmptyInput(ValueError):
    """Raised when aggregating an empty value list."""


@dataclass(frozen=True)
class ParamSpec:
    name: str
    default: float
    min: float
    max: float

    def __post_init__(self) -> None:
        if not (self.min <= self.default <= self.max):
            raise ValueError(f"{self.name}: need min <= default <= max")


def default_param_specs() -> list[ParamSpec]:
    """The three enhancement parameters at their pre-calibration defaults."""
    return [
        ParamSpec("max_luminance", default=1.0, min=1.0, max=8.0),
        ParamSpec("max_sat_boost", default=1.0, min=1.0, max=16.0),
        ParamSpec("ab_push", default=0.0, min=0.0, max=60.0),
    ]


@dataclass
class Comparison:
    param: str
    option_a: float  # current baseline
    option_b: float  # challenger
    param_index: int
    comparison_index: int  # 0-based within the parameter


@dataclass
class _ParamState:
    spec: ParamSpec
    baseline: float
    last_rejected: float | None = None
    comparisons_done: int = 0
    fixed_value: float | None = None


@dataclass
class CalibrationSession:
    """State machine for one sequential calibration run."""

    specs: list[ParamSpec]
    states: list[_ParamState] = field(init=False)
    active: int = 0
    transcript: list[dict] = field(default_factory=list)

    def __post_init__(self) -> None:
        self.states = [_ParamState(spec=s, baseline=s.default) for s in self.specs]

    @property
    def done(self) -> bool:
        return self.active >= len(self.states)

    def _challenger(self, state: _ParamState) -> float:
        if state.comparisons_done == 0:
            # opposite bound: the end of the range farther from the default
            spec = state.spec
            midrange = 0.5 * (spec.min + spec.max)
            return spec.max if spec.default <= midrange else spec.min
        assert state.last_rejected is not None
        return 0.5 * (state.baseline + state.last_rejected)

    def next_comparison(self) -> Comparison:
        if self.done:
            raise SessionComplete("all parameters are fixed")
        state = self.states[self.active]
        return Comparison(
            param=state.spec.name,
            option_a=state.baseline,
            option_b=self._challenger(state),
            param_index=self.active,
            comparison_index=state.comparisons_done,
        )

    def submit_choice(self, chosen: float) -> None:
        comparison = self.next_comparison()
        if chosen not in (comparison.option_a, comparison.option_b):
            raise InvalidChoice(
                f"{chosen} not in offered pair "
                f"({comparison.option_a}, {comparison.option_b})"
            )
        state = self.states[self.active]
        rejected = (
            comparison.option_b if chosen == comparison.option_a else comparison.option_a
        )
        state.baseline = chosen
        state.last_rejected = rejected
        state.comparisons_done += 1
        self.transcript.append(
            {
                "param": state.spec.name,
                "comparison": state.comparisons_done,
                "offered": [comparison.option_a, comparison.option_b],
                "chosen": chosen,
            }
        )
        if state.comparisons_done >= MAX_COMPARISONS:
            state.fixed_value = state.baseline
            self.active += 1

    def result(self) -> dict:
        return {
            "complete": self.done,
            "values": {
                s.spec.name: s.fixed_value for s in self.states if s.fixed_value is not None
            },
            "transcript": self.transcript,
        }


def aggregate(values: list[float], p: float) -> float:
    """Linear-interpolated (type-7) quantile of per-participant values."""
    if not values:
        raise EmptyInput("no values to aggregate")
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must be in [0, 1]")
    ordered = sorted(values)
    if len(ordered) == 1:
        return ordered[0]
    pos = p * (len(ordered) - 1)
    lo = int(pos)
    frac = pos - lo
    if lo + 1 >= len(ordered):
        return ordered[-1]
    return ordered[lo] * (1.0 - frac) + ordered[lo + 1] * frac


def load_color_group_presets() -> dict:
    """Per-color calibrated presets shipped with the package."""
    text = (
        resources.files("periphproxy").joinpath("presets/color_groups.json").read_text()
    )
    return json.loads(text)
