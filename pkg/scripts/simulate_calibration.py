"""Simulate calibration sessions and aggregate the converged values.

Each simulated participant has a hidden preferred value per parameter
and always picks the offered option closer to it. The per-participant
results are aggregated with the 75th-percentile rule used to derive the
shipped defaults.
"""

import argparse
import json

import numpy as np

from periphproxy.calibration import (
    CalibrationSession,
    aggregate,
    default_param_specs,
)


def run_participant(rng: np.random.Generator) -> dict[str, float]:
    specs = default_param_specs()
    ideals = {s.name: rng.uniform(s.min, s.max) for s in specs}
    session = CalibrationSession(specs=specs)
    while not session.done:
        c = session.next_comparison()
        pick = min((c.option_a, c.option_b), key=lambda v: abs(v - ideals[c.param]))
        session.submit_choice(pick)
    return session.result()["values"]


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--participants", type=int, default=12)
    parser.add_argument("--percentile", type=float, default=0.75)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    results = [run_participant(rng) for _ in range(args.participants)]
    aggregated = {
        name: aggregate([r[name] for r in results], args.percentile)
        for name in results[0]
    }
    print(json.dumps({"participants": results, "aggregated": aggregated}, indent=2))


if __name__ == "__main__":
    main()
