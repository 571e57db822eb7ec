"""Profile the pipeline stages over repeated runs on a synthetic scene.

Prints the mean per-stage duration and fraction of total, mirroring the
profiling breakdown reported for the end-to-end system.
"""

import argparse
from collections import defaultdict

from periphproxy.fixtures import scene_with_detections
from periphproxy.pipeline import FileStubSegmenter, run_pipeline

COLORS = [(180, 200, 90), (90, 120, 210), (70, 110, 200), (90, 200, 190)]


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--runs", type=int, default=10)
    parser.add_argument(
        "--strategy", choices=["msc", "screenshot", "baseline"], default="screenshot"
    )
    args = parser.parse_args()

    frame, detections = scene_with_detections(COLORS)
    totals = defaultdict(float)
    for _ in range(args.runs):
        result = run_pipeline(
            frame, (24.0, 24.0), FileStubSegmenter(detections), strategy=args.strategy
        )
        for stage, ms in result.timings.durations_ms.items():
            totals[stage] += ms

    grand_total = sum(totals.values())
    print(f"strategy={args.strategy} runs={args.runs}")
    print(f"{'stage':<20} {'mean ms':>10} {'fraction':>10}")
    for stage, ms in sorted(totals.items(), key=lambda kv: -kv[1]):
        print(f"{stage:<20} {ms / args.runs:>10.2f} {ms / grand_total:>9.1%}")


if __name__ == "__main__":
    main()
