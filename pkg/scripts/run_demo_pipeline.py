"""Generate a synthetic shelf scene and run the proxy pipeline on it.

Writes the frame, the detections sidecar, and one proxy per strategy
into the output directory, plus a summary JSON.
"""

import argparse
import json
from pathlib import Path

from periphproxy.fixtures import frame_with_gaze_dot, scene_with_detections
from periphproxy.pipeline import FileStubSegmenter, run_pipeline
from periphproxy.regions import save_detections, save_image

COLORS = [(180, 200, 90), (90, 120, 210), (70, 110, 200), (90, 200, 190)]


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", type=Path, default=Path("demo_out"))
    parser.add_argument("--seed", type=int, default=42)
    args = parser.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)

    frame, detections = scene_with_detections(COLORS)
    gaze = (24.0, 24.0)  # center of the first object
    save_image(frame, args.out / "frame.png")
    save_image(
        frame_with_gaze_dot(frame, (24, 24)), args.out / "frame_with_dot.png"
    )
    save_detections(detections, args.out / "detections.json")

    summary = {}
    for strategy in ("msc", "screenshot", "baseline"):
        result = run_pipeline(
            frame,
            gaze,
            FileStubSegmenter(detections),
            strategy=strategy,
            seed=args.seed,
        )
        save_image(result.proxy.proxy.raster, args.out / f"proxy_{strategy}.png")
        summary[strategy] = {
            "target_id": result.target_id,
            "reference_id": result.reference.source_id,
            "skipped": result.proxy.skipped,
            "reason": result.proxy.skip_reason,
            "stage_fractions": result.timings.fractions(),
        }
        print(f"{strategy:>10}: target={result.target_id} "
              f"reference={result.reference.source_id} skipped={result.proxy.skipped}")

    (args.out / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    print(f"wrote {args.out}/")


if __name__ == "__main__":
    main()
