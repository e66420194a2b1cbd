"""Score the pipeline on real frames with annotated document quadrangles.

The package does not detect segments in pixels.  To evaluate on a dataset
such as MIDV-500, run any line-segment detector over each frame and store
its output next to the annotation:

    frames/
        0001.csv     x1,y1,x2,y2 per detected segment
        0001.json    {"quad": [x0, y0, x1, y1, x2, y2, x3, y3],
                      "aspect": 1.586, "image_size": [W, H]}

The quadrangle starts at the top-left corner of the document template and
runs clockwise (image y axis pointing down); ``aspect`` is the template's
width over height, e.g. 85.6 / 53.98 for an ID-1 card.  MIDV-500 stores one
JSON per frame with a "quad" list of four points, which flattens into the
layout above.  Frames where the quadrangle leaves the image are usually
dropped from the protocol.

    python3 demos/real_data.py frames/ [--focal F]

Without ``--focal`` the focal length is estimated from each detected pair,
falling back to the image diagonal.  With no directory argument the script
writes a small synthetic stand-in so the format can be inspected.
"""

import argparse
import json
import math
import sys
import tempfile
from pathlib import Path

import numpy as np

from vprect import NoPairError, Quadrangle, detect, evaluate, generate, random_spec, rectify_pair
from vprect.formats import InputError, read_segments, write_segments


def make_stand_in(root: Path, n=5):
    for k in range(n):
        spec = random_spec(100 + k, sigma=1.0, outlier_fraction=0.3)
        segs, truth = generate(spec)
        write_segments(root / f"{k:04d}.csv", segs)
        quad = [c for p in truth.quad.corners for c in p]
        (root / f"{k:04d}.json").write_text(json.dumps({"quad": quad, "aspect": truth.aspect, "image_size": list(spec.image_size)}))


def score(root: Path, focal):
    rows = []
    for ann_path in sorted(root.glob("*.json")):
        seg_path = ann_path.with_suffix(".csv")
        if not seg_path.exists():
            print(f"{ann_path.name}: no segment file, skipped", file=sys.stderr)
            continue
        ann = json.loads(ann_path.read_text())
        size = tuple(ann["image_size"])
        quad = Quadrangle.from_flat(np.asarray(ann["quad"], dtype=float).ravel())
        try:
            segs = read_segments(seg_path)
            pair = detect(segs, size)
        except (InputError, NoPairError) as e:
            print(f"{ann_path.stem}: {e}")
            rows.append((90.0, 90.0, math.inf))
            continue
        rep = evaluate(quad, float(ann["aspect"]), rectify_pair(pair, size, focal).H)
        rows.append((rep.d_rect, rep.d_rot, 100 * rep.d_ar))
        print(f"{ann_path.stem}: d_rect {rep.d_rect:6.3f}  d_rot {rep.d_rot:6.3f}  d_ar {100 * rep.d_ar:6.2f} %")
    if rows:
        med = np.median(np.array(rows), axis=0)
        print(f"median over {len(rows)} frames: d_rect {med[0]:.3f} deg, d_rot {med[1]:.3f} deg, d_ar {med[2]:.2f} %")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("frames", nargs="?", type=Path)
    ap.add_argument("--focal", type=float)
    args = ap.parse_args()
    if args.frames is None:
        with tempfile.TemporaryDirectory() as tmp:
            make_stand_in(Path(tmp))
            print(f"synthetic stand-in frames ({Path(tmp).name}):")
            score(Path(tmp), args.focal)
    else:
        score(args.frames, args.focal)


if __name__ == "__main__":
    main()
