"""Command-line interface.

Exit codes: 0 success, 1 input or usage error, 2 no valid vanishing-point
pair (or no bounded rectified canvas).
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import formats
from .geom import CameraIntrinsics, Point2, Quadrangle
from .metrics import DegenerateQuadError, evaluate
from .rectify import CollinearVpsError, DegenerateRectificationError, rectify_pair
from .synth import DegeneratePoseError, SceneSpec, generate, rotation_from_angles
from .vp_detect import DetectConfig, NoPairError, detect

EXIT_OK, EXIT_INPUT, EXIT_NOPAIR = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _size(text: str) -> tuple[int, int]:
    try:
        w, h = (int(v) for v in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected WxH, got {text!r}") from None
    if w <= 0 or h <= 0:
        raise argparse.ArgumentTypeError("image size must be positive")
    return w, h


def _floats(n: int):
    def parse(text: str) -> tuple[float, ...]:
        try:
            vals = tuple(float(v) for v in text.split(","))
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected {n} comma-separated numbers, got {text!r}") from None
        if len(vals) != n:
            raise argparse.ArgumentTypeError(f"expected {n} comma-separated numbers, got {len(vals)}")
        return vals

    return parse


def _grid(text: str) -> tuple[int, int]:
    try:
        a, b = (int(v) for v in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected NHxNV, got {text!r}") from None
    return a, b


def _add_detect_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--segments", required=True, help="CSV with x1,y1,x2,y2 rows")
    p.add_argument("--image-size", required=True, type=_size, metavar="WxH")
    p.add_argument("--focal", type=float, help="focal length in pixels")
    p.add_argument("--principal", type=_floats(2), metavar="X,Y", help="default: image center")
    p.add_argument("--t-d", type=float, dest="T_D", help="inlier threshold, px^2")
    p.add_argument("--t-l-factor", type=float, dest="T_L_factor")
    p.add_argument("--t-s", type=float, dest="T_s", help="dedup length budget, px")
    p.add_argument("--t-d-factor", type=float, dest="T_d_factor")
    p.add_argument("--t-alpha1", type=float, dest="T_alpha1")
    p.add_argument("--t-alpha2", type=float, dest="T_alpha2")


def _config(args) -> DetectConfig:
    names = ("T_D", "T_L_factor", "T_s", "T_d_factor", "T_alpha1", "T_alpha2")
    return DetectConfig(**{k: getattr(args, k) for k in names if getattr(args, k) is not None})


def _run_detect(args):
    segs = formats.read_segments(args.segments)
    W, H = args.image_size
    principal = Point2(*args.principal) if args.principal else Point2(W / 2.0, H / 2.0)
    intr = CameraIntrinsics(args.focal, principal) if args.focal is not None else None
    pair = detect(segs, (W, H), intr, _config(args), principal=principal)
    return segs, pair, principal


def cmd_detect(args) -> int:
    _, pair, principal = _run_detect(args)
    formats.write_json(args.out, formats.pair_record(pair, args.image_size, principal))
    return EXIT_OK


def cmd_rectify(args) -> int:
    if args.warp_out and not args.image:
        raise _UsageError("--warp-out requires --image")
    img = formats.read_pnm(args.image) if args.image else None
    _, pair, principal = _run_detect(args)
    rect = rectify_pair(pair, args.image_size, args.focal, principal)
    rec = formats.homography_record(pair, rect, args.image_size, principal)
    if img is not None and args.warp_out:
        try:
            M, size, scale = formats.warp_canvas(rect.H, (img.shape[1], img.shape[0]))
        except formats.WarpError as e:
            print(f"vprect rectify: {e}", file=sys.stderr)
            return EXIT_NOPAIR
        formats.write_pnm(args.warp_out, formats.warp_image(img, M, size))
        rec["warp"] = {"M": M.ravel().tolist(), "canvas": list(size), "scale": scale}
    formats.write_json(args.homography_out, rec)
    return EXIT_OK


def cmd_eval(args) -> int:
    H = formats.homography_from_record(formats.read_json(args.homography))
    rep = evaluate(Quadrangle.from_flat(args.quad), args.aspect, H)
    out = dict(rep.as_dict(), rotated90=rep.rotated90)
    print(json.dumps(out, sort_keys=True))
    return EXIT_OK


def _scene_spec(args) -> SceneSpec:
    d = formats.read_json(args.spec) if args.spec else {}

    def get(key, flag):
        v = getattr(args, flag)
        return v if v is not None else d.get(key)

    size = get("image_size", "image_size") or (640, 480)
    W, H = size
    focal = get("focal", "focal")
    if focal is None:
        raise _UsageError("a focal length is required (--focal or \"focal\" in the spec)")
    principal = get("principal", "principal") or (W / 2.0, H / 2.0)
    if "rotation" in d and all(getattr(args, k) is None for k in ("tilt_x", "tilt_y", "roll")):
        R = np.array(d["rotation"], dtype=float)
    else:
        R = rotation_from_angles(get("tilt_x", "tilt_x") or 0.0, get("tilt_y", "tilt_y") or 0.0, get("roll", "roll") or 0.0)
    kw = {}
    for key in ("sigma", "outlier_fraction", "seed", "aspect", "object_width_frac"):
        v = get(key, key)
        if v is not None:
            kw[key] = v
    grid = get("grid", "grid")
    if grid is not None:
        kw["grid"] = tuple(int(g) for g in grid)
    try:
        return SceneSpec(CameraIntrinsics(float(focal), Point2(*principal)), R, image_size=(int(W), int(H)), **kw)
    except (TypeError, ValueError) as e:
        raise formats.InputError(f"invalid scene spec: {e}") from None


def cmd_synth(args) -> int:
    segs, truth = generate(_scene_spec(args))
    formats.write_segments(args.out, segs)
    formats.write_json(args.truth_out, formats.truth_record(truth))
    return EXIT_OK


class _UsageError(Exception):
    pass


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="vprect", description="Vanishing-point detection and metric rectification.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("detect", help="detect a pair of orthogonal vanishing points")
    _add_detect_args(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("rectify", help="detect, build the rectifying homography, optionally warp an image")
    _add_detect_args(p)
    p.add_argument("--homography-out", required=True)
    p.add_argument("--image", help="binary PNM (P5/P6) source image")
    p.add_argument("--warp-out", help="warped PNM output")
    p.set_defaults(func=cmd_rectify)

    p = sub.add_parser("eval", help="rectification quality of a quadrangle under a homography")
    p.add_argument("--quad", required=True, type=_floats(8), metavar="x0,y0,...,x3,y3")
    p.add_argument("--aspect", required=True, type=float)
    p.add_argument("--homography", required=True, help="JSON with 'H' or 'H_true'")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("synth", help="generate a synthetic Manhattan scene")
    p.add_argument("--spec", help="scene spec JSON")
    p.add_argument("--image-size", type=_size, metavar="WxH")
    p.add_argument("--focal", type=float)
    p.add_argument("--principal", type=_floats(2), metavar="X,Y")
    p.add_argument("--tilt-x", type=float, help="degrees")
    p.add_argument("--tilt-y", type=float, help="degrees")
    p.add_argument("--roll", type=float, help="degrees")
    p.add_argument("--grid", type=_grid, metavar="NHxNV")
    p.add_argument("--sigma", type=float)
    p.add_argument("--outlier-fraction", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--aspect", type=float)
    p.add_argument("--object-width-frac", type=float)
    p.add_argument("--out", required=True, help="segment CSV")
    p.add_argument("--truth-out", required=True, help="ground-truth JSON")
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    prog = f"vprect {args.command}"
    try:
        return args.func(args)
    except NoPairError as e:
        print(f"{prog}: {e}", file=sys.stderr)
        return EXIT_NOPAIR
    except (CollinearVpsError, DegenerateRectificationError) as e:
        print(f"{prog}: {e}", file=sys.stderr)
        return EXIT_NOPAIR
    except (formats.InputError, DegenerateQuadError, DegeneratePoseError, _UsageError, ValueError) as e:
        print(f"{prog}: error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as e:
        print(f"{prog}: error: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
