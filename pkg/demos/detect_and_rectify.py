"""Detect two orthogonal vanishing points in a synthetic scene and rectify it.

    python3 demos/detect_and_rectify.py [--seed N] [--sigma PX] [--outliers FRAC]
"""

import argparse
import math

from vprect import detect, evaluate, generate, random_spec, rectify_pair


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seed", type=int, default=3)
    ap.add_argument("--sigma", type=float, default=1.0)
    ap.add_argument("--outliers", type=float, default=0.1)
    args = ap.parse_args()

    spec = random_spec(args.seed, sigma=args.sigma, outlier_fraction=args.outliers)
    segs, truth = generate(spec)
    print(f"{len(segs)} segments, {truth.n_outliers} of them outliers")
    print(f"true VPs      h=({truth.v_h.x:.1f}, {truth.v_h.y:.1f})  v=({truth.v_v.x:.1f}, {truth.v_v.y:.1f})")

    # no intrinsics: the focal length comes from the detected pair
    pair = detect(segs, spec.image_size)
    print(f"detected VPs  h=({pair.e_h.x:.1f}, {pair.e_h.y:.1f})  v=({pair.e_v.x:.1f}, {pair.e_v.y:.1f})")
    print(f"inliers       h={len(pair.inliers_h)}  v={len(pair.inliers_v)}")
    print(f"VP errors     {math.dist(pair.e_h, truth.v_h):.2f} px, {math.dist(pair.e_v, truth.v_v):.2f} px")

    rect = rectify_pair(pair, spec.image_size)
    print(f"focal         {rect.f_used:.1f} px ({rect.f_source.value}), true {spec.intrinsics.f:.1f}")
    print(f"skew angle    {rect.beta:.3f} deg")

    rep = evaluate(truth.quad, truth.aspect, rect.H)
    print(f"d_rect {rep.d_rect:.3f} deg   d_rot {rep.d_rot:.3f} deg   d_ar {100 * rep.d_ar:.2f} %")


if __name__ == "__main__":
    main()
