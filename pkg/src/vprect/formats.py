"""File formats: segment CSV, JSON records, binary PNM, and image warping."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .geom import Quadrangle


class InputError(ValueError):
    """Malformed or unreadable input file."""


# ---------------------------------------------------------------------------
# segments

SEGMENT_HEADER = ("x1", "y1", "x2", "y2")


def read_segments(path) -> np.ndarray:
    """Read a segment CSV into an (n, 2, 2) array.

    One ``x1,y1,x2,y2`` row per segment; an optional header row with exactly
    those names is skipped.  Errors name the offending line.
    """
    rows = []
    try:
        with open(path, newline="") as fh:
            for lineno, row in enumerate(csv.reader(fh), start=1):
                cells = [c.strip() for c in row]
                if not cells or all(c == "" for c in cells):
                    continue
                if lineno == 1 and tuple(c.lower() for c in cells) == SEGMENT_HEADER:
                    continue
                if len(cells) != 4:
                    raise InputError(f"{path}:{lineno}: expected 4 columns, got {len(cells)}")
                try:
                    vals = [float(c) for c in cells]
                except ValueError:
                    raise InputError(f"{path}:{lineno}: non-numeric value in {','.join(cells)!r}") from None
                if not all(math.isfinite(v) for v in vals):
                    raise InputError(f"{path}:{lineno}: non-finite coordinate")
                if vals[0] == vals[2] and vals[1] == vals[3]:
                    raise InputError(f"{path}:{lineno}: zero-length segment")
                rows.append(vals)
    except OSError as e:
        raise InputError(f"cannot read {path}: {e.strerror}") from None
    return np.array(rows, dtype=float).reshape(-1, 2, 2)


def write_segments(path, segs) -> None:
    segs = np.asarray(segs, dtype=float).reshape(-1, 4)
    with open(path, "w", newline="") as fh:
        fh.write(",".join(SEGMENT_HEADER) + "\n")
        for r in segs:
            fh.write(",".join(repr(float(v)) for v in r) + "\n")


# ---------------------------------------------------------------------------
# JSON records


def _plain(obj):
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if hasattr(obj, "value") and isinstance(getattr(obj, "value"), str):
        return obj.value
    return obj


def dumps(record: dict) -> str:
    # float repr is the shortest string that round-trips bit-exactly
    return json.dumps(_plain(record), indent=2, sort_keys=True) + "\n"


def write_json(path, record: dict) -> None:
    Path(path).write_text(dumps(record))


def read_json(path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except OSError as e:
        raise InputError(f"cannot read {path}: {e.strerror}") from None
    except json.JSONDecodeError as e:
        raise InputError(f"{path}: invalid JSON ({e.msg} at line {e.lineno})") from None


def pair_record(pair, image_size, principal) -> dict:
    return {
        "v_h": list(pair.e_h),
        "v_v": list(pair.e_v),
        "f_estimated": pair.f_estimated,
        "inliers_h": len(pair.inliers_h),
        "inliers_v": len(pair.inliers_v),
        "principal": list(principal),
        "image_size": list(image_size),
    }


def homography_record(pair, rect, image_size, principal) -> dict:
    rec = pair_record(pair, image_size, principal)
    rec.update(
        {
            "H": np.asarray(rect.H).ravel().tolist(),
            "f_used": rect.f_used,
            "f_source": rect.f_source,
            "beta": rect.beta,
        }
    )
    return rec


def homography_from_record(rec: dict) -> np.ndarray:
    for key in ("H", "H_true"):
        if key in rec:
            vals = rec[key]
            break
    else:
        raise InputError("record has no 'H' or 'H_true' entry")
    H = np.array(vals, dtype=float)
    if H.size != 9:
        raise InputError("homography must have 9 entries")
    return H.reshape(3, 3)


def truth_record(truth) -> dict:
    return {
        "v_h": list(truth.v_h),
        "v_v": list(truth.v_v),
        "H_true": np.asarray(truth.H_true).ravel().tolist(),
        "quad": [c for p in truth.quad.corners for c in p],
        "aspect": truth.aspect,
        "n_outliers": truth.n_outliers,
    }


def quad_from_record(rec: dict) -> Quadrangle:
    return Quadrangle.from_flat(rec["quad"])


# ---------------------------------------------------------------------------
# PNM


def _pnm_tokens(data: bytes, count: int) -> tuple[list[bytes], int]:
    tokens, i, n = [], 0, len(data)
    while len(tokens) < count:
        while i < n and data[i : i + 1].isspace():
            i += 1
        if i < n and data[i : i + 1] == b"#":
            while i < n and data[i : i + 1] not in (b"\n", b"\r"):
                i += 1
            continue
        j = i
        while j < n and not data[j : j + 1].isspace() and data[j : j + 1] != b"#":
            j += 1
        if j == i:
            raise InputError("truncated PNM header")
        tokens.append(data[i:j])
        i = j
    return tokens, i + 1  # exactly one whitespace byte precedes the raster


def read_pnm(path) -> np.ndarray:
    """Read binary P5 (gray) or P6 (RGB) with maxval 255."""
    try:
        data = Path(path).read_bytes()
    except OSError as e:
        raise InputError(f"cannot read {path}: {e.strerror}") from None
    (magic, w, h, maxval), off = _pnm_tokens(data, 4)
    if magic not in (b"P5", b"P6"):
        raise InputError(f"{path}: unsupported image format {magic[:2]!r}; only binary P5/P6")
    try:
        w, h, maxval = int(w), int(h), int(maxval)
    except ValueError:
        raise InputError(f"{path}: bad PNM header") from None
    if maxval != 255:
        raise InputError(f"{path}: only maxval 255 is supported")
    ch = 1 if magic == b"P5" else 3
    need = w * h * ch
    raster = np.frombuffer(data, dtype=np.uint8, count=need, offset=off) if len(data) - off >= need else None
    if raster is None:
        raise InputError(f"{path}: truncated raster")
    return raster.reshape((h, w) if ch == 1 else (h, w, 3)).copy()


def write_pnm(path, img: np.ndarray) -> None:
    img = np.asarray(img, dtype=np.uint8)
    magic = b"P5" if img.ndim == 2 else b"P6"
    h, w = img.shape[:2]
    with open(path, "wb") as fh:
        fh.write(magic + b"\n%d %d\n255\n" % (w, h))
        fh.write(np.ascontiguousarray(img).tobytes())


# ---------------------------------------------------------------------------
# warping


class WarpError(ValueError):
    pass


def warp_canvas(H, size, max_area_factor: float = 4.0) -> tuple[np.ndarray, tuple[int, int], float]:
    """Output transform and canvas size covering the image of the source rectangle.

    Pixel centers sit at integer coordinates.  If the canvas would exceed
    ``max_area_factor`` times the source area, a uniform scale is folded into
    the transform.  Returns (M, (width, height), scale) with M mapping source
    pixels to canvas pixels.
    """
    W, Hs = size
    corners = np.array([[0, 0, 1], [W - 1, 0, 1], [W - 1, Hs - 1, 1], [0, Hs - 1, 1]], dtype=float)
    q = corners @ np.asarray(H, dtype=float).T
    if np.any(q[:, 2] <= 1e-12 * np.abs(q[:, :2]).max(axis=1)):
        raise WarpError("the source image does not map to a bounded region (vanishing point inside the image)")

    def bbox(M):
        qq = corners @ M.T
        xy = qq[:, :2] / qq[:, 2:3]
        lo = np.floor(xy.min(axis=0) + 1e-6)
        hi = np.ceil(xy.max(axis=0) - 1e-6)
        return lo, (hi - lo + 1).astype(int)

    M = np.asarray(H, dtype=float)
    lo, dims = bbox(M)
    scale = 1.0
    area = float(dims[0]) * float(dims[1])
    if area > max_area_factor * W * Hs:
        scale = math.sqrt(max_area_factor * W * Hs / area)
        M = np.diag([scale, scale, 1.0]) @ M
        lo, dims = bbox(M)
    T = np.array([[1.0, 0.0, -lo[0]], [0.0, 1.0, -lo[1]], [0.0, 0.0, 1.0]])
    return T @ M, (int(dims[0]), int(dims[1])), scale


def warp_image(img: np.ndarray, M, out_size) -> np.ndarray:
    """Inverse-map every canvas pixel through M and sample bilinearly.

    Samples falling outside the source (beyond a 1e-6 px slack) are zero.
    """
    Hs, W = img.shape[:2]
    ow, oh = out_size
    Minv = np.linalg.inv(np.asarray(M, dtype=float))
    v, u = np.mgrid[0:oh, 0:ow]
    src = np.stack([u.ravel(), v.ravel(), np.ones(u.size)], axis=1).astype(float) @ Minv.T
    with np.errstate(divide="ignore", invalid="ignore"):
        x = src[:, 0] / src[:, 2]
        y = src[:, 1] / src[:, 2]
    slack = 1e-6
    valid = (src[:, 2] > 0) & (x >= -slack) & (x <= W - 1 + slack) & (y >= -slack) & (y <= Hs - 1 + slack)
    x = np.clip(np.where(valid, x, 0.0), 0, W - 1)
    y = np.clip(np.where(valid, y, 0.0), 0, Hs - 1)
    x0 = np.floor(x).astype(int)
    y0 = np.floor(y).astype(int)
    x1 = np.minimum(x0 + 1, W - 1)
    y1 = np.minimum(y0 + 1, Hs - 1)
    fx = x - x0
    fy = y - y0
    src_img = img.astype(float)
    if img.ndim == 3:
        fx, fy = fx[:, None], fy[:, None]
    val = (
        src_img[y0, x0] * (1 - fx) * (1 - fy)
        + src_img[y0, x1] * fx * (1 - fy)
        + src_img[y1, x0] * (1 - fx) * fy
        + src_img[y1, x1] * fx * fy
    )
    out = np.clip(np.floor(val + 0.5), 0, 255).astype(np.uint8)
    out[~valid] = 0
    return out.reshape((oh, ow) + img.shape[2:])
