"""Two-dimensional nonlinear conjugate gradient (Polak-Ribiere+).

``minimize`` is the reference implementation for arbitrary Python cost
functions.  The detector refines many candidates with a compiled copy of the
same iteration (``_kernels.cg_refine``); the two are kept in step by tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

CostFn = Callable[[np.ndarray], "tuple[float, np.ndarray]"]


@dataclass(frozen=True)
class OptimizerConfig:
    max_iters: int = 200
    grad_tol: Optional[float] = None  # None -> 1e-8 * (1 + |f(x0)|)
    step_tol: float = 1e-6
    f_tol: float = 1e-10  # stop when a step lowers f by less than f_tol * (1 + |f|)
    ls_shrink: float = 0.5
    ls_max: int = 40
    armijo: float = 1e-4

    def __post_init__(self):
        if self.max_iters <= 0 or self.ls_max <= 0 or self.step_tol <= 0 or self.f_tol < 0:
            raise ValueError("iteration counts and tolerances must be positive")
        if self.grad_tol is not None and self.grad_tol <= 0:
            raise ValueError("grad_tol must be positive")
        if not 0.0 < self.ls_shrink < 1.0:
            raise ValueError("ls_shrink must lie in (0, 1)")
        if not 0.0 < self.armijo < 1.0:
            raise ValueError("armijo must lie in (0, 1)")


def minimize(fun: CostFn, x0, cfg: OptimizerConfig | None = None) -> tuple[np.ndarray, float]:
    """Minimize ``fun`` from ``x0``; ``fun(x)`` returns ``(value, gradient)``.

    Each line search starts from a Newton step along the search direction,
    with the curvature taken from a gradient difference over a short probe,
    and backtracks until the Armijo condition holds.  The returned point is
    the last accepted one, so its cost never exceeds ``fun(x0)``.
    """
    cfg = cfg or OptimizerConfig()
    x = np.array(x0, dtype=float).reshape(2)
    f, g = fun(x)
    f = float(f)
    g = np.array(g, dtype=float).reshape(2)
    if not math.isfinite(f):
        raise ValueError("cost is not finite at the starting point")
    gtol = cfg.grad_tol if cfg.grad_tol is not None else 1e-8 * (1.0 + abs(f))
    d = -g
    t_prev = 1.0

    for _ in range(cfg.max_iters):
        gn = math.sqrt(g[0] * g[0] + g[1] * g[1])
        if gn < gtol:
            break
        slope = g[0] * d[0] + g[1] * d[1]
        if slope >= 0.0:
            d = -g
            slope = -gn * gn
        dn = math.sqrt(d[0] * d[0] + d[1] * d[1])

        h = 1e-4 * (1.0 + max(abs(x[0]), abs(x[1]))) / dn
        _, gp = fun(x + h * d)
        curv = ((gp[0] - g[0]) * d[0] + (gp[1] - g[1]) * d[1]) / h
        t = -slope / curv if curv > 0 else t_prev
        if not math.isfinite(t) or t <= 0:
            t = t_prev

        accepted = False
        for _ in range(cfg.ls_max):
            xt = x + t * d
            ft, gt = fun(xt)
            ft = float(ft)
            if math.isfinite(ft) and ft <= f + cfg.armijo * t * slope:
                accepted = True
                break
            t *= cfg.ls_shrink
        if not accepted:
            break

        gt = np.array(gt, dtype=float).reshape(2)
        beta = max(0.0, (gt[0] * (gt[0] - g[0]) + gt[1] * (gt[1] - g[1])) / (gn * gn))
        stall = f - ft <= cfg.f_tol * (1.0 + abs(f))
        x, f, g = xt, ft, gt
        d = -g + beta * d
        t_prev = t
        if t * dn < cfg.step_tol or stall:
            break
    return x, f
