"""Small dense Levenberg-Marquardt least-squares solver.

Kept deliberately simple: forward-difference Jacobian, multiplicative damping
adaptation, box constraints by clipping trial steps.  Problems here have at
most a handful of parameters and a few hundred residuals, so robustness and
reproducibility beat raw speed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import ConfigurationError


@dataclass(frozen=True)
class LMResult:
    params: np.ndarray
    cost: float  # 0.5 * sum(residual^2)
    converged: bool
    n_iterations: int
    covariance: Optional[np.ndarray] = field(default=None, repr=False)


def _jacobian(residual_fn, x, r0, rel_step):
    m, n = r0.size, x.size
    jac = np.empty((m, n))
    for i in range(n):
        h = rel_step * max(abs(x[i]), 1.0)
        xp = x.copy()
        xp[i] += h
        jac[:, i] = (residual_fn(xp) - r0) / h
    return jac


def levenberg_marquardt(residual_fn: Callable[[np.ndarray], np.ndarray],
                        x0: Sequence[float],
                        bounds: Optional[Sequence[tuple]] = None,
                        max_iterations: int = 200,
                        step_tolerance: float = 1e-10,
                        cost_tolerance: float = 1e-12,
                        rel_step: float = 1e-6,
                        lambda0: float = 1e-3) -> LMResult:
    """Minimize 0.5 ||residual_fn(x)||^2 from x0.

    bounds is an optional list of (lo, hi) per parameter (None for open ends);
    trial points are clipped into the box.  The covariance estimate is
    s^2 (J^T J)^{-1} with s^2 = chi^2 / dof, or None when dof <= 0 or the
    normal matrix is singular.
    """
    x = np.asarray(x0, dtype=float).copy()
    if x.ndim != 1 or x.size == 0:
        raise ConfigurationError("x0 must be a non-empty 1-d sequence")
    lo = np.full(x.size, -np.inf)
    hi = np.full(x.size, np.inf)
    if bounds is not None:
        if len(bounds) != x.size:
            raise ConfigurationError("bounds length must match x0")
        for i, (a, b) in enumerate(bounds):
            if a is not None:
                lo[i] = a
            if b is not None:
                hi[i] = b
        if np.any(lo > hi):
            raise ConfigurationError("lower bound exceeds upper bound")
        x = np.clip(x, lo, hi)

    r = np.asarray(residual_fn(x), dtype=float)
    cost = 0.5 * float(r @ r)
    lam = lambda0
    converged = False
    it = 0
    jac = None
    for it in range(1, max_iterations + 1):
        jac = _jacobian(residual_fn, x, r, rel_step)
        jtj = jac.T @ jac
        jtr = jac.T @ r
        accepted = False
        for _ in range(25):
            a = jtj + lam * np.diag(np.maximum(np.diag(jtj), 1e-12))
            try:
                step = np.linalg.solve(a, -jtr)
            except np.linalg.LinAlgError:
                lam *= 10.0
                continue
            x_try = np.clip(x + step, lo, hi)
            r_try = np.asarray(residual_fn(x_try), dtype=float)
            cost_try = 0.5 * float(r_try @ r_try)
            if np.isfinite(cost_try) and cost_try < cost:
                rel_decrease = (cost - cost_try) / max(cost, 1e-300)
                step_norm = np.linalg.norm(x_try - x)
                x, r, cost = x_try, r_try, cost_try
                lam = max(lam / 10.0, 1e-14)
                accepted = True
                if step_norm < step_tolerance * (1.0 + np.linalg.norm(x)) \
                        or rel_decrease < cost_tolerance:
                    converged = True
                break
            lam *= 10.0
        if not accepted:
            # no downhill step at any damping: treat as converged at x
            converged = True
        if converged:
            break

    cov = None
    dof = r.size - x.size
    if jac is not None and dof > 0:
        try:
            jtj_inv = np.linalg.inv(jac.T @ jac)
            cov = (2.0 * cost / dof) * jtj_inv
        except np.linalg.LinAlgError:
            cov = None
    return LMResult(params=x, cost=cost, converged=converged,
                    n_iterations=it, covariance=cov)
