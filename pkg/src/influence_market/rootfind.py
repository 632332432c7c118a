"""Bisection for monotone scalar equations.

Every closed-form object in this package is anchored by roots of monotone
functions (posterior mixing weights, virtual-type thresholds, quantile
inversion), so one robust bracketing routine covers all of them.
"""

from __future__ import annotations

from typing import Callable

from .errors import InternalError
from .tolerances import ROOT_TOL

_MAX_ITER = 200


def bisect_increasing(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    target: float,
    tol: float = ROOT_TOL,
) -> float:
    """Return x in [lo, hi] with |f(x) - target| <= tol for weakly increasing f.

    Raises ValueError when [lo, hi] does not bracket the target and
    InternalError when the bracket collapses without meeting the residual
    tolerance (which for the smooth functions used here indicates a bug).
    """
    if not lo <= hi:
        raise ValueError(f"empty bracket [{lo}, {hi}]")
    flo = f(lo) - target
    fhi = f(hi) - target
    if abs(flo) <= tol:
        return lo
    if abs(fhi) <= tol:
        return hi
    if flo > 0.0 or fhi < 0.0:
        raise ValueError(
            f"target {target} not bracketed on [{lo}, {hi}]: f(lo)-target={flo:.3e}, "
            f"f(hi)-target={fhi:.3e}"
        )
    best_x, best_res = lo, abs(flo)
    for _ in range(_MAX_ITER):
        mid = 0.5 * (lo + hi)
        res = f(mid) - target
        if abs(res) < best_res:
            best_x, best_res = mid, abs(res)
        if abs(res) <= tol:
            return mid
        if res < 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 4.0 * 2.3e-16 * max(1.0, abs(lo), abs(hi)):
            break
    if best_res <= 100.0 * tol:
        return best_x
    raise InternalError(
        f"bisection stalled: best residual {best_res:.3e} exceeds tolerance {tol:.1e}"
    )
