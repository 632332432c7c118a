"""Sender-type distributions, virtual types, and the screening thresholds.

Types theta live on a compact interval and weight the two risky actions:
value (1 - theta) q_L + theta q_R.  Screening with countervailing
incentives is governed by the two virtual types
    phi_plus(theta)  = theta - (1 - F) / f,
    phi_minus(theta) = theta + F / f,
whose root crossings locate every menu threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .errors import AssumptionError, DistributionError, ScopeError
from .model import Environment, geometry
from .rootfind import bisect_increasing
from .tolerances import ROOT_TOL

A1_GRID = 2000
VALIDATE_GRID = 1000


class TypeDistribution:
    """Base distribution over sender types on [theta_low, theta_high].

    Subclasses supply cdf/pdf; generic quantile inversion and partial means
    fall back to bisection and adaptive quadrature.
    """

    theta_low: float
    theta_high: float

    def cdf(self, theta: float) -> float:
        raise NotImplementedError

    def pdf(self, theta: float) -> float:
        raise NotImplementedError

    def ppf(self, u: float) -> float:
        """Quantile function; residual |F(x) - u| <= 1e-10 guaranteed."""
        if not 0.0 <= u <= 1.0:
            raise DistributionError(f"quantile level {u} outside [0, 1]")
        return bisect_increasing(self.cdf, self.theta_low, self.theta_high, u, tol=1e-12)

    def partial_mean(self, a: float, b: float) -> float:
        """Integral of theta * f(theta) over [a, b]."""
        if a >= b:
            return 0.0
        value, _ = quad(lambda t: t * self.pdf(t), a, b, epsabs=1e-10, limit=200)
        return value

    def mirrored(self) -> "TypeDistribution":
        """Distribution of 1 - theta."""
        return _MirroredDistribution(self)

    def _check_support(self, theta: float) -> None:
        if not self.theta_low <= theta <= self.theta_high:
            raise ValueError(
                f"theta {theta} outside support [{self.theta_low}, {self.theta_high}]"
            )

    def validate(self, grid: int = VALIDATE_GRID) -> None:
        """Check CDF endpoints, monotonicity, density positivity and CDF/PDF consistency."""
        if not self.theta_low < self.theta_high:
            raise DistributionError(
                f"need theta_low < theta_high, got [{self.theta_low}, {self.theta_high}]"
            )
        if abs(self.cdf(self.theta_low)) > 1e-12:
            raise DistributionError(f"cdf(theta_low) = {self.cdf(self.theta_low)}, need 0")
        if abs(self.cdf(self.theta_high) - 1.0) > 1e-12:
            raise DistributionError(f"cdf(theta_high) = {self.cdf(self.theta_high)}, need 1")
        ts = np.linspace(self.theta_low, self.theta_high, grid)
        cs = np.array([self.cdf(t) for t in ts])
        if np.any(np.diff(cs) < -1e-12):
            i = int(np.argmin(np.diff(cs)))
            raise DistributionError(f"cdf decreases between theta={ts[i]} and {ts[i + 1]}")
        for t in ts:
            if self.pdf(float(t)) <= 0.0:
                raise DistributionError(f"pdf({t}) <= 0 on the support")
        # Deterministic low-discrepancy subintervals for the quadrature check.
        width = self.theta_high - self.theta_low
        x = 0.5
        for _ in range(8):
            x = (x + 0.6180339887498949) % 1.0
            a = self.theta_low + 0.8 * width * x
            b = min(a + 0.15 * width, self.theta_high)
            mass, _ = quad(self.pdf, a, b, epsabs=1e-9, limit=200)
            if abs(self.cdf(b) - self.cdf(a) - mass) > 1e-6:
                raise DistributionError(
                    f"cdf and pdf disagree on [{a}, {b}]: "
                    f"delta-cdf {self.cdf(b) - self.cdf(a)} vs integral {mass}"
                )


@dataclass(frozen=True)
class Uniform(TypeDistribution):
    """Uniform distribution on [theta_low, theta_high]."""

    theta_low: float
    theta_high: float

    def __post_init__(self) -> None:
        if not self.theta_low < self.theta_high:
            raise DistributionError(
                f"need theta_low < theta_high, got [{self.theta_low}, {self.theta_high}]"
            )

    def cdf(self, theta: float) -> float:
        if theta <= self.theta_low:
            return 0.0
        if theta >= self.theta_high:
            return 1.0
        return (theta - self.theta_low) / (self.theta_high - self.theta_low)

    def pdf(self, theta: float) -> float:
        if self.theta_low <= theta <= self.theta_high:
            return 1.0 / (self.theta_high - self.theta_low)
        return 0.0

    def ppf(self, u: float) -> float:
        if not 0.0 <= u <= 1.0:
            raise DistributionError(f"quantile level {u} outside [0, 1]")
        return self.theta_low + u * (self.theta_high - self.theta_low)

    def partial_mean(self, a: float, b: float) -> float:
        a = max(a, self.theta_low)
        b = min(b, self.theta_high)
        if a >= b:
            return 0.0
        return 0.5 * (b * b - a * a) / (self.theta_high - self.theta_low)

    def mirrored(self) -> "Uniform":
        return Uniform(1.0 - self.theta_high, 1.0 - self.theta_low)


@dataclass(frozen=True)
class PiecewiseLinearCDF(TypeDistribution):
    """Distribution given by CDF knots ((theta_0, 0), ..., (theta_k, 1)).

    The CDF interpolates linearly, so the density is piecewise constant and
    must be strictly positive (strictly increasing CDF values).
    """

    knots: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        if len(self.knots) < 2:
            raise DistributionError("need at least two CDF knots")
        ts = [k[0] for k in self.knots]
        fs = [k[1] for k in self.knots]
        if any(t2 <= t1 for t1, t2 in zip(ts, ts[1:])):
            raise DistributionError("knot abscissae must be strictly increasing")
        if any(f2 <= f1 for f1, f2 in zip(fs, fs[1:])):
            raise DistributionError(
                "CDF knot values must be strictly increasing (zero-density pieces unsupported)"
            )
        if abs(fs[0]) > 1e-12 or abs(fs[-1] - 1.0) > 1e-12:
            raise DistributionError("CDF knots must run from 0 to 1")
        object.__setattr__(self, "theta_low", ts[0])
        object.__setattr__(self, "theta_high", ts[-1])

    def _ts(self) -> np.ndarray:
        return np.array([k[0] for k in self.knots])

    def _fs(self) -> np.ndarray:
        return np.array([k[1] for k in self.knots])

    def cdf(self, theta: float) -> float:
        if theta <= self.theta_low:
            return 0.0
        if theta >= self.theta_high:
            return 1.0
        return float(np.interp(theta, self._ts(), self._fs()))

    def pdf(self, theta: float) -> float:
        ts, fs = self._ts(), self._fs()
        if not ts[0] <= theta <= ts[-1]:
            return 0.0
        i = int(np.searchsorted(ts, theta, side="right")) - 1
        i = min(max(i, 0), len(ts) - 2)
        return float((fs[i + 1] - fs[i]) / (ts[i + 1] - ts[i]))

    def ppf(self, u: float) -> float:
        if not 0.0 <= u <= 1.0:
            raise DistributionError(f"quantile level {u} outside [0, 1]")
        return float(np.interp(u, self._fs(), self._ts()))

    def partial_mean(self, a: float, b: float) -> float:
        a = max(a, self.theta_low)
        b = min(b, self.theta_high)
        if a >= b:
            return 0.0
        ts, fs = self._ts(), self._fs()
        total = 0.0
        for i in range(len(ts) - 1):
            lo, hi = max(a, float(ts[i])), min(b, float(ts[i + 1]))
            if lo >= hi:
                continue
            density = (fs[i + 1] - fs[i]) / (ts[i + 1] - ts[i])
            total += 0.5 * density * (hi * hi - lo * lo)
        return total

    def mirrored(self) -> "PiecewiseLinearCDF":
        flipped = tuple((1.0 - t, 1.0 - f) for t, f in reversed(self.knots))
        return PiecewiseLinearCDF(flipped)


class FunctionDistribution(TypeDistribution):
    """Distribution from user-supplied cdf/pdf evaluators; validated on construction."""

    def __init__(self, theta_low: float, theta_high: float, cdf, pdf):
        self.theta_low = theta_low
        self.theta_high = theta_high
        self._cdf = cdf
        self._pdf = pdf
        self.validate()

    def cdf(self, theta: float) -> float:
        return float(self._cdf(theta))

    def pdf(self, theta: float) -> float:
        return float(self._pdf(theta))


class _MirroredDistribution(TypeDistribution):
    """View of another distribution under theta -> 1 - theta."""

    def __init__(self, base: TypeDistribution):
        self._base = base
        self.theta_low = 1.0 - base.theta_high
        self.theta_high = 1.0 - base.theta_low

    def cdf(self, theta: float) -> float:
        return 1.0 - self._base.cdf(1.0 - theta)

    def pdf(self, theta: float) -> float:
        return self._base.pdf(1.0 - theta)

    def ppf(self, u: float) -> float:
        return 1.0 - self._base.ppf(1.0 - u)

    def partial_mean(self, a: float, b: float) -> float:
        mass = self._base.cdf(1.0 - a) - self._base.cdf(1.0 - b)
        return mass - self._base.partial_mean(1.0 - b, 1.0 - a)

    def mirrored(self) -> TypeDistribution:
        return self._base


def virtual_plus(dist: TypeDistribution, theta: float) -> float:
    """phi_plus(theta) = theta - (1 - F(theta)) / f(theta)."""
    dist._check_support(theta)
    f = dist.pdf(theta)
    if f <= 0.0:
        raise DistributionError(f"pdf({theta}) <= 0; virtual type undefined")
    return theta - (1.0 - dist.cdf(theta)) / f


def virtual_minus(dist: TypeDistribution, theta: float) -> float:
    """phi_minus(theta) = theta + F(theta) / f(theta)."""
    dist._check_support(theta)
    f = dist.pdf(theta)
    if f <= 0.0:
        raise DistributionError(f"pdf({theta}) <= 0; virtual type undefined")
    return theta + dist.cdf(theta) / f


@dataclass(frozen=True)
class AssumptionReport:
    """Outcome of the regularity (A1) and bounded-extremism (A2) checks."""

    a1_ok: bool
    a1_witness: tuple[float, float, str] | None
    a2_ok: bool
    a2_failures: tuple[str, ...]
    all_types_moderate: bool


def check_assumptions(
    dist: TypeDistribution, env: Environment, grid: int = A1_GRID
) -> AssumptionReport:
    """Grid-check A1 (both virtual types strictly increasing) and the A2 bounds.

    The A2 support bounds are evaluated in cross-multiplied form so the
    kappa_L = +inf case needs no special arithmetic.
    """
    ts = np.linspace(dist.theta_low, dist.theta_high, grid)
    a1_ok, witness = True, None
    prev_p = prev_m = -math.inf
    for t in ts:
        t = float(t)
        vp, vm = virtual_plus(dist, t), virtual_minus(dist, t)
        if vp <= prev_p:
            a1_ok, witness = False, (prev_t, t, "phi_plus")
            break
        if vm <= prev_m:
            a1_ok, witness = False, (prev_t, t, "phi_minus")
            break
        prev_p, prev_m, prev_t = vp, vm, t

    ml, mh = env.mu_low, env.mu_high
    failures: list[str] = []
    if not dist.theta_low < 0.5:
        failures.append(f"theta_low {dist.theta_low} >= 1/2 (neutral sender not in support)")
    if not dist.theta_high > 0.5:
        failures.append(f"theta_high {dist.theta_high} <= 1/2 (neutral sender not in support)")
    if 2.0 * mh > 1.0 + ml:  # kappa_L > 1
        if not dist.theta_low * (2.0 * mh - ml - 1.0) + (1.0 - mh) > 0.0:
            failures.append(
                f"theta_low {dist.theta_low} <= -1/(kappa_L - 1) (left extremism unbounded)"
            )
    if 2.0 * ml < mh:  # kappa_R < 1
        if not dist.theta_high * (mh - 2.0 * ml) < mh - ml:
            failures.append(
                f"theta_high {dist.theta_high} >= 1/(1 - kappa_R) (right extremism unbounded)"
            )
    moderate = dist.theta_low >= 0.0 and dist.theta_high <= 1.0
    return AssumptionReport(a1_ok, witness, not failures, tuple(failures), moderate)


@dataclass(frozen=True)
class Thresholds:
    """Virtual-type roots splitting the type line into menu segments.

    theta_star:        phi_minus = 1/2 (left/equalizing boundary)
    theta_star_star_B: phi_plus = 1/2 (equalizing/right boundary, balanced shape)
    theta_star_star_U: phi_minus = 1/(1 - kappa_R), or theta_high when unattained
    theta_dagger:      phi_plus = 1/(1 - kappa_R), present iff attained (relaxed A2)
    theta_double_dagger: phi_minus = -1/(kappa_L - 1), present iff attained (relaxed A2)
    """

    theta_star: float
    theta_star_star_B: float
    theta_star_star_U: float
    theta_dagger: float | None
    theta_double_dagger: float | None


def solve_thresholds(dist: TypeDistribution, env: Environment) -> Thresholds:
    """Solve the virtual-type threshold equations by bisection.

    Requires A1 (strictly increasing virtual types; no ironing support) and a
    support containing the neutral type 1/2.
    """
    report = check_assumptions(dist, env)
    if not report.a1_ok:
        lo, hi, fn = report.a1_witness
        raise DistributionError(
            f"{fn} not strictly increasing between theta={lo} and theta={hi}; "
            "ironing is not supported"
        )
    if not dist.theta_low < 0.5 < dist.theta_high:
        raise ScopeError(
            f"type support [{dist.theta_low}, {dist.theta_high}] must contain theta = 1/2"
        )
    lo, hi = dist.theta_low, dist.theta_high
    vp = lambda t: virtual_plus(dist, t)
    vm = lambda t: virtual_minus(dist, t)
    theta_star = bisect_increasing(vm, lo, 0.5, 0.5, tol=ROOT_TOL)
    theta_bb = bisect_increasing(vp, 0.5, hi, 0.5, tol=ROOT_TOL)

    ml, mh = env.mu_low, env.mu_high
    theta_bu = hi
    theta_dagger = None
    theta_ddagger = None
    if 2.0 * ml < mh:  # kappa_R < 1: the face-3 slope target is finite
        target = (mh - ml) / (mh - 2.0 * ml)  # 1 / (1 - kappa_R)
        if vm(hi) >= target:
            theta_bu = bisect_increasing(vm, theta_star, hi, target, tol=ROOT_TOL)
        if vp(hi) >= target:
            theta_dagger = bisect_increasing(vp, lo, hi, target, tol=ROOT_TOL)
    if 2.0 * mh > 1.0 + ml:  # kappa_L > 1
        target = -(1.0 - mh) / (2.0 * mh - ml - 1.0)  # -1 / (kappa_L - 1)
        if vm(lo) <= target:
            theta_ddagger = bisect_increasing(vm, lo, 0.5, target, tol=ROOT_TOL)
    return Thresholds(theta_star, theta_bb, theta_bu, theta_dagger, theta_ddagger)


def require_assumptions(dist: TypeDistribution, env: Environment) -> AssumptionReport:
    """Raise AssumptionError unless A1 and A2 both hold; return the report."""
    report = check_assumptions(dist, env)
    if not report.a1_ok:
        lo, hi, fn = report.a1_witness
        raise AssumptionError(
            f"regularity (A1) fails: {fn} not increasing between {lo} and {hi}"
        )
    if not report.a2_ok:
        raise AssumptionError(
            "bounded extremism (A2) fails: " + "; ".join(report.a2_failures)
        )
    return report
