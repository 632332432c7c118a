"""Optimal menus sold by the intermediary: first-best, screening, extensions.

A menu assigns each sender type a bundle and a payment.  Incentive
compatibility makes the indirect utility U piecewise linear with slope
q_R - q_L, so prices follow from the envelope once the zero-rent type
theta0 is known; every builder here exploits that.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace

import numpy as np

from .distributions import (
    TypeDistribution,
    Thresholds,
    require_assumptions,
    solve_thresholds,
)
from .errors import AssumptionError, InternalError, ScopeError
from .model import (
    ACTION_L,
    ACTION_R,
    Atom,
    Classification,
    Environment,
    Experiment,
    InfluenceBundle,
    bundle_to_experiment,
    equalizing_bundle,
    geometry,
    mirror,
    mirror_bundle,
    mirror_environment,
    receiver_value,
    sender_value,
)
from .tolerances import FEAS_TOL, GEOM_TOL

KIND_FIRST_BEST = "first_best"
KIND_BALANCED = "balanced"
KIND_UNBALANCED = "unbalanced"
KIND_EXTENDED = "extended"
KIND_COERCIVE = "coercive"

_MIRROR_LABEL = {"L*": "R*", "R*": "L*", "L0*": "R0*", "R0*": "L0*", "eq": "eq", "B": "B"}


@dataclass(frozen=True)
class Segment:
    """One menu item: the types [theta_lo, theta_hi) buying a bundle at a price.

    The price is affine in the type (intercept + slope * theta); screening
    menus use constant prices (slope 0), the first-best schedule does not.
    """

    theta_lo: float
    theta_hi: float
    bundle: InfluenceBundle
    price_intercept: float
    price_slope: float = 0.0
    label: str = ""

    def price_at(self, theta: float) -> float:
        return self.price_intercept + self.price_slope * theta

    @property
    def price(self) -> float:
        if self.price_slope != 0.0:
            raise ValueError("segment price varies with the type; use price_at()")
        return self.price_intercept


@dataclass(frozen=True)
class Menu:
    """Sorted segments covering the type support, plus the zero-rent anchor.

    Indirect utility satisfies U(theta0) = anchor_utility (zero except for
    coercive menus, whose participation floor is the outside option's value).
    """

    kind: str
    env: Environment
    segments: tuple[Segment, ...]
    theta0: float
    anchor_utility: float = 0.0
    outside_option: InfluenceBundle | None = None

    @property
    def theta_low(self) -> float:
        return self.segments[0].theta_lo

    @property
    def theta_high(self) -> float:
        return self.segments[-1].theta_hi

    def segment_at(self, theta: float) -> Segment:
        """Segment serving a type; interior knots belong to the right segment."""
        if not self.theta_low <= theta <= self.theta_high:
            raise ValueError(
                f"theta {theta} outside menu support [{self.theta_low}, {self.theta_high}]"
            )
        for seg in reversed(self.segments):
            if theta >= seg.theta_lo:
                return seg
        return self.segments[0]

    def interior_knots(self) -> tuple[float, ...]:
        return tuple(seg.theta_lo for seg in self.segments[1:])


def indirect_utility(menu: Menu, theta: float) -> float:
    """Sender surplus U(theta) = value of the assigned bundle minus its price."""
    seg = menu.segment_at(theta)
    return sender_value(seg.bundle, theta) - seg.price_at(theta)


def revenue(menu: Menu, dist: TypeDistribution) -> float:
    """Expected payment collected from a sender drawn from dist.

    Constant prices integrate against segment masses exactly; affine prices
    (first-best) use the distribution's exact partial means where available.
    """
    total = 0.0
    for seg in menu.segments:
        lo = max(seg.theta_lo, dist.theta_low)
        hi = min(seg.theta_hi, dist.theta_high)
        if lo >= hi:
            continue
        mass = dist.cdf(hi) - dist.cdf(lo)
        total += seg.price_intercept * mass
        if seg.price_slope != 0.0:
            total += seg.price_slope * dist.partial_mean(lo, hi)
    return total


def _mirror_menu(menu: Menu) -> Menu:
    """Reflect a menu solved on the mirrored instance back to the original."""
    segs = tuple(
        Segment(
            theta_lo=1.0 - seg.theta_hi,
            theta_hi=1.0 - seg.theta_lo,
            bundle=mirror_bundle(seg.bundle),
            price_intercept=seg.price_intercept + seg.price_slope,
            price_slope=-seg.price_slope,
            label=_MIRROR_LABEL.get(seg.label, seg.label),
        )
        for seg in reversed(menu.segments)
    )
    return Menu(
        kind=menu.kind,
        env=mirror_environment(menu.env),
        segments=segs,
        theta0=1.0 - menu.theta0,
        anchor_utility=menu.anchor_utility,
        outside_option=None if menu.outside_option is None else mirror_bundle(menu.outside_option),
    )


def first_best(env: Environment, dist: TypeDistribution) -> Menu:
    """Full-information benchmark: type-specific bundle priced at full value.

    Types below 1/2 receive the L-favoring extreme point, types above the
    R-favoring one, each paying exactly their value (U identically zero).
    """
    report = require_assumptions(dist, env)
    del report
    geo = geometry(env)
    segs = []
    for lo, hi, bundle, label in (
        (dist.theta_low, 0.5, geo.l_star, "L*"),
        (0.5, dist.theta_high, geo.r_star, "R*"),
    ):
        if lo >= hi:
            continue
        segs.append(
            Segment(lo, hi, bundle, price_intercept=bundle.q_L, price_slope=bundle.slope, label=label)
        )
    return Menu(KIND_FIRST_BEST, env, tuple(segs), theta0=0.5)


def _balanced_menu(env: Environment, dist: TypeDistribution, th: Thresholds) -> Menu:
    geo = geometry(env)
    eq = InfluenceBundle(0.5, 0.5)
    segs = (
        Segment(dist.theta_low, th.theta_star, geo.l_star,
                sender_value(geo.l_star, th.theta_star), label="L*"),
        Segment(th.theta_star, th.theta_star_star_B, eq, 0.5, label="eq"),
        Segment(th.theta_star_star_B, dist.theta_high, geo.r_star,
                sender_value(geo.r_star, th.theta_star_star_B), label="R*"),
    )
    return Menu(KIND_BALANCED, env, segs, theta0=0.5)


def _unbalanced_menu(env: Environment, dist: TypeDistribution, th: Thresholds) -> Menu:
    geo = geometry(env)
    bee = equalizing_bundle(env)
    theta_u = th.theta_star_star_U
    price_r = sender_value(geo.r_star, theta_u)  # U(theta_u) = 0
    # Walking the envelope down from theta_u, U gains the R* slope backwards:
    u_at_star = (theta_u - th.theta_star) * (geo.r_star.q_L - geo.r_star.q_R)
    price_l = sender_value(geo.l_star, th.theta_star) - u_at_star
    segs = [
        Segment(dist.theta_low, th.theta_star, geo.l_star, price_l, label="L*"),
        Segment(th.theta_star, theta_u, geo.r_star, price_r, label="R*"),
    ]
    if theta_u < dist.theta_high:
        segs.append(Segment(theta_u, dist.theta_high, bee, bee.q_L, label="B"))
    return Menu(KIND_UNBALANCED, env, tuple(segs), theta0=dist.theta_high)


def optimal_menu(env: Environment, dist: TypeDistribution) -> Menu:
    """Revenue-maximizing screening menu under A1-A2.

    Mirror-unbalanced instances are relabeled, solved, and reflected back.
    Boundary classifications fall to the balanced solver (the equalizing
    bundle then coincides with an extreme point) with a warning.
    """
    cls = geometry(env).classification
    if cls is Classification.MIRROR_UNBALANCED:
        menv, mdist = mirror(env, dist)
        return _mirror_menu(optimal_menu(menv, mdist))
    require_assumptions(dist, env)
    th = solve_thresholds(dist, env)
    if cls.balanced_family:
        if cls is not Classification.BALANCED:
            warnings.warn(
                f"boundary classification {cls.value}: using the balanced-shape menu",
                stacklevel=2,
            )
        return _balanced_menu(env, dist, th)
    return _unbalanced_menu(env, dist, th)


def extended_menu(env: Environment, dist: TypeDistribution) -> Menu:
    """Balanced-shape menu with the A2 support bounds relaxed.

    When extremists beyond the A2 bounds exist, the menu gains a cheap tail
    item on each affected side: the face extreme point R0* above theta_dagger
    and L0* below theta_double_dagger.  With A2 intact this reduces exactly
    to optimal_menu.  The unbalanced analogue is uncharacterized here and
    raises NotImplementedError.
    """
    cls = geometry(env).classification
    if not cls.balanced_family:
        raise NotImplementedError(
            f"extended menu is characterized only for the balanced shape, got {cls.value}"
        )
    th = solve_thresholds(dist, env)
    if th.theta_dagger is None and th.theta_double_dagger is None:
        return optimal_menu(env, dist)
    geo = geometry(env)
    eq = InfluenceBundle(0.5, 0.5)
    segs: list[Segment] = []
    lo_interior = dist.theta_low
    hi_interior = dist.theta_high
    if th.theta_double_dagger is not None and th.theta_double_dagger > dist.theta_low:
        lo_interior = th.theta_double_dagger
        u_there = (th.theta_star - th.theta_double_dagger) * (-geo.l_star.slope)
        segs.append(
            Segment(
                dist.theta_low,
                th.theta_double_dagger,
                geo.l0_star,
                sender_value(geo.l0_star, th.theta_double_dagger) - u_there,
                label="L0*",
            )
        )
    segs.append(
        Segment(lo_interior, th.theta_star, geo.l_star,
                sender_value(geo.l_star, th.theta_star), label="L*")
    )
    segs.append(Segment(th.theta_star, th.theta_star_star_B, eq, 0.5, label="eq"))
    if th.theta_dagger is not None and th.theta_dagger < dist.theta_high:
        hi_interior = th.theta_dagger
    segs.append(
        Segment(th.theta_star_star_B, hi_interior, geo.r_star,
                sender_value(geo.r_star, th.theta_star_star_B), label="R*")
    )
    if th.theta_dagger is not None and th.theta_dagger < dist.theta_high:
        u_there = (th.theta_dagger - th.theta_star_star_B) * geo.r_star.slope
        segs.append(
            Segment(
                th.theta_dagger,
                dist.theta_high,
                geo.r0_star,
                sender_value(geo.r0_star, th.theta_dagger) - u_there,
                label="R0*",
            )
        )
    return Menu(KIND_EXTENDED, env, tuple(segs), theta0=0.5)


@dataclass(frozen=True)
class CoercionSolution:
    """Outcome of the coercive design: menu, outside option, gain over screening.

    flag values:
      constructed    -- coercive type is extremist-right and the closed form applies
      not_established -- theta**_U <= 1: coercion brings no established gain
      necessary_but_uncharacterized -- coercion helps but no closed form; use the LP oracle
      inapplicable_balanced -- balanced shape: threat point (0, 0) when all types are
                               moderate, otherwise defer to the LP oracle
    """

    menu: Menu
    outside_option: InfluenceBundle
    revenue_gain: float
    flag: str
    baseline_revenue: float
    coercive_revenue: float


def coercion_menu(env: Environment, dist: TypeDistribution) -> CoercionSolution:
    """Optimal menu when the intermediary also commits to a threat experiment.

    In the unbalanced shape with theta**_U > 1 >= theta**_B the threat is
    C* = (1 - 2 mu_prior / mu_high, 0): the whole upper segment then buys the
    R-favoring extreme point at price mu_prior / mu_high.
    """
    cls = geometry(env).classification
    if cls is Classification.MIRROR_UNBALANCED:
        menv, mdist = mirror(env, dist)
        sol = coercion_menu(menv, mdist)
        return replace(
            sol,
            menu=_mirror_menu(sol.menu),
            outside_option=mirror_bundle(sol.outside_option),
        )
    require_assumptions(dist, env)
    baseline = optimal_menu(env, dist)
    base_rev = revenue(baseline, dist)
    if cls.balanced_family:
        flag = "inapplicable_balanced"
        return CoercionSolution(baseline, InfluenceBundle(0.0, 0.0), 0.0, flag, base_rev, base_rev)
    th = solve_thresholds(dist, env)
    if th.theta_star_star_U <= 1.0:
        return CoercionSolution(
            baseline, InfluenceBundle(0.0, 0.0), 0.0, "not_established", base_rev, base_rev
        )
    if th.theta_star_star_B > 1.0:
        return CoercionSolution(
            baseline,
            InfluenceBundle(0.0, 0.0),
            0.0,
            "necessary_but_uncharacterized",
            base_rev,
            base_rev,
        )
    geo = geometry(env)
    threat = InfluenceBundle(1.0 - 2.0 * env.mu_prior / env.mu_high, 0.0)
    # u(C*, theta) falls at the same rate as U along the R* segment, so the
    # coerced participation constraint binds there identically and the R*
    # price is type-free: u(R*, theta) - u(C*, theta) = mu_prior / mu_high.
    price_r = env.mu_prior / env.mu_high
    price_l = sender_value(geo.l_star, th.theta_star) - sender_value(threat, th.theta_star)
    segs = (
        Segment(dist.theta_low, th.theta_star, geo.l_star, price_l, label="L*"),
        Segment(th.theta_star, dist.theta_high, geo.r_star, price_r, label="R*"),
    )
    menu = Menu(
        KIND_COERCIVE,
        env,
        segs,
        theta0=dist.theta_high,
        anchor_utility=sender_value(threat, dist.theta_high),
        outside_option=threat,
    )
    coercive_rev = revenue(menu, dist)
    return CoercionSolution(
        menu, threat, coercive_rev - base_rev, "constructed", base_rev, coercive_rev
    )


@dataclass(frozen=True)
class AccessSolution:
    """Posted-price benchmark: one price for full information access."""

    price: float
    buying_set: tuple[tuple[float, float], ...]
    revenue: float


def _wtp_pieces(env: Environment, dist: TypeDistribution) -> list[tuple[float, float, InfluenceBundle]]:
    geo = geometry(env)
    pieces = []
    if dist.theta_low < 0.5:
        pieces.append((dist.theta_low, min(0.5, dist.theta_high), geo.l_star))
    if dist.theta_high > 0.5:
        pieces.append((max(0.5, dist.theta_low), dist.theta_high, geo.r_star))
    return pieces


def willingness_to_pay(env: Environment, dist: TypeDistribution, theta: float) -> float:
    """First-best value of information access for a type (the access demand curve)."""
    for lo, hi, bundle in _wtp_pieces(env, dist):
        if lo <= theta <= hi:
            return sender_value(bundle, theta)
    raise ValueError(f"theta {theta} outside support")


def access_pricing(env: Environment, dist: TypeDistribution) -> AccessSolution:
    """Optimal single posted price for access to the first-best experiment.

    Revenue p * Pr(WTP >= p) is piecewise quadratic in p between structural
    breakpoints (piece endpoints and CDF knots), so scanning breakpoints plus
    interior vertices is exact for the built-in distributions; indifferent
    types are counted as buyers.
    """
    require_assumptions(dist, env)
    pieces = _wtp_pieces(env, dist)

    def buyers(price: float) -> list[tuple[float, float]]:
        out = []
        for lo, hi, bundle in pieces:
            v_lo = sender_value(bundle, lo)
            v_hi = sender_value(bundle, hi)
            s = bundle.slope
            if abs(s) < 1e-15:
                if v_lo >= price - FEAS_TOL:
                    out.append((lo, hi))
                continue
            cut = (price - bundle.q_L) / s
            if abs(cut - lo) < 1e-9:
                cut = lo
            elif abs(cut - hi) < 1e-9:
                cut = hi
            if s > 0:
                if v_hi >= price - FEAS_TOL:
                    out.append((max(lo, min(cut, hi)), hi))
            else:
                if v_lo >= price - FEAS_TOL:
                    out.append((lo, min(hi, max(cut, lo))))
        merged: list[tuple[float, float]] = []
        for lo, hi in sorted(out):
            if hi - lo <= 0.0:
                continue
            if merged and lo <= merged[-1][1] + 1e-12:
                merged[-1] = (merged[-1][0], max(hi, merged[-1][1]))
            else:
                merged.append((lo, hi))
        return merged

    def measure(price: float) -> float:
        return sum(dist.cdf(hi) - dist.cdf(lo) for lo, hi in buyers(price))

    anchor_thetas = {lo for lo, _, _ in pieces} | {hi for _, hi, _ in pieces}
    knots = getattr(dist, "knots", ())
    anchor_thetas |= {float(t) for t, _ in knots}
    breakpoints = sorted({willingness_to_pay(env, dist, t) for t in anchor_thetas if t is not None})
    candidates = list(breakpoints)
    for p1, p2 in zip(breakpoints, breakpoints[1:]):
        if p2 - p1 <= 1e-12:
            continue
        # measure() is affine in p strictly between breakpoints for the
        # built-in distributions; recover it from two interior samples and
        # add the vertex of p * (alpha + beta p) when interior.
        pa = p1 + (p2 - p1) / 3.0
        pb = p1 + 2.0 * (p2 - p1) / 3.0
        ma, mb = measure(pa), measure(pb)
        beta = (mb - ma) / (pb - pa)
        alpha = ma - beta * pa
        if abs(beta) > 1e-12:
            vertex = -alpha / (2.0 * beta)
            if p1 < vertex < p2:
                candidates.append(vertex)
    best_price, best_rev = None, -1.0
    for p in sorted(candidates):
        rev = p * measure(p)
        if rev > best_rev + 1e-15:
            best_price, best_rev = p, rev
    return AccessSolution(best_price, tuple(buyers(best_price)), best_rev)


@dataclass(frozen=True)
class PriorShiftReport:
    """Effect of a small prior reduction on thresholds and sender surplus."""

    delta: float
    classification: Classification
    knots_base: tuple[float, ...]
    knots_shifted: tuple[float, ...]
    max_threshold_shift: float
    thetas: tuple[float, ...]
    delta_utility: tuple[float, ...]
    pattern: tuple[tuple[float, float, str, bool], ...]
    pattern_ok: bool


def comparative_statics(
    env: Environment, dist: TypeDistribution, delta: float, grid: int = 201
) -> PriorShiftReport:
    """Compare optimal menus at prior mu_prior and mu_prior - delta.

    Thresholds are invariant to the prior (they only involve virtual types
    and face slopes), which is asserted to 1e-10.  The report classifies the
    sign of the surplus change segment by segment: in the balanced shape a
    reduction helps L-leaning types and hurts R-leaning ones; in the
    unbalanced shape it helps every type below theta**_U.
    """
    if delta < 0.0:
        raise ValueError("delta must be a (weak) reduction of the prior")
    cls = geometry(env).classification
    if cls is Classification.MIRROR_UNBALANCED:
        raise ScopeError(
            "prior-reduction statics are characterized for balanced/unbalanced shapes; "
            "mirror the instance first"
        )
    shifted_env = Environment(env.mu_low, env.mu_prior - delta, env.mu_high)
    cls2 = geometry(shifted_env).classification
    if cls2 is not cls:
        boundary = (
            "2 mu_prior = mu_high"
            if cls2 in (Classification.UNBALANCED, Classification.BOUNDARY_BALANCED_UNBALANCED)
            else "2 mu_prior = 1 + mu_low"
        )
        raise ScopeError(
            f"prior reduction crosses the classification boundary {boundary}: "
            f"{cls.value} -> {cls2.value}"
        )
    base = optimal_menu(env, dist)
    shifted = optimal_menu(shifted_env, dist)
    knots_b, knots_s = base.interior_knots(), shifted.interior_knots()
    if len(knots_b) != len(knots_s):
        raise InternalError("segment structure changed under an in-shape prior reduction")
    max_shift = max((abs(a - b) for a, b in zip(knots_b, knots_s)), default=0.0)
    if max_shift > 1e-10:
        raise InternalError(f"thresholds moved by {max_shift:.3e} under a prior reduction")

    thetas = np.linspace(dist.theta_low, dist.theta_high, grid)
    du = np.array([indirect_utility(shifted, t) - indirect_utility(base, t) for t in thetas])

    if cls.balanced_family:
        expected = [
            (dist.theta_low, knots_b[0], "positive"),
            (knots_b[0], knots_b[1], "zero"),
            (knots_b[1], dist.theta_high, "negative"),
        ]
    else:
        theta_u = knots_b[1] if len(knots_b) > 1 else dist.theta_high
        expected = [
            (dist.theta_low, theta_u, "positive"),
            (theta_u, dist.theta_high, "zero"),
        ]
    tol = 1e-10
    pattern: list[tuple[float, float, str, bool]] = []
    all_ok = True
    for lo, hi, sign in expected:
        if hi - lo <= 0.0:
            continue
        inside = (thetas >= lo + 1e-9) & (thetas <= hi - 1e-9)
        vals = du[inside]
        mid = indirect_utility(shifted, 0.5 * (lo + hi)) - indirect_utility(base, 0.5 * (lo + hi))
        if sign == "positive":
            ok = bool(np.all(vals >= -tol)) and (delta == 0.0 or mid > tol)
        elif sign == "negative":
            ok = bool(np.all(vals <= tol)) and (delta == 0.0 or mid < -tol)
        else:
            ok = bool(np.all(np.abs(vals) <= 1e-9))
        pattern.append((lo, hi, sign, ok))
        all_ok = all_ok and ok
    return PriorShiftReport(
        delta=delta,
        classification=cls,
        knots_base=knots_b,
        knots_shifted=knots_s,
        max_threshold_shift=max_shift,
        thetas=tuple(float(t) for t in thetas),
        delta_utility=tuple(float(v) for v in du),
        pattern=tuple(pattern),
        pattern_ok=all_ok,
    )


def receiver_optimal_equalizing_test(env: Environment) -> Experiment:
    """Receiver-preferred experiment delivering the equalizing bundle (1/2, 1/2).

    Balanced shape with mu_low < 1/2 < mu_high only: put the more informative
    posterior on the side the prior leans away from.
    """
    cls = geometry(env).classification
    if not cls.balanced_family:
        raise ScopeError(
            f"equalizing test requires the balanced shape, got {cls.value}"
        )
    if not env.mu_low < 0.5 < env.mu_high:
        raise ScopeError(
            f"receiver-optimal equalizing test needs mu_low < 1/2 < mu_high, got "
            f"[{env.mu_low}, {env.mu_high}]"
        )
    m0 = env.mu_prior
    if m0 < 0.5:
        exp = Experiment((Atom(0.0, 0.5, ACTION_L), Atom(2.0 * m0, 0.5, ACTION_R)))
    elif m0 > 0.5:
        exp = Experiment((Atom(2.0 * m0 - 1.0, 0.5, ACTION_L), Atom(1.0, 0.5, ACTION_R)))
    else:
        exp = Experiment((Atom(0.0, 0.5, ACTION_L), Atom(1.0, 0.5, ACTION_R)))
    exp.validate(env)
    return exp


@dataclass(frozen=True)
class SegmentWelfare:
    theta_lo: float
    theta_hi: float
    mass: float
    bundle: InfluenceBundle
    value: float


@dataclass(frozen=True)
class ModeWelfare:
    """Receiver welfare under one information regime, with the segment breakdown."""

    mode: str
    total: float
    segments: tuple[SegmentWelfare, ...]


@dataclass(frozen=True)
class WelfareReport:
    """Receiver welfare comparison across regimes (coercive only when constructed)."""

    screening: ModeWelfare
    unmediated: ModeWelfare
    coercive: ModeWelfare | None

    @property
    def screening_welfare(self) -> float:
        return self.screening.total

    @property
    def unmediated_welfare(self) -> float:
        return self.unmediated.total

    @property
    def coercive_welfare(self) -> float | None:
        return None if self.coercive is None else self.coercive.total


WELFARE_MODES = ("screening", "unmediated", "coercive")


def _menu_welfare(
    env: Environment, dist: TypeDistribution, menu: Menu, mode: str, equalizing: str
) -> ModeWelfare:
    segments = []
    total = 0.0
    for seg in menu.segments:
        bundle = seg.bundle
        if (
            equalizing == "receiver_optimal"
            and abs(bundle.q_L - 0.5) < GEOM_TOL
            and abs(bundle.q_R - 0.5) < GEOM_TOL
            and geometry(env).classification.balanced_family
        ):
            experiment = receiver_optimal_equalizing_test(env)
        else:
            experiment = bundle_to_experiment(env, bundle)
        value = receiver_value(env, experiment)
        mass = dist.cdf(min(seg.theta_hi, dist.theta_high)) - dist.cdf(
            max(seg.theta_lo, dist.theta_low)
        )
        segments.append(SegmentWelfare(seg.theta_lo, seg.theta_hi, mass, bundle, value))
        total += mass * value
    return ModeWelfare(mode, total, tuple(segments))


def receiver_welfare(
    env: Environment,
    dist: TypeDistribution,
    mode: str,
    equalizing: str = "receiver_optimal",
) -> ModeWelfare:
    """Expected receiver payoff when types buy from the mode's optimal menu.

    equalizing selects how the balanced menu's (1/2, 1/2) bundle is
    materialized: the receiver-preferred test or the canonical three-atom
    construction.
    """
    if mode not in WELFARE_MODES:
        raise ValueError(f"mode must be one of {WELFARE_MODES}, got {mode!r}")
    if equalizing not in ("receiver_optimal", "canonical"):
        raise ValueError(f"unknown equalizing rule {equalizing!r}")
    cls = geometry(env).classification
    if cls is Classification.MIRROR_UNBALANCED:
        menv, mdist = mirror(env, dist)
        result = receiver_welfare(menv, mdist, mode, equalizing)
        segs = tuple(
            SegmentWelfare(1.0 - s.theta_hi, 1.0 - s.theta_lo, s.mass, mirror_bundle(s.bundle), s.value)
            for s in reversed(result.segments)
        )
        return ModeWelfare(mode, result.total, segs)
    if mode == "screening":
        menu = optimal_menu(env, dist)
    elif mode == "unmediated":
        menu = first_best(env, dist)
    else:
        menu = coercion_menu(env, dist).menu
    return _menu_welfare(env, dist, menu, mode, equalizing)


def welfare_report(
    env: Environment, dist: TypeDistribution, equalizing: str = "receiver_optimal"
) -> WelfareReport:
    """Screening vs unmediated receiver welfare, plus coercive when constructed."""
    screening = receiver_welfare(env, dist, "screening", equalizing)
    unmediated = receiver_welfare(env, dist, "unmediated", equalizing)
    coercive = None
    cls = geometry(env).classification
    probe_env, probe_dist = env, dist
    if cls is Classification.MIRROR_UNBALANCED:
        probe_env, probe_dist = mirror(env, dist)
    if not geometry(probe_env).classification.balanced_family:
        if coercion_menu(probe_env, probe_dist).flag == "constructed":
            coercive = receiver_welfare(env, dist, "coercive", equalizing)
    return WelfareReport(screening, unmediated, coercive)
