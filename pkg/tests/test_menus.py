import numpy as np
import pytest

from influence_market import (
    InfluenceBundle,
    InternalError,
    ScopeError,
    Uniform,
    access_pricing,
    coercion_menu,
    comparative_statics,
    extended_menu,
    first_best,
    indirect_utility,
    make_environment,
    mirror,
    optimal_menu,
    receiver_optimal_equalizing_test,
    receiver_value,
    receiver_welfare,
    revenue,
    welfare_report,
    willingness_to_pay,
)
from influence_market.menus import (
    KIND_BALANCED,
    KIND_COERCIVE,
    KIND_EXTENDED,
    KIND_FIRST_BEST,
    KIND_UNBALANCED,
)

ENV_MIRROR_SIDE = make_environment(1.0 / 3.0, 0.7, 0.75)  # mirror of the unbalanced workhorse


def assert_same_menu(a, b, tol=1e-9):
    assert len(a.segments) == len(b.segments)
    for sa, sb in zip(a.segments, b.segments):
        assert sa.label == sb.label
        assert (sa.theta_lo, sa.theta_hi) == pytest.approx((sb.theta_lo, sb.theta_hi), abs=tol)
        assert (sa.bundle.q_L, sa.bundle.q_R) == pytest.approx(
            (sb.bundle.q_L, sb.bundle.q_R), abs=tol
        )
        assert sa.price_at(sa.theta_lo) == pytest.approx(sb.price_at(sb.theta_lo), abs=tol)


# ---------------------------------------------------------------- first best


def test_first_best_leaves_no_rent(env_unbalanced, dist):
    fb = first_best(env_unbalanced, dist)
    assert fb.kind == KIND_FIRST_BEST
    assert revenue(fb, dist) == pytest.approx(0.538888888888889, abs=1e-12)
    for theta in (0.0, 0.3, 0.5, 0.9, 1.5):
        assert indirect_utility(fb, theta) == pytest.approx(0.0, abs=1e-12)


def test_first_best_dominates_screening(env_balanced, env_unbalanced, dist):
    for env in (env_balanced, env_unbalanced):
        assert revenue(first_best(env, dist), dist) >= revenue(optimal_menu(env, dist), dist)


# ------------------------------------------------------------- balanced menu


def test_balanced_menu_frozen(env_balanced, dist):
    menu = optimal_menu(env_balanced, dist)
    assert menu.kind == KIND_BALANCED
    assert menu.theta0 == pytest.approx(0.5)
    assert [s.label for s in menu.segments] == ["L*", "eq", "R*"]
    assert menu.interior_knots() == pytest.approx((0.25, 1.0), abs=1e-10)
    assert [s.price for s in menu.segments] == pytest.approx(
        [7.0 / 12.0, 0.5, 0.75], abs=1e-10
    )
    assert revenue(menu, dist) == pytest.approx(43.0 / 72.0, abs=1e-10)
    assert indirect_utility(menu, 0.0) == pytest.approx(1.0 / 12.0, abs=1e-10)
    # the equalizing bundle gives value 1/2 to every type, so the middle
    # segment earns exactly zero rent
    for theta in (0.3, 0.6, 0.99):
        assert indirect_utility(menu, theta) == pytest.approx(0.0, abs=1e-12)


def test_balanced_menu_monotone_and_continuous(env_balanced, dist):
    menu = optimal_menu(env_balanced, dist)
    slopes = [s.bundle.slope for s in menu.segments]
    assert slopes == sorted(slopes)
    for knot in menu.interior_knots():
        left = indirect_utility(menu, knot - 1e-9)
        right = indirect_utility(menu, knot + 1e-9)
        assert left == pytest.approx(right, abs=1e-7)


# ----------------------------------------------------------- unbalanced menu


def test_unbalanced_menu_frozen(env_unbalanced, dist):
    menu = optimal_menu(env_unbalanced, dist)
    assert menu.kind == KIND_UNBALANCED
    assert menu.theta0 == pytest.approx(1.5)
    assert [s.label for s in menu.segments] == ["L*", "R*", "B"]
    assert menu.interior_knots() == pytest.approx((0.25, 1.25), abs=1e-9)
    assert [s.price for s in menu.segments] == pytest.approx(
        [37.0 / 60.0, 0.425, 0.3], abs=1e-9
    )
    b = menu.segments[2].bundle
    assert (b.q_L, b.q_R) == pytest.approx((0.3, 0.3), abs=1e-12)
    assert revenue(menu, dist) == pytest.approx(157.0 / 360.0, abs=1e-9)
    assert indirect_utility(menu, 0.0) == pytest.approx(19.0 / 60.0, abs=1e-9)
    assert indirect_utility(menu, 0.25) == pytest.approx(0.1, abs=1e-9)
    assert indirect_utility(menu, 1.5) == pytest.approx(0.0, abs=1e-12)


def test_unbalanced_menu_drops_tail_item_when_cutoff_leaves_support(env_unbalanced):
    # theta**_U = 1.25 > 1 = theta_high, so the equalizing item is never sold
    menu = optimal_menu(env_unbalanced, Uniform(0.0, 1.0))
    assert [s.label for s in menu.segments] == ["L*", "R*"]
    assert menu.segments[-1].theta_hi == pytest.approx(1.0)


def test_mirror_unbalanced_menu_reflects(env_unbalanced, dist):
    base = optimal_menu(env_unbalanced, dist)
    menv, mdist = mirror(env_unbalanced, dist)
    assert (menv.mu_low, menv.mu_prior, menv.mu_high) == pytest.approx(
        (ENV_MIRROR_SIDE.mu_low, ENV_MIRROR_SIDE.mu_prior, ENV_MIRROR_SIDE.mu_high)
    )
    menu = optimal_menu(menv, mdist)
    assert [s.label for s in menu.segments] == ["B", "L*", "R*"]
    assert menu.interior_knots() == pytest.approx((-0.25, 0.75), abs=1e-9)
    assert [s.price for s in menu.segments] == pytest.approx(
        [0.3, 0.425, 37.0 / 60.0], abs=1e-9
    )
    assert revenue(menu, mdist) == pytest.approx(revenue(base, dist), abs=1e-10)
    for theta in (0.0, 0.25, 0.8, 1.3):
        assert indirect_utility(menu, 1.0 - theta) == pytest.approx(
            indirect_utility(base, theta), abs=1e-9
        )


# -------------------------------------------------------------- extended menu


def test_extended_menu_reduces_to_optimal_under_bounded_types(env_balanced, dist):
    ext = extended_menu(env_balanced, dist)
    opt = optimal_menu(env_balanced, dist)
    assert ext.kind == opt.kind
    assert_same_menu(ext, opt)


def test_extended_menu_right_tail(env_balanced):
    wide = Uniform(0.0, 3.0)
    menu = extended_menu(env_balanced, wide)
    assert menu.kind == KIND_EXTENDED
    assert [s.label for s in menu.segments] == ["L*", "eq", "R*", "R0*"]
    assert menu.interior_knots() == pytest.approx((0.25, 1.75, 2.75), abs=1e-8)
    assert [s.price for s in menu.segments] == pytest.approx(
        [7.0 / 12.0, 0.5, 1.125, 1.15], abs=1e-8
    )
    tail = menu.segments[-1].bundle
    assert (tail.q_L, tail.q_R) == pytest.approx((0.0, 0.6), abs=1e-12)
    assert revenue(menu, wide) == pytest.approx(0.7694444444444444, abs=1e-8)
    # utility stays continuous across the relaxed-tail knot
    knot = menu.interior_knots()[-1]
    assert indirect_utility(menu, knot - 1e-9) == pytest.approx(
        indirect_utility(menu, knot + 1e-9), abs=1e-7
    )


def test_extended_menu_left_tail():
    menu = extended_menu(ENV_MIRROR_SIDE.__class__(0.3, 0.5, 0.85), Uniform(-1.5, 1.5))
    assert [s.label for s in menu.segments] == ["L0*", "L*", "eq", "R*"]
    assert menu.segments[0].theta_hi == pytest.approx(-0.9375, abs=1e-8)
    head = menu.segments[0].bundle
    assert (head.q_L, head.q_R) == pytest.approx((7.0 / 11.0, 0.0), abs=1e-12)
    assert menu.segments[0].price == pytest.approx(1.0454545454545454, abs=1e-8)


def test_extended_menu_rejects_unbalanced(env_unbalanced, dist):
    with pytest.raises(NotImplementedError, match="balanced"):
        extended_menu(env_unbalanced, dist)


# ------------------------------------------------------------------ coercion


def test_coercion_constructed_frozen(env_unbalanced, dist):
    sol = coercion_menu(env_unbalanced, dist)
    assert sol.flag == "constructed"
    assert (sol.outside_option.q_L, sol.outside_option.q_R) == pytest.approx(
        (0.1, 0.0), abs=1e-12
    )
    assert sol.menu.kind == KIND_COERCIVE
    assert [s.label for s in sol.menu.segments] == ["L*", "R*"]
    assert [s.price for s in sol.menu.segments] == pytest.approx(
        [0.6416666666666666, 0.45], abs=1e-9
    )
    assert sol.baseline_revenue == pytest.approx(157.0 / 360.0, abs=1e-9)
    assert sol.coercive_revenue == pytest.approx(0.4819444444444444, abs=1e-9)
    assert sol.revenue_gain == pytest.approx(0.04583333333333333, abs=1e-9)
    # participation floor: the top type is exactly as well off as under the threat
    assert sol.menu.anchor_utility == pytest.approx(-0.05, abs=1e-12)
    assert indirect_utility(sol.menu, 1.5) == pytest.approx(-0.05, abs=1e-9)


def test_coercion_flags(env_balanced, env_unbalanced, dist):
    assert coercion_menu(env_balanced, dist).flag == "inapplicable_balanced"
    assert coercion_menu(env_unbalanced, Uniform(0.0, 1.0)).flag == "not_established"
    assert (
        coercion_menu(env_unbalanced, Uniform(0.0, 1.75)).flag
        == "necessary_but_uncharacterized"
    )
    # flags other than "constructed" fall back to the screening menu
    sol = coercion_menu(env_unbalanced, Uniform(0.0, 1.0))
    assert sol.revenue_gain == 0.0
    assert sol.coercive_revenue == sol.baseline_revenue


def test_coercion_mirrors(env_unbalanced, dist):
    menv, mdist = mirror(env_unbalanced, dist)
    sol = coercion_menu(menv, mdist)
    assert sol.flag == "constructed"
    assert (sol.outside_option.q_L, sol.outside_option.q_R) == pytest.approx(
        (0.0, 0.1), abs=1e-12
    )
    assert sol.coercive_revenue == pytest.approx(0.4819444444444444, abs=1e-9)


# ------------------------------------------------------------ selling access


def test_access_pricing_balanced(env_balanced, dist):
    sol = access_pricing(env_balanced, dist)
    assert sol.price == pytest.approx(0.5, abs=1e-9)
    assert sol.revenue == pytest.approx(0.5, abs=1e-9)
    (lo, hi), = sol.buying_set
    assert (lo, hi) == pytest.approx((0.0, 1.5), abs=1e-9)


def test_access_pricing_unbalanced_full_coverage(env_unbalanced, dist):
    sol = access_pricing(env_unbalanced, dist)
    assert sol.price == pytest.approx(0.4, abs=1e-9)
    assert sol.revenue == pytest.approx(0.4, abs=1e-9)
    (lo, hi), = sol.buying_set
    assert (lo, hi) == pytest.approx((0.0, 1.5), abs=1e-9)


def test_access_pricing_excludes_high_types():
    env = make_environment(0.0, 0.2, 1.0)
    sol = access_pricing(env, Uniform(0.1, 0.9))
    assert sol.price == pytest.approx(0.37, abs=1e-9)
    assert sol.revenue == pytest.approx(0.28520833333333334, abs=1e-9)
    (lo, hi), = sol.buying_set
    assert lo == pytest.approx(0.1, abs=1e-9)
    assert hi == pytest.approx(43.0 / 60.0, abs=1e-9)
    # excluded types sit strictly above the cut and would pay less than price
    assert willingness_to_pay(env, Uniform(0.1, 0.9), 0.8) < sol.price


def test_willingness_to_pay_endpoints(env_balanced, dist):
    assert willingness_to_pay(env_balanced, dist, 0.0) == pytest.approx(2.0 / 3.0)
    assert willingness_to_pay(env_balanced, dist, 1.5) == pytest.approx(1.0)


def test_access_never_beats_screening(env_balanced, env_unbalanced, dist):
    for env in (env_balanced, env_unbalanced):
        assert access_pricing(env, dist).revenue <= revenue(optimal_menu(env, dist), dist) + 1e-12


# ------------------------------------------------------- comparative statics


def test_prior_reduction_patterns(env_balanced, env_unbalanced, dist):
    rep_b = comparative_statics(env_balanced, dist, 0.05)
    assert rep_b.pattern_ok
    assert [sign for _, _, sign, _ in rep_b.pattern] == ["positive", "zero", "negative"]
    assert rep_b.max_threshold_shift <= 1e-10

    rep_u = comparative_statics(env_unbalanced, dist, 0.01)
    assert rep_u.pattern_ok
    assert [sign for _, _, sign, _ in rep_u.pattern] == ["positive", "zero"]


def test_prior_reduction_zero_delta_is_degenerate(env_balanced, dist):
    rep = comparative_statics(env_balanced, dist, 0.0)
    assert rep.pattern_ok
    assert max(abs(v) for v in rep.delta_utility) <= 1e-12


def test_prior_reduction_rejects_boundary_crossing(env_balanced, dist):
    with pytest.raises(ScopeError, match="2 mu_prior = mu_high"):
        comparative_statics(env_balanced, dist, 0.2)


def test_prior_reduction_rejects_mirror_shape(env_unbalanced, dist):
    menv, mdist = mirror(env_unbalanced, dist)
    with pytest.raises(ScopeError, match="mirror"):
        comparative_statics(menv, mdist, 0.01)


# ------------------------------------------------------------------- welfare


def test_receiver_optimal_equalizing_split(env_balanced):
    exp = receiver_optimal_equalizing_test(env_balanced)
    atoms = sorted(exp.atoms, key=lambda a: a.posterior)
    assert [a.posterior for a in atoms] == pytest.approx([0.0, 1.0])
    assert [a.prob for a in atoms] == pytest.approx([0.5, 0.5])
    assert receiver_value(env_balanced, exp) == pytest.approx(7.0 / 24.0)
    # a leaning prior pushes the informative posterior to the opposite side
    lean = make_environment(0.25, 0.45, 2.0 / 3.0)
    atoms = sorted(receiver_optimal_equalizing_test(lean).atoms, key=lambda a: a.posterior)
    assert [a.posterior for a in atoms] == pytest.approx([0.0, 0.9])


def test_equalizing_test_out_of_scope(env_unbalanced):
    with pytest.raises(ScopeError):
        receiver_optimal_equalizing_test(env_unbalanced)
    with pytest.raises(ScopeError):
        receiver_optimal_equalizing_test(make_environment(0.1, 0.3, 0.45))


def test_welfare_balanced_frozen(env_balanced, dist):
    report = welfare_report(env_balanced, dist)
    assert report.screening_welfare == pytest.approx(5.0 / 27.0, abs=1e-10)
    assert report.unmediated_welfare == pytest.approx(17.0 / 216.0, abs=1e-10)
    assert report.coercive is None
    # mediation hurts the receiver less than full revelation for every segment? No:
    # the headline comparison is aggregate, and here screening wins.
    assert report.screening_welfare > report.unmediated_welfare


def test_welfare_balanced_canonical_equalizing(env_balanced, dist):
    canon = receiver_welfare(env_balanced, dist, "screening", equalizing="canonical")
    assert canon.total == pytest.approx(43.0 / 378.0, abs=1e-9)
    assert canon.total < 5.0 / 27.0  # receiver-optimal tie-break is worth something


def test_welfare_unbalanced_frozen(env_unbalanced, dist):
    report = welfare_report(env_unbalanced, dist)
    assert report.screening_welfare == pytest.approx(0.10787037037037037, abs=1e-9)
    assert report.unmediated_welfare == pytest.approx(0.09907407407407407, abs=1e-9)
    assert report.coercive_welfare == pytest.approx(0.11828703703703703, abs=1e-9)


def test_welfare_narrow_type_distribution(env_balanced):
    narrow = Uniform(0.49, 0.51)
    report = welfare_report(env_balanced, narrow)
    assert report.screening_welfare == pytest.approx(109.0 / 576.0, abs=1e-6)
    assert report.unmediated_welfare == pytest.approx(25.0 / 288.0, abs=1e-6)


def test_welfare_mirror_invariance(env_unbalanced, dist):
    base = welfare_report(env_unbalanced, dist)
    menv, mdist = mirror(env_unbalanced, dist)
    mirrored = welfare_report(menv, mdist)
    assert mirrored.screening_welfare == pytest.approx(base.screening_welfare, abs=1e-9)
    assert mirrored.unmediated_welfare == pytest.approx(base.unmediated_welfare, abs=1e-9)
    assert mirrored.coercive_welfare == pytest.approx(base.coercive_welfare, abs=1e-9)


def test_welfare_segment_masses_sum_to_one(env_unbalanced, dist):
    report = welfare_report(env_unbalanced, dist)
    for mode in (report.screening, report.unmediated, report.coercive):
        assert sum(s.mass for s in mode.segments) == pytest.approx(1.0, abs=1e-12)
