"""Independent certification of closed-form menus.

Two routes: (i) a discrete-type linear program that maximizes revenue
subject to implementability, incentive compatibility and participation --
solved from scratch, never reusing the closed forms -- and (ii) a dense
grid check of a given menu's constraints.  Agreement between the analytic
menus and the LP is the package's core guarantee.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.optimize import linprog

from .distributions import TypeDistribution
from .errors import InternalError
from .menus import KIND_FIRST_BEST, Menu, indirect_utility, sender_value
from .model import Environment, InfluenceBundle, constraint_rows, contains
from .tolerances import FEAS_TOL, GEOM_TOL

_HIGHS_OPTIONS = {
    "primal_feasibility_tolerance": 1e-10,
    "dual_feasibility_tolerance": 1e-10,
}


@dataclass(frozen=True)
class DiscreteInstance:
    """Finite-type approximation of a scenario: types, weights, environment."""

    env: Environment
    types: tuple[float, ...]
    weights: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.types) != len(self.weights) or len(self.types) < 2:
            raise ValueError("need matching types/weights with at least two types")
        if any(t2 <= t1 for t1, t2 in zip(self.types, self.types[1:])):
            raise ValueError("types must be strictly increasing")
        if any(w < 0.0 for w in self.weights):
            raise ValueError("weights must be nonnegative")
        if abs(sum(self.weights) - 1.0) > 1e-12:
            raise ValueError(f"weights sum to {sum(self.weights)}, need 1")


def discretize(dist: TypeDistribution, n: int) -> tuple[float, ...]:
    """Quantile-cell boundaries F^{-1}(k/n), k = 0..n."""
    if n < 2:
        raise ValueError("need at least two cells")
    return tuple(dist.ppf(k / n) for k in range(n + 1))


def discretize_instance(dist: TypeDistribution, env: Environment, n: int) -> DiscreteInstance:
    """Equal-weight instance at the midpoints of the n quantile cells."""
    bounds = discretize(dist, n)
    types = tuple(0.5 * (a + b) for a, b in zip(bounds, bounds[1:]))
    return DiscreteInstance(env, types, (1.0 / n,) * n)


@dataclass(frozen=True)
class OracleSolution:
    """Revenue-optimal discrete menu found by the LP."""

    instance: DiscreteInstance
    q_L: tuple[float, ...]
    q_R: tuple[float, ...]
    prices: tuple[float, ...]
    outside_option: InfluenceBundle | None
    revenue: float


def lp_oracle(instance: DiscreteInstance, coercion: bool = False) -> OracleSolution:
    """Solve the discrete screening problem exactly as stated.

    Variables are (q_L, q_R, p) per type, plus an outside-option bundle when
    coercion is allowed (participation then compares to its value instead of
    zero).  Full pairwise incentive constraints; no simplifications from the
    closed-form theory are used.
    """
    thetas = np.asarray(instance.types)
    w = np.asarray(instance.weights)
    n = len(thetas)
    n_var = 3 * n + (2 if coercion else 0)
    i_ql = np.arange(n)
    i_qr = n + np.arange(n)
    i_p = 2 * n + np.arange(n)

    rows: list[np.ndarray] = []
    cols: list[np.ndarray] = []
    data: list[np.ndarray] = []
    rhs: list[np.ndarray] = []
    row_count = 0

    def add_block(r, c, d):
        rows.append(np.asarray(r, dtype=np.int64))
        cols.append(np.asarray(c, dtype=np.int64))
        data.append(np.asarray(d, dtype=np.float64))

    # Implementability, three rows per type (and for the outside option).
    face = constraint_rows(instance.env)
    holders = [(i_ql, i_qr)]
    if coercion:
        holders.append((np.array([3 * n]), np.array([3 * n + 1])))
    for ql_idx, qr_idx in holders:
        m = len(ql_idx)
        for k in range(3):
            r = row_count + np.arange(m)
            add_block(r, ql_idx, np.full(m, face[k, 0]))
            add_block(r, qr_idx, np.full(m, face[k, 1]))
            rhs.append(np.full(m, face[k, 2]))
            row_count += m

    # Pairwise incentive compatibility: type i must not prefer item j.
    ii, jj = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    mask = ii != jj
    ii, jj = ii[mask], jj[mask]
    m = len(ii)
    r = row_count + np.arange(m)
    one_minus = 1.0 - thetas[ii]
    add_block(r, i_ql[jj], one_minus)
    add_block(r, i_qr[jj], thetas[ii])
    add_block(r, i_p[jj], -np.ones(m))
    add_block(r, i_ql[ii], -one_minus)
    add_block(r, i_qr[ii], -thetas[ii])
    add_block(r, i_p[ii], np.ones(m))
    rhs.append(np.zeros(m))
    row_count += m

    # Participation: p_i <= u_i(q_i) (minus the outside option's value if coercing).
    r = row_count + np.arange(n)
    add_block(r, i_p, np.ones(n))
    add_block(r, i_ql, -(1.0 - thetas))
    add_block(r, i_qr, -thetas)
    if coercion:
        add_block(r, np.full(n, 3 * n), 1.0 - thetas)
        add_block(r, np.full(n, 3 * n + 1), thetas)
    rhs.append(np.zeros(n))
    row_count += n

    a_ub = sparse.coo_matrix(
        (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))),
        shape=(row_count, n_var),
    ).tocsc()
    b_ub = np.concatenate(rhs)
    c = np.zeros(n_var)
    c[i_p] = -w
    bounds = [(0.0, 1.0)] * n + [(0.0, 1.0)] * n + [(None, None)] * n
    if coercion:
        bounds += [(0.0, 1.0), (0.0, 1.0)]
    res = linprog(c, A_ub=a_ub, b_ub=b_ub, bounds=bounds, method="highs", options=_HIGHS_OPTIONS)
    if res.status != 0:
        raise InternalError(f"oracle LP failed (status {res.status}): {res.message}")
    x = res.x
    outside = InfluenceBundle(float(x[3 * n]), float(x[3 * n + 1])) if coercion else None
    return OracleSolution(
        instance,
        tuple(float(v) for v in x[i_ql]),
        tuple(float(v) for v in x[i_qr]),
        tuple(float(v) for v in x[i_p]),
        outside,
        float(-res.fun),
    )


def verify_discrete(solution: OracleSolution, tol: float = FEAS_TOL) -> float:
    """Worst IC/IR violation of an oracle solution on its own instance."""
    thetas = np.asarray(solution.instance.types)
    ql = np.asarray(solution.q_L)
    qr = np.asarray(solution.q_R)
    p = np.asarray(solution.prices)
    util = np.outer(1.0 - thetas, ql) + np.outer(thetas, qr) - p[None, :]
    own = np.diag(util)
    ic = float(np.max(util - own[:, None]))
    floor = np.zeros_like(thetas)
    if solution.outside_option is not None:
        floor = (
            (1.0 - thetas) * solution.outside_option.q_L
            + thetas * solution.outside_option.q_R
        )
    ir = float(np.max(floor - own))
    del tol
    return max(ic, ir)


@dataclass(frozen=True)
class ViolationReport:
    """Worst constraint violations of a menu on a dense type grid."""

    grid_size: int
    worst_ic_violation: float
    ic_witness: tuple[float, float] | None
    worst_ir_violation: float
    ir_witness: float | None
    mon_ok: bool
    implementability_ok: bool
    envelope_residual: float

    def ok(self, ic_tol: float = FEAS_TOL, ir_tol: float = FEAS_TOL) -> bool:
        return (
            self.worst_ic_violation <= ic_tol
            and self.worst_ir_violation <= ir_tol
            and self.mon_ok
            and self.implementability_ok
            and self.envelope_residual <= 1e-12
        )


def verify_menu(
    env: Environment,
    dist: TypeDistribution,
    menu: Menu,
    grid_size: int = 500,
) -> ViolationReport:
    """Grid-check implementability, IC, participation, monotonicity, envelope anchor."""
    thetas = np.linspace(dist.theta_low, dist.theta_high, grid_size)
    segs = [menu.segment_at(float(t)) for t in thetas]
    ql = np.array([s.bundle.q_L for s in segs])
    qr = np.array([s.bundle.q_R for s in segs])
    p = np.array([s.price_at(float(t)) for s, t in zip(segs, thetas)])

    util = np.outer(1.0 - thetas, ql) + np.outer(thetas, qr) - p[None, :]
    own = np.diag(util)
    deviation_gain = util - own[:, None]
    worst_ic = float(np.max(deviation_gain))
    wi, wj = np.unravel_index(int(np.argmax(deviation_gain)), deviation_gain.shape)
    ic_witness = (float(thetas[wi]), float(thetas[wj])) if worst_ic > 0.0 else None

    floor = np.zeros_like(thetas)
    if menu.outside_option is not None:
        floor = (1.0 - thetas) * menu.outside_option.q_L + thetas * menu.outside_option.q_R
    ir_gap = floor - own
    worst_ir = float(np.max(ir_gap))
    ir_witness = float(thetas[int(np.argmax(ir_gap))]) if worst_ir > 0.0 else None

    slopes = [seg.bundle.slope for seg in menu.segments]
    mon_ok = all(s2 >= s1 - 1e-12 for s1, s2 in zip(slopes, slopes[1:]))
    impl_ok = all(bool(contains(env, seg.bundle, tol=GEOM_TOL)) for seg in menu.segments)
    envelope_residual = abs(indirect_utility(menu, menu.theta0) - menu.anchor_utility)
    return ViolationReport(
        grid_size,
        worst_ic,
        ic_witness,
        worst_ir,
        ir_witness,
        mon_ok,
        impl_ok,
        float(envelope_residual),
    )


@dataclass(frozen=True)
class OracleComparison:
    """Analytic menu vs LP oracle on one discrete instance."""

    oracle_revenue: float
    menu_revenue: float
    revenue_gap: float
    agreement_fraction: float
    max_bundle_distance: float
    disagreeing_types: tuple[float, ...]


def compare_to_oracle(
    menu: Menu, instance: DiscreteInstance, tolerance: float = 1e-6
) -> OracleComparison:
    """Honest evaluation of a menu against the LP optimum on the same types.

    Each discrete type picks its best item from the menu (or opts out), so a
    mispriced menu shows up as lost revenue rather than being scored as if
    buyers were obedient.
    """
    thetas = np.asarray(instance.types)
    w = np.asarray(instance.weights)
    if any(seg.price_slope != 0.0 for seg in menu.segments):
        # Affine price schedules (first-best style) offer a continuum; present
        # each discrete type its own designated item.
        items = [
            (menu.segment_at(float(t)).bundle, menu.segment_at(float(t)).price_at(float(t)))
            for t in thetas
        ]
    else:
        items = [(seg.bundle, seg.price) for seg in menu.segments]
    item_ql = np.array([b.q_L for b, _ in items])
    item_qr = np.array([b.q_R for b, _ in items])
    item_p = np.array([p for _, p in items])
    util = np.outer(1.0 - thetas, item_ql) + np.outer(thetas, item_qr) - item_p[None, :]
    outside = np.zeros_like(thetas)
    if menu.outside_option is not None:
        outside = (
            (1.0 - thetas) * menu.outside_option.q_L + thetas * menu.outside_option.q_R
        )
    best = np.argmax(util, axis=1)
    buys = util[np.arange(len(thetas)), best] >= outside - FEAS_TOL
    menu_revenue = float(np.sum(w[buys] * item_p[best[buys]]))

    oracle = lp_oracle(instance, coercion=menu.outside_option is not None)
    chosen_ql = np.where(buys, item_ql[best], 0.0)
    chosen_qr = np.where(buys, item_qr[best], 0.0)
    dist_l = np.abs(chosen_ql - np.asarray(oracle.q_L))
    dist_r = np.abs(chosen_qr - np.asarray(oracle.q_R))
    distances = np.maximum(dist_l, dist_r)
    agree = distances <= tolerance
    return OracleComparison(
        oracle_revenue=oracle.revenue,
        menu_revenue=menu_revenue,
        revenue_gap=abs(oracle.revenue - menu_revenue),
        agreement_fraction=float(np.mean(agree)),
        max_bundle_distance=float(np.max(distances)),
        disagreeing_types=tuple(float(t) for t in thetas[~agree]),
    )
