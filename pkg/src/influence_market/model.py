"""Persuasion environment, implementable influence bundles, and experiments.

The receiver chooses among a safe action S and two risky actions L and R.
With a binary state and thresholds mu_low < mu_prior < mu_high, the set of
action-probability pairs (q_L, q_R) an obedient experiment can induce is a
polytope cut out by three linear constraints; its geometry (extreme points,
face slopes, shape classification) drives everything downstream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

import numpy as np
from scipy.optimize import linprog

from .errors import (
    InfeasibleBundle,
    InternalError,
    InvalidEnvironment,
    InvalidExperiment,
    ScopeError,
)
from .rootfind import bisect_increasing
from .tolerances import FEAS_TOL, GEOM_TOL, ROOT_TOL

ACTION_L = "L"
ACTION_S = "S"
ACTION_R = "R"
ACTIONS = (ACTION_L, ACTION_S, ACTION_R)


@dataclass(frozen=True)
class Environment:
    """Binary-state persuasion environment: prior and the two action thresholds.

    The receiver plays L at posteriors <= mu_low, S between the thresholds,
    and R at posteriors >= mu_high.
    """

    mu_low: float
    mu_prior: float
    mu_high: float

    def __post_init__(self) -> None:
        for name in ("mu_low", "mu_prior", "mu_high"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise InvalidEnvironment(f"{name} must be finite, got {v}")
        if not 0.0 <= self.mu_low:
            raise InvalidEnvironment(f"need 0 <= mu_low, got mu_low={self.mu_low}")
        if not self.mu_low < self.mu_prior:
            raise InvalidEnvironment(
                f"need mu_low < mu_prior, got mu_low={self.mu_low}, mu_prior={self.mu_prior}"
            )
        if not self.mu_prior < self.mu_high:
            raise InvalidEnvironment(
                f"need mu_prior < mu_high, got mu_prior={self.mu_prior}, mu_high={self.mu_high}"
            )
        if not self.mu_high <= 1.0:
            raise InvalidEnvironment(f"need mu_high <= 1, got mu_high={self.mu_high}")


def make_environment(mu_low: float, mu_prior: float, mu_high: float) -> Environment:
    """Validated constructor; raises InvalidEnvironment naming the violated inequality."""
    return Environment(mu_low, mu_prior, mu_high)


@dataclass(frozen=True)
class InfluenceBundle:
    """Pair of action probabilities (q_L, q_R) promised to the sender.

    Each component must lie in [0, 1]; whether q_L + q_R <= 1 and the other
    implementability constraints hold is the job of contains(), so that
    membership of arbitrary candidate pairs can be queried.
    """

    q_L: float
    q_R: float

    def __post_init__(self) -> None:
        for name in ("q_L", "q_R"):
            v = getattr(self, name)
            if not (math.isfinite(v) and -GEOM_TOL <= v <= 1.0 + GEOM_TOL):
                raise ValueError(f"{name} must lie in [0, 1], got {v}")

    @property
    def slope(self) -> float:
        """Marginal value q_R - q_L of the bundle to the sender (d/d theta)."""
        return self.q_R - self.q_L


def sender_value(bundle: InfluenceBundle, theta: float) -> float:
    """Sender of type theta values a bundle at (1 - theta) q_L + theta q_R."""
    return (1.0 - theta) * bundle.q_L + theta * bundle.q_R


def constraint_rows(env: Environment) -> np.ndarray:
    """Coefficient matrix [a_L, a_R, rhs] of the three implementability constraints.

    (1) q_L + q_R <= 1
    (2) (mu_high - mu_low) q_L - (1 - mu_high) q_R <= mu_high - mu_prior
    (3) -mu_low q_L + (mu_high - mu_low) q_R <= mu_prior - mu_low
    """
    ml, m0, mh = env.mu_low, env.mu_prior, env.mu_high
    return np.array(
        [
            [1.0, 1.0, 1.0],
            [mh - ml, -(1.0 - mh), mh - m0],
            [-ml, mh - ml, m0 - ml],
        ]
    )


@dataclass(frozen=True)
class Membership:
    """Verdict of a polytope membership test with per-constraint slacks (rhs - lhs)."""

    inside: bool
    slacks: tuple[float, float, float]

    def __bool__(self) -> bool:
        return self.inside


def contains(env: Environment, bundle: InfluenceBundle, tol: float = GEOM_TOL) -> Membership:
    """Check the three implementability constraints; slack >= -tol counts as inside."""
    rows = constraint_rows(env)
    q = np.array([bundle.q_L, bundle.q_R])
    slacks = rows[:, 2] - rows[:, :2] @ q
    return Membership(bool(np.all(slacks >= -tol)), tuple(float(s) for s in slacks))


class Classification(str, Enum):
    """Shape of the implementable polytope relative to the 45-degree line."""

    BALANCED = "balanced"
    UNBALANCED = "unbalanced"
    MIRROR_UNBALANCED = "mirror_unbalanced"
    BOUNDARY_BALANCED_UNBALANCED = "boundary_balanced_unbalanced"
    BOUNDARY_BALANCED_MIRROR = "boundary_balanced_mirror"

    @property
    def balanced_family(self) -> bool:
        return self in (
            Classification.BALANCED,
            Classification.BOUNDARY_BALANCED_UNBALANCED,
            Classification.BOUNDARY_BALANCED_MIRROR,
        )


def classify(env: Environment) -> Classification:
    """Classify by comparing 2 mu_prior against mu_high and 1 + mu_low (exact)."""
    two_prior = 2.0 * env.mu_prior
    if two_prior == env.mu_high:
        return Classification.BOUNDARY_BALANCED_UNBALANCED
    if two_prior == 1.0 + env.mu_low:
        return Classification.BOUNDARY_BALANCED_MIRROR
    if two_prior < env.mu_high:
        return Classification.UNBALANCED
    if two_prior > 1.0 + env.mu_low:
        return Classification.MIRROR_UNBALANCED
    return Classification.BALANCED


@dataclass(frozen=True)
class PolytopeGeometry:
    """Extreme points and face slopes of the implementable polytope."""

    kappa_L: float
    kappa_R: float
    origin: InfluenceBundle
    r0_star: InfluenceBundle
    r_star: InfluenceBundle
    l_star: InfluenceBundle
    l0_star: InfluenceBundle
    classification: Classification

    @property
    def extreme_points(self) -> dict[str, InfluenceBundle]:
        return {
            "origin": self.origin,
            "R0*": self.r0_star,
            "R*": self.r_star,
            "L*": self.l_star,
            "L0*": self.l0_star,
        }


def geometry(env: Environment) -> PolytopeGeometry:
    """Extreme points, face slopes kappa_L / kappa_R, and shape classification."""
    ml, m0, mh = env.mu_low, env.mu_prior, env.mu_high
    kappa_R = ml / (mh - ml)
    kappa_L = math.inf if mh == 1.0 else (mh - ml) / (1.0 - mh)
    return PolytopeGeometry(
        kappa_L=kappa_L,
        kappa_R=kappa_R,
        origin=InfluenceBundle(0.0, 0.0),
        r0_star=InfluenceBundle(0.0, (m0 - ml) / (mh - ml)),
        r_star=InfluenceBundle(1.0 - m0 / mh, m0 / mh),
        l_star=InfluenceBundle((1.0 - m0) / (1.0 - ml), (m0 - ml) / (1.0 - ml)),
        l0_star=InfluenceBundle((mh - m0) / (mh - ml), 0.0),
        classification=classify(env),
    )


def equalizing_bundle(env: Environment) -> InfluenceBundle:
    """Bundle on the 45-degree line offered to moderate senders.

    Interior crossing (1/2, 1/2) in the balanced family; the crossing of the
    binding face otherwise.
    """
    cls = classify(env)
    ml, m0, mh = env.mu_low, env.mu_prior, env.mu_high
    if cls.balanced_family:
        return InfluenceBundle(0.5, 0.5)
    if cls is Classification.UNBALANCED:
        q = (m0 - ml) / (mh - 2.0 * ml)
    else:
        q = (mh - m0) / (2.0 * mh - 1.0 - ml)
    return InfluenceBundle(q, q)


class Atom(NamedTuple):
    """One realization of an experiment: induced posterior, probability, obeyed action."""

    posterior: float
    prob: float
    action: str


@dataclass(frozen=True)
class Experiment:
    """Finite-support experiment represented by obedient (posterior, prob, action) atoms."""

    atoms: tuple[Atom, ...]

    def validate(self, env: Environment, tol: float = GEOM_TOL) -> None:
        """Raise InvalidExperiment unless probabilities, Bayes plausibility and obedience hold."""
        if not self.atoms:
            raise InvalidExperiment("experiment has no atoms")
        total, mean = 0.0, 0.0
        for atom in self.atoms:
            if atom.action not in ACTIONS:
                raise InvalidExperiment(f"unknown action {atom.action!r}")
            if not -tol <= atom.posterior <= 1.0 + tol:
                raise InvalidExperiment(f"posterior {atom.posterior} outside [0, 1]")
            if atom.prob < -tol:
                raise InvalidExperiment(f"negative probability {atom.prob}")
            total += atom.prob
            mean += atom.prob * atom.posterior
        if abs(total - 1.0) > 1e-12:
            raise InvalidExperiment(f"atom probabilities sum to {total}, need 1")
        if abs(mean - env.mu_prior) > 1e-12:
            raise InvalidExperiment(
                f"Bayes plausibility fails: mean posterior {mean} != prior {env.mu_prior}"
            )
        for atom in self.atoms:
            if atom.action == ACTION_L and atom.posterior > env.mu_low + tol:
                raise InvalidExperiment(
                    f"action L recommended at posterior {atom.posterior} > mu_low {env.mu_low}"
                )
            if atom.action == ACTION_R and atom.posterior < env.mu_high - tol:
                raise InvalidExperiment(
                    f"action R recommended at posterior {atom.posterior} < mu_high {env.mu_high}"
                )
            if atom.action == ACTION_S and not (
                env.mu_low - tol <= atom.posterior <= env.mu_high + tol
            ):
                raise InvalidExperiment(
                    f"action S recommended at posterior {atom.posterior} outside "
                    f"[{env.mu_low}, {env.mu_high}]"
                )

    def bundle(self) -> InfluenceBundle:
        """Re-aggregate atoms into the induced (q_L, q_R) bundle."""
        q_l = sum(a.prob for a in self.atoms if a.action == ACTION_L)
        q_r = sum(a.prob for a in self.atoms if a.action == ACTION_R)
        return InfluenceBundle(q_l, q_r)


def bundle_to_experiment(env: Environment, bundle: InfluenceBundle) -> Experiment:
    """Materialize an implementable bundle as a canonical three-atom experiment.

    The three posteriors slide together along a one-parameter family
    (parameter t in [0, 1]); t is pinned down by Bayes plausibility via
    bisection on the mean posterior.  Zero-probability atoms are dropped.
    """
    verdict = contains(env, bundle)
    if not verdict:
        worst = min(range(3), key=lambda i: verdict.slacks[i])
        raise InfeasibleBundle(
            f"bundle ({bundle.q_L}, {bundle.q_R}) violates implementability "
            f"constraint ({worst + 1}) with slack {verdict.slacks[worst]:.3e}"
        )
    ml, m0, mh = env.mu_low, env.mu_prior, env.mu_high
    q_l, q_r = bundle.q_L, bundle.q_R
    q_s = 1.0 - q_l - q_r
    if q_s < 0.0:  # only float dust can get here; contains() already passed
        q_s = 0.0

    def mean_posterior(t: float) -> float:
        return (
            q_l * (t * ml)
            + q_s * ((1.0 - t) * ml + t * mh)
            + q_r * ((1.0 - t) * mh + t)
        )

    t_star = bisect_increasing(mean_posterior, 0.0, 1.0, m0, tol=ROOT_TOL)
    atoms = [
        Atom(t_star * ml, q_l, ACTION_L),
        Atom((1.0 - t_star) * ml + t_star * mh, q_s, ACTION_S),
        Atom((1.0 - t_star) * mh + t_star, q_r, ACTION_R),
    ]
    experiment = Experiment(tuple(a for a in atoms if a.prob > 1e-14))
    experiment.validate(env)
    return experiment


def receiver_value(env: Environment, experiment: Experiment) -> float:
    """Expected receiver payoff of an obedient experiment.

    Action payoffs: v(S, mu) = 0, v(L, mu) = mu_low - mu, v(R, mu) = mu - mu_high.
    """
    experiment.validate(env)
    value = 0.0
    for atom in experiment.atoms:
        if atom.action == ACTION_L:
            value += atom.prob * (env.mu_low - atom.posterior)
        elif atom.action == ACTION_R:
            value += atom.prob * (atom.posterior - env.mu_high)
    return value


def mirror_environment(env: Environment) -> Environment:
    """Relabel the state: thresholds reflect through 1/2 and swap."""
    return Environment(1.0 - env.mu_high, 1.0 - env.mu_prior, 1.0 - env.mu_low)


def mirror_bundle(bundle: InfluenceBundle) -> InfluenceBundle:
    return InfluenceBundle(bundle.q_R, bundle.q_L)


def mirror(env: Environment, dist):
    """Mirror an (environment, type distribution) pair; an involution.

    Sender types map through theta -> 1 - theta, so the distribution object
    must provide mirrored().
    """
    return mirror_environment(env), dist.mirrored()


def recommendation_kernel(env: Environment, experiment: Experiment) -> np.ndarray:
    """State-conditional action probabilities, shape (2, 3): rows are states 0/1.

    Bayes inversion at the prior: an atom (mu, q, a) contributes q * mu / prior
    in state 1 and q * (1 - mu) / (1 - prior) in state 0.
    """
    if env.mu_prior <= 0.0 or env.mu_prior >= 1.0:
        raise ScopeError("degenerate prior: recommendation kernel undefined")
    experiment.validate(env)
    kernel = np.zeros((2, 3))
    col = {a: i for i, a in enumerate(ACTIONS)}
    for atom in experiment.atoms:
        j = col[atom.action]
        kernel[1, j] += atom.prob * atom.posterior / env.mu_prior
        kernel[0, j] += atom.prob * (1.0 - atom.posterior) / (1.0 - env.mu_prior)
    return kernel


@dataclass(frozen=True)
class GarblingVerdict:
    """Result of a garbling feasibility check with the certifying Markov matrix."""

    is_garbling: bool
    residual: float
    matrix: np.ndarray | None

    def __bool__(self) -> bool:
        return self.is_garbling


def is_garbling(
    env: Environment,
    coarse: Experiment,
    fine: Experiment,
    tol: float = FEAS_TOL,
) -> GarblingVerdict:
    """Is `coarse` obtainable from `fine` by post-processing its recommendations?

    Solves a small LP for a row-stochastic 3x3 matrix M minimizing the
    worst-case mismatch between kernel(coarse) and kernel(fine) @ M; verdict
    is true when that mismatch is within tol.
    """
    k_coarse = recommendation_kernel(env, coarse)
    k_fine = recommendation_kernel(env, fine)
    # Variables: M flattened row-major (9) then the residual bound s.
    n_m = 9
    c = np.zeros(n_m + 1)
    c[n_m] = 1.0
    a_ub, b_ub = [], []
    for w in range(2):
        for j in range(3):
            row_pos = np.zeros(n_m + 1)
            for r in range(3):
                row_pos[3 * r + j] = k_fine[w, r]
            row_pos[n_m] = -1.0
            a_ub.append(row_pos.copy())
            b_ub.append(k_coarse[w, j])
            row_neg = -row_pos
            row_neg[n_m] = -1.0
            a_ub.append(row_neg)
            b_ub.append(-k_coarse[w, j])
    a_eq = np.zeros((3, n_m + 1))
    for r in range(3):
        a_eq[r, 3 * r : 3 * r + 3] = 1.0
    b_eq = np.ones(3)
    bounds = [(0.0, 1.0)] * n_m + [(0.0, None)]
    res = linprog(
        c,
        A_ub=np.array(a_ub),
        b_ub=np.array(b_ub),
        A_eq=a_eq,
        b_eq=b_eq,
        bounds=bounds,
        method="highs",
    )
    if res.status != 0:
        raise InternalError(f"garbling LP failed: {res.message}")
    residual = float(res.x[n_m])
    ok = residual <= tol
    matrix = res.x[:n_m].reshape(3, 3) if ok else None
    return GarblingVerdict(ok, residual, matrix)
