"""Exception types shared across the package.

The CLI maps these onto exit codes: ConfigError -> 2, scope/assumption
problems (ScopeError and subclasses, DistributionError,
NotImplementedError) -> 3, InternalError -> 4.
"""


class InvalidEnvironment(ValueError):
    """Environment thresholds violate 0 <= mu_low < mu_prior < mu_high <= 1."""


class InfeasibleBundle(ValueError):
    """Influence bundle lies outside the implementable polytope."""


class InvalidExperiment(ValueError):
    """Experiment violates probability, Bayes-plausibility or obedience invariants."""


class DistributionError(ValueError):
    """Type distribution is malformed (bad CDF/PDF, failed inversion, ironing needed)."""


class ScopeError(RuntimeError):
    """Operation invoked outside the regime in which it is characterized."""


class AssumptionError(ScopeError):
    """Regularity or bounded-extremism assumption fails for the instance."""


class ConfigError(ValueError):
    """Scenario configuration is malformed; message carries the offending path."""


class InternalError(RuntimeError):
    """A certified invariant failed at runtime (solver breakdown, broken identity)."""
