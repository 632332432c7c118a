"""Single home for the numerical tolerances used across the package.

Geometry membership and experiment invariants are checked to GEOM_TOL,
root-finding residuals to ROOT_TOL, and every feasibility-style check
(incentive, participation, garbling certificates) to FEAS_TOL.
"""

GEOM_TOL = 1e-12
ROOT_TOL = 1e-12
FEAS_TOL = 1e-9

# Default |oracle - analytic| revenue gap accepted when certifying a menu
# against the discrete LP at the reference grid size (N = 200).
ORACLE_GAP = 1e-2
