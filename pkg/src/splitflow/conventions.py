"""Shared numerical tolerances and the endpoint-crossing convention.

Every tolerance used by the index computations lives here so that the whole
package is tuned from one place.

Endpoint convention
-------------------
Index-type quantities (Maslov index of a Lagrangian path, spectral flow of an
operator family) count signed crossings over a closed parameter interval
[0, 1].  A convention is needed for crossings sitting exactly at an endpoint.
The package default, ``"lcro"`` (left closed, right open), counts

* interior crossings with their full signature,
* a crossing at t = 0 with the positive part of its crossing form only,
* a crossing at t = 1 with minus the negative part only.

Equivalently: an eigenvalue branch sitting at zero at t = 0 contributes +1
if it moves up, 0 if it moves down; at t = 1 it contributes -1 if it arrived
from above, 0 if from below.  This choice makes the index additive under
path concatenation and antisymmetric under path reversal.

The mirrored convention ``"rclo"`` (right closed, left open) is obtained by
reversing the parameter and negating; it is exposed for auditability via the
CLI ``--convention`` flag.  All identity checks in :mod:`splitflow.formulas`
pass under either convention as long as one is used consistently.
"""

# Convention names accepted everywhere a ``convention`` argument appears.
CONVENTIONS = ("lcro", "rclo")
DEFAULT_CONVENTION = "lcro"

# Structure tolerances (complex structure and frame validation).
STRUCTURE_TOL = 1e-12  # J^2 = -Id, J^T = -J
FRAME_TOL = 1e-10      # frame^T frame = Id, frame^T J frame = 0

# Rank / intersection decisions.
RANK_TOL = 1e-8        # singular values below this count as zero

# Crossing-form regularity: eigenvalues of the crossing form smaller than
# this (relative to its scale) flag a non-regular crossing.
CROSSING_REG_TOL = 1e-8

# Adaptive bisection on the path parameter stops when an interval is shorter
# than this.
MIN_PARAM_STEP = 1e-10

# Gap-metric bound the stored samples of a Lagrangian path must satisfy.
PATH_GAP_BOUND = 0.5
# Tighter bound used while hunting for crossings.
DETECT_GAP = 0.1


def check_convention(name: str) -> str:
    if name not in CONVENTIONS:
        raise ValueError(f"unknown endpoint convention {name!r}; expected one of {CONVENTIONS}")
    return name
