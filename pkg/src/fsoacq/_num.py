"""Small numerical helpers shared across modules."""
import math

import numpy as np

# Relative slack for floor/ceil of quantities that are integers in exact
# arithmetic but land a few ulps off in floating point (4 / (4 * 0.2**2)).
_REL_TOL = 1e-12


class InfeasibleError(ValueError):
    """Physically meaningless parameter combination (bound outside its range)."""


def robust_floor(x):
    """Floor that treats values within 1e-12 relative below an integer as that integer."""
    x = float(x)
    return math.floor(x + _REL_TOL * max(1.0, abs(x)))


def robust_ceil(x):
    x = float(x)
    return math.ceil(x - _REL_TOL * max(1.0, abs(x)))


def robust_floor_array(x):
    x = np.asarray(x, dtype=float)
    return np.floor(x + _REL_TOL * np.maximum(1.0, np.abs(x)))
