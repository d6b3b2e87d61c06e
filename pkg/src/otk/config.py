"""Default tolerances and global caps.

Every solver takes these as keyword defaults, so individual calls (and tests)
can override them without touching module state.
"""

import os

# Eigen-decomposition residual tolerance (relative to the matrix norm).
TOL_EIG = 1e-10

# Membership tolerance for "0 in (conv) V": member iff residual <= TOL_MEMBER * (1 + tuple norm).
TOL_MEMBER = 1e-8

# Subgradient-norm stopping tolerance for the distance solver.
TOL_GRAD = 1e-9

# Equality tolerance between dist^2 and max variance, after normalizing the
# tuple norm to 1.
TOL_EQ = 1e-5

# Relative width of the top-eigenvalue cluster defining the numerical
# top eigenspace.
REL_TOL_EIGENSPACE = 1e-8

# Hard cap on any matrix dimension built by generators / kron.
DIM_CAP = 4096


def thread_count() -> int:
    """Worker-thread cap, controlled by the OTK_THREADS environment variable."""
    env = os.environ.get("OTK_THREADS", "")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return min(8, os.cpu_count() or 1)
