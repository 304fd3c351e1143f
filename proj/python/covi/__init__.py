"""Cooperative visual-inertial closed-form initialization.

Thin Python layer over the C++ core: trajectory/sensor simulation, the
closed-form relative-state solver, gyro-bias calibration and empirical
observability-rank checks.
"""

from covi._core import (  # noqa: F401
    CoviError,
    calibrate_trial,
    gramian_rank,
    project_to_so3,
    quat_to_rot,
    rot_from_euler,
    rot_to_euler,
    run_trial,
    skew,
    solve_trial,
)

__all__ = [
    "CoviError",
    "calibrate_trial",
    "gramian_rank",
    "project_to_so3",
    "quat_to_rot",
    "rot_from_euler",
    "rot_to_euler",
    "run_trial",
    "skew",
    "solve_trial",
]
