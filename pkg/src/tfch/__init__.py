"""Time-fractional Cahn-Hilliard solver: L1+ convex splitting on periodic 2-D grids."""
from ._accel import BACKEND
from .diagnostics import estimate_orders, free_energy, l2_error, mass_drift
from .fractional_kernels import KernelRow, apply_row, l1_row, l1plus_row, omega, psd_quadratic_form
from .spectral_field import Field, Grid, hminus1_norm, laplacian, neg_inv_laplacian
from .stepper import (NonlinearSolveConfig, NumericalBlowup, PhysicalParams, RatioConstraintError,
                      SolverState, StepFailure, Variant, run_mesh, step)
from .time_mesh import AdaptiveParams, TimeMesh, append_step, graded_mesh, mesh_from_steps, next_dt, uniform_mesh

__version__ = "0.1.0"
