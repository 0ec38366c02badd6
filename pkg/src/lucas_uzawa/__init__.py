"""Solver and verifier for the Lucas-Uzawa growth model with a human-capital externality."""

from .calibration import (
    CalibrationDiagnostics,
    SolutionPath,
    Trajectory,
    assemble_solution,
    calibrate,
    calibration_from_u0,
    jump_residual,
)
from .closed_form import (
    Calibration,
    ZPath,
    B_at,
    B_star,
    F_at,
    F_star,
    c_at,
    costates_at,
    h_at,
    k_at,
    u_form1_at,
    u_form2_at,
    welfare,
    z_at,
)
from .dynamics import StateVector, foc_rhs, hamiltonian, scalar_u_rhs, simulate_foc, simulate_scalar_u
from .errors import (
    CalibrationError,
    DivergentIntegralError,
    EvaluationError,
    IntegrationError,
    InvalidParametersError,
    LucasUzawaError,
)
from .numerics import ToleranceSettings
from .params import DerivedConstants, InitialEndowment, ModelParams, derive_constants, validate
from .verification import VerificationReport, VerificationSettings, run_verification

__version__ = "0.1.0"
