"""Estimation and discrimination of the diamagnetic coupling in a two-mode Dicke model."""

__version__ = "0.1.0"

#: Tag written into every result row.
CONVENTION = "sigma0=I/2"

from .model import ModelParams, d_crit, d_trk, dipole_gauge_map, ground_state_covariance, lambda_crit  # noqa: E402
from .estimation import EstimationReport, estimation_report, qfi_two_mode  # noqa: E402
from .discrimination import DiscriminationReport, discrimination_report  # noqa: E402

__all__ = [
    "CONVENTION",
    "DiscriminationReport",
    "EstimationReport",
    "ModelParams",
    "d_crit",
    "d_trk",
    "dipole_gauge_map",
    "discrimination_report",
    "estimation_report",
    "ground_state_covariance",
    "lambda_crit",
    "qfi_two_mode",
]
