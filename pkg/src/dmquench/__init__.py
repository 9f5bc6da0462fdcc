"""Exact thermodynamics of a suddenly quenched XY chain with Dzyaloshinsky-Moriya interaction.

The chain maps onto free fermions, so every quantity factorises over
(k, -k) blocks: work statistics under two-point energy measurements,
fluctuation-theorem checks, irreversible entropy production and
derivative-based detection of the critical line.
"""

from .entropy import EntropyReport, entropy_production, extensivity_check, irr_entropy, irr_entropy_relative
from .errors import ConfigError, GaplessModeError, NumericError, SizeLimitError
from .kernels import BACKEND
from .model import ModelParams, ModeTable, QuenchSetup, bogoliubov_angle, build_mode_table, epsilon, k_grid, zeta
from .thermo import ModeGibbs, delta_free_energy, log_partition, mode_gibbs
from .work import (
    CharFnValue,
    CrooksReport,
    Cumulants,
    WorkDistribution,
    char_fn,
    crooks_check,
    cumulants_numeric,
    jarzynski_log_residual,
    mean_and_variance,
    total_variation,
    work_pdf_exact,
    work_pdf_fft,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "CharFnValue",
    "ConfigError",
    "CrooksReport",
    "Cumulants",
    "EntropyReport",
    "GaplessModeError",
    "ModeGibbs",
    "ModeTable",
    "ModelParams",
    "NumericError",
    "QuenchSetup",
    "SizeLimitError",
    "WorkDistribution",
    "bogoliubov_angle",
    "build_mode_table",
    "char_fn",
    "crooks_check",
    "cumulants_numeric",
    "delta_free_energy",
    "entropy_production",
    "epsilon",
    "extensivity_check",
    "irr_entropy",
    "irr_entropy_relative",
    "jarzynski_log_residual",
    "k_grid",
    "log_partition",
    "mean_and_variance",
    "mode_gibbs",
    "total_variation",
    "work_pdf_exact",
    "work_pdf_fft",
    "zeta",
]
