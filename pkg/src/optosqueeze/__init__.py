"""Mechanical squeezing by a two-tone driven cavity coupled to two auxiliary cavities.

Modules:
    model         parameters, validation and parameter files
    spectrum      engineered optical bath spectrum and its features
    weakcoupling  master-equation rates and closed-form variances
    langevin      exact Gaussian steady state of the linear model
    classical     drive amplitudes to dressed couplings
    optimize      optimal drive ratio, inter-cavity coupling and bounds
    cli           command-line front end
"""

from __future__ import annotations

__version__ = "0.1.0"

from .model import SystemParams, symmetric_setting, validate
from .spectrum import env_summary, s_op
from .weakcoupling import squeezing_db, variance_x1

__all__ = [
    "SystemParams",
    "__version__",
    "env_summary",
    "s_op",
    "squeezing_db",
    "symmetric_setting",
    "validate",
    "variance_x1",
]
