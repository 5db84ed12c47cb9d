"""Certified enclosures of the first Steklov eigenvalue of regular polygons."""

from .asymptotics_constants import constant_closure, euler_sum, expansion_value, monotonicity_margin
from .certification import block_enclosure, sigma_enclosure
from .errors import CertificationError
from .interval_core import Precision, working_precision
from .schur_analysis import beta_and_kappa, schur_root

__all__ = [
    "CertificationError",
    "Precision",
    "beta_and_kappa",
    "block_enclosure",
    "constant_closure",
    "euler_sum",
    "expansion_value",
    "monotonicity_margin",
    "schur_root",
    "sigma_enclosure",
    "working_precision",
]

__version__ = "0.1.0"
