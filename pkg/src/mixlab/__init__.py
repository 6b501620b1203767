"""mixlab: exact and Monte-Carlo certification tooling for heat-bath
dynamics on ferromagnetic Ising models — spectra, couplings, inequality
checkers, and an end-to-end mixing-time lower-bound pipeline."""

__version__ = "0.1.0"

from .model import IsingModel, all_minus, all_plus  # noqa: E402
from .errors import CapacityError  # noqa: E402
from .rng import RngStream  # noqa: E402

__all__ = [
    "CapacityError",
    "IsingModel",
    "RngStream",
    "__version__",
    "all_minus",
    "all_plus",
]
