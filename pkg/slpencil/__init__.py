"""
slpencil: direct and inverse spectral problems for Sturm-Liouville operators
with rational Herglotz-Nevanlinna functions of the spectral parameter in both
boundary conditions.
"""

__version__ = "0.1.0"

from .config import InverseConfig, MetricConfig, SlpencilConfig, SolverConfig, StudyConfig, load_config
from .darboux import apply_chain, parse_chain, t_minus, t_minus_plus, t_plus, t_plus_minus
from .direct_solver import Problem, SpectralData, SturmLiouvilleSolver, spectral_data
from .exceptions import ConvergenceError, DomainError, SlpencilError
from .function_space import MeanZeroFunction, sobolev_norm
from .hn_rational import RationalHN, theta_transform
from .inverse_solver import InverseSolver, inverse
from .stability_metrics import d_alpha, rho_alpha

__all__ = [
    "__version__",
    "ConvergenceError",
    "DomainError",
    "InverseConfig",
    "InverseSolver",
    "MeanZeroFunction",
    "MetricConfig",
    "Problem",
    "RationalHN",
    "SlpencilConfig",
    "SlpencilError",
    "SolverConfig",
    "SpectralData",
    "StudyConfig",
    "SturmLiouvilleSolver",
    "apply_chain",
    "d_alpha",
    "inverse",
    "load_config",
    "parse_chain",
    "rho_alpha",
    "sobolev_norm",
    "spectral_data",
    "t_minus",
    "t_minus_plus",
    "t_plus",
    "t_plus_minus",
    "theta_transform",
]
