"""Nonlocal Cahn-Hilliard simulator with logarithmic potential and separation diagnostics."""
from .grid import Domain, Field, GridError, make_domain
from .potential import FloryHuggins, PotentialDomainError, PotentialParams, check_assumptions
from .kernel import Kernel, KernelError, build_kernel, bump_kernel, gaussian_kernel
from .dynamics import SolverConfig, StepError, integrate, step
from .trajectory import Trajectory

__version__ = "0.1.0"
