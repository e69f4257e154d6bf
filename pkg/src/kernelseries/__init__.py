"""Backstepping kernels as truncated double power series solved on sparse linear systems."""
from importlib.metadata import PackageNotFoundError, version

from ._backend import BACKEND
from .assembler import assemble, recursion_oracle_ex1, solve_problem, sweep
from .examples import example1, example2, example3, example4, example5
from .problem import KernelProblem, localize, parse_problem, serialize_problem, validate_problem
from .triseries import TriSeries

try:
    __version__ = version("artifact")
except PackageNotFoundError:
    __version__ = "0.0.0"

__all__ = [
    "BACKEND", "KernelProblem", "TriSeries", "assemble", "example1", "example2", "example3",
    "example4", "example5", "localize", "parse_problem", "recursion_oracle_ex1",
    "serialize_problem", "solve_problem", "sweep", "validate_problem", "__version__",
]
