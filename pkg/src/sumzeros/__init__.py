"""Zeros of sums of random polynomials and their limiting potentials."""

__version__ = "0.1.0"

from .extnum import ExtArray, ExtComplex
from .measures import (
    ComplexGaussian,
    LogParetoRadial,
    Measure,
    MeasureError,
    Mixture,
    PointMass,
    SingularRadial,
    UniformCircle,
    UniformDisk,
)
from .polyroots import DegreeSequence, PolySum, RootPoly
from .potential import Grid, GridMeasure, LimitSpec
from .solver import RootReport, SolveOptions, count_roots_argument, find_roots

__all__ = [
    "ExtArray", "ExtComplex",
    "Measure", "MeasureError", "UniformDisk", "UniformCircle", "ComplexGaussian",
    "PointMass", "LogParetoRadial", "SingularRadial", "Mixture",
    "RootPoly", "PolySum", "DegreeSequence",
    "Grid", "GridMeasure", "LimitSpec",
    "SolveOptions", "RootReport", "find_roots", "count_roots_argument",
]
