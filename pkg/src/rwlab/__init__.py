"""Numerical laboratory for weighted bilinear and sparse inequalities on the line."""
from .grid import Extension, Grid, Interval, SampledFunction, average, integrate
from .lorentz import WeightedMeasureView, lorentz_norm, weak_norm
from .operators import Backend, Op, hilbert, maximal, modulated_hilbert, sharp_s
from .weights import Weight, a1_constant, ap_constant, apr_constant, fujii_wilson, rh_inf_constant

__version__ = "0.1.0"

__all__ = [
    "Backend", "Extension", "Grid", "Interval", "Op", "SampledFunction", "Weight",
    "WeightedMeasureView", "a1_constant", "ap_constant", "apr_constant", "average",
    "fujii_wilson", "hilbert", "integrate", "lorentz_norm", "maximal", "modulated_hilbert",
    "rh_inf_constant", "sharp_s", "weak_norm",
]
