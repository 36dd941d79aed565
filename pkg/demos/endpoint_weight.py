"""
|x| at the A_2 endpoint
=======================

The weight ``|x|`` sits exactly on the boundary of A_2: the classical
constant diverges (slowly, like a logarithm) as the grid resolves the zero
at the origin, while the restricted constant settles.  Watching both under
grid doubling is how the harness decides class membership.

The divergence here is logarithmic, about 10% per doubling and shrinking, so
the doubling protocol cannot tell it from discretization drift at these
sizes and reports both constants as stable.
"""
import numpy as np

from rwlab.grid import Grid
from rwlab.weights import ap_constant, apr_constant, classify, doubling_trace, power_weight

print(f"{'N':>6} {'[w]_A2':>10} {'[w]_A2R':>10}")
for k in range(10, 15):
    w = power_weight(1, Grid(8.0, 2 ** k))
    print(f"{2 ** k:6d} {ap_constant(w, 2.0):10.4f} {apr_constant(w, 2.0):10.4f}")

# the same information as the membership protocol sees it
for name, const in (("A_2", lambda w: ap_constant(w, 2.0)),
                    ("A_2^R", lambda w: apr_constant(w, 2.0))):
    trace = doubling_trace(lambda g: power_weight(1, g), const, Grid(8.0, 1024))
    ratios = np.array(trace.values[1:]) / np.array(trace.values[:-1])
    print(f"{name:6s} ratios {np.round(ratios, 3)} -> {classify(trace)}")
