"""
Building an A_1 majorant
========================

Rubio de Francia's iteration turns any non-negative ``h`` into a weight
``Rh >= h`` whose product with ``u0`` is in A_1 with constant at most
``2 K0``.  Here ``u0 = |x|^{-1/2}`` and ``nu`` is a power of a maximal
function, so the exponent data needed for ``p0`` is known.
"""
from rwlab import families
from rwlab.grid import Grid
from rwlab.harness.dsl import parse_weight
from rwlab.rdf import k0_estimate, rdf_iterate
from rwlab.weights import a1_constant, build_weight

g = Grid()
u0 = build_weight(parse_weight("power(-0.5)"), g)
nu = build_weight(parse_weight("a1max(indicator(0,1), -0.5)"), g)

# C0 is measured on a small mixed family
test_family = [f for _, f in families.family(g, "mixed", 8, 0)]
est = k0_estimate(u0, nu, 1.0, test_family)
print(f"[u0]_A1 = {a1_constant(u0):.4f}")
print(f"p0 = {est.p0:.4f}  C0 = {est.C0:.4f}  K0 = {est.K0:.2f}  (A_p route: {est.buckley:.4f})")

h = families.step(g, 3, 5)
res = rdf_iterate(est.config(u0, nu, 1.0), h)
for name, (value, bound, ok) in res.checks.items():
    print(f"  {name:10s} {value:12.5g}  bound {bound:10.5g}  {'ok' if ok else 'FAIL'}")
