"""
Mixed weak bounds at desk scale
===============================

Runs the Sawyer-type experiment with its default weights and prints the
largest ratio per weight next to the certified constant.  The envelope check
asks whether these readings can be majorized by a non-decreasing function of
that constant.

Takes about ten seconds (both grids are evaluated).
"""
from rwlab.harness.dsl import parse_spec
from rwlab.harness.experiments import run

rep = run(parse_spec("e4 { q=2 }"))
env = rep.summary["envelopes"]["C_S"]
print(f"{len(rep.live)} live cases, max ratio {rep.max_ratio:.4f}, "
      f"drift {rep.summary['max_drift']:.4f}")
print(f"{'certified':>10} {'max C_S':>9} {'fit':>7}  weight")
for x, y, fit, label in zip(env["x"], env["y"], env["fit"], env["labels"]):
    print(f"{x:10.4f} {y:9.4f} {fit:7.4f}  {label}")
print("envelope", "ok" if env["ok"] else "FAIL", f"(worst excess {env['worst']:.3f})")
