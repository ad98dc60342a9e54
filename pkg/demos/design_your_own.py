"""Design a drag equation around the solution you want it to have.

Working backwards: pick the nonlinearity exponent and a shift, and there
is exactly one damping coefficient a(t) that makes the slope-compatible
profile xp = (shift + (1-n) t / 2)^(-2/(n-1)) solve

    x'' = a(t) x' - x^n.

The constructor returns the problem and a catalog entry that carries the
profile with its exact derivatives, so the claim is checkable on the
spot.  The same thing is available on the command line as
`emdenlab construct --n 5 --K 1`.
"""

from emdenlab.problemfile import ProblemSpec, render_spec
from emdenlab.solutions import construct_equation

for n in (2.0, 5.0, 9.0):
    prob, entry = construct_equation(n, shift=1.0)
    report = entry.residual_report()
    gap = entry.slope_gap()
    print(entry.describe())
    print(f"  residual check      {report.max_residual:.3e} over {report.samples} samples")
    print(f"  slope compatibility {gap:.3e}")
    print()

# the n = 5 design, written out as a problem file the CLI can ingest
prob, entry = construct_equation(5.0, shift=1.0)
spec = ProblemSpec(
    kind="emden",
    n=prob.n,
    expressions={"a": prob.a.to_source(), "b": "-1"},
    singular_points=prob.singular_points,
    interval=entry.window,
    initial=(entry.xp(entry.window[0]), entry.dxp(entry.window[0])),
    rel_tol=1e-10,
    abs_tol=1e-12,
)
print("problem file for the n = 5 design:")
print()
print(render_spec(spec))
