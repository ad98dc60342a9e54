"""Build a constant of motion from one known solution, then watch it not move.

The drag equation x'' = -2 x'/t - x^5 has the decaying profile
xp = (2 t)^(-1/2).  Feeding that single profile into the invariant
constructor produces a full first integral, polynomial in (x, v) with
time-dependent coefficients.  We integrate a *generic* trajectory and
measure how much the invariant drifts along it: integrator noise, and
nothing else.
"""

import sys

from emdenlab.invariants import (
    drift,
    invariant_from_particular_solution,
    particular_invariant_expansion,
)
from emdenlab.numerics import IntegratorConfig, integrate
from emdenlab.solutions import catalog_entry

entry = catalog_entry("lane_emden_n5")
prob = entry.problem
window = (0.5, 5.0)

# the closed form of the invariant, exact coefficients
print("invariant built from xp = (2 t)^(-1/2):")
for (xpow, vpow), (coef, tpow) in sorted(particular_invariant_expansion(entry.xp, 5).items()):
    print(f"  + ({coef}) * t^{tpow} * x^{xpow} * v^{vpow}")
print()

inv = invariant_from_particular_solution(prob, entry.xp, window, dxp=entry.dxp)

# a generic state, nowhere near the profile
cfg = IntegratorConfig(rel_tol=1e-10, abs_tol=1e-12)
traj = integrate(prob.rhs, window[0], (1.3, -0.2), window[1], cfg)
print(f"integrated {traj.accepted} accepted steps over [{window[0]}, {window[1]}]")
print()

report = drift(inv, traj, samples=200)
print(report.render())
print()

# the same numbers as CSV, if you want to plot them
if "--csv" in sys.argv[1:]:
    report.write_csv(sys.stdout)
