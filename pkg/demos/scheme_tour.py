"""A tour of the bracket algebra behind the drag-equation scheme.

Three fields span the solvable algebra that generates every change of
frame we use; five fields span the module the equations themselves live
in.  The point of this script: every bracket you can form closes inside
those spans with *rational* coefficients, even while the nonlinearity
exponent is kept symbolic.  Everything downstream (gauges, invariants,
superposition) leans on that closure.
"""

from emdenlab.vfields import (
    bracket,
    decompose,
    emden_v_basis,
    emden_w_basis,
    verify_scheme,
)

W_LABELS = ("v*d/dv", "x*d/dv", "x*d/dx")
V_LABELS = ("x*d/dv", "x^n*d/dv", "v*d/dx", "v*d/dv", "x*d/dx")

w = emden_w_basis()
v = emden_v_basis()  # exponent stays the symbol n


# --- a few brackets by hand -------------------------------------------------

print("single brackets, decomposed back into the bases")
print()

for (left, right), labels, basis, names in [
    ((w[1], w[2]), (W_LABELS[1], W_LABELS[2]), w, W_LABELS),
    ((w[0], w[1]), (W_LABELS[0], W_LABELS[1]), w, W_LABELS),
    ((v[4], v[1]), (V_LABELS[4], V_LABELS[1]), v, V_LABELS),
]:
    br = bracket(left, right)
    dec = decompose(br, basis)
    combo = " + ".join(
        f"({c})*{name}" for c, name in zip(dec.coefficients, names) if str(c) != "0"
    )
    print(f"  [{labels[0]}, {labels[1]}] = {br or '0'}")
    print(f"      = {combo or '0'}   (in span: {dec.in_span})")

print()

# note the n in the last line: the coefficient is a polynomial in the
# symbolic exponent, not a float that happens to be close


# --- the full table, checked in one call ------------------------------------

report = verify_scheme(w, v, W_LABELS, V_LABELS)
print(report.render())
print()
print("all brackets closed:", report.ok)
