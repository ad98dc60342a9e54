"""emdenlab: a numerical laboratory for Emden-Fowler equations.

Exact vector-field algebra for the scheme spanned by drag and scaling fields,
time-dependent gauge transformations, time-dependent first integrals with
drift verification, canonical reductions, and the closed-form superposition
family of the n = 5 equation.
"""

__version__ = "0.1.0"
