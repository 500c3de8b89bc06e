"""Numerical tolerances shared across the package.

Every comparison the library makes against a tolerance reads it from here so
that test behaviour is reproducible and easy to audit.
"""

#: Sum of a prior vector must match 1 within this.
PRIOR_SUM_TOL = 1e-12

#: Each row of a discrete transition matrix must sum to 1 within this.
ROW_SUM_TOL = 1e-9

#: Relative tolerance (scaled by ``max(1, max|coord|)``) for hyperplane membership.
PLANE_TOL = 1e-9

#: Two candidate hypotheses are tied when their squared embedding distances
#: (equivalently, their log posteriors) differ by at most this.
TIE_TOL = 1e-9

#: Probability mass allowed outside a truncated quadrature domain.
TRUNCATION_MASS_TOL = 1e-10

#: Basis orthonormality checks in the plane projection.
BASIS_TOL = 1e-12

#: Geometry invariant checks reported by the figure pipeline.
FIGURE_TOL = 1e-9

#: Largest codebook the sequence enumerators will walk through.
ENUMERATION_CAP = 10**6
