"""Numerical tolerances shared by every module."""

#: Structural invariants (hermiticity, trace, completeness of constructed objects).
STRUCT_TOL = 1e-12
#: Equality of derived quantities (probabilities, reconstructions, round-trips).
DERIVED_TOL = 1e-10
#: Geometric norms (Bloch vector length, purity/norm equivalence).
NORM_TOL = 1e-9
#: Lowest admissible eigenvalue for PSD checks.
PSD_TOL = 1e-10
#: Loaded matrices (JSON fixtures, user input) are checked at this looser level.
LOAD_TOL = 1e-9
#: Eigenvalues closer than this are treated as one degenerate block.
DEGENERACY_TOL = 1e-10
