"""Asymptotic structure of classical radiation in Minkowski space.

Numerical toolkit for fields given by characteristic data on the light
cone at infinity: null, spacelike and timelike asymptotes, long-range
degrees of freedom, radiated and Cauchy-surface Poincare charges, and the
massive Dirac sector on the unit velocity hyperboloid.
"""

from .hyperboloid import (DiracProfile, GaugedPotential, HyperboloidGrid,
                          TimelikeCharges, build_velocity_grid,
                          coulomb_gauge_potential, dirac_packet,
                          integrate_hyperboloid, phase_dressing,
                          scalar_product, timelike_out_charges)
from .linalg import fixed_tree_sum, gauss_legendre, richardson_limit
from .spinors import (EPS_LOWER, GAMMA, MINKOWSKI, Tetrad, boost_matrix,
                      bracket, lower_spinor, minkowski_dot, mixed_matrix,
                      node_spinor, null_vector_of, raise_spinor,
                      rotation_matrix, vec_of_matrix)
from .sphere import (HomogeneousFn, NodeField, NullDirectionGrid, build_grid,
                     integrate, integrate_delta_line, spin_derivative)

__version__ = "0.1.0"

__all__ = [
    "DiracProfile", "EPS_LOWER", "GAMMA", "GaugedPotential",
    "HomogeneousFn", "HyperboloidGrid", "MINKOWSKI", "NodeField",
    "NullDirectionGrid", "Tetrad", "TimelikeCharges", "boost_matrix",
    "bracket", "build_grid", "build_velocity_grid",
    "coulomb_gauge_potential", "dirac_packet", "fixed_tree_sum",
    "gauss_legendre", "integrate", "integrate_delta_line",
    "integrate_hyperboloid", "lower_spinor", "minkowski_dot",
    "mixed_matrix", "node_spinor", "null_vector_of", "phase_dressing",
    "raise_spinor", "richardson_limit", "rotation_matrix",
    "scalar_product", "spin_derivative", "timelike_out_charges",
    "vec_of_matrix", "__version__",
]
