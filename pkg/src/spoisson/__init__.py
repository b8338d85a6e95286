"""Truncated Poisson algebras over F_p: Lie nilpotence and solvability series, class formulas, identities."""
__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .field import PrimeModulus, Scalar, fp_arith, fp_inv, is_prime
from .subspace import (BilinearMap, PairwiseMap, Subspace, bilinear_image_span, echelonize, intersection,
                       membership, subspace_sum)
from .liealg import (FAMILIES, LieAlgebra, SeriesReport, build_lie_algebra, delta_n_census,
                     derived_series_of_lie, gamma_quotient_dims, lie_bracket, lower_central_series, make_named, width)
from .poisson import (PoissonElement, PoissonRing, TruncationShape, degree_truncated_symmetric, embed_lie_element,
                      height_filtration_space, multiply, poisson_bracket, truncated_hamiltonian, truncated_symmetric)
from .series import (dimension_subalgebras, derived_series, gamma_series, predicted_class_bounds,
                     upper_derived_series, upper_lie_powers, verify_commutator_products, verify_filtration_law,
                     verify_upper_power_structure)
from .identities import (MultilinearPoissonPolynomial, catalog, evaluate, frobenius_power_test,
                         satisfies_multilinear, series_polynomial, standard_polynomial)
