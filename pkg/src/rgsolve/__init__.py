"""Integrable pairing models: exact spectra via Bethe-equation variables.

The package solves rational (XXX) and hyperbolic (XXZ) spin-1/2 pairing
models with L distinct levels.  Eigenstates are handled in two equivalent
frameworks: N complex rapidities solving the coupled Bethe equations, or L
real eigenvalue-based variables solving quadratic equations; conversions in
both directions are exact up to root polishing.  Inner products and norms
are evaluated by independent determinant routes (L x L, 2N x 2N, N x N
kernels, squared-Cauchy product-state overlaps) that are cross-checked
against a brute-force Hilbert-space oracle at small size.

Entry points: ModelParams + solve_evb_all for spectra, the overlaps module
for inner products, oracle for exact reference values, and the rgsolve CLI
(``rgsolve solve | overlap | verify | identities``) for batch work.
"""

from .errors import (CollisionError, ConvergenceError, DocumentError,
                     PoleError, RGSolveError, SingularPointError,
                     ValidationError)
from .model import (DUAL, HYPERBOLIC, OFF_SHELL, ON_SHELL, RATIONAL,
                    EigenstateRecord, LambdaSet, ModelParams, OccupationState,
                    SpectralSet, default_model, dumps_canonical,
                    loads_document, make_spectral_set, model_from_doc,
                    model_to_doc, occupation_from_bitstring, records_from_doc,
                    records_to_doc, validate_model, validate_spectral_set)
from .solvers import (DEFAULT_OPTIONS, BethePolynomial, DuplicateSolutionError,
                      SolveOptions, bethe_jacobian, dual_lambdas,
                      dual_rapidities, evb_jacobian, lambda_values,
                      lambdas_from_rapidities, rapidities_from_lambdas,
                      read_green_integer, refine_colliding_seeds,
                      residual_bethe, residual_evb, solve_bethe_direct,
                      solve_evb_all, solve_evb_seed)
from .overlaps import (OverlapResult, ReferenceOverlap, det_j_overlap,
                       det_k_overlap, dual_state_ratio, evb_norm, gaudin_norm,
                       izergin_borchardt, pochhammer_descending,
                       slavnov_overlap)
from .oracle import (SectorAmplitudes, SectorBasis, all_charges,
                     build_bethe_state, charge_eigenvalue, conserved_charge,
                     exact_inner_product, product_state, sector_basis,
                     verify_commutators, verify_eigenstate,
                     verify_quadratic_identity)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
