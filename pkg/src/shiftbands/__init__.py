"""Computational laboratory for shifted integral forms.

Exact form algebra over the integers, Taylor expansions around a shift by
an algebraic number, band-limited kernels whose transforms sandwich a band
indicator, quasi-random density integrals, simultaneous rational
approximation certificates, exact-phase exponential sums, and lattice
counting, assembled into a verification pipeline for the asymptotic count
of points whose form values fall in prescribed bands.
"""

from ._accel import NUMBA_ENABLED, backend_name
from .counting import (CountResult, CountSpec, SeriesRow, count_diagonal_mitm,
                       count_generic, count_points, count_series)
from .density import (DensityEstimate, I_L, LadderRung, RealZeroCertificate,
                      TentSpec, density, find_nonsingular_real_zero, tent)
from .dioph import (ApproximationParams, BakerCertificate, BirchCertificate,
                    IdentityReport, SpecialSolution, baker_search,
                    birch_search, identity_checks, omega_values,
                    special_from_slices)
from .dissection import (ArcLabel, DissectionParams, ExperimentSpec,
                         SandwichResult, VerificationReport, classify,
                         r_plus_minus, verify_asymptotic, write_bundle)
from .exact import ExactReal, RatInterval
from .expsums import (CertificateBundle, OscIntegralResult, OscIntegralSpec,
                      QuadratureRule, ShiftedSumResult, StarResult,
                      WeylSumSpec, complete_sum, decay_witness, osc_integral,
                      s_star, shifted_S, weyl_g)
from .forms import (Form, FormSystem, HypothesisReport, ShiftExpansion,
                    check_hypotheses, diagonal_quadratic, load_system,
                    monomials_of_degree, system_from_document,
                    system_to_document, taylor_shift)
from .kernels import (Schedule, band_indicator, kernel, kernel_abs_bound,
                      kernel_ft, kernel_ft_quadrature, kernel_l1_bound,
                      kernel_tail_bound, product_kernel, sandwich_grid,
                      sandwich_ok, schedule)
from .vandermonde import (SliceMoments, build_directions, build_family,
                          monomial_count, slice_moments)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
