"""Computation with quasi-infinitely divisible distributions."""
from .convergence import Ramp, a_form, convergence_report, cs_integral, small_ball_second_moment
from .cuppens import cuppens_triplet, mass_identity_check
from .density import (G_minus, G_plus, check_kallenberg, check_orey, g_minus, g_plus, gram_matrix,
                      kallenberg_index)
from .errors import (AliasWarning, GridTooCoarse, HypothesisFails, ImaginaryLeak, Inconclusive,
                     LambdaOutOfRange, ModeMismatch, NotApplicable, NotIntegrable, NotPSD, NotSymmetric,
                     QIDError, QuadratureFailure, StableUnsupported, TailBoundWarning, UnsupportedStableImage,
                     ZeroFound)
from .lattice import (LatticePMF, certify_zero_free, char_poly, distinguished_log, extract_triplet,
                      law_char_fn, projection_id_check)
from .measure import (AtomicSignedMeasure, QuasiLevyMeasure, StableTail, convolve_atomic, jordan,
                      pushforward)
from .moments import covariance, exp_moment, h_moment_tail, mean
from .support import Cone, check_cone_conditions, drift_in_support_check
from .triplet import (CharExponentFn, CharTriplet, Mode, affine_image, char_exponent, char_function,
                      POLYA, convert_mode, convolve, gaussian_probe, polya_exponent, product_triplet,
                      validate)

__version__ = "0.1.0"
