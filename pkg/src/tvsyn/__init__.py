"""tvsyn: optimal disturbance rejection for finite-horizon time-varying
systems via triangular-truncation distance problems."""

__version__ = "0.1.0"

from .errors import (AssumptionViolationError, CausalityViolationError,
                     CompletionInfeasibleError, FeedbackIllPosedError,
                     IdentityViolationError, InvalidInputError,
                     MethodDisagreementError, NotPositiveDefiniteError,
                     SolverNonConvergenceError, TvsynError,
                     UndefinedCertificateError)
from .operator_core import (CausalOperator, NestStructure, PolarParts,
                            PreannihilatorElement, causality_defect,
                            corner_block_norms, hs_norm, is_partial_isometry,
                            polar_decompose, spectral_norm, trace_norm)
from .factorization import (A1Report, InnerOuterPair, check_A1, inner_outer,
                            outer_inner, spectral_factor_causal)
from .nest_distance import (FactoredPlant, SynthesisOptions, SynthesisResult,
                            allpass_defect, arveson_distance,
                            controller_from_Q, parrott_complete,
                            plant_from_symbol, reduce_to_distance,
                            restricted_distance, synthesize)
from .dual_program import (DualCertificate, RecoveryFailure, SweepRow,
                           alignment_check, bounds_sweep,
                           dual_value_closed_form, dual_solve,
                           minimize_distance, recover_T_o, strict_truncation)
from .tv_hankel import (HankelMap, ToeplitzMap, hankel_apply, hankel_norm,
                        mixed_operator_norm, q_from_maximizing_vector,
                        toeplitz_apply)
from .mixed_sensitivity import (MixedPlant, MixedResult, build_mixed_plant,
                                lower_shift, minimize_stacked_distance,
                                mixed_synthesize, mixed_value_gamma,
                                mixed_value_hankel_toeplitz)
from .plant_lab import (PlantSpec, generate, load_operator, save_operator,
                        simulate_closed_loop, worst_case_disturbance)
