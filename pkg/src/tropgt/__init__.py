"""tropgt: tropical (min-outcome) group testing.

Designs, the COMP/DD/SCOMP decoders, analytic bounds, exact small-instance
oracles and a seeded Monte Carlo harness.  See README.md for the file formats
and the CLI.
"""

from .core import (INFINITY, Instance, Profile, TestDesign, compute_mu,
                   count_profile, instance_from_json, instance_to_json,
                   is_satisfying, predicted_outcomes, run_tests,
                   unexplained_tests)
from .decoders import (DecodeResult, binarize, decode_comp, decode_dd,
                       decode_family, decode_scomp)
from .designs import (DesignSpec, bernoulli_design, design_from_spec,
                      near_constant_column_design, substream)
from .errors import BudgetError, InconsistentInputError, InputError, TropgtError
from .bounds import (CompSummands, DDThresholds, QVector,
                     classical_counting_bound, classical_counting_bound_exact,
                     comp_bound_defective_part, comp_bound_summands,
                     comp_error_bound, comp_test_threshold,
                     dd_converse_by_level, dd_converse_lower_bound,
                     dd_thresholds, level_sequence, phi, phi_alternating,
                     phi_curve, phi_upper_bound, profile_precedes,
                     q_probabilities, tropical_counting_bound,
                     tropical_counting_bound_exact, tropical_magic_number)
from .oracle import (DiagnosticCounts, SatisfyingSet, count_diagnostics,
                     enumerate_satisfying, exact_decoder_error,
                     optimal_success_probability)
from .sim import (Prior, SimResult, estimate_error, run_point, sample_truth,
                  sweep, wilson_interval)

__version__ = "0.1.0"
