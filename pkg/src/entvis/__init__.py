"""Two-particle interferometric measurement of two-qubit concurrence.

Simulates a pair of probe atoms traversing cavity, dispersive and Ramsey
regions, searches the four apparatus angles for the extrema of the corrected
joint excitation probability, and confirms that the resulting fringe
visibility equals the concurrence of the cavity state, both exactly and
under simulated measurement shot noise.
"""

from .errors import InsufficientShots, NotNormalized, ParseError, ZeroState
from .measurement import (
    OutcomeDistribution,
    PbarEstimate,
    ShotCounts,
    corrected_joint_probability,
    distribution_from_coefficients,
    estimate_pbar,
    real_coefficient_pbar,
    sample_shots,
)
from .protocol import (
    FinalCoefficients,
    ProtocolAngles,
    apply_protocol,
    atom_matrix,
    phase_identity_residual,
    single_particle_probability,
    single_particle_visibility,
)
from .qstate import (
    SingleExcitationState,
    TwoQubitState,
    concurrence_exact,
    haar_state,
    normalize,
    parse_state,
    random_pure_state,
    serialize_state,
)
from .search import (
    SearchConfig,
    VisibilityReport,
    estimate_concurrence_shots,
    exact_pbar,
    find_extrema,
    preset_real_visibility,
    preset_schmidt_visibility,
    visibility_exact,
)

__version__ = "0.1.0"

__all__ = [
    "FinalCoefficients",
    "InsufficientShots",
    "NotNormalized",
    "OutcomeDistribution",
    "ParseError",
    "PbarEstimate",
    "ProtocolAngles",
    "SearchConfig",
    "ShotCounts",
    "SingleExcitationState",
    "TwoQubitState",
    "VisibilityReport",
    "ZeroState",
    "apply_protocol",
    "atom_matrix",
    "concurrence_exact",
    "corrected_joint_probability",
    "distribution_from_coefficients",
    "estimate_concurrence_shots",
    "estimate_pbar",
    "exact_pbar",
    "find_extrema",
    "haar_state",
    "normalize",
    "parse_state",
    "phase_identity_residual",
    "preset_real_visibility",
    "preset_schmidt_visibility",
    "random_pure_state",
    "real_coefficient_pbar",
    "sample_shots",
    "serialize_state",
    "single_particle_probability",
    "single_particle_visibility",
    "visibility_exact",
]
