"""Minimum-error discrimination of qubit states with arbitrary priors."""

from .config import DEFAULT_TOLERANCES, Tolerances
from .geometry import circumsphere, hyperbola_pair, plane_frame, translate_ensemble
from .model import (
    AlphaFamily,
    Decomposition,
    Ensemble,
    LagrangeCandidate,
    Povm,
    PovmElement,
    Solution,
    density_matrix_of,
    make_ensemble,
    make_povm,
)
from .solver import (
    check_no_measurement,
    decompose_povm,
    detection_vectors,
    equal_priors_solve,
    pair_candidate,
    quad_candidate,
    solve,
    solve_alphas,
    triple_candidate,
    validate_candidate,
)
from .verification import (
    certify,
    dual_oracle,
    four_symmetric_reference,
    helstrom_two_state,
    sample_outcomes,
    trine_reference,
)

__version__ = "0.1.0"

__all__ = [
    "AlphaFamily",
    "DEFAULT_TOLERANCES",
    "Decomposition",
    "Ensemble",
    "LagrangeCandidate",
    "Povm",
    "PovmElement",
    "Solution",
    "Tolerances",
    "certify",
    "check_no_measurement",
    "circumsphere",
    "decompose_povm",
    "density_matrix_of",
    "detection_vectors",
    "dual_oracle",
    "equal_priors_solve",
    "four_symmetric_reference",
    "helstrom_two_state",
    "hyperbola_pair",
    "make_ensemble",
    "make_povm",
    "pair_candidate",
    "plane_frame",
    "quad_candidate",
    "sample_outcomes",
    "solve",
    "solve_alphas",
    "translate_ensemble",
    "trine_reference",
    "triple_candidate",
    "validate_candidate",
]
