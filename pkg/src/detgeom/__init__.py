"""Euclidean geometry of detection problems.

Input symbols and channel observations are embedded in R^N (N = alphabet
size) so that the posterior probability of a symbol given an observation is
proportional to exp(-squared distance) between their images.  MAP detection
becomes nearest-neighbour search, repeated transmissions combine by vector
addition, and expected squared distances give code-design metrics.
"""

__version__ = "0.1.0"

from .channels import (
    Alphabet,
    AwgnChannel,
    DiscreteChannel,
    LaplaceChannel,
    as_prior,
    example_discrete_channel,
    load_channel_spec,
    log_likelihoods,
    log_posterior,
    posterior,
    sample,
    stream,
    uniform_prior,
    validate,
)
from .detection import (
    Decision,
    decide,
    decide_repetition,
    decide_sequence,
    decision_regions,
    simulate_error_rate,
)
from .distances import (
    codebook_table,
    codeword_distance,
    codeword_distance_joint_mc,
    symbol_distance_exact,
    symbol_distance_mc,
    symbol_distance_quadrature,
    symbol_distance_table,
)
from .errors import (
    DegeneratePosteriorError,
    EnumerationCapError,
    ErasureError,
    EstimatorError,
    NonUniformPriorError,
    SpecError,
    UnknownObservationError,
)
from .figures import figure_discrete, figure_locus, plane_basis, project
from .geometry import (
    distance,
    embed_log_posterior,
    embed_observation,
    embed_observation_from_likelihoods,
    embed_symbol,
    reconstruct_posterior,
    symbol_matrix,
)
from .sequence import (
    aggregate_repetition,
    embed_codeword,
    embed_sequence,
    repetition_posterior,
    sequence_posterior,
)
