"""Capacity bounds for 2K-ary i.i.d. deletion channels."""

from .baa import BaaProblem, BaaResult, baa_capacity, embedding_count, finite_length_theorem1_check, transition_prob
from .bounds import (
    BinaryUbTable,
    BoundPoint,
    MarkovSearchResult,
    SearchConfig,
    binary_entropy,
    binary_ub,
    erasure_ub,
    iid_lb,
    markov_lb,
    markov_objective,
    smalld_ub,
    theorem1_ub,
)
from .channel import ChannelParams, Decomposition, apply_pattern, decompose, recombine, split_pattern, transmit
from .errors import (
    DataFormatError,
    DelcapError,
    DomainError,
    InstanceTooLargeError,
    InvalidDecompositionError,
    InvalidInputError,
    OutOfValidityRangeError,
)
from .exact import (
    InfoDecomposition,
    InputProcess,
    JointModel,
    build_joint,
    decomposition_terms,
    deletion_count_entropy,
    g_quadratic_form,
    multinomial_log_bound,
    mutual_information,
    subchannel_mi,
)

__version__ = "0.1.0"
