"""Record-biased (Ewens-like) random permutations: sampling, statistics,
closed-form expectations and branch-misprediction models."""

from .perm_core import (
    CycleDecomposition,
    Permutation,
    PermutationError,
    fundamental_bijection,
    inverse_fundamental_bijection,
    normalize,
    to_cycles,
)
from .sampler import (
    RngStream,
    ThetaSpec,
    exact_distribution,
    sample_ewens_cycles,
    sample_ewens_records,
    sample_records_batch,
)
from .statistics import StatReport, compute_stats, log_weight, m_rec, weight_prime

__version__ = "0.1.0"
