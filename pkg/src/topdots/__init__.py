"""Approximate search for the largest-magnitude entries of C = A^T B.

Index-sampling engines (four-cycle and wedge) with an exact streaming
baseline, candidate rescoring, closed-form sample-size planners, and a
benchmark CLI. Hot kernels run from a compiled extension when available,
with a bit-identical pure NumPy fallback (see topdots.backends).
"""

from .backends import ACTIVE_NAME as backend_name
from .diamond import (SampleAccumulator, SamplingPlan, WeightTable,
                      build_weights, closure_rate, expected_estimate,
                      resolve_variant, sample_diamonds)
from .errors import (DimensionMismatchError, MatrixFormatError, TopdotsError,
                     ZeroMassError)
from .exact import TopKHeap, exact_topt, recall_against_exact
from .matrix import (MatrixPair, MatrixView, column_dot, load_cache,
                     load_matrix_market, save_cache, validate_pair,
                     write_matrix_market)
from .ranking import (ConcentrationQuery, ResultSet, dataset_diagnostics,
                      postprocess, samples_for_entry, samples_for_separation)
from .sampling import (DiscreteDistribution, RngStream, SampleDraws,
                       choose_scheme, sample, sample_by_binary_search,
                       sample_by_sorted_merge)
from .wedge import WedgeWeightVector, build_wedge_weights, sample_wedges

__version__ = "0.1.0"

__all__ = [
    "backend_name", "__version__",
    "MatrixView", "MatrixPair", "validate_pair", "column_dot",
    "load_matrix_market", "write_matrix_market", "load_cache", "save_cache",
    "DiscreteDistribution", "RngStream", "SampleDraws", "choose_scheme",
    "sample", "sample_by_binary_search", "sample_by_sorted_merge",
    "SamplingPlan", "WeightTable", "SampleAccumulator", "build_weights",
    "sample_diamonds", "expected_estimate", "closure_rate", "resolve_variant",
    "WedgeWeightVector", "build_wedge_weights", "sample_wedges",
    "TopKHeap", "exact_topt", "recall_against_exact",
    "ResultSet", "ConcentrationQuery", "postprocess", "samples_for_entry",
    "samples_for_separation", "dataset_diagnostics",
    "TopdotsError", "MatrixFormatError", "DimensionMismatchError",
    "ZeroMassError",
]
