"""Feature postprocessing: common-mean removal, dominating-direction
projection, isotropy measurement, and a desk-scale evaluation harness."""

from . import errors, linalg
from .evaluation import (EvalReport, compare, knn, make_verification_pairs,
                         nearest_centroid, pair_similarities, stratified_split,
                         sweep, verify_pairs)
from .io import (format_report, read_csv, read_features, read_labels, read_model,
                 write_features, write_labels, write_model)
from .isotropy import (IsotropyReport, isotropy_empirical, isotropy_first_order,
                       isotropy_report, isotropy_second_order, log_partition,
                       partition)
from .postprocess import FeaturePostprocessor, SpectrumSummary, spectrum_summary
from .synth import SynthSpec, generate, ground_truth

__version__ = "0.1.0"

__all__ = [
    "EvalReport",
    "FeaturePostprocessor",
    "IsotropyReport",
    "SpectrumSummary",
    "SynthSpec",
    "compare",
    "errors",
    "format_report",
    "generate",
    "ground_truth",
    "isotropy_empirical",
    "isotropy_first_order",
    "isotropy_report",
    "isotropy_second_order",
    "knn",
    "linalg",
    "log_partition",
    "make_verification_pairs",
    "nearest_centroid",
    "pair_similarities",
    "partition",
    "read_csv",
    "read_features",
    "read_labels",
    "read_model",
    "spectrum_summary",
    "stratified_split",
    "sweep",
    "verify_pairs",
    "write_features",
    "write_labels",
    "write_model",
]
