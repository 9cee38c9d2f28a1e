"""Streaming matrix sketching with Frequent Directions."""
from .baselines import (BruteForceSketch, HashingSketch, NaiveSketch, ProjectionSketch,
                        SamplingSketch)
from .data import RowStream, SyntheticSpec, gen_synthetic, read_matrix, write_matrix
from .fd import FrequentDirections, Variant, merge
from .freq_items import FrequentItems
from .linalg import ConvergenceError, ThinSvd, frobenius_sq, spectral_norm_psd_diff, sym_eig_topk, thin_svd
from .metrics import (ErrorReport, covariance_error, fd_bound_covar, fd_bound_proj,
                      projection_error, tail_energy)
from .sketchfile import SketchFile

__all__ = [
    "BruteForceSketch", "ConvergenceError", "ErrorReport", "FrequentDirections", "FrequentItems",
    "HashingSketch", "NaiveSketch", "ProjectionSketch", "RowStream", "SamplingSketch",
    "SketchFile", "SyntheticSpec", "ThinSvd", "Variant", "covariance_error", "fd_bound_covar",
    "fd_bound_proj", "frobenius_sq", "gen_synthetic", "merge", "projection_error",
    "read_matrix", "spectral_norm_psd_diff", "sym_eig_topk", "tail_energy", "thin_svd",
    "write_matrix",
]
