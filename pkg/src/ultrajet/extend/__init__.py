"""Constructive side: splines, cutoffs, covers, partitions, the operator."""

from .cover import WhitneyCover1D, whitney_cover
from .cutoffs import (AlphaSequence, CutoffFamily, CutoffResult, alpha_sequence,
                      build_cutoff, make_cutoff_family, verify_cutoff)
from .operator import (ExtensionConfig, ExtensionResult, Partition, RowChain,
                       check_taylor_difference_bound, extend_jet,
                       partition_of_unity, select_row_chain, verify_partition)
from .ppoly import PiecewisePolynomial

__all__ = [
    "AlphaSequence", "CutoffFamily", "CutoffResult", "ExtensionConfig",
    "ExtensionResult", "Partition", "PiecewisePolynomial", "RowChain",
    "WhitneyCover1D", "alpha_sequence", "build_cutoff",
    "check_taylor_difference_bound", "extend_jet", "make_cutoff_family",
    "partition_of_unity", "select_row_chain", "verify_cutoff",
    "verify_partition", "whitney_cover",
]
