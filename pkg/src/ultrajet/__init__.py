"""Weight-sequence calculus and constructive Whitney extension on the line."""

from . import decide, descend, jets, seqcalc, weightfunc
from .extend import ExtensionConfig, extend_jet

__version__ = "0.1.0"

__all__ = ["ExtensionConfig", "decide", "descend", "extend_jet", "jets",
           "seqcalc", "weightfunc", "__version__"]
