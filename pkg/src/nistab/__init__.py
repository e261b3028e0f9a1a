"""Stability of negative imaginary feedback loops via complementary IQCs."""

__version__ = "0.1.0"

from .classifier import NIClassification, NIVerdict, classify
from .errors import NIError
from .iqc import HermitianMultiplier, IqcCheckReport, Mode, check_pair
from .tf_core import DelayedRationalTerm, ScalarTF, TransferMatrix, evaluate
from .verdict import (
    AnalysisOptions,
    Path,
    StabilityCertificate,
    Verdict,
    analyze,
    oracle_agreement,
    user_multiplier_analyze,
)

__all__ = [
    "__version__",
    "AnalysisOptions",
    "DelayedRationalTerm",
    "HermitianMultiplier",
    "IqcCheckReport",
    "Mode",
    "NIClassification",
    "NIError",
    "NIVerdict",
    "Path",
    "ScalarTF",
    "StabilityCertificate",
    "TransferMatrix",
    "Verdict",
    "analyze",
    "check_pair",
    "classify",
    "evaluate",
    "oracle_agreement",
    "user_multiplier_analyze",
]
