"""Macrostate complexity: exact toy-machine oracle and compressor-based estimators."""

__version__ = "0.1.0"

from .core import (ComplexityReport, Compressor, ConfigurationError,  # noqa: E402
                   EncodingError, EquivalenceRelation, FormatError,
                   MacrostateError, SymbolString, join_for_conditional)
from .quantizers import RelationSpec, canonicalize, enumerate_class, make_relation, same_class  # noqa: E402
from .compressors import ExternalCompressor, Lz78Compressor, lz78_length, parse_compressor  # noqa: E402
from .estimators import (EstimatorConfig, boltzmann_estimate,  # noqa: E402
                         conditional_macrocomplexity, k_hat, max_distance,
                         normalized_macro_distance, s_hat)
from .classifier import Corpus, class_distance, classify, evaluate_loocv  # noqa: E402
