from .game import (
    AdversaryFault, IllegalFeedback, LearnerFault, RoundRecord, Transcript,
    default_budget, filter_consistent, is_mistake, run_game, validate_feedback,
)
from .protocols import (
    INCREMENTAL, MODELS, PERMUTATION_MODELS, Protocol, ProtocolError, QueryError,
    answer_of, answer_space_size, check_guess, format_value, graded, normalize_query,
)
from .spaces import (
    BitsetSpace, Evaluator, PosetSpace, UnsupportedQuery, count_linear_extensions,
    initial_space, iter_bits,
)

__all__ = [
    "AdversaryFault", "IllegalFeedback", "LearnerFault", "RoundRecord", "Transcript",
    "default_budget", "filter_consistent", "is_mistake", "run_game", "validate_feedback",
    "INCREMENTAL", "MODELS", "PERMUTATION_MODELS", "Protocol", "ProtocolError", "QueryError",
    "answer_of", "answer_space_size", "check_guess", "format_value", "graded", "normalize_query",
    "BitsetSpace", "Evaluator", "PosetSpace", "UnsupportedQuery", "count_linear_extensions",
    "initial_space", "iter_bits",
]
