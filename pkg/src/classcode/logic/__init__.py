"""Formula language: syntax, Goedel coding, classification and evaluation."""
from .classify import Complexity, classify
from .coding import (
    DecodeError,
    decode_valuation,
    decode_var,
    encode_valuation,
    encode_var,
    godel_decode,
    godel_encode,
)
from .semantics import (
    FULL,
    EvaluationError,
    SOModel,
    UnboundVariable,
    code_model,
    compile_formula,
    evaluate,
    full_model,
)
from .syntax import *  # noqa: F401,F403
from .syntax import __all__ as _syntax_all

__all__ = list(_syntax_all) + [
    "Complexity",
    "classify",
    "DecodeError",
    "decode_valuation",
    "decode_var",
    "encode_valuation",
    "encode_var",
    "godel_decode",
    "godel_encode",
    "FULL",
    "EvaluationError",
    "SOModel",
    "UnboundVariable",
    "code_model",
    "compile_formula",
    "evaluate",
    "full_model",
]
