"""Python access to the latchproof verifier and its concrete oracle."""

from ._latchproof import (
    ParseError,
    entail,
    format,
    is_cyclic,
    is_sat,
    normalize,
    oracle,
    prelude,
    verify,
)

__all__ = [
    "ParseError",
    "entail",
    "format",
    "is_cyclic",
    "is_sat",
    "normalize",
    "oracle",
    "prelude",
    "verify",
]
