from ._amrbddc import (
    Error,
    Forest,
    Pattern,
    Problem,
    adapt,
    estimate_error,
    mark_histogram,
    solve,
)

__all__ = [
    "Error",
    "Forest",
    "Pattern",
    "Problem",
    "adapt",
    "estimate_error",
    "mark_histogram",
    "solve",
]
