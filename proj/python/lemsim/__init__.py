"""Local energy market simulator."""

from ._lemsim import (
    LemsimError,
    cash,
    clear_auction,
    compute_opp,
    generate,
    linear_limit_price,
    metrics,
    run,
    sweep,
)

__all__ = [
    "LemsimError",
    "cash",
    "clear_auction",
    "compute_opp",
    "generate",
    "linear_limit_price",
    "metrics",
    "run",
    "sweep",
]
