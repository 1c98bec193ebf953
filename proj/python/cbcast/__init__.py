"""Causal broadcast: vector clocks, the CBCAST process state machine,
causal-delivery checkers, and a deterministic randomized simulator.

The heavy lifting lives in the compiled extension; this package just
re-exports it.
"""

from ._core import (
    Message,
    MessageId,
    Process,
    VectorClock,
    check_trace,
    combine,
    concurrent,
    deliverable,
    less,
    less_equal,
    replay_figures,
    simulate,
)

__all__ = [
    "Message",
    "MessageId",
    "Process",
    "VectorClock",
    "check_trace",
    "combine",
    "concurrent",
    "deliverable",
    "less",
    "less_equal",
    "replay_figures",
    "simulate",
]

__version__ = "0.1.0"
