"""Geometric discord, the observable bound Q, and their measurement schemes for 2 x d states."""
from qcorr.measures import (
    CorrelationReport,
    correlation_report,
    geometric_discord_bruteforce,
    geometric_discord_closed,
    negativity,
    q_measure,
)
from qcorr.states import (
    DensityMatrix,
    InvalidStateError,
    StateFormatError,
    bell_diagonal,
    bell_state,
    random_mixed,
    random_pure,
    werner,
)

__version__ = "0.1.0"
