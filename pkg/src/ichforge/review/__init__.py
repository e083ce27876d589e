from ichforge.review.store import (
    DecisionAction,
    ReviewDecision,
    ReviewError,
    ReviewQueueStats,
    ReviewStore,
)

__all__ = [
    "DecisionAction",
    "ReviewDecision",
    "ReviewError",
    "ReviewQueueStats",
    "ReviewStore",
]
