"""Time-based per-user train/test partitioning.

Each user's most recent fraction of events goes into the test set; the
number of test events is max(1, floor(fraction * n)), so every split
user keeps at least one training and one test event. Ties at the split
boundary follow the stable chronological order from ingest.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DataError
from .ingest import UserHistory, history_from_arrays


@dataclass
class UserSplit:
    train: UserHistory
    test: UserHistory


@dataclass
class SplitDataset:
    """Per-user (train, test) partitions for one split fraction."""

    per_user: dict[int, UserSplit]
    fraction: float
    dropped: int  # users with too few events to split

    def test_event_count(self, users=None) -> int:
        if users is None:
            users = self.per_user.keys()
        return sum(self.per_user[u].test.n_events for u in users if u in self.per_user)


def n_test_events(n_events: int, fraction: float) -> int:
    return max(1, math.floor(fraction * n_events))


def time_split(history: UserHistory, fraction: float) -> tuple[UserHistory, UserHistory]:
    """Split one history into (train, test) with the most recent events as test."""
    if not 0.0 < fraction < 1.0:
        raise DataError(f"fraction must be in (0,1), got {fraction}")
    n = history.n_events
    if n < 2:
        raise DataError(f"user {history.user}: need at least 2 events to split, got {n}")
    n_test = n_test_events(n, fraction)
    cut = n - n_test
    train = history_from_arrays(history.user, history.artists[:cut], history.timestamps[:cut])
    test = history_from_arrays(history.user, history.artists[cut:], history.timestamps[cut:])
    return train, test


def split_histories(
    histories: dict[int, UserHistory],
    fraction: float,
    users=None,
) -> SplitDataset:
    """Apply time_split per user; users with fewer than 2 events are dropped and counted."""
    if users is None:
        users = histories.keys()
    per_user: dict[int, UserSplit] = {}
    dropped = 0
    for user in sorted(users):
        history = histories[user]
        if history.n_events < 2:
            dropped += 1
            continue
        train, test = time_split(history, fraction)
        per_user[user] = UserSplit(train=train, test=test)
    if not per_user:
        raise DataError("no splittable users (all histories have fewer than 2 events)")
    return SplitDataset(per_user=per_user, fraction=fraction, dropped=dropped)
