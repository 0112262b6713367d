"""Mainstreaminess scoring and LowMS/MedMS/HighMS group formation.

Mainstreaminess relates a user's artist-frequency distribution to the
aggregate distribution over all loaded users, via histogram intersection:

    ms(u) = sum over artists a of min(p_u(a), p_global(a))

which is 1.0 when the two distributions coincide and 0.0 when their
supports are disjoint. The measure is isolated here so alternative
overlap measures can be swapped in later.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DataError
from .ingest import UserHistory

GROUP_NAMES = ("LowMS", "MedMS", "HighMS")


def user_artist_distribution(history: UserHistory) -> dict[int, float]:
    """Relative play frequency per artist for one user."""
    if history.n_events == 0:
        raise DataError(f"user {history.user}: cannot build distribution from empty history")
    total = history.n_events
    return {a: history.artist_counts[a] / total for a in sorted(history.artist_counts)}


def global_artist_distribution(histories: dict[int, UserHistory]) -> dict[int, float]:
    """Relative play frequency per artist over all users' events combined.

    Counts are accumulated as integers before the final division, so the
    result is independent of user iteration order.
    """
    totals: dict[int, int] = {}
    total_events = 0
    for user in sorted(histories):
        for artist, count in histories[user].artist_counts.items():
            totals[artist] = totals.get(artist, 0) + count
        total_events += histories[user].n_events
    if total_events == 0:
        raise DataError("cannot build global distribution: no events loaded")
    return {a: totals[a] / total_events for a in sorted(totals)}


def mainstreaminess(user_dist: dict[int, float], global_dist: dict[int, float]) -> float:
    """Histogram intersection of the two distributions, in [0, 1].

    fsum makes the result independent of artist id order, so the score
    is symmetric and invariant under consistent relabeling.
    """
    shared = user_dist.keys() & global_dist.keys()
    return math.fsum(min(user_dist[a], global_dist[a]) for a in shared)


def score_users(histories: dict[int, UserHistory], min_events: int = 2) -> dict[int, float]:
    """Mainstreaminess per user with at least ``min_events`` events.

    The global distribution is built from all loaded histories; the
    min-events filter only controls which users receive a score.
    """
    global_dist = global_artist_distribution(histories)
    scores: dict[int, float] = {}
    for user in sorted(histories):
        history = histories[user]
        if history.n_events >= min_events:
            scores[user] = mainstreaminess(user_artist_distribution(history), global_dist)
    return scores


@dataclass(frozen=True)
class GroupAssignment:
    """Disjoint LowMS/MedMS/HighMS user sets, each of the requested size."""

    low: tuple[int, ...]
    med: tuple[int, ...]
    high: tuple[int, ...]

    def as_dict(self) -> dict[str, tuple[int, ...]]:
        return {"LowMS": self.low, "MedMS": self.med, "HighMS": self.high}


def assign_groups(scores: dict[int, float], group_size: int) -> GroupAssignment:
    """Partition users into the lowest, median-centered and highest score blocks.

    Users are ordered by (score, user id) so the assignment is a pure
    function of the score set. Requires at least 3 * group_size users.
    """
    if group_size < 1:
        raise DataError("group_size must be at least 1")
    n = len(scores)
    if n < 3 * group_size:
        raise DataError(f"need at least {3 * group_size} scored users for group size {group_size}, got {n}")
    order = sorted(scores, key=lambda u: (scores[u], u))
    med_start = (n - group_size) // 2
    return GroupAssignment(
        low=tuple(sorted(order[:group_size])),
        med=tuple(sorted(order[med_start:med_start + group_size])),
        high=tuple(sorted(order[n - group_size:])),
    )


@dataclass(frozen=True)
class GroupStats:
    """Per-group dataset statistics: |U|, |A|, |LE|, |A/U|, |MS|."""

    users: int
    distinct_artists: int
    listening_events: int
    avg_artists_per_user: float
    avg_mainstreaminess: float


def group_stats(
    members,
    histories: dict[int, UserHistory],
    scores: dict[int, float],
) -> GroupStats:
    """Aggregate statistics over one group's members."""
    members = sorted(members)
    if not members:
        raise DataError("cannot compute statistics for an empty group")
    artists: set[int] = set()
    events = 0
    distinct_sum = 0
    score_sum = 0.0
    for user in members:
        history = histories[user]
        artists.update(history.artist_counts)
        events += history.n_events
        distinct_sum += history.n_distinct_artists
        score_sum += scores[user]
    n = len(members)
    return GroupStats(
        users=n,
        distinct_artists=len(artists),
        listening_events=events,
        avg_artists_per_user=distinct_sum / n,
        avg_mainstreaminess=score_sum / n,
    )
