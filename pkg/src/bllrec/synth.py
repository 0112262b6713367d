"""Seeded synthetic listening-log generation and brute-force rank oracles.

The generator exists for verification, not realism: it draws a global
artist popularity from a Zipf law and makes users re-listen to their own
past artists with a power-law recency bias, so recency- and
frequency-aware rankings are expected to do well on it by construction.

Randomness comes from SplitMix64 (Steele, Lea & Flood 2014) with one
independent substream per user, so generation is reproducible from the
seed alone, in any implementation language, and per-user generation can
run in parallel without changing the output.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .errors import DataError
from .ingest import EventLog, IdMaps, UserHistory
from .recommend import BllParams, CfParams, RecommendationList

DEFAULT_TIME_SPAN = 94_608_000  # three years of seconds

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def _mix64(z: int) -> int:
    """SplitMix64 output scrambler; also used to derive per-user seeds."""
    z &= _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


class SplitMix64:
    """Minimal portable PRNG with a 64-bit state and fixed constants."""

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + _GOLDEN) & _MASK64
        return _mix64(self._state)

    def random(self) -> float:
        """Uniform double in [0, 1) from the top 53 bits."""
        return (self.next_u64() >> 11) * 2.0 ** -53

    def below(self, n: int) -> int:
        """Uniform int in [0, n) via the multiply-shift bound trick."""
        return (self.next_u64() * n) >> 64


def user_stream(seed: int, user_index: int) -> SplitMix64:
    """Independent substream for one user: scramble of seed and user index."""
    return SplitMix64(_mix64(seed ^ ((user_index + 1) * _GOLDEN)))


@dataclass(frozen=True)
class SynthConfig:
    n_users: int = 500
    n_artists: int = 2000
    events_per_user: tuple[int, int] = (200, 400)
    zipf_exponent: float = 1.1
    reconsume_prob: float = 0.7
    recency_bias: float = 0.8
    time_span: int = DEFAULT_TIME_SPAN
    seed: int = 42

    def validate(self) -> None:
        lo, hi = self.events_per_user
        if self.n_users < 1 or self.n_artists < 1:
            raise DataError("n_users and n_artists must be >= 1")
        if lo < 1 or hi < lo:
            raise DataError(f"events_per_user range must satisfy 1 <= lo <= hi, got {lo}..{hi}")
        if not self.zipf_exponent > 0:
            raise DataError("zipf_exponent must be > 0")
        if not 0.0 <= self.reconsume_prob <= 1.0:
            raise DataError("reconsume_prob must be in [0, 1]")
        if not self.recency_bias > 0:
            raise DataError("recency_bias must be > 0")
        if self.time_span < 1:
            raise DataError("time_span must be >= 1")


def _zipf_cumulative(n_artists: int, exponent: float) -> list[float]:
    weights = np.arange(1, n_artists + 1, dtype=np.float64) ** -exponent
    return np.cumsum(weights).tolist()


def _recency_cumulative(max_events: int, bias: float) -> list[float]:
    # Weight of re-picking the token `age` positions back is (age + 1) ** -bias.
    weights = np.arange(1, max_events + 1, dtype=np.float64) ** -bias
    return np.cumsum(weights).tolist()


def _pick(cumulative: list[float], upto: int, x: float) -> int:
    """Index of the first cumulative weight above x, restricted to [0, upto)."""
    idx = bisect_right(cumulative, x, 0, upto)
    return min(idx, upto - 1)


def user_events(
    config: SynthConfig,
    user_index: int,
    zipf_cum: list[float] | None = None,
    recency_cum: list[float] | None = None,
) -> tuple[list[int], list[int]]:
    """Generate one user's (timestamps, artist ranks), chronological.

    Draw order per user is fixed: event count, all timestamps, then per
    event one branch draw (skipped while the history is empty) and one
    choice draw. Artists are identified by Zipf rank here; ids are
    assigned when the events are assembled into a log.
    """
    lo, hi = config.events_per_user
    if zipf_cum is None:
        zipf_cum = _zipf_cumulative(config.n_artists, config.zipf_exponent)
    if recency_cum is None:
        recency_cum = _recency_cumulative(hi, config.recency_bias)

    rng = user_stream(config.seed, user_index)
    n = lo + rng.below(hi - lo + 1)
    timestamps = sorted(rng.below(config.time_span) for _ in range(n))

    artists: list[int] = []
    for _ in range(n):
        m = len(artists)
        if m > 0 and rng.random() < config.reconsume_prob:
            age = _pick(recency_cum, m, rng.random() * recency_cum[m - 1])
            artists.append(artists[m - 1 - age])
        else:
            rank = _pick(zipf_cum, config.n_artists, rng.random() * zipf_cum[-1])
            artists.append(rank)
    return timestamps, artists


def generate_synthetic(config: SynthConfig) -> EventLog:
    """Deterministically generate a full event log from the config."""
    config.validate()
    lo, hi = config.events_per_user
    zipf_cum = _zipf_cumulative(config.n_artists, config.zipf_exponent)
    recency_cum = _recency_cumulative(hi, config.recency_bias)

    id_maps = IdMaps()
    users: list[int] = []
    artists: list[int] = []
    timestamps: list[int] = []
    for u in range(config.n_users):
        ts, ranks = user_events(config, u, zipf_cum, recency_cum)
        uid = id_maps.users.intern(str(u))
        for t, rank in zip(ts, ranks):
            users.append(uid)
            artists.append(id_maps.artists.intern(str(rank)))
            timestamps.append(t)

    log = EventLog(
        users=np.asarray(users, dtype=np.int32),
        artists=np.asarray(artists, dtype=np.int32),
        timestamps=np.asarray(timestamps, dtype=np.int64),
        id_maps=id_maps,
    )
    for arr in (log.users, log.artists, log.timestamps):
        arr.flags.writeable = False
    return log


# ---------------------------------------------------------------------------
# Brute-force oracles. Deliberately unoptimized and textually independent of
# recommend.py: direct enumeration with the same tie-breaking keys, for
# cross-checking the real recommenders on small instances.
# ---------------------------------------------------------------------------

ORACLE_MAX_USERS = 10
ORACLE_MAX_ARTISTS = 30
ORACLE_MAX_EVENTS = 200


def _check_oracle_bounds(train_histories: dict[int, UserHistory]) -> None:
    if len(train_histories) > ORACLE_MAX_USERS:
        raise DataError(f"oracle instance exceeds {ORACLE_MAX_USERS} users")
    events = sum(h.n_events for h in train_histories.values())
    if events > ORACLE_MAX_EVENTS:
        raise DataError(f"oracle instance exceeds {ORACLE_MAX_EVENTS} events")
    artists = set()
    for history in train_histories.values():
        artists.update(history.artist_counts)
    if len(artists) > ORACLE_MAX_ARTISTS:
        raise DataError(f"oracle instance exceeds {ORACLE_MAX_ARTISTS} artists")


def _events_of(history: UserHistory) -> list[tuple[int, int]]:
    return list(zip(history.artists.tolist(), history.timestamps.tolist()))


def _counts_and_last(events: list[tuple[int, int]]) -> tuple[Counter, dict[int, int]]:
    counts: Counter = Counter()
    last: dict[int, int] = {}
    for artist, t in events:
        counts[artist] += 1
        last[artist] = t  # chronological scan, so the final write is the latest
    return counts, last


def brute_force_ranking(
    algorithm: str,
    train_histories: dict[int, UserHistory],
    user: int,
    k: int,
    bll_params: BllParams | None = None,
    cf_params: CfParams | None = None,
) -> RecommendationList:
    """Reference top-k for one user on a small instance, by direct enumeration."""
    _check_oracle_bounds(train_histories)
    bll_params = bll_params or BllParams()
    cf_params = cf_params or CfParams()
    history = train_histories[user]
    if history.n_events == 0:
        raise DataError("oracle: empty training history")
    events = _events_of(history)

    if algorithm == "bll":
        ref = bll_params.ref_time if bll_params.ref_time is not None else max(t for _, t in events) + 1
        scores = {}
        for artist in sorted({a for a, _ in events}):
            total = 0.0
            for a, t in events:
                if a == artist:
                    total += float(ref - t + 1) ** (-bll_params.d)
            scores[artist] = math.log(total) if total > 0.0 else float("-inf")
        order = sorted(scores, key=lambda a: (-scores[a], a))[:k]
        return RecommendationList(user, [(a, scores[a]) for a in order], k)

    if algorithm == "pop":
        counts, last = _counts_and_last(events)
        order = sorted(counts, key=lambda a: (-counts[a], -last[a], a))[:k]
        return RecommendationList(user, [(a, float(counts[a])) for a in order], k)

    if algorithm == "time":
        counts, last = _counts_and_last(events)
        order = sorted(counts, key=lambda a: (-last[a], -counts[a], a))[:k]
        return RecommendationList(user, [(a, float(last[a])) for a in order], k)

    if algorithm == "top":
        totals: Counter = Counter()
        for u in sorted(train_histories):
            for artist, t in _events_of(train_histories[u]):
                totals[artist] += 1
        order = sorted(totals, key=lambda a: (-totals[a], a))[:k]
        return RecommendationList(user, [(a, float(totals[a])) for a in order], k)

    if algorithm == "cf":
        own = {a for a, _ in events}
        sims: dict[int, float] = {}
        for v in sorted(train_histories):
            if v == user:
                continue
            other = {a for a, _ in _events_of(train_histories[v])}
            shared = len(own & other)
            if shared:
                sims[v] = shared / math.sqrt(len(own) * len(other))
        if not sims:
            return RecommendationList(user, [], k)
        neighbors = sorted(sims, key=lambda v: (-sims[v], v))[: cf_params.neighborhood_size]
        scores: dict[int, float] = {}
        for v in neighbors:
            for artist in sorted({a for a, _ in _events_of(train_histories[v])}):
                scores[artist] = scores.get(artist, 0.0) + sims[v]
        order = sorted(scores, key=lambda a: (-scores[a], a))[:k]
        return RecommendationList(user, [(a, scores[a]) for a in order], k)

    raise DataError(f"unknown algorithm {algorithm!r}")
