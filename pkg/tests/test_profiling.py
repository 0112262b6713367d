import numpy as np
import pytest

from bllrec.errors import DataError
from bllrec.profiling import (
    assign_groups,
    global_artist_distribution,
    group_stats,
    mainstreaminess,
    score_users,
    user_artist_distribution,
)

from bllrec.ingest import build_user_histories

from conftest import histories_from_events, log_from_events


def _history(events):
    histories = histories_from_events(events)
    assert len(histories) == 1
    return next(iter(histories.values()))


class TestUserDistribution:
    def test_direct_normalization(self):
        h = _history([("u", "a", 1), ("u", "a", 2), ("u", "a", 3), ("u", "b", 4)])
        assert user_artist_distribution(h) == {0: 0.75, 1: 0.25}

    def test_single_artist(self):
        h = _history([("u", "a", t) for t in range(5)])
        assert user_artist_distribution(h) == {0: 1.0}

    def test_three_artists(self):
        h = _history([("u", "a", 1), ("u", "b", 2), ("u", "c", 3), ("u", "c", 4)])
        assert user_artist_distribution(h) == {0: 0.25, 1: 0.25, 2: 0.5}

    def test_sums_to_one(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            events = [("u", f"a{rng.integers(0, 9)}", int(t)) for t in range(int(rng.integers(1, 60)))]
            dist = user_artist_distribution(_history(events))
            assert sum(dist.values()) == pytest.approx(1.0, abs=1e-9)
            assert all(v >= 0 for v in dist.values())


class TestGlobalDistribution:
    def test_hand_aggregation(self):
        histories = histories_from_events(
            [("u1", "a", 1), ("u2", "a", 2), ("u2", "b", 3), ("u2", "b", 4)]
        )
        assert global_artist_distribution(histories) == {0: 0.5, 1: 0.5}

    def test_single_user_identity(self):
        histories = histories_from_events([("u", "a", 1), ("u", "b", 2), ("u", "a", 3)])
        h = next(iter(histories.values()))
        assert global_artist_distribution(histories) == user_artist_distribution(h)

    def test_order_independence(self):
        events = [("u2", "b", 3), ("u1", "a", 1), ("u2", "a", 2)]
        permuted = [events[i] for i in (2, 0, 1)]

        def by_key(event_list):
            log = log_from_events(event_list)
            dist = global_artist_distribution(build_user_histories(log))
            return {log.id_maps.artists.key_of(a): p for a, p in dist.items()}

        assert by_key(events) == by_key(permuted)

    def test_empty_corpus(self):
        with pytest.raises(DataError):
            global_artist_distribution({})


class TestMainstreaminess:
    def test_identical_distributions(self):
        d = {0: 0.5, 1: 0.25, 2: 0.25}
        assert mainstreaminess(d, d) == pytest.approx(1.0, abs=1e-9)

    def test_disjoint_supports(self):
        assert mainstreaminess({0: 1.0}, {1: 0.6, 2: 0.4}) == 0.0

    def test_hand_evaluation(self):
        user = {0: 0.5, 1: 0.5}
        global_ = {0: 0.5, 1: 0.25, 2: 0.25}
        assert mainstreaminess(user, global_) == pytest.approx(0.75, abs=1e-12)

    def test_symmetry_and_bounds(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            a = _random_dist(rng, support=rng.integers(1, 10))
            b = _random_dist(rng, support=rng.integers(1, 10))
            ms_ab = mainstreaminess(a, b)
            ms_ba = mainstreaminess(b, a)
            assert ms_ab == ms_ba
            assert 0.0 <= ms_ab <= 1.0 + 1e-12

    def test_relabeling_invariance(self):
        rng = np.random.default_rng(9)
        for _ in range(20):
            a = _random_dist(rng, support=8)
            b = _random_dist(rng, support=8)
            perm = rng.permutation(100).tolist()
            a2 = {perm[k]: v for k, v in a.items()}
            b2 = {perm[k]: v for k, v in b.items()}
            assert mainstreaminess(a, b) == mainstreaminess(a2, b2)


def _random_dist(rng, support):
    keys = rng.choice(20, size=int(support), replace=False).tolist()
    weights = rng.random(len(keys)) + 1e-3
    total = weights.sum()
    return {int(k): float(w / total) for k, w in zip(keys, weights)}


class TestScoreUsers:
    def test_min_events_filter(self):
        histories = histories_from_events(
            [("solo", "a", 1)] + [("busy", "a", t) for t in range(5)]
        )
        scores = score_users(histories, min_events=2)
        busy = [u for u, h in histories.items() if h.n_events == 5][0]
        assert set(scores) == {busy}

    def test_filtered_users_still_shape_global(self):
        # "solo" listens to artist b once; it must dilute the global distribution.
        histories = histories_from_events(
            [("solo", "b", 1)] + [("busy", "a", t) for t in range(3)]
        )
        scores = score_users(histories, min_events=2)
        busy = [u for u, h in histories.items() if h.n_events == 3][0]
        assert scores[busy] == pytest.approx(0.75)  # min(1.0, 3/4)


class TestAssignGroups:
    def test_nine_users_three_per_group(self):
        scores = {u: 0.1 * (u + 1) for u in range(9)}
        groups = assign_groups(scores, 3)
        assert groups.low == (0, 1, 2)
        assert groups.med == (3, 4, 5)
        assert groups.high == (6, 7, 8)

    def test_three_users_group_of_one(self):
        groups = assign_groups({0: 0.9, 1: 0.1, 2: 0.5}, 1)
        assert groups.low == (1,)
        assert groups.med == (2,)
        assert groups.high == (0,)

    def test_too_few_users(self):
        with pytest.raises(DataError):
            assign_groups({0: 0.1, 1: 0.9}, 1)

    def test_permutation_invariance(self):
        rng = np.random.default_rng(3)
        scores = {u: float(rng.random()) for u in range(30)}
        shuffled_keys = rng.permutation(list(scores)).tolist()
        shuffled = {int(u): scores[int(u)] for u in shuffled_keys}
        assert assign_groups(scores, 5) == assign_groups(shuffled, 5)

    def test_mean_monotonicity(self):
        rng = np.random.default_rng(17)
        for _ in range(30):
            scores = {u: float(rng.random()) for u in range(int(rng.integers(9, 40)))}
            size = int(rng.integers(1, len(scores) // 3 + 1))
            groups = assign_groups(scores, size)
            means = [float(np.mean([scores[u] for u in g])) for g in (groups.low, groups.med, groups.high)]
            assert means[0] <= means[1] <= means[2]

    def test_score_tie_broken_by_user_id(self):
        scores = {u: 0.5 for u in range(6)}
        groups = assign_groups(scores, 2)
        assert groups.low == (0, 1)
        assert groups.med == (2, 3)
        assert groups.high == (4, 5)


class TestGroupStats:
    def test_single_user(self):
        histories = histories_from_events([("u", "a", 1), ("u", "b", 2), ("u", "a", 3)])
        user = next(iter(histories))
        stats = group_stats([user], histories, {user: 0.5})
        assert (stats.users, stats.distinct_artists, stats.listening_events) == (1, 2, 3)
        assert stats.avg_artists_per_user == 2.0
        assert stats.avg_mainstreaminess == 0.5

    def test_shared_artist_counted_once(self):
        histories = histories_from_events(
            [("u1", "a", 1), ("u1", "b", 2), ("u2", "a", 3), ("u2", "c", 4)]
        )
        stats = group_stats(list(histories), histories, {u: 0.0 for u in histories})
        assert stats.distinct_artists == 3
        assert stats.avg_artists_per_user == 2.0

    def test_empty_group(self):
        with pytest.raises(DataError):
            group_stats([], {}, {})
