"""Benchmark the compiled kernels against the pure-Python fallback.

Times the two hot kernels (activation sums, overlap counts) on synthetic
data of configurable size, then a full per-user scoring pass through the
public recommenders on each backend.

    python benchmarks/bench_kernels.py --users 500 --events 300
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from bllrec._kernels import available_backends  # noqa: E402
from bllrec.ingest import build_user_histories  # noqa: E402
from bllrec.recommend import BllParams, CfIndex, CfParams, recommend_bll  # noqa: E402
from bllrec.synth import SynthConfig, generate_synthetic  # noqa: E402


def _time(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def bench_bll_sums(backend, rng, n_events: int, repeat: int) -> float:
    n_local = 400
    local_idx = rng.integers(0, n_local, n_events).astype(np.int64)
    bases = rng.integers(1, 10**9, n_events).astype(np.float64)
    return _time(lambda: backend.bll_sums(local_idx, bases, n_local, 0.5), repeat)


def bench_overlap_counts(backend, rng, n_users: int, repeat: int) -> float:
    n_artists = 2000
    sets = [np.unique(rng.integers(0, n_artists, 120)).astype(np.int64) for _ in range(n_users)]
    counts = np.zeros(n_artists + 1, dtype=np.int64)
    for s in sets:
        counts[s + 1] += 1
    indptr = np.cumsum(counts)
    members = np.empty(int(indptr[-1]), dtype=np.int64)
    fill = indptr[:-1].copy()
    for row, s in enumerate(sets):
        members[fill[s]] = row
        fill[s] += 1

    def run():
        for s in sets[:50]:
            backend.overlap_counts(s, indptr, members, n_users)

    return _time(run, repeat)


def bench_end_to_end(backend_name: str, histories, n_artists: int, repeat: int) -> float:
    import bllrec._kernels as kernels

    backends = available_backends()
    saved = (kernels.bll_sums, kernels.overlap_counts)
    kernels.bll_sums = backends[backend_name].bll_sums
    kernels.overlap_counts = backends[backend_name].overlap_counts
    try:
        params = BllParams()
        cf_params = CfParams()
        index = CfIndex(histories, n_artists=n_artists)

        def run():
            for user, train in histories.items():
                recommend_bll(train, params, 20)
                index.recommend(user, cf_params, 20)

        return _time(run, repeat)
    finally:
        kernels.bll_sums, kernels.overlap_counts = saved


def main() -> int:
    parser = argparse.ArgumentParser(description="Compare compiled and pure kernel backends.")
    parser.add_argument("--users", type=int, default=500)
    parser.add_argument("--events", type=int, default=300, help="events per user for end-to-end pass")
    parser.add_argument("--kernel-events", type=int, default=200_000, help="events for the raw kernel timing")
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()

    backends = available_backends()
    if "compiled" not in backends:
        print("compiled backend not built; run `python setup.py build_ext --inplace` first")

    rows = []
    for name, backend in backends.items():
        bll = bench_bll_sums(backend, np.random.default_rng(1), args.kernel_events, args.repeat)
        overlap = bench_overlap_counts(backend, np.random.default_rng(2), args.users, args.repeat)
        rows.append((name, bll, overlap))

    config = SynthConfig(
        n_users=args.users,
        n_artists=2000,
        events_per_user=(args.events, args.events),
        seed=7,
    )
    histories = build_user_histories(generate_synthetic(config))
    n_artists = 2000
    e2e = {
        name: bench_end_to_end(name, histories, n_artists, args.repeat) for name in backends
    }

    print(f"\n{'backend':<10} {'bll_sums':>12} {'overlap':>12} {'score+rank all users':>22}")
    for name, bll, overlap in rows:
        print(f"{name:<10} {bll * 1e3:>10.2f}ms {overlap * 1e3:>10.2f}ms {e2e[name] * 1e3:>20.2f}ms")
    if len(rows) == 2:
        pure = next(r for r in rows if r[0] == "pure")
        comp = next(r for r in rows if r[0] == "compiled")
        print(
            f"\nspeedup     {pure[1] / comp[1]:>10.1f}x {pure[2] / comp[2]:>11.1f}x"
            f" {e2e['pure'] / e2e['compiled']:>21.1f}x"
        )
    return 0


if __name__ == "__main__":
    sys.exit(main())
