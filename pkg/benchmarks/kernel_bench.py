"""Backend shoot-out for the two hot kernels: layer application and rank.

Runs the same seeded workload against every available backend and prints a
small table of per-call timings plus the end-to-end sample rate.  Invoke as

    python3 benchmarks/kernel_bench.py [--sizes 128,256,512] [--repeats 5]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from infoflow import kernels
from infoflow.circuit import CircuitParams, apply_layer, build_layer_array, make_stream
from infoflow.experiment import SweepConfig, geometry_specs, run_sample
from infoflow.measures import consecutive_geometry
from infoflow.tableau import init_basis_state, init_mixed_source, subsystem_entropy


def time_layers(n: int, repeats: int, seed: int = 7) -> float:
    """Mean seconds per brick-wall layer on a full-rank (pure) tableau."""
    params = CircuitParams(n, n, 0)
    rng = make_stream(seed)
    layers = [build_layer_array(params, t % 2, rng) for t in range(64)]
    state = init_basis_state(n)
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        for bricks in layers:
            apply_layer(state, bricks)
        best = min(best, (time.perf_counter() - t0) / len(layers))
    return best


def time_rank(n: int, repeats: int, seed: int = 7) -> float:
    """Mean seconds per subsystem-entropy call (one GF(2) rank)."""
    geometry = consecutive_geometry(n, 2, 6, 0, "centered")
    params = CircuitParams(n, 2 * n, 0)
    rng = make_stream(seed)
    state = init_mixed_source(n, geometry.source)
    for t in range(2 * n):
        apply_layer(state, build_layer_array(params, t, rng))
    region = geometry.measure
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        for _ in range(8):
            subsystem_entropy(state, region)
        best = min(best, (time.perf_counter() - t0) / 8)
    return best


def time_sample(n: int, seed: int = 7) -> float:
    """Seconds for one full sweep sample (layers + recorded entropies)."""
    config = SweepConfig(
        sizes=(n,), observables=("holevo",), max_tau=1.0, n_samples=2,
        master_seed=seed, s16=2, m16_values=(6,), placements=("centered",),
    )
    spec = geometry_specs(config)[0]
    t0 = time.perf_counter()
    run_sample(config, n, spec, 0)
    return time.perf_counter() - t0


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", default="128,256,512")
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]

    backends = kernels.available_backends()
    print(f"backends: {', '.join(backends)}")
    header = f"{'kernel':<14}{'N':>6}" + "".join(f"{b:>14}" for b in backends)
    rows = []
    for label, fn in (("layer", time_layers), ("rank", time_rank),
                      ("sample", lambda n, r: time_sample(n))):
        for n in sizes:
            cells = []
            for backend in backends:
                kernels.use_backend(backend)
                fn(min(sizes), 1)  # warm any compilation outside the clock
                cells.append(fn(n, args.repeats))
            rows.append((label, n, cells))
    print(header)
    print("-" * len(header))
    for label, n, cells in rows:
        text = "".join(f"{c * 1e3:>11.3f} ms" for c in cells)
        print(f"{label:<14}{n:>6}{text}")
    if len(backends) > 1:
        print("\nspeedup (first backend over last) per row:")
        for label, n, cells in rows:
            print(f"  {label:<12}{n:>6}  {cells[-1] / cells[0]:.2f}x")


if __name__ == "__main__":
    main()
