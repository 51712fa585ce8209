"""Dense-oracle equivalence suite for the packed stabilizer fast path.

Random small instances (N up to 10, depth up to 20, consecutive or
scattered regions) are evolved through identical circuits by the packed
tableau and by explicit statevectors; every information quantity must then
agree to 1e-9.  On top of the per-instance comparisons, the two lemmas the
fast path relies on are checked directly: the evolved mixed-source density
matrix equals the average over the evolved source ensemble, and all
ensemble members share one conditional entropy.  Any mismatch is a hard
failure.
"""

from __future__ import annotations

import numpy as np

from infoflow import measures, oracle
from infoflow.circuit import CircuitParams, apply_layer, build_layer_array, make_stream
from infoflow.tableau import (
    QubitSet,
    check_invariants,
    init_basis_state,
    init_mixed_source,
    subsystem_entropy,
)

TOL = 1e-9


def _random_instance(rng: np.random.Generator, sizes=(2, 4, 6, 8, 10)):
    n = int(rng.choice(sizes))
    depth = int(rng.integers(0, 21))
    s_max = min(4, n)
    s = int(rng.integers(1, s_max + 1))
    m = int(rng.integers(1, n))
    if rng.integers(0, 2) and s <= n:
        start = int(rng.integers(0, n))
        source = tuple(int((start + i) % n) for i in range(s))
    else:
        source = tuple(int(q) for q in rng.choice(n, size=s, replace=False))
    if rng.integers(0, 2):
        start = int(rng.integers(0, n))
        meas = tuple(int((start + i) % n) for i in range(m))
    else:
        meas = tuple(int(q) for q in rng.choice(n, size=m, replace=False))
    return n, depth, source, meas


def _evolved(n: int, depth: int, source, seed) -> tuple:
    params = CircuitParams(n, depth, 0)
    stream = make_stream(seed)
    layers = []
    pure = init_basis_state(n)
    mixed = init_mixed_source(n, QubitSet(n, source))
    for t in range(depth):
        bricks = build_layer_array(params, t, stream)
        layers.append(bricks)
        apply_layer(pure, bricks)
        apply_layer(mixed, bricks)
    return pure, mixed, layers


def run_validation(instances: int = 200, seed: int = 2024, log=print) -> int:
    """Run all checks; returns the number of failed groups and logs a line each."""
    rng = np.random.default_rng(seed)
    root = np.random.SeedSequence(seed)
    streams = root.spawn(instances)
    failures = 0

    entropy_bad = holevo_bad = coherent_bad = identity_bad = invariant_bad = 0
    for k in range(instances):
        n, depth, source, meas = _random_instance(rng)
        pure, mixed, layers = _evolved(n, depth, source, streams[k])
        measure = QubitSet(n, meas)
        env = measure.complement()

        psi = oracle.evolve(oracle.zero_state(n), n, layers)
        se_fast = subsystem_entropy(pure, measure)
        se_dense = oracle.pure_entropy_bits(psi, n, meas)
        if abs(se_fast - se_dense) > TOL:
            entropy_bad += 1

        h_fast = measures.holevo_bits(pure, mixed, measure)
        h_dense = oracle.direct_holevo(n, source, layers, meas)
        if abs(h_fast - h_dense) > TOL:
            holevo_bad += 1

        c_fast = measures.coherent_bits(mixed, measure)
        c_dense = oracle.direct_coherent(n, source, layers, meas)
        if abs(c_fast - c_dense) > TOL:
            coherent_bad += 1

        p_fast = measures.private_info_bits(pure, mixed, measure)
        anti = measures.coherent_bits(mixed, env)
        if p_fast != c_fast or anti != -c_fast:
            identity_bad += 1

        try:
            check_invariants(pure)
            check_invariants(mixed)
        except AssertionError:
            invariant_bad += 1

    for label, bad in [
        ("subsystem entropy vs dense", entropy_bad),
        ("holevo vs direct ensemble", holevo_bad),
        ("coherent vs purified reference", coherent_bad),
        ("private identity and antisymmetry", identity_bad),
        ("tableau invariants", invariant_bad),
    ]:
        ok = instances - bad
        status = "PASS" if bad == 0 else "FAIL"
        log(f"{status} {label}: {ok}/{instances} instances exact")
        failures += bad > 0

    lemma_rng = np.random.default_rng(seed + 1)
    lemma_streams = np.random.SeedSequence(seed + 1).spawn(10)
    mixture_bad = lemma_bad = 0
    for k in range(10):
        n, depth, source, meas = _random_instance(lemma_rng, sizes=(2, 4, 6, 8))
        _, _, layers = _evolved(n, depth, source, lemma_streams[k])
        rho = oracle.evolve_density(oracle.mixed_density(n, source), n, layers)
        psis = [
            oracle.evolve(p, n, layers) for p in oracle.ensemble_states(n, source)
        ]
        avg = np.mean([np.outer(p, p.conj()) for p in psis], axis=0)
        if not np.allclose(rho, avg, atol=1e-12):
            mixture_bad += 1
        entropies = [oracle.pure_entropy_bits(p, n, meas) for p in psis]
        if max(entropies) - min(entropies) > TOL:
            lemma_bad += 1
    for label, bad in [
        ("mixture identity (density evolution)", mixture_bad),
        ("equal conditional entropies", lemma_bad),
    ]:
        status = "PASS" if bad == 0 else "FAIL"
        log(f"{status} {label}: {10 - bad}/10 instances exact")
        failures += bad > 0

    return failures
