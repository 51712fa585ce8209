"""Tableau layer: packed rank kernel, init states, gates, entropies."""

import numpy as np
import pytest

from infoflow import kernels
from infoflow.tableau import (
    QubitSet,
    apply_cnot,
    apply_hadamard,
    apply_phase,
    check_invariants,
    gf2_rank,
    init_basis_state,
    init_mixed_source,
    subsystem_entropy,
)


def naive_rank(bits: np.ndarray) -> int:
    """Row-reduce a 0/1 matrix over GF(2) column by column."""
    m = bits.astype(np.uint8).copy() % 2
    rank = 0
    for col in range(m.shape[1]):
        hits = np.nonzero(m[rank:, col])[0]
        if hits.size == 0:
            continue
        piv = rank + hits[0]
        m[[rank, piv]] = m[[piv, rank]]
        others = np.nonzero(m[:, col])[0]
        others = others[others != rank]
        m[others] ^= m[rank]
        rank += 1
        if rank == m.shape[0]:
            break
    return rank


@pytest.mark.parametrize("backend", ["numpy", "numba"])
def test_rank_matches_naive_oracle(backend):
    if backend not in kernels.available_backends():
        pytest.skip("numba not installed")
    old = kernels.ACTIVE_BACKEND
    kernels.use_backend(backend)
    try:
        rng = np.random.default_rng(42)
        for _ in range(200):
            rows = int(rng.integers(1, 40))
            cols = int(rng.integers(1, 150))
            density = rng.uniform(0.05, 0.9)
            bits = (rng.random((rows, cols)) < density).astype(np.uint8)
            assert gf2_rank(bits) == naive_rank(bits)
    finally:
        kernels.use_backend(old)


def test_rank_edge_cases():
    assert gf2_rank(np.zeros((5, 70), dtype=np.uint8)) == 0
    assert gf2_rank(np.eye(64, dtype=np.uint8)) == 64
    # duplicated rows collapse
    row = np.ones((1, 65), dtype=np.uint8)
    assert gf2_rank(np.vstack([row, row, row])) == 1
    # rank at the word boundary
    assert gf2_rank(np.eye(65, dtype=np.uint8)) == 65


def test_pack_rows_round_trip():
    rng = np.random.default_rng(7)
    bits = (rng.random((9, 130)) < 0.5).astype(np.uint8)
    packed = kernels.pack_rows(bits)
    assert packed.shape == (9, 3)
    for i in range(9):
        for j in range(130):
            word, bit = divmod(j, 64)
            assert (int(packed[i, word]) >> bit) & 1 == bits[i, j]


def test_qubit_set_normalizes_and_validates():
    qs = QubitSet(8, [5, 1, 3])
    assert qs.members == (1, 3, 5)
    assert len(qs) == 3
    assert 3 in qs and 2 not in qs
    assert QubitSet(4, []).complement().members == (0, 1, 2, 3)
    assert QubitSet(6, [0, 5]).complement().members == (1, 2, 3, 4)
    with pytest.raises(ValueError):
        QubitSet(4, [4])
    with pytest.raises(ValueError):
        QubitSet(4, [-1])
    with pytest.raises(ValueError):
        QubitSet(4, [1, 1])


def test_basis_state_entropies_vanish():
    state = init_basis_state(6)
    assert state.is_pure
    for a in ([0], [1, 4], [0, 1, 2, 3, 4, 5], []):
        assert subsystem_entropy(state, a) == 0


def test_mixed_source_entropy_counts_sources():
    n = 10
    src = QubitSet(n, [2, 3, 7])
    state = init_mixed_source(n, src)
    assert state.k == n - 3
    # before any gates, entropy of A counts the sources inside A
    rng = np.random.default_rng(3)
    for _ in range(30):
        size = int(rng.integers(0, n + 1))
        a = rng.choice(n, size=size, replace=False)
        expect = len(set(a.tolist()) & set(src.members))
        assert subsystem_entropy(state, a) == expect
    assert subsystem_entropy(state, range(n)) == 3


def test_bell_pair_entropy():
    state = init_basis_state(2)
    apply_hadamard(state, 0)
    apply_cnot(state, 0, 1)
    assert subsystem_entropy(state, [0]) == 1
    assert subsystem_entropy(state, [1]) == 1
    assert subsystem_entropy(state, [0, 1]) == 0


def test_gates_are_involutions_mod_phase():
    # H^2 = I and P^2 = Z, identical at the bit level
    rng = np.random.default_rng(11)
    state = init_basis_state(5)
    for q in range(5):
        apply_hadamard(state, q)
        apply_cnot(state, q, (q + 1) % 5)
    before = state.mat.copy()
    for _ in range(20):
        q = int(rng.integers(0, 5))
        gate = apply_hadamard if rng.integers(0, 2) else apply_phase
        gate(state, q)
        gate(state, q)
        assert np.array_equal(state.mat, before)


def test_cnot_rejects_bad_qubits():
    state = init_basis_state(4)
    with pytest.raises(ValueError):
        apply_cnot(state, 1, 1)
    with pytest.raises(ValueError):
        apply_cnot(state, 0, 4)
    with pytest.raises(ValueError):
        apply_hadamard(state, -1)


def test_entropy_complement_symmetry_pure():
    # pure states: S(A) = S(complement of A)
    rng = np.random.default_rng(13)
    n = 12
    state = init_basis_state(n)
    for _ in range(60):
        q = int(rng.integers(0, n))
        r = int(rng.integers(0, n))
        apply_hadamard(state, q)
        if r != q:
            apply_cnot(state, q, r)
        apply_phase(state, r)
    for _ in range(20):
        size = int(rng.integers(1, n))
        a = QubitSet(n, rng.choice(n, size=size, replace=False))
        assert subsystem_entropy(state, a) == subsystem_entropy(state, a.complement())


def test_invariants_hold_under_random_gates():
    rng = np.random.default_rng(17)
    for trial in range(10):
        n = int(rng.integers(2, 12))
        src = rng.choice(n, size=int(rng.integers(0, n + 1)), replace=False)
        state = init_mixed_source(n, src)
        check_invariants(state)
        for _ in range(50):
            q = int(rng.integers(0, n))
            r = int(rng.integers(0, n))
            choice = rng.integers(0, 3)
            if choice == 0:
                apply_hadamard(state, q)
            elif choice == 1:
                apply_phase(state, q)
            elif r != q:
                apply_cnot(state, q, r)
        check_invariants(state)
        assert subsystem_entropy(state, range(n)) == len(set(src.tolist()))


def test_subsystem_entropy_validates_register():
    state = init_basis_state(4)
    with pytest.raises(ValueError):
        subsystem_entropy(state, QubitSet(5, [0]))
    with pytest.raises(ValueError):
        subsystem_entropy(state, [7])


def test_to_bits_round_trip():
    state = init_mixed_source(5, [1])
    bits = state.to_bits()
    assert bits.shape == (4, 10)
    # each generator is a single Z bit on a non-source qubit
    assert bits[:, :5].sum() == 0
    assert sorted(np.nonzero(bits[:, 5:])[1].tolist()) == [0, 2, 3, 4]
