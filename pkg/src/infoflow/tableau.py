"""Phase-free stabilizer states with Clifford updates and exact subsystem entropy.

States are represented only by their generator bit matrix over GF(2); signs
are dropped because every entropy-based observable of a stabilizer state
(pure or mixed, mixed meaning fewer generators than qubits) depends on the
bit matrix alone.  Entropies therefore come out as exact integers from a
GF(2) rank computation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from infoflow import kernels


@dataclass(frozen=True)
class QubitSet:
    """A subset of qubit indices of an n-qubit register."""

    n_qubits: int
    members: tuple[int, ...]

    def __init__(self, n_qubits: int, members: Iterable[int]):
        raw = [int(q) for q in members]
        mem = tuple(sorted(set(raw)))
        if n_qubits < 1:
            raise ValueError("n_qubits must be positive")
        if len(mem) != len(raw):
            raise ValueError("duplicate qubit indices")
        if mem and (mem[0] < 0 or mem[-1] >= n_qubits):
            raise ValueError(f"qubit indices must lie in [0, {n_qubits})")
        object.__setattr__(self, "n_qubits", n_qubits)
        object.__setattr__(self, "members", mem)

    def __len__(self) -> int:
        return len(self.members)

    def __contains__(self, q: int) -> bool:
        return q in set(self.members)

    def __iter__(self):
        return iter(self.members)

    def complement(self) -> "QubitSet":
        inside = set(self.members)
        return QubitSet(self.n_qubits, (q for q in range(self.n_qubits) if q not in inside))


class StabilizerState:
    """k commuting Pauli generators on n qubits, signs dropped.

    The bit matrix is stored column-packed: ``mat`` has shape (2n, kw) with
    kw = ceil(k/64) words; row q holds the X bits of qubit q across all
    generators, row n+q the Z bits.  k = n means a pure state; k < n means
    the uniform mixture over the stabilized subspace, which is exactly the
    form produced by maximally mixed source qubits.
    """

    __slots__ = ("n", "k", "mat")

    def __init__(self, n: int, k: int, mat: np.ndarray):
        self.n = n
        self.k = k
        self.mat = mat

    @property
    def is_pure(self) -> bool:
        return self.k == self.n

    def copy(self) -> "StabilizerState":
        return StabilizerState(self.n, self.k, self.mat.copy())

    def to_bits(self) -> np.ndarray:
        """Unpack to a (k, 2n) 0/1 matrix: X block columns 0..n, Z block n..2n."""
        if self.k == 0:
            return np.zeros((0, 2 * self.n), dtype=np.uint8)
        cols = np.unpackbits(
            self.mat.view(np.uint8).reshape(2 * self.n, -1), axis=1, bitorder="little"
        )[:, : self.k]
        return np.ascontiguousarray(cols.T)


def _n_words(k: int) -> int:
    return (k + kernels.WORD_BITS - 1) // kernels.WORD_BITS


def init_basis_state(n: int) -> StabilizerState:
    """All-zeros computational reference state: generator i is Z on qubit i."""
    if n < 1:
        raise ValueError("n must be positive")
    kw = _n_words(n)
    mat = np.zeros((2 * n, kw), dtype=np.uint64)
    gens = np.arange(n)
    mat[n + gens, gens // kernels.WORD_BITS] = np.uint64(1) << (gens % kernels.WORD_BITS).astype(
        np.uint64
    )
    return StabilizerState(n, n, mat)


def init_mixed_source(n: int, source: QubitSet | Iterable[int]) -> StabilizerState:
    """Maximally mixed source qubits, |0> elsewhere: one Z generator per non-source qubit."""
    if n < 1:
        raise ValueError("n must be positive")
    src = set(source.members if isinstance(source, QubitSet) else (int(q) for q in source))
    if src and (min(src) < 0 or max(src) >= n):
        raise ValueError(f"source indices must lie in [0, {n})")
    rest = np.array([q for q in range(n) if q not in src], dtype=np.int64)
    k = rest.size
    kw = _n_words(k)
    mat = np.zeros((2 * n, kw), dtype=np.uint64)
    if k:
        gens = np.arange(k)
        mat[n + rest, gens // kernels.WORD_BITS] = np.uint64(1) << (
            gens % kernels.WORD_BITS
        ).astype(np.uint64)
    return StabilizerState(n, k, mat)


def _check_qubit(state: StabilizerState, q: int) -> None:
    if not 0 <= q < state.n:
        raise ValueError(f"qubit {q} out of range for n={state.n}")


def apply_hadamard(state: StabilizerState, q: int) -> None:
    """H on qubit q: swap the X and Z bits of that qubit in every generator."""
    _check_qubit(state, q)
    n = state.n
    state.mat[[q, n + q]] = state.mat[[n + q, q]]


def apply_phase(state: StabilizerState, q: int) -> None:
    """P on qubit q: X -> Y up to sign, i.e. z ^= x in every generator."""
    _check_qubit(state, q)
    state.mat[state.n + q] ^= state.mat[q]


def apply_cnot(state: StabilizerState, control: int, target: int) -> None:
    """CNOT: x_target ^= x_control and z_control ^= z_target in every generator."""
    _check_qubit(state, control)
    _check_qubit(state, target)
    if control == target:
        raise ValueError("control and target must differ")
    n = state.n
    state.mat[target] ^= state.mat[control]
    state.mat[n + control] ^= state.mat[n + target]


def subsystem_entropy(state: StabilizerState, subsys: QubitSet | Iterable[int]) -> int:
    """Von Neumann entropy (in bits, exact integer) of the reduced state on subsys.

    Equals |A| - k + rank of the generator matrix restricted to the
    complement's columns; the generator matrix itself is never mutated.
    """
    n = state.n
    if isinstance(subsys, QubitSet):
        if subsys.n_qubits != n:
            raise ValueError("QubitSet register size does not match state")
        inside = set(subsys.members)
    else:
        inside = set(int(q) for q in subsys)
        if inside and (min(inside) < 0 or max(inside) >= n):
            raise ValueError(f"qubit indices must lie in [0, {n})")
    n_a = len(inside)
    if n_a == n:
        return n - state.k
    rest = np.array([q for q in range(n) if q not in inside], dtype=np.int64)
    idx = np.concatenate([rest, rest + n])
    sub = state.mat[idx]
    r = kernels.rank_destructive(sub)
    return n_a - state.k + int(r)


def gf2_rank(bits: np.ndarray) -> int:
    """Rank over GF(2) of a 0/1 matrix (any integer dtype); input left intact."""
    packed = kernels.pack_rows(bits)
    return int(kernels.rank_destructive(packed))


def check_invariants(state: StabilizerState) -> None:
    """Raise AssertionError unless rows are independent and pairwise commuting."""
    bits = state.to_bits().astype(np.uint8)
    k, two_n = bits.shape
    n = two_n // 2
    assert gf2_rank(bits) == k, "generator rows are linearly dependent"
    x, z = bits[:, :n].astype(np.int64), bits[:, n:].astype(np.int64)
    sym = (x @ z.T + z @ x.T) % 2
    assert not sym.any(), "generators do not all commute"
