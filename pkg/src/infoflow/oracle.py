"""Dense statevector reference for small chains.

Everything here recomputes the quantities of the fast stabilizer path by
brute force: explicit 2**n amplitudes, gate matrices, partial traces and
eigenvalue entropies.  The accessible information is evaluated directly as
the Holevo quantity of the source ensemble, and the coherent information by
explicitly purifying the source with reference qubits appended after the
chain.  The tests compare these floats against the integer results of the
packed implementation; nothing in this module is used on the hot path.

Qubit q is tensor axis q, so qubit 0 is the most significant bit of the
amplitude index.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from infoflow.circuit import GATE_H, bricks_to_array
from infoflow.tableau import QubitSet

_H2 = np.array([[1.0, 1.0], [1.0, -1.0]], dtype=complex) / np.sqrt(2.0)
_P2 = np.array([[1.0, 0.0], [0.0, 1.0j]], dtype=complex)


def zero_state(n: int) -> np.ndarray:
    psi = np.zeros(1 << n, dtype=complex)
    psi[0] = 1.0
    return psi


def ensemble_states(n: int, source: Iterable[int]) -> list[np.ndarray]:
    """All 2**|S| computational members of the uniform source ensemble."""
    members = sorted(source)
    states = []
    for bits in range(1 << len(members)):
        index = 0
        for i, q in enumerate(members):
            if (bits >> i) & 1:
                index |= 1 << (n - 1 - q)
        psi = np.zeros(1 << n, dtype=complex)
        psi[index] = 1.0
        states.append(psi)
    return states


def purified_state(n: int, source: Iterable[int]) -> tuple[np.ndarray, list[int]]:
    """Chain plus reference qubits, each source site maximally entangled.

    Returns the (2**(n+s),) statevector and the reference qubit indices;
    reference qubit n+i purifies the i-th source member.
    """
    members = sorted(source)
    s = len(members)
    total = n + s
    psi = np.zeros(1 << total, dtype=complex)
    for bits in range(1 << s):
        index = 0
        for i, q in enumerate(members):
            if (bits >> i) & 1:
                index |= 1 << (total - 1 - q)
                index |= 1 << (total - 1 - (n + i))
        psi[index] = 1.0
    return psi / np.sqrt(1 << s), list(range(n, total))


def mixed_density(n: int, source: Iterable[int]) -> np.ndarray:
    """Density matrix maximally mixed on the source, |0> elsewhere."""
    members = sorted(source)
    s = len(members)
    diag = np.zeros(1 << n)
    for bits in range(1 << s):
        index = 0
        for i, q in enumerate(members):
            if (bits >> i) & 1:
                index |= 1 << (n - 1 - q)
        diag[index] = 2.0**-s
    return np.diag(diag).astype(complex)


def apply_one_qubit(psi: np.ndarray, n: int, u: np.ndarray, q: int) -> np.ndarray:
    shaped = psi.reshape(1 << q, 2, -1)
    return np.einsum("ab,ibj->iaj", u, shaped).reshape(-1)


def apply_gate(psi: np.ndarray, n: int, gate: str, *qubits: int) -> np.ndarray:
    """Named-gate dispatch: H(q), P(q) or CNOT(control, target)."""
    if gate == "H":
        return apply_one_qubit(psi, n, _H2, qubits[0])
    if gate == "P":
        return apply_one_qubit(psi, n, _P2, qubits[0])
    if gate == "CNOT":
        return apply_cnot(psi, n, qubits[0], qubits[1])
    raise ValueError(f"unknown gate {gate!r}")


def apply_cnot(psi: np.ndarray, n: int, control: int, target: int) -> np.ndarray:
    pc = n - 1 - control
    pt = n - 1 - target
    idx = np.arange(psi.size)
    perm = idx ^ (((idx >> pc) & 1) << pt)
    return psi[perm]


def apply_bricks_dense(psi: np.ndarray, n: int, bricks) -> np.ndarray:
    """Same operation order as the packed kernel: CNOT, gate on a, gate on b."""
    for a, b, control_is_b, ga, gb in bricks_to_array(bricks):
        control, target = (b, a) if control_is_b else (a, b)
        psi = apply_cnot(psi, n, int(control), int(target))
        psi = apply_one_qubit(psi, n, _H2 if ga == GATE_H else _P2, int(a))
        psi = apply_one_qubit(psi, n, _H2 if gb == GATE_H else _P2, int(b))
    return psi


def evolve(psi: np.ndarray, n: int, layers: Sequence) -> np.ndarray:
    for bricks in layers:
        psi = apply_bricks_dense(psi, n, bricks)
    return psi


def evolve_density(rho: np.ndarray, n: int, layers: Sequence) -> np.ndarray:
    """Conjugate a density matrix through the layers, U rho U^dagger.

    Treats rho as a 4**n vector whose row qubit q is axis q and column
    qubit q is axis n+q; column-side gates act with conjugated matrices.
    """
    vec = rho.reshape(-1)
    total = 2 * n
    for bricks in layers:
        for a, b, control_is_b, ga, gb in bricks_to_array(bricks):
            control, target = (b, a) if control_is_b else (a, b)
            vec = apply_cnot(vec, total, int(control), int(target))
            vec = apply_cnot(vec, total, n + int(control), n + int(target))
            for q, g in ((int(a), ga), (int(b), gb)):
                u = _H2 if g == GATE_H else _P2
                vec = apply_one_qubit(vec, total, u, q)
                vec = apply_one_qubit(vec, total, u.conj(), n + q)
    return vec.reshape(rho.shape)


def reduced_density(psi: np.ndarray, n: int, region: Iterable[int]) -> np.ndarray:
    members = sorted(region)
    rest = [q for q in range(n) if q not in set(members)]
    shaped = np.moveaxis(psi.reshape((2,) * n), members, range(len(members)))
    mat = shaped.reshape(1 << len(members), 1 << len(rest))
    return mat @ mat.conj().T


def partial_trace(rho: np.ndarray, n: int, region: Iterable[int]) -> np.ndarray:
    """Reduced density matrix of a full density matrix on the region."""
    members = sorted(region)
    rest = [q for q in range(n) if q not in set(members)]
    shaped = rho.reshape((2,) * (2 * n))
    order = members + rest + [n + q for q in members] + [n + q for q in rest]
    shaped = np.transpose(shaped, order)
    a = 1 << len(members)
    r = 1 << len(rest)
    return np.einsum("arbr->ab", shaped.reshape(a, r, a, r))


def entropy_bits(rho: np.ndarray) -> float:
    evals = np.linalg.eigvalsh(rho)
    evals = evals[evals > 1e-12]
    return float(-np.sum(evals * np.log2(evals)))


def pure_entropy_bits(psi: np.ndarray, n: int, region: Iterable[int]) -> float:
    """Entanglement entropy of region for a pure state.

    Uses singular values of the bipartition matrix, so the cost scales with
    the smaller side rather than with the region itself.
    """
    members = sorted(region)
    rest = [q for q in range(n) if q not in set(members)]
    shaped = np.moveaxis(psi.reshape((2,) * n), members, range(len(members)))
    mat = shaped.reshape(1 << len(members), 1 << len(rest))
    if mat.shape[0] > mat.shape[1]:
        mat = mat.T
    probs = np.linalg.svd(mat, compute_uv=False) ** 2
    probs = probs[probs > 1e-12]
    return float(-np.sum(probs * np.log2(probs)))


def average_density(
    psis: Sequence[np.ndarray], n: int, region: Iterable[int]
) -> np.ndarray:
    members = sorted(region)
    acc = np.zeros((1 << len(members),) * 2, dtype=complex)
    for psi in psis:
        acc += reduced_density(psi, n, members)
    return acc / len(psis)


def direct_holevo(n: int, source, layers, region) -> float:
    """Holevo quantity of the evolved source ensemble restricted to region."""
    members = region.members if isinstance(region, QubitSet) else tuple(region)
    psis = [evolve(psi, n, layers) for psi in ensemble_states(n, source)]
    mixed = entropy_bits(average_density(psis, n, members))
    conditional = np.mean([pure_entropy_bits(p, n, members) for p in psis])
    return mixed - float(conditional)


def direct_coherent(n: int, source, layers, region) -> float:
    """Coherent information via an explicit purifying reference.

    Evaluates S(M) - S(M union R) on the joint chain-reference state after
    evolving only the chain qubits.
    """
    members = region.members if isinstance(region, QubitSet) else tuple(region)
    psi, refs = purified_state(n, source)
    psi = evolve(psi, n + len(refs), layers)
    total = n + len(refs)
    s_m = pure_entropy_bits(psi, total, members)
    s_mr = pure_entropy_bits(psi, total, list(members) + refs)
    return s_m - s_mr
