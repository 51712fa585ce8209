"""Hot bit-level kernels with a numba fast path and a pure-numpy fallback.

The active implementation is chosen at import time from the environment
variable ``INFOFLOW_BACKEND`` ("numba" or "numpy", default numba when
importable) and can be switched at runtime with :func:`use_backend`.
Both paths are bit-for-bit identical; the benchmark under ``benchmarks/``
compares their throughput.

Layout convention used by all kernels: a stabilizer state with n qubits and
k generators is a uint64 array of shape (2n, kw), kw = ceil(k/64).  Row q
packs the X bits of qubit q across the k generators, row n+q packs the
Z bits.  Gates are whole-row XOR/swap operations; subsystem ranks eliminate
over selected rows.
"""

from __future__ import annotations

import os

import numpy as np

WORD_BITS = 64

_U1 = np.uint64(1)


# ---------------------------------------------------------------------------
# pure numpy implementations


def _rank_destructive_numpy(m: np.ndarray) -> int:
    """GF(2) rank of a packed bit matrix. Mutates m (row echelon)."""
    n_rows, n_words = m.shape
    rank = 0
    for w in range(n_words):
        if rank == n_rows:
            break
        for b in range(WORD_BITS):
            bit = np.uint64(b)
            below = (m[rank:, w] >> bit) & _U1
            hits = np.nonzero(below)[0]
            if hits.size == 0:
                continue
            piv = rank + hits[0]
            if piv != rank:
                m[[rank, piv]] = m[[piv, rank]]
            if hits.size > 1:
                rows = rank + hits[1:]
                m[rows, w:] ^= m[rank, w:]
            rank += 1
            if rank == n_rows:
                break
    return rank


def _apply_bricks_numpy(mat: np.ndarray, n_qubits: int, bricks: np.ndarray) -> None:
    """Apply a layer of bricks in place.

    bricks is an int64 array of shape (nb, 5): columns are
    (qubit_a, qubit_b, control_is_b, gate_a, gate_b) with gate codes
    0 = Hadamard, 1 = phase.
    """
    n = n_qubits
    for qa, qb, ctrl_b, ga, gb in bricks:
        c, t = (qb, qa) if ctrl_b else (qa, qb)
        # CNOT: x_t ^= x_c, z_c ^= z_t
        mat[t] ^= mat[c]
        mat[n + c] ^= mat[n + t]
        for q, g in ((qa, ga), (qb, gb)):
            if g == 0:  # H: swap x <-> z
                tmp = mat[q].copy()
                mat[q] = mat[n + q]
                mat[n + q] = tmp
            else:  # P: z ^= x
                mat[n + q] ^= mat[q]


# ---------------------------------------------------------------------------
# numba implementations

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    numba = None
    HAVE_NUMBA = False


if HAVE_NUMBA:

    @numba.njit(cache=True, nogil=True)
    def _rank_destructive_numba(m):  # pragma: no cover - jitted
        n_rows, n_words = m.shape
        rank = 0
        for w in range(n_words):
            if rank == n_rows:
                break
            for b in range(64):
                piv = -1
                for r in range(rank, n_rows):
                    if (m[r, w] >> b) & 1:
                        piv = r
                        break
                if piv < 0:
                    continue
                if piv != rank:
                    for ww in range(w, n_words):
                        tmp = m[rank, ww]
                        m[rank, ww] = m[piv, ww]
                        m[piv, ww] = tmp
                for r in range(rank + 1, n_rows):
                    if (m[r, w] >> b) & 1:
                        for ww in range(w, n_words):
                            m[r, ww] ^= m[rank, ww]
                rank += 1
                if rank == n_rows:
                    break
        return rank

    @numba.njit(cache=True, nogil=True)
    def _apply_bricks_numba(mat, n_qubits, bricks):  # pragma: no cover - jitted
        n = n_qubits
        n_words = mat.shape[1]
        for i in range(bricks.shape[0]):
            qa = bricks[i, 0]
            qb = bricks[i, 1]
            if bricks[i, 2]:
                c, t = qb, qa
            else:
                c, t = qa, qb
            for w in range(n_words):
                mat[t, w] ^= mat[c, w]
                mat[n + c, w] ^= mat[n + t, w]
            for j in range(2):
                q = bricks[i, j]
                g = bricks[i, 3 + j]
                if g == 0:
                    for w in range(n_words):
                        tmp = mat[q, w]
                        mat[q, w] = mat[n + q, w]
                        mat[n + q, w] = tmp
                else:
                    for w in range(n_words):
                        mat[n + q, w] ^= mat[q, w]


_IMPLS = {
    "numpy": (_rank_destructive_numpy, _apply_bricks_numpy),
}
if HAVE_NUMBA:
    _IMPLS["numba"] = (_rank_destructive_numba, _apply_bricks_numba)

# Bound at import; rebindable via use_backend().
rank_destructive = None
apply_bricks = None
ACTIVE_BACKEND = None


def available_backends() -> tuple[str, ...]:
    return tuple(sorted(_IMPLS))


def use_backend(name: str) -> None:
    """Select the kernel implementation ("numba" or "numpy") at runtime."""
    global rank_destructive, apply_bricks, ACTIVE_BACKEND
    if name not in _IMPLS:
        valid = ", ".join(sorted(_IMPLS))
        raise ValueError(f"unknown backend {name!r} (have: {valid})")
    rank_destructive, apply_bricks = _IMPLS[name]
    ACTIVE_BACKEND = name


def _default_backend() -> str:
    env = os.environ.get("INFOFLOW_BACKEND", "").strip().lower()
    if env:
        if env not in _IMPLS:
            if env == "numba" and not HAVE_NUMBA:
                raise ImportError("INFOFLOW_BACKEND=numba but numba is not installed")
            raise ValueError(f"INFOFLOW_BACKEND={env!r} not recognized")
        return env
    return "numba" if HAVE_NUMBA else "numpy"


use_backend(_default_backend())


def pack_rows(bits: np.ndarray) -> np.ndarray:
    """Pack a (r, c) 0/1 matrix into words, one packed row per input row."""
    bits = np.ascontiguousarray(np.asarray(bits, dtype=np.uint8) & 1)
    if bits.ndim != 2:
        raise ValueError("expected a 2-D bit matrix")
    r, c = bits.shape
    n_words = (c + WORD_BITS - 1) // WORD_BITS if c else 0
    if n_words == 0:
        return np.zeros((r, 0), dtype=np.uint64)
    padded = np.zeros((r, n_words * WORD_BITS), dtype=np.uint8)
    padded[:, :c] = bits
    packed = np.packbits(padded, axis=1, bitorder="little")
    return np.ascontiguousarray(packed).view(np.uint64).reshape(r, n_words)
