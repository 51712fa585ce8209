"""Seeded brick-wall random Clifford circuits on a periodic chain.

One layer is a single row of bricks covering alternating bonds: even layers
pair (0,1),(2,3),..., odd layers pair (1,2),(3,4),...,(N-1,0).  Each brick
is a CNOT followed by an independent fair choice of Hadamard or phase gate
on each of its two qubits.  This single-row convention is the unit of time
for every normalized quantity downstream and is recorded in all output
metadata.

Randomness comes from a counter-based generator (Philox) so per-sample
streams can be derived independently of scheduling; draw order is fixed as
bricks in ascending position, and within a brick: CNOT direction (only in
random orientation mode), then the two single-qubit gate choices.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np

from infoflow import kernels
from infoflow.tableau import QubitSet, StabilizerState

GATE_H = 0
GATE_P = 1

_GATE_NAMES = {GATE_H: "H", GATE_P: "P"}

ORIENTATIONS = ("random", "control_left")
LAYER_CONVENTION = "single_row"


@dataclass(frozen=True)
class CircuitParams:
    """Parameters of one seeded brick-wall circuit realization."""

    n_qubits: int
    depth: int
    seed: int = 0
    cnot_orientation: str = "random"
    layer_convention: str = LAYER_CONVENTION

    def __post_init__(self):
        if self.n_qubits < 2 or self.n_qubits % 2:
            raise ValueError("n_qubits must be even and >= 2")
        if self.depth < 0:
            raise ValueError("depth must be non-negative")
        if self.cnot_orientation not in ORIENTATIONS:
            raise ValueError(f"cnot_orientation must be one of {ORIENTATIONS}")
        if self.layer_convention != LAYER_CONVENTION:
            raise ValueError(f"only layer_convention={LAYER_CONVENTION!r} is defined")


@dataclass(frozen=True)
class Brick:
    """One two-qubit random operation: CNOT plus per-qubit H or P."""

    qubit_a: int
    qubit_b: int
    control_is_b: bool
    gate_a: int
    gate_b: int

    @property
    def control(self) -> int:
        return self.qubit_b if self.control_is_b else self.qubit_a

    @property
    def target(self) -> int:
        return self.qubit_a if self.control_is_b else self.qubit_b

    def gate_names(self) -> tuple[str, str]:
        return _GATE_NAMES[self.gate_a], _GATE_NAMES[self.gate_b]


def make_stream(seed) -> np.random.Generator:
    """Counter-based random stream; seed may be an int or a SeedSequence."""
    return np.random.Generator(np.random.Philox(seed))


def layer_pairs(n: int, layer_index: int) -> np.ndarray:
    """(nb, 2) qubit pairs of the brick row at this layer's parity."""
    parity = layer_index % 2
    a = np.arange(parity, n + parity, 2, dtype=np.int64)
    return np.stack([a, (a + 1) % n], axis=1)


def build_layer_array(
    params: CircuitParams, layer_index: int, rng: np.random.Generator
) -> np.ndarray:
    """Draw one layer as an int64 array (nb, 5): a, b, control_is_b, gate_a, gate_b."""
    if not 0 <= layer_index < params.depth:
        raise ValueError("layer_index out of range")
    n = params.n_qubits
    pairs = layer_pairs(n, layer_index)
    nb = pairs.shape[0]
    out = np.zeros((nb, 5), dtype=np.int64)
    out[:, :2] = pairs
    if params.cnot_orientation == "random":
        draws = rng.integers(0, 2, size=(nb, 3), dtype=np.uint8)
        out[:, 2] = draws[:, 0]
        out[:, 3:] = draws[:, 1:]
    else:
        draws = rng.integers(0, 2, size=(nb, 2), dtype=np.uint8)
        out[:, 3:] = draws
    return out


def build_layer(
    params: CircuitParams, layer_index: int, rng: np.random.Generator
) -> list[Brick]:
    """Same draws as build_layer_array, returned as Brick values."""
    arr = build_layer_array(params, layer_index, rng)
    return [
        Brick(int(a), int(b), bool(c), int(ga), int(gb)) for a, b, c, ga, gb in arr
    ]


def bricks_to_array(bricks: Sequence[Brick] | np.ndarray) -> np.ndarray:
    if isinstance(bricks, np.ndarray):
        return bricks
    out = np.zeros((len(bricks), 5), dtype=np.int64)
    for i, br in enumerate(bricks):
        out[i] = (br.qubit_a, br.qubit_b, br.control_is_b, br.gate_a, br.gate_b)
    return out


def apply_layer(state: StabilizerState, bricks: Sequence[Brick] | np.ndarray) -> None:
    """Apply each brick in order: CNOT, then the gate on a, then the gate on b."""
    arr = bricks_to_array(bricks)
    if arr.size and int(arr[:, :2].max()) >= state.n:
        raise ValueError("brick qubit index exceeds state size")
    kernels.apply_bricks(state.mat, state.n, arr)


def iter_layers(params: CircuitParams) -> Iterator[np.ndarray]:
    """All layers of the realization seeded by params.seed, in order."""
    rng = make_stream(params.seed)
    for t in range(params.depth):
        yield build_layer_array(params, t, rng)


def lightcone_bound(source: QubitSet | Iterable[int], t: int, n: int) -> QubitSet:
    """Deterministic support bound after t layers of the alternating brick rows.

    Any operator initially supported on source stays inside this set, since a
    brick can only spread support within its own pair; which boundary brick
    touches the frontier at each step follows the layer parity convention.
    """
    members = source.members if isinstance(source, QubitSet) else tuple(source)
    reached = np.zeros(n, dtype=bool)
    reached[list(members)] = True
    for layer in range(t):
        pairs = layer_pairs(n, layer)
        hit = reached[pairs[:, 0]] | reached[pairs[:, 1]]
        reached[pairs[hit, 0]] = True
        reached[pairs[hit, 1]] = True
    return QubitSet(n, np.nonzero(reached)[0])
