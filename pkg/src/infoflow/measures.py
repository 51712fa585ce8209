"""Region geometry and information measures for a mixed-source chain.

The protocol prepares the chain maximally mixed on a source region S and in
a product pure state elsewhere, then evolves a reference copy from the
all-pure state under the identical circuit.  Every member of the source
ensemble picks up the same conditional entropy under Clifford evolution
(the members differ by Pauli strings, which conjugate to Pauli strings), so
the accessible information about S contained in a region A reduces to

    H(A) = S_mixed(A) - S_pure(A)

in exact integer bits.  With E the complement of the measured region M, the
coherent information delivered to M is C(M) = S_mixed(M) - S_mixed(E), and
the private information P = H(M) - H(E) equals C(M) identically because the
reference run stays globally pure, forcing S_pure(M) = S_pure(E).  All
three are exposed; the equality is verified against a dense oracle in the
tests rather than assumed silently here.

Region sizes and offsets are specified in sixteenths of the chain so one
config scales across system sizes without rounding drift.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from infoflow.tableau import QubitSet, StabilizerState, subsystem_entropy

PLACEMENTS = ("inside", "centered", "half", "outside")
SELECTION_MODES = ("consecutive", "random_source", "random_measure")

RANDOM_L16 = -1  # sentinel for geometries without a meaningful edge distance


def _is_ring_arc(members: tuple[int, ...], n: int) -> bool:
    """True when the members form one contiguous arc on the ring."""
    size = len(members)
    if size in (0, n):
        return True
    inside = np.zeros(n, dtype=bool)
    inside[list(members)] = True
    starts = int(np.sum(inside & ~np.roll(inside, 1)))
    return starts == 1


@dataclass(frozen=True)
class Geometry:
    """Source and measured regions on a chain of n_qubits sites.

    edge_sites is the minimal number of sites between a source qubit and the
    boundary of the measured block; it is filled in by the consecutive
    constructors and stays None for scattered selections.
    """

    n_qubits: int
    source: QubitSet
    measure: QubitSet
    selection_mode: str = "consecutive"
    edge_sites: int | None = None

    def __post_init__(self):
        for region in (self.source, self.measure):
            if region.n_qubits != self.n_qubits:
                raise ValueError("region size does not match chain size")
        if not 0 < len(self.measure) < self.n_qubits:
            raise ValueError("measured region must be a proper nonempty subset")
        if len(self.source) == 0:
            raise ValueError("source region is empty")
        if self.selection_mode == "consecutive":
            for region in (self.source, self.measure):
                if not _is_ring_arc(region.members, self.n_qubits):
                    raise ValueError("consecutive mode needs contiguous regions")

    @property
    def environment(self) -> QubitSet:
        return self.measure.complement()

    @property
    def s(self) -> float:
        return len(self.source) / self.n_qubits

    @property
    def m(self) -> float:
        return len(self.measure) / self.n_qubits

    @property
    def l(self) -> float | None:
        return None if self.edge_sites is None else self.edge_sites / self.n_qubits


def _sixteenth(n: int, value16: int, what: str) -> int:
    if n * value16 % 16:
        raise ValueError(f"{what}={value16}/16 of n={n} is not an integer")
    return n * value16 // 16


def effective_l16(s16: int, m16: int, l16: int, placement: str) -> int:
    """Edge distance in sixteenths as recorded in outputs.

    inside/outside keep the configured distance, centered derives it, and
    half straddles the boundary so the distance is zero by convention.
    """
    if placement in ("inside", "outside"):
        return l16
    if placement == "centered":
        if (m16 - s16) % 2:
            raise ValueError("centered placement needs m16 - s16 even")
        return (m16 - s16) // 2
    if placement == "half":
        return 0
    raise ValueError(f"placement must be one of {PLACEMENTS}")


def consecutive_geometry(
    n: int, s16: int, m16: int, l16: int, placement: str
) -> Geometry:
    """Measured block M = [0, m) plus a consecutive source placed relative to it.

    Offsets are in sixteenths of the chain, measured from the edge of M:
    inside puts S at [l, l+s) within M, centered centers it in M, half
    straddles M's left edge with half of S outside, and outside puts S at
    [m+l, m+l+s) beyond M's right edge.
    """
    if placement not in PLACEMENTS:
        raise ValueError(f"placement must be one of {PLACEMENTS}")
    if not 0 < m16 < 16:
        raise ValueError("m16 must be in (0, 16)")
    if not 0 < s16 <= 16:
        raise ValueError("s16 must be in (0, 16]")
    s = _sixteenth(n, s16, "s16")
    m = _sixteenth(n, m16, "m16")
    if placement == "inside":
        if l16 < 0 or l16 + s16 > m16:
            raise ValueError("inside placement needs 0 <= l16 and l16 + s16 <= m16")
        off = _sixteenth(n, l16, "l16")
        edge = min(off, m - off - s)
    elif placement == "centered":
        eff = effective_l16(s16, m16, l16, placement)
        off = _sixteenth(n, eff, "(m16-s16)/2")
        edge = off
    elif placement == "half":
        if s16 % 2:
            raise ValueError("half placement needs s16 even")
        off = -_sixteenth(n, s16 // 2, "s16/2")
        edge = 0
    else:
        if l16 < 0 or m16 + l16 + s16 > 16:
            raise ValueError("outside placement needs S to fit beyond M on the ring")
        off = _sixteenth(n, m16 + l16, "m16+l16")
        edge = min(off - m, n - off - s)
    source = QubitSet(n, np.arange(off, off + s) % n)
    measure = QubitSet(n, range(m))
    return Geometry(n, source, measure, "consecutive", edge)


def random_source_geometry(
    n: int, s16: int, m16: int, rng: np.random.Generator
) -> Geometry:
    """Consecutive M = [0, m) with the source scattered uniformly over the chain."""
    s = _sixteenth(n, s16, "s16")
    m = _sixteenth(n, m16, "m16")
    source = QubitSet(n, rng.choice(n, size=s, replace=False))
    return Geometry(n, source, QubitSet(n, range(m)), "random_source")


def random_measure_geometry(
    n: int, s16: int, m16: int, rng: np.random.Generator
) -> Geometry:
    """Consecutive source S = [0, s) with M scattered uniformly over the chain."""
    s = _sixteenth(n, s16, "s16")
    m = _sixteenth(n, m16, "m16")
    measure = QubitSet(n, rng.choice(n, size=m, replace=False))
    return Geometry(n, QubitSet(n, range(s)), measure, "random_measure")


def _check_pair(pure: StabilizerState, mixed: StabilizerState):
    if mixed.n != pure.n:
        raise ValueError("states act on different chain sizes")
    if not pure.is_pure:
        raise ValueError("reference state must be pure")


def holevo_bits(
    pure_evolved: StabilizerState, mixed_evolved: StabilizerState, region: QubitSet
) -> int:
    """Accessible information about the source contained in region, in bits.

    Both states must have been evolved through the identical circuit
    realization; that provenance is the caller's contract.
    """
    _check_pair(pure_evolved, mixed_evolved)
    return subsystem_entropy(mixed_evolved, region) - subsystem_entropy(
        pure_evolved, region
    )


def coherent_bits(mixed_evolved: StabilizerState, region: QubitSet) -> int:
    """Coherent information delivered to region, in bits (may be negative)."""
    env = region.complement()
    return subsystem_entropy(mixed_evolved, region) - subsystem_entropy(
        mixed_evolved, env
    )


def private_info_bits(
    pure_evolved: StabilizerState, mixed_evolved: StabilizerState, region: QubitSet
) -> int:
    """Holevo difference H(M) - H(E); coincides with coherent_bits exactly."""
    env = region.complement()
    return holevo_bits(pure_evolved, mixed_evolved, region) - holevo_bits(
        pure_evolved, mixed_evolved, env
    )


def measure_record(
    pure_evolved: StabilizerState,
    mixed_evolved: StabilizerState,
    geometry: Geometry,
    observables: tuple[str, ...] = ("holevo", "coherent", "private"),
) -> dict[str, int]:
    """Requested measures from the minimal set of subsystem ranks.

    The pure-run entropies of M and E coincide through purity, so the full
    record costs three rank computations instead of five; holevo alone or
    coherent alone costs two.
    """
    _check_pair(pure_evolved, mixed_evolved)
    unknown = set(observables) - {"holevo", "coherent", "private"}
    if unknown:
        raise ValueError(f"unknown observables: {sorted(unknown)}")
    need_pure = "holevo" in observables or "private" in observables
    need_env = "coherent" in observables or "private" in observables
    sm_m = subsystem_entropy(mixed_evolved, geometry.measure)
    sm_e = subsystem_entropy(mixed_evolved, geometry.environment) if need_env else 0
    sp_m = subsystem_entropy(pure_evolved, geometry.measure) if need_pure else 0
    out: dict[str, int] = {}
    if "holevo" in observables:
        out["holevo"] = sm_m - sp_m
    if "coherent" in observables:
        out["coherent"] = sm_m - sm_e
    if "private" in observables:
        out["private"] = (sm_m - sp_m) - (sm_e - sp_m)
    return out
