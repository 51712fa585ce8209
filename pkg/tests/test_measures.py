"""Information measures: geometry handling and equivalence with the dense oracle."""

import numpy as np
import pytest

from infoflow import measures, oracle
from infoflow.circuit import CircuitParams, apply_layer, build_layer_array, make_stream
from infoflow.measures import (
    Geometry,
    RANDOM_L16,
    coherent_bits,
    consecutive_geometry,
    effective_l16,
    holevo_bits,
    measure_record,
    private_info_bits,
    random_measure_geometry,
    random_source_geometry,
)
from infoflow.tableau import QubitSet, init_basis_state, init_mixed_source


def evolve_pair(n, source, depth, seed):
    params = CircuitParams(n, max(depth, 1), 0)
    stream = make_stream(seed)
    pure = init_basis_state(n)
    mixed = init_mixed_source(n, QubitSet(n, source))
    layers = []
    for t in range(depth):
        bricks = build_layer_array(params, t, stream)
        layers.append(bricks)
        apply_layer(pure, bricks)
        apply_layer(mixed, bricks)
    return pure, mixed, layers


def test_geometry_validation():
    with pytest.raises(ValueError):
        Geometry(8, QubitSet(8, [0]), QubitSet(8, range(8)))  # measure = everything
    with pytest.raises(ValueError):
        Geometry(8, QubitSet(8, []), QubitSet(8, [0]))
    with pytest.raises(ValueError):
        Geometry(8, QubitSet(8, [0, 3]), QubitSet(8, [0, 1]))  # not contiguous
    with pytest.raises(ValueError):
        Geometry(8, QubitSet(4, [0]), QubitSet(8, [0, 1]))  # register mismatch
    # scattered sets allowed in the random modes
    g = Geometry(8, QubitSet(8, [0, 3]), QubitSet(8, [1, 5]), "random_source")
    assert g.environment.members == (0, 2, 3, 4, 6, 7)


def test_geometry_wraparound_arc_is_contiguous():
    g = Geometry(8, QubitSet(8, [7, 0]), QubitSet(8, [6, 7, 0, 1]))
    assert g.s == pytest.approx(0.25)
    assert g.m == pytest.approx(0.5)


def test_consecutive_geometry_placements():
    n = 32
    inside = consecutive_geometry(n, 2, 6, 1, "inside")
    assert inside.source.members == (2, 3, 4, 5)
    assert inside.measure.members == tuple(range(12))

    centered = consecutive_geometry(n, 2, 6, 0, "centered")
    assert centered.source.members == (4, 5, 6, 7)

    half = consecutive_geometry(n, 2, 6, 0, "half")
    assert half.source.members == (0, 1, 30, 31)

    outside = consecutive_geometry(n, 2, 6, 1, "outside")
    assert outside.source.members == (14, 15, 16, 17)
    assert set(outside.source.members).isdisjoint(outside.measure.members)


def test_consecutive_geometry_rejects_impossible():
    with pytest.raises(ValueError):
        consecutive_geometry(32, 2, 6, 5, "inside")  # 5 + 2 > 6 sixteenths
    with pytest.raises(ValueError):
        consecutive_geometry(32, 3, 6, 0, "centered")  # odd gap
    with pytest.raises(ValueError):
        consecutive_geometry(32, 1, 6, 0, "half")  # cannot split one site evenly
    with pytest.raises(ValueError):
        consecutive_geometry(32, 2, 14, 1, "outside")  # no room outside
    with pytest.raises(ValueError):
        consecutive_geometry(30, 2, 6, 0, "centered")  # sixteenths need n % 16 == 0


def test_effective_l16():
    assert effective_l16(2, 6, 1, "inside") == 1
    assert effective_l16(2, 6, 2, "inside") == 2
    assert effective_l16(2, 8, 3, "inside") == 3
    assert effective_l16(2, 6, 0, "centered") == 2
    assert effective_l16(2, 6, 0, "half") == 0
    assert effective_l16(2, 6, 1, "outside") == 1


def test_random_geometries_are_seeded_and_sized():
    rng = np.random.default_rng(4)
    g1 = random_source_geometry(64, 2, 6, np.random.default_rng(12))
    g2 = random_source_geometry(64, 2, 6, np.random.default_rng(12))
    assert g1.source.members == g2.source.members
    assert len(g1.source) == 8 and len(g1.measure) == 24
    assert g1.measure.members == tuple(range(24))  # measure stays consecutive
    assert g1.selection_mode == "random_source"

    g3 = random_measure_geometry(64, 2, 6, rng)
    assert len(g3.measure) == 24 and g3.source.members == tuple(range(8))
    assert g3.selection_mode == "random_measure"


def test_t0_values_by_position():
    n = 32
    for placement, l16, expect_h, expect_c in (
        ("inside", 1, 4, 4),
        ("centered", 0, 4, 4),
        ("half", 0, 2, 0),
        ("outside", 1, 0, -4),
    ):
        geom = consecutive_geometry(n, 2, 6, l16, placement)
        pure = init_basis_state(n)
        mixed = init_mixed_source(n, geom.source)
        assert holevo_bits(pure, mixed, geom.measure) == expect_h
        assert coherent_bits(mixed, geom.measure) == expect_c


def test_measures_match_dense_oracle():
    rng = np.random.default_rng(71)
    for trial in range(25):
        n = int(rng.choice([4, 6, 8, 10]))
        depth = int(rng.integers(0, 14))
        s = int(rng.integers(1, min(4, n - 1) + 1))
        source = rng.choice(n, size=s, replace=False).tolist()
        m = int(rng.integers(1, n))
        meas = rng.choice(n, size=m, replace=False).tolist()
        pure, mixed, layers = evolve_pair(n, source, depth, 9000 + trial)
        region = QubitSet(n, meas)

        h = holevo_bits(pure, mixed, region)
        c = coherent_bits(mixed, region)
        assert abs(h - oracle.direct_holevo(n, source, layers, meas)) < 1e-9
        assert abs(c - oracle.direct_coherent(n, source, layers, meas)) < 1e-9
        assert private_info_bits(pure, mixed, region) == c
        # antisymmetry and range bounds
        assert coherent_bits(mixed, region.complement()) == -c
        assert 0 <= h <= s
        assert -s <= c <= s


def test_measure_record_contents():
    n = 32
    geom = consecutive_geometry(n, 2, 6, 0, "centered")
    pure, mixed, _ = evolve_pair(n, geom.source.members, 8, 55)
    rec = measure_record(pure, mixed, geom, ("holevo", "coherent", "private"))
    assert set(rec) == {"holevo", "coherent", "private"}
    assert rec["private"] == rec["coherent"]
    assert rec["holevo"] == holevo_bits(pure, mixed, geom.measure)

    only_h = measure_record(pure, mixed, geom, ("holevo",))
    assert set(only_h) == {"holevo"}
    assert only_h["holevo"] == rec["holevo"]


def test_measure_record_rejects_unknown():
    n = 32
    geom = consecutive_geometry(n, 2, 6, 0, "centered")
    pure = init_basis_state(n)
    mixed = init_mixed_source(n, geom.source)
    with pytest.raises(ValueError):
        measure_record(pure, mixed, geom, ("fidelity",))


def test_random_l16_sentinel():
    assert RANDOM_L16 == -1
