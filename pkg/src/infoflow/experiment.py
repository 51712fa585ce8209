"""Seeded Monte-Carlo sweeps over system size, geometry and circuit depth.

A sweep evolves, for every sample, a mixed-source state and a pure reference
state through one shared circuit realization and records the requested
observables on a fixed layer grid.  One circuit realization yields a whole
time series (the trajectory convention): ensembles generated layer by layer
make the marginal distribution at each depth identical to sampling a fresh
circuit per depth, at a fraction of the cost.  Within-trajectory
correlations across grid points exist and are harmless because every
analysis is pointwise in tau or acts on means.

Reproducibility rules:
  - per-sample streams are derived from (master_seed, N, geometry id,
    sample index) through a counter-based generator, so results do not
    depend on worker count or scheduling;
  - per-grid-point sums of the integer observables (and their squares) are
    kept as exact integers, so aggregation order cannot change the output;
  - persisted files contain no timestamps and use shortest round-trip float
    formatting, so equal inputs give byte-identical outputs.

Raw observables are integers in bits; normalization by N happens only at
aggregation time.
"""

from __future__ import annotations

import hashlib
import json
import math
import multiprocessing
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

try:
    import tomllib as tomli
except ModuleNotFoundError:
    import tomli

from infoflow import __version__
from infoflow.circuit import (
    LAYER_CONVENTION,
    ORIENTATIONS,
    CircuitParams,
    apply_layer,
    build_layer_array,
)
from infoflow.measures import (
    PLACEMENTS,
    RANDOM_L16,
    SELECTION_MODES,
    Geometry,
    consecutive_geometry,
    effective_l16,
    measure_record,
    random_measure_geometry,
    random_source_geometry,
)
from infoflow.tableau import QubitSet, init_basis_state, init_mixed_source

OBSERVABLES = ("holevo", "coherent", "private_check")

# observable name in configs/outputs -> record key in measures
_RECORD_KEY = {"holevo": "holevo", "coherent": "coherent", "private_check": "private"}

CSV_HEADER = "observable,N,s16,m16,l16,selection,t,tau,mean,variance,stderr,n_samples"

MANIFEST_NAME = "manifest.json"
CSV_NAME = "results.csv"
FORMAT_VERSION = 1


class ConfigError(ValueError):
    """Invalid or unknown sweep configuration input."""


@dataclass(frozen=True)
class SweepConfig:
    """Full description of one sweep; every field round-trips through files.

    m16, l16 and placement accept several values; the sweep runs their
    cross product (duplicates that resolve to the same regions are merged).
    record_stride None means the per-size default of one record per layer
    up to N=128 and N/128 afterwards.  source_qubits/measure_qubits bypass
    the sixteenths convention for a single explicit geometry.
    """

    sizes: tuple[int, ...]
    observables: tuple[str, ...]
    max_tau: float
    n_samples: int
    master_seed: int
    s16: int | None = None
    m16_values: tuple[int, ...] | None = None
    l16_values: tuple[int, ...] = (0,)
    placements: tuple[str, ...] = ("inside",)
    selection: str = "consecutive"
    record_stride: int | None = None
    cnot_orientation: str = "random"
    source_qubits: tuple[int, ...] | None = None
    measure_qubits: tuple[int, ...] | None = None

    def __post_init__(self):
        if not self.sizes:
            raise ConfigError("sizes must be a nonempty list")
        explicit = self.source_qubits is not None or self.measure_qubits is not None
        if explicit:
            if self.source_qubits is None or self.measure_qubits is None:
                raise ConfigError(
                    "source_qubits and measure_qubits must be given together"
                )
            if len(self.sizes) != 1:
                raise ConfigError("explicit qubit sets need exactly one size")
            if self.s16 is not None or self.m16_values is not None:
                raise ConfigError("explicit qubit sets exclude s16/m16")
            n = self.sizes[0]
            for q in self.source_qubits + self.measure_qubits:
                if not 0 <= q < n:
                    raise ConfigError("explicit qubit index out of range")
        else:
            if self.s16 is None or self.m16_values is None:
                raise ConfigError("s16 and m16 are required")
            if not 0 < self.s16 <= 16:
                raise ConfigError("s16 must be in (0, 16]")
            for m16 in self.m16_values:
                if not 0 < m16 < 16:
                    raise ConfigError("m16 must be in (0, 16)")
            for n in self.sizes:
                if n % 16:
                    raise ConfigError("sizes must be multiples of 16")
        for n in self.sizes:
            if n < 2 or n % 2:
                raise ConfigError("sizes must be even and >= 2")
        if self.selection not in SELECTION_MODES:
            raise ConfigError(f"selection must be one of {SELECTION_MODES}")
        for p in self.placements:
            if p not in PLACEMENTS:
                raise ConfigError(f"placement must be one of {PLACEMENTS}")
        bad = set(self.observables) - set(OBSERVABLES)
        if bad or not self.observables:
            raise ConfigError(f"observables must be a nonempty subset of {OBSERVABLES}")
        if len(set(self.observables)) != len(self.observables):
            raise ConfigError("duplicate observable")
        if self.max_tau < 0:
            raise ConfigError("max_tau must be non-negative")
        if self.n_samples < 2:
            raise ConfigError("n_samples must be at least 2")
        if not 0 <= self.master_seed < 2**64:
            raise ConfigError("master_seed must fit in 64 bits")
        if self.record_stride is not None and self.record_stride < 1:
            raise ConfigError("record_stride must be a positive integer")
        if self.cnot_orientation not in ORIENTATIONS:
            raise ConfigError(f"cnot_orientation must be one of {ORIENTATIONS}")


_CONFIG_KEYS = {
    "sizes": "sizes",
    "s16": "s16",
    "m16": "m16_values",
    "l16": "l16_values",
    "placement": "placements",
    "selection": "selection",
    "observables": "observables",
    "max_tau": "max_tau",
    "record_stride": "record_stride",
    "n_samples": "n_samples",
    "master_seed": "master_seed",
    "cnot_orientation": "cnot_orientation",
    "source_qubits": "source_qubits",
    "measure_qubits": "measure_qubits",
}

_LIST_FIELDS = {
    "sizes",
    "m16_values",
    "l16_values",
    "placements",
    "observables",
    "source_qubits",
    "measure_qubits",
}


def config_from_mapping(data: dict) -> SweepConfig:
    unknown = sorted(set(data) - set(_CONFIG_KEYS))
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    kwargs = {}
    for key, value in data.items():
        name = _CONFIG_KEYS[key]
        if name in _LIST_FIELDS:
            if not isinstance(value, list):
                value = [value]
            kwargs[name] = tuple(value)
        else:
            kwargs[name] = value
    missing = {"sizes", "observables", "max_tau", "n_samples", "master_seed"} - set(
        kwargs
    )
    if missing:
        raise ConfigError(f"missing config keys: {', '.join(sorted(missing))}")
    try:
        return SweepConfig(**kwargs)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def parse_config(path, overrides: dict | None = None) -> SweepConfig:
    """Load a flat key/value config file, optionally overriding keys."""
    try:
        with open(path, "rb") as fh:
            data = tomli.load(fh)
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"malformed config: {exc}") from exc
    if overrides:
        data.update(overrides)
    return config_from_mapping(data)


def config_to_dict(config: SweepConfig) -> dict:
    out = {}
    for f in fields(config):
        value = getattr(config, f.name)
        if isinstance(value, tuple):
            value = list(value)
        out[f.name] = value
    return out


def config_hash(config: SweepConfig) -> str:
    canon = json.dumps(config_to_dict(config), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


@dataclass(frozen=True)
class GeomSpec:
    """One resolved geometry family of a sweep, scale-free in sixteenths.

    selection is the output label (placement name for consecutive mode);
    l16 is the effective boundary distance, or -1 when undefined.
    """

    mode: str
    selection: str
    s16: int
    m16: int
    l16: int
    placement: str | None = None
    l16_raw: int = 0
    source_qubits: tuple[int, ...] | None = None
    measure_qubits: tuple[int, ...] | None = None

    def descriptor(self) -> str:
        if self.mode == "explicit":
            src = ",".join(map(str, self.source_qubits))
            meas = ",".join(map(str, self.measure_qubits))
            return f"explicit:src={src}:meas={meas}"
        if self.mode == "consecutive":
            off16 = _offset16(self.s16, self.m16, self.l16_raw, self.placement)
            return (
                f"consecutive:s16={self.s16}:m16={self.m16}:off16={off16}"
            )
        return f"{self.mode}:s16={self.s16}:m16={self.m16}"

    def resolve(self, n: int, rng: np.random.Generator | None = None) -> Geometry:
        if self.mode == "consecutive":
            return consecutive_geometry(
                n, self.s16, self.m16, self.l16_raw, self.placement
            )
        if self.mode == "random_source":
            return random_source_geometry(n, self.s16, self.m16, rng)
        if self.mode == "random_measure":
            return random_measure_geometry(n, self.s16, self.m16, rng)
        return Geometry(
            n,
            QubitSet(n, self.source_qubits),
            QubitSet(n, self.measure_qubits),
            "explicit",
        )


def _offset16(s16: int, m16: int, l16: int, placement: str):
    """Start of the source in sixteenths; canonical identity of a placement."""
    if placement == "inside":
        return l16
    if placement == "centered":
        return (m16 - s16) // 2
    if placement == "half":
        # s16 even is validated at resolution; keep halves exact here
        return -(s16 // 2)
    return m16 + l16


def _sixteenth_of(count: int, n: int) -> int:
    return 16 * count // n if (16 * count) % n == 0 else -1


def geometry_specs(config: SweepConfig) -> tuple[GeomSpec, ...]:
    """Expand the configured cross product into deduplicated geometry families."""
    if config.source_qubits is not None:
        n = config.sizes[0]
        return (
            GeomSpec(
                "explicit",
                "explicit",
                _sixteenth_of(len(set(config.source_qubits)), n),
                _sixteenth_of(len(set(config.measure_qubits)), n),
                RANDOM_L16,
                source_qubits=config.source_qubits,
                measure_qubits=config.measure_qubits,
            ),
        )
    if config.selection != "consecutive":
        specs = tuple(
            GeomSpec(config.selection, config.selection, config.s16, m16, RANDOM_L16)
            for m16 in config.m16_values
        )
        for spec in specs:
            try:
                spec.resolve(min(config.sizes), np.random.default_rng(0))
            except ValueError as exc:
                raise ConfigError(
                    f"invalid geometry {config.selection} s16={config.s16} "
                    f"m16={spec.m16}: {exc}"
                ) from exc
        return specs
    specs = []
    seen = set()
    for m16 in config.m16_values:
        for placement in config.placements:
            varies = placement in ("inside", "outside")
            for l16 in config.l16_values if varies else config.l16_values[:1]:
                raw = l16 if varies else 0
                try:
                    spec = GeomSpec(
                        "consecutive",
                        placement,
                        config.s16,
                        m16,
                        effective_l16(config.s16, m16, raw, placement),
                        placement,
                        raw,
                    )
                    spec.resolve(min(config.sizes))  # validates the combination
                except ValueError as exc:
                    raise ConfigError(
                        f"invalid geometry {placement} s16={config.s16} "
                        f"m16={m16} l16={raw}: {exc}"
                    ) from exc
                key = spec.descriptor()
                if key not in seen:
                    seen.add(key)
                    specs.append(spec)
    return tuple(specs)


def auto_stride(n: int) -> int:
    return 1 if n <= 128 else n // 128


def record_layers(config: SweepConfig, n: int) -> np.ndarray:
    """Layer indices at which observables are recorded; covers [0, max_tau]."""
    stride = config.record_stride or auto_stride(n)
    depth = math.ceil(config.max_tau * n)
    depth = (depth + stride - 1) // stride * stride
    return np.arange(0, depth + 1, stride, dtype=np.int64)


def _geom_key(spec: GeomSpec) -> int:
    digest = hashlib.sha256(spec.descriptor().encode()).digest()
    return int.from_bytes(digest[:8], "big")


def sample_seed(
    config: SweepConfig, n: int, spec: GeomSpec, sample_index: int
) -> np.random.SeedSequence:
    return np.random.SeedSequence(
        entropy=config.master_seed,
        spawn_key=(int(n), _geom_key(spec), int(sample_index)),
    )


def run_sample(
    config: SweepConfig, n: int, spec: GeomSpec, sample_index: int
) -> dict[str, np.ndarray]:
    """One circuit realization: integer observable records on the layer grid."""
    circ_ss, geom_ss = sample_seed(config, n, spec, sample_index).spawn(2)
    rng = np.random.Generator(np.random.Philox(circ_ss))
    geometry = spec.resolve(n, np.random.Generator(np.random.Philox(geom_ss)))
    grid = record_layers(config, n)
    depth = int(grid[-1])
    stride = int(grid[1] - grid[0]) if grid.size > 1 else 1
    params = CircuitParams(n, depth, 0, config.cnot_orientation)
    wanted = {_RECORD_KEY[obs] for obs in config.observables}
    if "private" in wanted:
        wanted.add("coherent")
    wanted = tuple(sorted(wanted))
    pure = init_basis_state(n)
    mixed = init_mixed_source(n, geometry.source)
    out = {obs: np.zeros(grid.size, dtype=np.int64) for obs in config.observables}

    def record(index: int):
        rec = measure_record(pure, mixed, geometry, wanted)
        if "private" in rec and rec["private"] != rec["coherent"]:
            raise RuntimeError(
                f"private/coherent identity violated at layer {grid[index]}"
            )
        for obs in config.observables:
            out[obs][index] = rec[_RECORD_KEY[obs]]

    record(0)
    for t in range(depth):
        bricks = build_layer_array(params, t, rng)
        apply_layer(pure, bricks)
        apply_layer(mixed, bricks)
        if (t + 1) % stride == 0:
            record((t + 1) // stride)
    return out


@dataclass
class TimeSeries:
    """Aggregated observable on one (observable, N, geometry) cell.

    sum_x and sum_x2 are exact integer accumulators over samples of the raw
    bit counts; every float column is derived from them on demand.
    """

    observable: str
    n_qubits: int
    s16: int
    m16: int
    l16: int
    selection: str
    t: np.ndarray
    n_samples: int
    sum_x: list[int]
    sum_x2: list[int]

    def key(self) -> tuple:
        return (
            self.observable,
            self.n_qubits,
            self.s16,
            self.m16,
            self.l16,
            self.selection,
        )

    @property
    def tau(self) -> np.ndarray:
        return np.asarray(self.t, dtype=float) / self.n_qubits

    @property
    def mean(self) -> np.ndarray:
        denom = self.n_samples * self.n_qubits
        return np.array([sx / denom for sx in self.sum_x])

    @property
    def variance(self) -> np.ndarray:
        n = self.n_samples
        if n < 2:
            raise ValueError("variance needs at least two samples")
        denom = n * (n - 1) * self.n_qubits**2
        return np.array(
            [(n * b - a * a) / denom for a, b in zip(self.sum_x, self.sum_x2)]
        )

    @property
    def stderr(self) -> np.ndarray:
        return np.array([math.sqrt(v / self.n_samples) for v in self.variance])

    @property
    def sigma(self) -> np.ndarray:
        return np.array([math.sqrt(v) for v in self.variance])


def aggregate(
    observable: str,
    n_qubits: int,
    spec: GeomSpec,
    t: np.ndarray,
    records: list[np.ndarray],
) -> TimeSeries:
    """Fold per-sample integer records into a TimeSeries with exact sums."""
    if not records:
        raise ValueError("no records to aggregate")
    for rec in records:
        if len(rec) != len(t):
            raise ValueError("records are not on a common grid")
    sum_x = [0] * len(t)
    sum_x2 = [0] * len(t)
    for rec in records:
        for i, v in enumerate(rec):
            v = int(v)
            sum_x[i] += v
            sum_x2[i] += v * v
    return TimeSeries(
        observable,
        n_qubits,
        spec.s16,
        spec.m16,
        spec.l16,
        spec.selection,
        np.asarray(t, dtype=np.int64),
        len(records),
        sum_x,
        sum_x2,
    )


def _chunk_sums(config: SweepConfig, n: int, spec: GeomSpec, lo: int, hi: int):
    """Integer partial sums over the sample index range [lo, hi)."""
    grid = record_layers(config, n)
    sx = {obs: np.zeros(grid.size, dtype=np.int64) for obs in config.observables}
    sx2 = {obs: np.zeros(grid.size, dtype=np.int64) for obs in config.observables}
    for index in range(lo, hi):
        rec = run_sample(config, n, spec, index)
        for obs, values in rec.items():
            sx[obs] += values
            sx2[obs] += values * values
    return (
        {obs: [int(v) for v in arr] for obs, arr in sx.items()},
        {obs: [int(v) for v in arr] for obs, arr in sx2.items()},
    )


def run_sweep(
    config: SweepConfig, threads: int = 1, progress=None
) -> list[TimeSeries]:
    """Run the full sweep; output is independent of threads and chunking."""
    specs = geometry_specs(config)
    series: list[TimeSeries] = []
    for n in config.sizes:
        for spec in specs:
            grid = record_layers(config, n)
            total_x = {obs: [0] * grid.size for obs in config.observables}
            total_x2 = {obs: [0] * grid.size for obs in config.observables}
            if threads <= 1:
                parts = [_chunk_sums(config, n, spec, 0, config.n_samples)]
            else:
                chunk = max(1, math.ceil(config.n_samples / (threads * 4)))
                bounds = [
                    (lo, min(lo + chunk, config.n_samples))
                    for lo in range(0, config.n_samples, chunk)
                ]
                ctx = multiprocessing.get_context("fork")
                with ProcessPoolExecutor(threads, mp_context=ctx) as pool:
                    parts = list(
                        pool.map(
                            _chunk_sums,
                            *zip(*[(config, n, spec, lo, hi) for lo, hi in bounds]),
                        )
                    )
            for part_x, part_x2 in parts:
                for obs in config.observables:
                    for i in range(grid.size):
                        total_x[obs][i] += part_x[obs][i]
                        total_x2[obs][i] += part_x2[obs][i]
            for obs in config.observables:
                series.append(
                    TimeSeries(
                        obs,
                        n,
                        spec.s16,
                        spec.m16,
                        spec.l16,
                        spec.selection,
                        grid,
                        config.n_samples,
                        total_x[obs],
                        total_x2[obs],
                    )
                )
            if progress is not None:
                progress(f"N={n} {spec.selection} s16={spec.s16} m16={spec.m16} "
                         f"l16={spec.l16} done")
    return series


def _csv_rows(series: list[TimeSeries]):
    for ts in sorted(series, key=lambda s: s.key()):
        mean = ts.mean
        var = ts.variance
        err = ts.stderr
        for i, t in enumerate(ts.t):
            tau = int(t) / ts.n_qubits
            yield (
                f"{ts.observable},{ts.n_qubits},{ts.s16},{ts.m16},{ts.l16},"
                f"{ts.selection},{int(t)},{tau!r},{float(mean[i])!r},"
                f"{float(var[i])!r},{float(err[i])!r},{ts.n_samples}"
            )


def persist(series: list[TimeSeries], out_dir, config: SweepConfig) -> None:
    """Write results.csv and manifest.json; equal inputs give equal bytes."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    lines = [CSV_HEADER]
    lines.extend(_csv_rows(series))
    (out / CSV_NAME).write_text("\n".join(lines) + "\n")
    manifest = {
        "format_version": FORMAT_VERSION,
        "package_version": __version__,
        "conventions": {
            "layer_convention": LAYER_CONVENTION,
            "cnot_orientation": config.cnot_orientation,
            "normalization": "per_qubit",
        },
        "config": config_to_dict(config),
        "config_hash": config_hash(config),
        "series": [
            {
                "observable": ts.observable,
                "n_qubits": ts.n_qubits,
                "s16": ts.s16,
                "m16": ts.m16,
                "l16": ts.l16,
                "selection": ts.selection,
                "t": [int(t) for t in ts.t],
                "n_samples": ts.n_samples,
                "sum_x": ts.sum_x,
                "sum_x2": ts.sum_x2,
            }
            for ts in sorted(series, key=lambda s: s.key())
        ],
    }
    text = json.dumps(manifest, sort_keys=True, indent=1)
    (out / MANIFEST_NAME).write_text(text + "\n")


def load(out_dir) -> tuple[list[TimeSeries], dict]:
    """Read a persisted sweep back; warns when conventions differ from ours."""
    path = Path(out_dir) / MANIFEST_NAME
    try:
        manifest = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ValueError(f"malformed manifest: {exc}") from exc
    if manifest.get("format_version") != FORMAT_VERSION:
        raise ValueError(
            f"unsupported format_version {manifest.get('format_version')!r}"
        )
    conv = manifest.get("conventions", {})
    if conv.get("layer_convention") != LAYER_CONVENTION:
        warnings.warn(
            f"layer convention {conv.get('layer_convention')!r} differs from "
            f"{LAYER_CONVENTION!r}; times are not comparable",
            stacklevel=2,
        )
    series = [
        TimeSeries(
            rec["observable"],
            rec["n_qubits"],
            rec["s16"],
            rec["m16"],
            rec["l16"],
            rec["selection"],
            np.asarray(rec["t"], dtype=np.int64),
            rec["n_samples"],
            [int(v) for v in rec["sum_x"]],
            [int(v) for v in rec["sum_x2"]],
        )
        for rec in manifest["series"]
    ]
    return series, manifest
