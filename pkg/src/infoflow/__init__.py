"""Information-flow dynamics in brick-wall random Clifford circuits.

Simulates how classical (Holevo) and quantum (coherent) information spreads
through a 1D periodic chain under random CNOT + Hadamard/phase circuits,
and provides the sweep harness and fitting tools needed to locate the
dynamical transition points of the normalized information curves.
"""

__version__ = "0.1.0"

from infoflow.tableau import QubitSet, StabilizerState, gf2_rank, subsystem_entropy
from infoflow.circuit import CircuitParams, build_layer, apply_layer, lightcone_bound
from infoflow.measures import (
    Geometry,
    holevo_bits,
    coherent_bits,
    private_info_bits,
    measure_record,
)
from infoflow.experiment import (
    SweepConfig,
    TimeSeries,
    aggregate,
    load,
    parse_config,
    persist,
    run_sample,
    run_sweep,
)
from infoflow.analysis import (
    derivative,
    estimate_kink,
    collapse_cost,
    optimize_collapse,
    optimize_collapse_joint,
    fit_velocity,
    fit_power_law,
)

__all__ = [
    "QubitSet",
    "StabilizerState",
    "gf2_rank",
    "subsystem_entropy",
    "CircuitParams",
    "build_layer",
    "apply_layer",
    "lightcone_bound",
    "Geometry",
    "holevo_bits",
    "coherent_bits",
    "private_info_bits",
    "measure_record",
    "SweepConfig",
    "TimeSeries",
    "aggregate",
    "load",
    "parse_config",
    "persist",
    "run_sample",
    "run_sweep",
    "derivative",
    "estimate_kink",
    "collapse_cost",
    "optimize_collapse",
    "optimize_collapse_joint",
    "fit_velocity",
    "fit_power_law",
    "__version__",
]
