"""Dynamic elastic-optical-network simulation (RMSA with CFM-driven format choice)."""

from .routing import yen_k_shortest
from .sim import Request, SimConfig, SimMetrics, carriers_and_slices, run_simulation, select_mfl
from .spectrum import SpectrumState, first_fit_allocate
from .topology import Topology, load_topology

__all__ = [
    "Request",
    "SimConfig",
    "SimMetrics",
    "SpectrumState",
    "Topology",
    "carriers_and_slices",
    "first_fit_allocate",
    "load_topology",
    "run_simulation",
    "select_mfl",
    "yen_k_shortest",
]
