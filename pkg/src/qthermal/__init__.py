"""Steady-state simulation of qubit networks acting as thermal circuits."""
from __future__ import annotations

from .circuits import preset
from .currents import (
    CurrentReport,
    bath_current,
    effective_temperature,
    full_report,
    link_current,
    spin_current,
)
from .errors import (
    NetlistError,
    NonUniqueSteadyState,
    ObservableError,
    QThermalError,
    SolverError,
    SolverFailure,
)
from .hilbert import DensityMatrix, Operator
from .liouvillian import asymptotic_state, liouvillian_matrix, propagate, steady_state, steady_state_space
from .netlist import CircuitSpec, format_circuit, load_circuit, parse_circuit
from .verify import LawCheck, run_all

__all__ = [
    "CircuitSpec", "CurrentReport", "DensityMatrix", "LawCheck", "NetlistError", "NonUniqueSteadyState",
    "ObservableError", "Operator", "QThermalError", "SolverError", "SolverFailure", "asymptotic_state",
    "bath_current", "effective_temperature", "format_circuit", "full_report", "liouvillian_matrix",
    "link_current", "load_circuit", "parse_circuit", "preset", "propagate", "run_all", "spin_current",
    "steady_state", "steady_state_space",
]
