"""Named, machine-checkable circuit laws.

Each check returns :class:`LawCheck` records whose residual is already
normalized (scale-relative where the law concerns currents), so
``passed`` is simply ``|residual| <= tolerance``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import networkx as nx
import numpy as np

from .currents import (
    bath_current,
    bath_current_from_temperatures,
    effective_temperature,
    full_report,
    link_current,
)
from .errors import ObservableError
from .hilbert import Operator
from .liouvillian import liouvillian_matrix, steady_state
from .netlist import CircuitSpec

DEFAULT_TOLERANCES = {
    "kirchhoff_current": 1e-9,
    "kirchhoff_voltage": 1e-12,
    "transformer": 1e-9,
    "current_voltage": 1e-9,
    "balance": 1e-8,
    "adder_current": 1e-9,
    "adder_temperature": 1e-6,
}
#: a state counts as stationary if max|L vec rho| is below this times ||L||
STEADY_RTOL = 1e-9


@dataclass(frozen=True)
class LawCheck:
    name: str
    residual: float
    tolerance: float
    passed: bool
    context: dict = field(default_factory=dict, compare=False)
    applicable: bool = True

    @classmethod
    def make(cls, name, residual, tolerance, context=None, applicable=True) -> "LawCheck":
        residual = float(residual)
        return cls(name, residual, float(tolerance), bool(abs(residual) <= tolerance),
                   dict(context or {}), applicable)

    @property
    def status(self) -> str:
        if not self.applicable:
            return "N/A"
        return "PASS" if self.passed else "FAIL"

    def line(self) -> str:
        return f"{self.name} {self.residual:.6e} {self.tolerance:.3e} {self.status}"


def _tol(kind, tolerances):
    return (tolerances or {}).get(kind, DEFAULT_TOLERANCES[kind])


def _scale(spec: CircuitSpec, rho: Operator) -> float:
    vals = [abs(bath_current(spec, rho, b.id)) for b in spec.baths]
    for c in spec.active_couplings:
        vals.append(abs(link_current(spec, rho, c.a, c.b)))
        vals.append(abs(link_current(spec, rho, c.b, c.a)))
    s = max(vals, default=0.0)
    return s if s > 0 else 1.0


def is_stationary(spec: CircuitSpec, rho: Operator, rtol: float = STEADY_RTOL) -> bool:
    sup = liouvillian_matrix(spec)
    return float(np.abs(sup.apply(rho)).max()) <= rtol * sup.norm_inf()


def check_kirchhoff_current(spec: CircuitSpec, rho: Operator, steady: bool | None = None,
                            tolerances=None, scale: float | None = None) -> list[LawCheck]:
    """Sum of the currents entering each qubit.

    The law only holds at stationarity; for other states the residuals are
    reported but the checks are marked not applicable.  ``steady`` skips the
    stationarity test when the caller already knows.
    """
    if steady is None:
        steady = is_stationary(spec, rho)
    scale = scale or _scale(spec, rho)
    tol = _tol("kirchhoff_current", tolerances)
    out = []
    for q in spec.qubit_ids:
        total = sum(link_current(spec, rho, c.other(q), q) for c in spec.active_couplings if c.touches(q))
        b = spec.bath_on(q)
        if b is not None:
            total += bath_current(spec, rho, b.id)
        out.append(LawCheck.make(f"kirchhoff_current[{q}]", total / scale, tol,
                                 {"node": q, "scale": scale}, applicable=steady))
    return out


def check_kirchhoff_voltage(spec: CircuitSpec, rho: Operator, loop, tolerances=None) -> LawCheck:
    """Temperature drops around a closed loop of couplings add up to zero.

    The sum telescopes, so the content of the check is that the loop is a
    genuine cycle of active couplings and every temperature on it exists.
    Raises :class:`ObservableError` if one does not.
    """
    loop = [str(q) for q in loop]
    if len(loop) < 3 or len(set(loop)) != len(loop):
        raise ValueError(f"{loop} is not a simple cycle")
    active = {c.key for c in spec.active_couplings}
    ring = list(zip(loop, loop[1:] + loop[:1]))
    for a, b in ring:
        if frozenset((a, b)) not in active:
            raise ValueError(f"{a}-{b} is not an active coupling")
    T = {q: effective_temperature(spec, rho, q) for q in loop}
    drop = sum(T[a] - T[b] for a, b in ring)
    ref = max(abs(t) for t in T.values())
    return LawCheck.make(f"kirchhoff_voltage[{'-'.join(loop)}]", drop / ref,
                         _tol("kirchhoff_voltage", tolerances), {"loop": loop, "temperatures": T})


def check_transformer(spec: CircuitSpec, rho: Operator, tolerances=None,
                      scale: float | None = None) -> list[LawCheck]:
    """``J_jk / omega_k + J_kj / omega_j = 0`` on every active coupling.

    This is an operator identity (the exchange term conserves the total
    excitation), so it holds for any state.
    """
    scale = scale or _scale(spec, rho)
    tol = _tol("transformer", tolerances)
    out = []
    for c in spec.active_couplings:
        wa, wb = spec.omega(c.a), spec.omega(c.b)
        jab = link_current(spec, rho, c.a, c.b)
        jba = link_current(spec, rho, c.b, c.a)
        # multiply through by the larger frequency so the residual is a current
        w = max(wa, wb)
        res = w * (jab / wb + jba / wa) / scale
        out.append(LawCheck.make(f"transformer[{c.a}-{c.b}]", res, tol,
                                 {"J_ab": jab, "J_ba": jba, "omega_a": wa, "omega_b": wb}))
    return out


def check_current_voltage(spec: CircuitSpec, rho: Operator, tolerances=None,
                          scale: float | None = None) -> list[LawCheck]:
    """Each bath current against the value predicted by the two temperatures."""
    scale = scale or _scale(spec, rho)
    tol = _tol("current_voltage", tolerances)
    out = []
    for b in spec.baths:
        w = spec.omega(b.qubit)
        Tq = effective_temperature(spec, rho, b.qubit)
        predicted = bath_current_from_temperatures(b.gamma, w, b.T, Tq)
        actual = bath_current(spec, rho, b.id)
        out.append(LawCheck.make(f"current_voltage[{b.id}]", (actual - predicted) / scale, tol,
                                 {"actual": actual, "predicted": predicted, "T_qubit": Tq}))
    return out


def check_balance(spec: CircuitSpec, rho: Operator, edge, tolerances=None,
                  scale: float | None = None) -> LawCheck:
    """The current through ``edge`` vanishes (a balanced bridge)."""
    a, b = (str(x) for x in edge)
    scale = scale or _scale(spec, rho)
    cur = link_current(spec, rho, a, b)
    return LawCheck.make(f"balance[{a}-{b}]", cur / scale, _tol("balance", tolerances),
                         {"current": cur, "scale": scale})


# --------------------------------------------------------------------------
# adder


def find_star(spec: CircuitSpec) -> tuple[str, list[str]] | None:
    """``(hub, inputs)`` if the circuit is a star of bath-carrying qubits."""
    if spec.n < 3:
        return None
    for hub in spec.qubit_ids:
        leaves = spec.neighbours(hub)
        if (len(leaves) == spec.n - 1 and len(spec.active_couplings) == spec.n - 1
                and spec.bath_on(hub) is not None and all(spec.bath_on(q) is not None for q in leaves)):
            return hub, leaves
    return None


def check_adder(spec: CircuitSpec, rho: Operator, tolerances=None,
                scale: float | None = None) -> list[LawCheck]:
    """Output current and temperature relations of a star-shaped adder.

    The current law is ``J_A = -omega_hub sum_k J_k / omega_k`` (bath currents).
    The temperature law, applicable when all inputs share gamma, omega and T,
    is ``tanh(w/2T) [N + (gamma_A/gamma) 2/(1 + e^{w_hub/T_hub})] = sum_k tanh(w/2T_k)``.
    """
    star = find_star(spec)
    if star is None:
        return []
    hub, inputs = star
    scale = scale or _scale(spec, rho)
    out_bath = spec.bath_on(hub)
    in_baths = [spec.bath_on(q) for q in inputs]
    w_hub = spec.omega(hub)
    J_out = bath_current(spec, rho, out_bath.id)
    predicted = -w_hub * sum(bath_current(spec, rho, b.id) / spec.omega(q) for b, q in zip(in_baths, inputs))
    checks = [LawCheck.make("adder_current", (J_out - predicted) / scale, _tol("adder_current", tolerances),
                            {"hub": hub, "J_out": J_out, "predicted": predicted})]
    ws = {spec.omega(q) for q in inputs}
    gs = {b.gamma for b in in_baths}
    Ts = {b.T for b in in_baths}
    applicable = len(ws) == len(gs) == len(Ts) == 1 and next(iter(Ts)) > 0
    if applicable:
        w, g, T = ws.pop(), gs.pop(), Ts.pop()
        N = len(inputs)
        T_hub = effective_temperature(spec, rho, hub)
        lhs = math.tanh(w / (2 * T)) * (N + (out_bath.gamma / g) * 2.0 / (1.0 + math.exp(w_hub / T_hub)))
        rhs = sum(math.tanh(w / (2 * effective_temperature(spec, rho, q))) for q in inputs)
        checks.append(LawCheck.make("adder_temperature", (lhs - rhs) / abs(rhs),
                                    _tol("adder_temperature", tolerances),
                                    {"lhs": lhs, "rhs": rhs, "T_hub": T_hub}))
    return checks


# --------------------------------------------------------------------------
# whole-circuit runs


def bridge_edges(spec: CircuitSpec) -> list[tuple[str, str]]:
    """Active couplings ``x-y`` whose ends see identical outside couplings.

    Both ends must be bath-free, share the same other neighbours, and each
    such neighbour must couple to ``x`` and ``y`` with the same strength (the
    classic balanced-bridge pattern).
    """
    out = []
    for c in spec.active_couplings:
        x, y = c.a, c.b
        if spec.bath_on(x) or spec.bath_on(y):
            continue
        nx_ = set(spec.neighbours(x)) - {y}
        ny_ = set(spec.neighbours(y)) - {x}
        if nx_ and nx_ == ny_ and all(spec.coupling(z, x).J == spec.coupling(z, y).J for z in nx_):
            out.append((x, y))
    return out


def coupling_cycles(spec: CircuitSpec) -> list[list[str]]:
    g = nx.Graph()
    g.add_nodes_from(spec.qubit_ids)
    g.add_edges_from((c.a, c.b) for c in spec.active_couplings)
    order = {q: i for i, q in enumerate(spec.qubit_ids)}
    cycles = []
    for cyc in nx.cycle_basis(g):
        k = min(range(len(cyc)), key=lambda i: order[cyc[i]])
        cycles.append(cyc[k:] + cyc[:k])
    return sorted(cycles, key=lambda c: [order[q] for q in c])


def run_checks(spec: CircuitSpec, rho: Operator, steady: bool | None = None, tolerances=None,
               balance_edges=None) -> list[LawCheck]:
    """Every applicable law on a given state."""
    scale = _scale(spec, rho)
    checks = check_kirchhoff_current(spec, rho, steady=steady, tolerances=tolerances, scale=scale)
    for loop in coupling_cycles(spec):
        try:
            checks.append(check_kirchhoff_voltage(spec, rho, loop, tolerances))
        except ObservableError as exc:
            name = f"kirchhoff_voltage[{'-'.join(loop)}]"
            checks.append(LawCheck(name, math.inf, _tol("kirchhoff_voltage", tolerances), False,
                                   {"error": str(exc)}))
    checks += check_transformer(spec, rho, tolerances, scale)
    try:
        checks += check_current_voltage(spec, rho, tolerances, scale)
    except ObservableError as exc:
        checks.append(LawCheck("current_voltage", math.inf, _tol("current_voltage", tolerances), False,
                               {"error": str(exc)}))
    edges = bridge_edges(spec) if balance_edges is None else balance_edges
    for e in edges:
        checks.append(check_balance(spec, rho, e, tolerances, scale))
    try:
        checks += check_adder(spec, rho, tolerances, scale)
    except ObservableError as exc:
        checks.append(LawCheck("adder_temperature", math.inf, _tol("adder_temperature", tolerances), False,
                               {"error": str(exc)}))
    return checks


def run_all(spec: CircuitSpec, tolerances=None, balance_edges=None, solver_tol: float = 1e-9,
            perturb: float = 0.0) -> list[LawCheck]:
    """Solve the steady state once and run every applicable check.

    ``perturb`` mixes a fraction of the all-ground state into the solution
    while still treating it as stationary; it exists to test that the
    checks detect a broken solver.
    """
    res = steady_state(spec, tol=solver_tol)
    rho = res.rho
    if perturb:
        m = rho.to_dense() * (1 - perturb)
        m[-1, -1] += perturb
        rho = Operator(m)
    return run_checks(spec, rho, steady=True, tolerances=tolerances, balance_edges=balance_edges)


def report(checks: list[LawCheck]) -> str:
    return "".join(c.line() + "\n" for c in checks)


def all_passed(checks: list[LawCheck]) -> bool:
    return all(c.passed for c in checks if c.applicable)
