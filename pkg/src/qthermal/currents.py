"""Heat currents, effective temperatures and derived circuit quantities.

Sign conventions:

* ``bath_current(spec, rho, k) = Tr[H_k D_k(rho)]`` is the heat flowing from
  bath ``k`` into its qubit (positive = into the circuit).
* ``link_current(spec, rho, l, k) = i Tr(rho [H_lk, H_k])`` is the heat flowing
  from qubit ``l`` into qubit ``k`` through their coupling, measured in the
  energy units of qubit ``k``.
* Temperatures are those of the qubit's reduced state, so a population
  inversion gives a negative temperature.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BalancedLink, DegeneratePopulation, InfiniteTemperature, ObservableError
from .hilbert import Operator, commutator, embed, excited_population, expect, pauli
from .liouvillian import coupling_term, dissipator_apply, local_hamiltonian, system_hamiltonian
from .netlist import CircuitSpec

#: imaginary parts of real observables above this are reported as errors
IMAG_TOL = 1e-10
#: populations closer than this to 0 or 1 are below the solver's resolution
POPULATION_FLOOR = 1e-13


def _real(z: complex, what: str) -> float:
    if abs(z.imag) > IMAG_TOL * max(1.0, abs(z.real)):
        raise ObservableError(f"{what} has imaginary part {z.imag:.3e}; is rho Hermitian?")
    return z.real


def bath_current(spec: CircuitSpec, rho: Operator, bath_id: str) -> float:
    """Heat current from bath ``bath_id`` into its qubit, ``Tr[H_k D_k(rho)]``."""
    b = spec.bath(bath_id)
    D = dissipator_apply(spec, bath_id, rho)
    return _real(expect(local_hamiltonian(spec, b.qubit), D), f"current of bath {bath_id}")


def _coupling_or_raise(spec: CircuitSpec, a: str, b: str):
    c = spec.coupling(a, b)
    if c is None:
        raise ObservableError(f"qubits {a} and {b} are not coupled")
    return c


def link_current(spec: CircuitSpec, rho: Operator, source: str, target: str) -> float:
    """Heat current from qubit ``source`` into qubit ``target``."""
    c = _coupling_or_raise(spec, source, target)
    if c.J == 0:
        return 0.0
    H_lk = coupling_term(spec, source, target) * c.J
    z = 1j * expect(commutator(H_lk, local_hamiltonian(spec, target)), rho)
    return _real(z, f"link current {source}->{target}")


def spin_current(spec: CircuitSpec, rho: Operator, source: str, target: str) -> float:
    """Magnetization current ``2 J <sx_l sy_k - sy_l sx_k>``.

    For the XX coupling the heat current into ``target`` equals
    ``omega_target / 2`` times this quantity.
    """
    c = _coupling_or_raise(spec, source, target)
    n = spec.n
    sl, sk = spec.site(source), spec.site(target)
    sx, sy = pauli("x"), pauli("y")
    op = embed(sx, sl, n) @ embed(sy, sk, n) - embed(sy, sl, n) @ embed(sx, sk, n)
    return _real(2 * c.J * expect(op, rho), f"spin current {source}->{target}")


def total_bath_current(spec: CircuitSpec, rho: Operator, bath_id: str) -> float:
    """``Tr[H_S D_k(rho)]``: the energy bath ``k`` pumps into the whole circuit."""
    D = dissipator_apply(spec, bath_id, rho)
    return _real(expect(system_hamiltonian(spec), D), f"total current of bath {bath_id}")


def effective_temperature(spec: CircuitSpec, rho: Operator, qid: str) -> float:
    """Temperature of the qubit's reduced state, ``omega / ln(1/p0 - 1)``."""
    p0 = excited_population(rho, spec.site(qid))
    if p0 < POPULATION_FLOOR or p0 > 1.0 - POPULATION_FLOOR:
        raise DegeneratePopulation(f"qubit {qid} population {p0:.3e} is degenerate")
    x = math.log(1.0 / p0 - 1.0)
    if abs(x) < 1e-14:
        raise InfiniteTemperature(f"qubit {qid} is at infinite temperature (p0 = 1/2)")
    return spec.omega(qid) / x


def bath_current_from_temperatures(gamma: float, omega: float, T_bath: float, T_qubit: float) -> float:
    """Bath-to-qubit heat current as a function of the two temperatures.

    ``(gamma omega / 2) [coth(omega / 2 T_bath) tanh(omega / 2 T_qubit) - 1]``,
    with the ``T_bath = 0`` limit ``-gamma omega / (1 + exp(omega / T_qubit))``.
    A local dissipator only sees the qubit's populations, so this holds for
    any circuit in which the qubit's reduced state is diagonal.
    """
    th = math.tanh(omega / (2 * T_qubit))
    if T_bath == 0:
        return 0.5 * gamma * omega * (th - 1.0)
    x = omega / (2 * T_bath)
    coth = 1.0 if x > 350 else 1.0 / math.tanh(x)
    return 0.5 * gamma * omega * (coth * th - 1.0)


def potential(T_high: float, T_low: float) -> float:
    """Temperature difference ``V = T_high - T_low``."""
    return T_high - T_low


def transfer_function(spec: CircuitSpec, rho: Operator, j: str, k: str) -> float:
    """Effective transfer function ``4 J_jk V_jk / J_kj`` of one link.

    ``V_jk = T_j - T_k`` uses effective temperatures and ``J_kj`` is the
    current from ``k`` into ``j``.  A balanced link (``V = 0``) has no
    transfer function.
    """
    c = _coupling_or_raise(spec, j, k)
    Tj = effective_temperature(spec, rho, j)
    Tk = effective_temperature(spec, rho, k)
    V = Tj - Tk
    if abs(V) <= 1e-12 * max(abs(Tj), abs(Tk)):
        raise BalancedLink(f"link {j}-{k} carries no potential")
    cur = link_current(spec, rho, k, j)
    if cur == 0:
        raise BalancedLink(f"link {j}-{k} carries no current")
    return 4 * c.J * V / cur


@dataclass
class ChainCurrents:
    """Total bath currents of a two-bath circuit, split into local and link parts."""

    totals: dict[str, float]
    local: dict[str, float]
    edge_terms: dict[str, dict[tuple[str, str], float]]

    @property
    def I_right(self) -> float:
        """Total current of the first declared bath."""
        return next(iter(self.totals.values()))

    @property
    def I_left(self) -> float:
        return list(self.totals.values())[1]


def chain_total_currents(spec: CircuitSpec, rho: Operator) -> ChainCurrents:
    """``Tr[H_S D_k(rho)]`` for both baths of a two-terminal circuit.

    Only the bath qubit's own term and the couplings touching it contribute;
    ``edge_terms`` holds the latter, keyed ``(bath_qubit, neighbour)``.
    """
    if len(spec.baths) != 2:
        raise ObservableError(f"expected a two-bath circuit, got {len(spec.baths)} baths")
    totals, local, edges = {}, {}, {}
    for b in spec.baths:
        D = dissipator_apply(spec, b.id, rho)
        local[b.id] = _real(expect(local_hamiltonian(spec, b.qubit), D), "local current")
        terms = {}
        for c in spec.active_couplings:
            if c.touches(b.qubit):
                op = coupling_term(spec, c.a, c.b) * c.J
                terms[(b.qubit, c.other(b.qubit))] = _real(expect(op, D), "edge term")
        edges[b.id] = terms
        totals[b.id] = local[b.id] + sum(terms.values())
    return ChainCurrents(totals, local, edges)


@dataclass
class CurrentReport:
    """Every observable of one steady state, in declaration order."""

    bath_currents: dict[str, float]
    link_currents: dict[tuple[str, str], float]
    node_residuals: dict[str, float]
    effective_temperatures: dict[str, float]
    temperature_flags: dict[str, str] = field(default_factory=dict)
    potentials: dict[tuple[str, str], float] = field(default_factory=dict)
    qubit_order: list[str] = field(default_factory=list, repr=False)

    @property
    def inverted(self) -> list[str]:
        """Qubits whose effective temperature is negative."""
        return [q for q, T in self.effective_temperatures.items() if T < 0]

    @property
    def scale(self) -> float:
        """Largest current magnitude, the reference for relative tolerances."""
        vals = [abs(v) for v in self.bath_currents.values()] + [abs(v) for v in self.link_currents.values()]
        return max(vals, default=0.0)

    def lines(self) -> list[str]:
        out = []
        for b, v in self.bath_currents.items():
            out.append(f"bath_current {b} {v:.17g}")
        for (s, t), v in self.link_currents.items():
            out.append(f"link_current {s}->{t} {v:.17g}")
        for q, v in self.node_residuals.items():
            out.append(f"node_residual {q} {v:.17g}")
        for q in (self.qubit_order or list(self.effective_temperatures) + list(self.temperature_flags)):
            if q in self.effective_temperatures:
                out.append(f"effective_temperature {q} {self.effective_temperatures[q]:.17g}")
            else:
                out.append(f"effective_temperature {q} {self.temperature_flags[q]}")
        for (x, y), v in self.potentials.items():
            out.append(f"potential {x}-{y} {v:.17g}")
        return out


def full_report(spec: CircuitSpec, rho: Operator) -> CurrentReport:
    """Bath and link currents, Kirchhoff node sums, temperatures and potentials.

    Link currents are listed in both directions for every declared coupling.
    A node residual is the sum of all currents entering a qubit.  Temperature
    failures (infinite or degenerate) are recorded as flags instead of values;
    potentials involving such a qubit are skipped.  Potential ``(x, y)`` is
    ``T_x - T_y`` for each bath/qubit contact and each active coupling.
    """
    baths = {b.id: bath_current(spec, rho, b.id) for b in spec.baths}
    links = {}
    for c in spec.couplings:
        links[(c.a, c.b)] = link_current(spec, rho, c.a, c.b)
        links[(c.b, c.a)] = link_current(spec, rho, c.b, c.a)
    nodes = {}
    for q in spec.qubit_ids:
        total = sum(v for (s, t), v in links.items() if t == q)
        b = spec.bath_on(q)
        if b is not None:
            total += baths[b.id]
        nodes[q] = total
    temps, flags = {}, {}
    for q in spec.qubit_ids:
        try:
            temps[q] = effective_temperature(spec, rho, q)
        except InfiniteTemperature:
            flags[q] = "inf"
        except DegeneratePopulation:
            flags[q] = "degenerate"
    pots = {}
    for b in spec.baths:
        if b.qubit in temps:
            pots[(b.id, b.qubit)] = potential(b.T, temps[b.qubit])
    for c in spec.active_couplings:
        if c.a in temps and c.b in temps:
            pots[(c.a, c.b)] = potential(temps[c.a], temps[c.b])
    return CurrentReport(baths, links, nodes, temps, flags, pots, qubit_order=spec.qubit_ids)
