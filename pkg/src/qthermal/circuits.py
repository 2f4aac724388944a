"""Factories for the standard circuits and a catalogue of named presets.

Qubit ids are the strings ``"1"``, ``"2"``, ... unless a factory says
otherwise.  Unless stated, bath ``A`` sits on qubit 1 and bath ``B`` on
qubit 2, with ``A`` the cold reservoir.
"""
from __future__ import annotations

import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass

import numpy as np

from .currents import bath_current
from .hilbert import DensityMatrix
from .liouvillian import steady_state
from .netlist import Bath, CircuitSpec, Coupling, Qubit, validate

ROMAN = ("I", "II", "III", "IV", "V", "VI", "VII", "VIII", "IX")

#: edge set of the seven-qubit super-Wheatstone bridge
SUPER_WHEATSTONE_EDGES = ((1, 5), (1, 6), (2, 3), (2, 4), (3, 4), (3, 5), (3, 7),
                          (4, 6), (4, 7), (5, 6), (5, 7), (6, 7))
#: the eight-qubit variant: edge 6-7 replaced by the path 7-8-6
SUPER_WHEATSTONE_EXT_EDGES = tuple(e for e in SUPER_WHEATSTONE_EDGES if e != (6, 7)) + ((7, 8), (6, 8))


def _build(name, omegas, couplings, baths) -> CircuitSpec:
    qubits = [Qubit(str(i), float(w)) for i, w in enumerate(omegas, start=1)]
    cs = [Coupling(str(a), str(b), float(J)) for (a, b), J in couplings]
    bs = [Bath(bid, str(q), float(T), float(g)) for bid, q, T, g in baths]
    spec = CircuitSpec(tuple(qubits), tuple(cs), tuple(bs), name=name)
    validate(spec)
    return spec


def _edge_key(k) -> tuple[int, int]:
    if isinstance(k, str):
        k = k.replace("-", "").replace(",", "")
        if len(k) != 2:
            raise ValueError(f"edge label {k!r} must name two single-digit qubits")
        k = (int(k[0]), int(k[1]))
    a, b = int(k[0]), int(k[1])
    return (a, b) if a < b else (b, a)


def _edge_values(edges, couplings: Mapping) -> list:
    given = {_edge_key(k): v for k, v in couplings.items()}
    unknown = set(given) - set(edges)
    if unknown:
        raise ValueError(f"couplings {sorted(unknown)} are not edges of this circuit")
    return [(e, given.get(e, 0.0)) for e in edges]


# --------------------------------------------------------------------------
# two-qubit elements


def resistor(omega1: float, omega2: float, J: float, T: float,
             gamma_A: float, gamma_B: float, T_A: float = 0.0) -> CircuitSpec:
    """Two coupled qubits between a cold bath A (on 1) and a hot bath B (on 2)."""
    return _build("resistor", [omega1, omega2], [((1, 2), J)],
                  [("A", 1, T_A, gamma_A), ("B", 2, T, gamma_B)])


@dataclass(frozen=True)
class AnalyticResistorState:
    """Numerators ``alpha`` and denominators ``eta`` of the closed-form resistor state."""

    x0: float
    beta: float
    omega2: float
    alpha: dict
    eta: dict

    def matrix(self) -> np.ndarray:
        al, et = self.alpha, self.eta
        E = math.exp(self.beta * self.omega2)
        rho = np.zeros((4, 4), dtype=complex)
        rho[0, 0] = al["00"] / et["00"]
        rho[1, 1] = al["11"] / et["11"]
        rho[1, 2] = al["12"] / et["12"]
        rho[2, 1] = np.conj(al["12"]) / et["12"]
        rho[2, 2] = al["22"] / et["22"]
        rho[3, 3] = 1 - 1 / (1 + E) + al["33"] / et["33"]
        return rho


def analytic_resistor_terms(omega1, omega2, J, T, gamma_A, gamma_B) -> AnalyticResistorState:
    if not T > 0:
        raise ValueError("the closed form needs T > 0; use the numerical solver at T = 0")
    w1, w2, gA, gB = omega1, omega2, gamma_A, gamma_B
    E = math.exp(w2 / T)
    c = 1.0 / math.tanh(w2 / (2 * T))
    x0 = gB - gA + E * (gA + gB)
    dw = w1 - w2
    a00 = 16 * J**2 * gB**2 * (gA + gB * c)
    e00 = x0 * (gA * (16 * J**2 * x0 + gB * (1 + E) * (gA**2 + 4 * dw**2))
                + gB * c * (16 * J**2 * x0 + gA * gB * (1 + E) * (2 * gA + gB * c)))
    alpha = {
        "00": a00,
        "11": (x0 - gB) * a00,
        "12": -4 * J * gA * gB * (1j * (gA + gB * c) + 2 * dw),
        "22": gB * (16 * J**2 * (E - 1) * (x0 - gB) + gA * (x0**2 + 4 * (E - 1) ** 2 * dw**2)),
        "33": 16 * J**2 * (gA + gB * c) * (gA**2 * (E - 1) ** 2 - E * (E + 1) * gB**2),
    }
    eta = {
        "00": e00,
        "11": gB * e00,
        "12": e00 / x0,
        "22": e00 * (E - 1) ** 2 / x0,
        "33": e00 * (E + 1),
    }
    return AnalyticResistorState(x0, 1.0 / T, w2, alpha, eta)


def analytic_resistor_steady_state(omega1, omega2, J, T, gamma_A, gamma_B) -> DensityMatrix:
    """Closed-form steady state of :func:`resistor` (cold bath at ``T = 0``, ``T > 0``).

    Nonzero entries are the four populations and the coherence between
    ``|01>`` and ``|10>``.
    """
    terms = analytic_resistor_terms(omega1, omega2, J, T, gamma_A, gamma_B)
    return DensityMatrix(terms.matrix())


#: parameter ranges used for random resistor draws
RESISTOR_RANGES = {
    "omega1": (0.5, 5.0),
    "omega2": (0.5, 5.0),
    "J": (0.1, 2.0),
    "T": (0.1, 20.0),
    "gamma_A": (0.005, 0.5),
    "gamma_B": (0.005, 0.5),
}


def random_resistor_parameters(rng=None) -> dict:
    """Uniform draw of keyword arguments for :func:`resistor` from ``RESISTOR_RANGES``."""
    rng = np.random.default_rng(rng)
    return {k: float(rng.uniform(lo, hi)) for k, (lo, hi) in RESISTOR_RANGES.items()}


def diode(omega1: float, omega2: float, J: float, T_A: float, T_B: float,
          gamma_A: float, gamma_B: float) -> CircuitSpec:
    """Two-qubit element with both baths warm and asymmetric couplings.

    The bias is the sign of ``T_A - T_B``.
    """
    return _build("diode", [omega1, omega2], [((1, 2), J)],
                  [("A", 1, T_A, gamma_A), ("B", 2, T_B, gamma_B)])


# --------------------------------------------------------------------------
# three and four qubits


def three_qubit_loop(omegas: Sequence[float], J12: float, J13: float, J23: float,
                     T: float, gamma_A: float, gamma_B: float, T_A: float = 0.0) -> CircuitSpec:
    """Triangle 1-2-3 with baths on qubits 1 and 2; qubit 3 is a floating node."""
    return _build("loop", omegas, [((1, 2), J12), ((1, 3), J13), ((2, 3), J23)],
                  [("A", 1, T_A, gamma_A), ("B", 2, T, gamma_B)])


def transistor(omega_B: float, omega_C: float, omega_E: float, J_BC: float, J_BE: float,
               J_CE: float, T_B: float, T_C: float, T_E: float,
               gamma_B: float, gamma_C: float, gamma_E: float) -> CircuitSpec:
    """Fully connected triangle; qubit and bath ids are ``B`` (base), ``C``, ``E``."""
    qubits = (Qubit("B", float(omega_B)), Qubit("C", float(omega_C)), Qubit("E", float(omega_E)))
    couplings = (Coupling("B", "C", float(J_BC)), Coupling("B", "E", float(J_BE)),
                 Coupling("C", "E", float(J_CE)))
    baths = (Bath("B", "B", float(T_B), float(gamma_B)), Bath("C", "C", float(T_C), float(gamma_C)),
             Bath("E", "E", float(T_E), float(gamma_E)))
    spec = CircuitSpec(qubits, couplings, baths, name="transistor")
    validate(spec)
    return spec


@dataclass(frozen=True)
class TransistorReport:
    J_B: float
    J_C: float
    J_E: float

    @property
    def alpha_C(self) -> float:
        """Signed ratio ``J_C / J_B``; negative when the two flow in opposite directions."""
        return self.J_C / self.J_B

    @property
    def alpha_E(self) -> float:
        return self.J_E / self.J_B


def transistor_report(spec: CircuitSpec, rho=None) -> TransistorReport:
    """Bath currents and amplification factors of a :func:`transistor` circuit."""
    if rho is None:
        rho = steady_state(spec).rho
    return TransistorReport(*(bath_current(spec, rho, p) for p in ("B", "C", "E")))


def wheatstone(omegas: Sequence[float], J13: float, J14: float, J23: float, J24: float,
               J34: float, T: float, gamma_A: float, gamma_B: float, T_A: float = 0.0) -> CircuitSpec:
    """Bridge with baths on 1 and 2 and the detector link 3-4."""
    return _build("wheatstone", omegas,
                  [((1, 3), J13), ((1, 4), J14), ((2, 3), J23), ((2, 4), J24), ((3, 4), J34)],
                  [("A", 1, T_A, gamma_A), ("B", 2, T, gamma_B)])


def wheatstone_detuned(omega: float = 20.0, h: Sequence[float] = (2.0, 0.0, 0.0, 0.05),
                       J: float = 0.1, J13: float | None = None, J14: float | None = None,
                       J34: float = 2.0, T: float = 10.0,
                       gamma_A: float = 0.1, gamma_B: float = 1.0) -> CircuitSpec:
    """Bridge whose qubits have fields ``omega + 2 h_k``.

    The local term ``(omega/2 + h_k) sigma_z`` is folded into the qubit
    frequency, so this is an ordinary :func:`wheatstone`.  ``J13`` and ``J14``
    default to ``2 J`` (the balanced configuration).
    """
    J13 = 2 * J if J13 is None else J13
    J14 = J13 if J14 is None else J14
    omegas = [omega + 2 * hk for hk in h]
    return wheatstone(omegas, J13, J14, J, J, J34, T, gamma_A, gamma_B)


def spin_chain(omegas: Sequence[float], couplings: Sequence[float], T: float,
               gamma_A: float, gamma_B: float, T_A: float = 0.0) -> CircuitSpec:
    """Open chain from qubit 1 (bath A) to qubit 2 (bath B).

    The path is ``1 - n - (n-1) - ... - 3 - 2`` and ``couplings[i]`` is the
    strength of its ``i``-th link.
    """
    n = len(omegas)
    if n < 2:
        raise ValueError("a chain needs at least two qubits")
    path = [1] + list(range(n, 2, -1)) + [2]
    if len(couplings) != n - 1:
        raise ValueError(f"a {n}-qubit chain has {n - 1} links, got {len(couplings)} couplings")
    edges = [((a, b), J) for a, b, J in zip(path, path[1:], couplings)]
    return _build("chain", omegas, edges, [("A", 1, T_A, gamma_A), ("B", 2, T, gamma_B)])


# --------------------------------------------------------------------------
# bridges of bridges


def super_wheatstone(omegas: Sequence[float], couplings: Mapping, T: float,
                     gamma_A: float, gamma_B: float, T_A: float = 0.0) -> CircuitSpec:
    """Seven-qubit bridge; ``couplings`` maps edges like ``(3, 4)`` or ``"34"`` to J.

    Edges that are not given get J = 0 (kept in the model, inactive).
    """
    if len(omegas) != 7:
        raise ValueError("the super-Wheatstone bridge has seven qubits")
    return _build("super_wheatstone", omegas, _edge_values(SUPER_WHEATSTONE_EDGES, couplings),
                  [("A", 1, T_A, gamma_A), ("B", 2, T, gamma_B)])


def super_wheatstone_extended(omegas: Sequence[float], couplings: Mapping, T: float,
                              gamma_A: float, gamma_B: float, T_A: float = 0.0) -> CircuitSpec:
    """Eight-qubit variant where the 6-7 link becomes the path 7-8-6."""
    if len(omegas) != 8:
        raise ValueError("the extended bridge has eight qubits")
    return _build("super_wheatstone_extended", omegas,
                  _edge_values(SUPER_WHEATSTONE_EXT_EDGES, couplings),
                  [("A", 1, T_A, gamma_A), ("B", 2, T, gamma_B)])


def balanced_super_wheatstone(condition: int, rng=None, T: float = 10.0, gamma_A: float = 0.1,
                              gamma_B: float = 0.05, balanced: bool = True) -> CircuitSpec:
    """Random seven-qubit bridge obeying one of the three balance conditions.

    Frequencies and couplings are drawn uniformly from [1, 2].

    1. all frequencies equal and all couplings equal
    2. ``w3 = w6 = w7`` with ``J34 = J46``, ``J35 = J56`` and the couplings
       ``J23, J16, J47, J57`` removed
    3. ``w5 = w6 = w7`` with ``J15 = J16``, ``J57 = J67`` and the couplings
       ``J35, J37, J46`` removed

    With ``balanced=False`` the symmetric pair is detuned (condition 1 gets
    random couplings instead).
    """
    rng = np.random.default_rng(rng)
    if condition == 1:
        w = [rng.uniform(1, 2)] * 7
        if balanced:
            J = rng.uniform(1, 2)
            Js = {e: J for e in SUPER_WHEATSTONE_EDGES}
        else:
            Js = {e: rng.uniform(1, 2) for e in SUPER_WHEATSTONE_EDGES}
        return super_wheatstone(w, Js, T, gamma_A, gamma_B)
    w = list(rng.uniform(1, 2, 7))
    Js = {e: rng.uniform(1, 2) for e in SUPER_WHEATSTONE_EDGES}
    if condition == 2:
        w[5] = w[6] = w[2]
        for e in ((2, 3), (1, 6), (4, 7), (5, 7)):
            Js[e] = 0.0
        Js[(4, 6)] = Js[(3, 4)] if balanced else 1.5 * Js[(3, 4)]
        Js[(5, 6)] = Js[(3, 5)]
    elif condition == 3:
        w[5] = w[6] = w[4]
        for e in ((3, 5), (3, 7), (4, 6)):
            Js[e] = 0.0
        Js[(1, 6)] = Js[(1, 5)] if balanced else 1.5 * Js[(1, 5)]
        Js[(6, 7)] = Js[(5, 7)]
    else:
        raise ValueError(f"unknown balance condition {condition}")
    return super_wheatstone(w, Js, T, gamma_A, gamma_B)


def balanced_super_wheatstone_extended(rng=None, T: float = 10.0, gamma_A: float = 0.1,
                                       gamma_B: float = 0.05, mirror: bool = True) -> CircuitSpec:
    """Random eight-qubit bridge with ``w3 = w6 = w7 = w8``, ``J34 = J46``, ``J35 = J56``.

    The central couplings ``J37, J78, J68`` are drawn independently; with
    ``mirror=True`` the end links are then set equal (``J68 = J37``) while
    ``J78`` stays different.  The currents through the central path vanish
    only in the mirrored case.
    """
    rng = np.random.default_rng(rng)
    w = list(rng.uniform(1, 2, 8))
    w[5] = w[6] = w[7] = w[2]
    Js = {e: rng.uniform(1, 2) for e in SUPER_WHEATSTONE_EXT_EDGES}
    for e in ((2, 3), (1, 6), (4, 7), (5, 7)):
        Js[e] = 0.0
    Js[(4, 6)] = Js[(3, 4)]
    Js[(5, 6)] = Js[(3, 5)]
    if mirror:
        Js[(6, 8)] = Js[(3, 7)]
    return super_wheatstone_extended(w, Js, T, gamma_A, gamma_B)


# --------------------------------------------------------------------------
# adder


def adder(omegas: Sequence[float], omega_alpha: float, couplings: Sequence[float],
          temperatures: Sequence[float], gammas: Sequence[float], gamma_A: float,
          T_A: float = 0.0) -> CircuitSpec:
    """Star with hub ``alpha`` and input qubits ``1..N``.

    Input ``k`` carries bath ``I``, ``II``, ... (Roman numeral of ``k``); the hub
    carries the output bath ``A``.
    """
    N = len(omegas)
    if not (len(couplings) == len(temperatures) == len(gammas) == N):
        raise ValueError("adder inputs need one coupling, temperature and gamma each")
    if N > len(ROMAN):
        raise ValueError(f"at most {len(ROMAN)} inputs")
    qubits = [Qubit(str(k), float(w)) for k, w in enumerate(omegas, start=1)]
    qubits.append(Qubit("alpha", float(omega_alpha)))
    cs = [Coupling(str(k), "alpha", float(J)) for k, J in enumerate(couplings, start=1)]
    bs = [Bath(ROMAN[k - 1], str(k), float(T), float(g))
          for k, (T, g) in enumerate(zip(temperatures, gammas), start=1)]
    bs.append(Bath("A", "alpha", float(T_A), float(gamma_A)))
    spec = CircuitSpec(tuple(qubits), tuple(cs), tuple(bs), name="adder")
    validate(spec)
    return spec


def symmetric_adder(N: int, omega: float, omega_alpha: float, J: float, T: float,
                    gamma: float, gamma_A: float) -> CircuitSpec:
    """Adder with identical inputs."""
    return adder([omega] * N, omega_alpha, [J] * N, [T] * N, [gamma] * N, gamma_A)


def tuned_adder(N: int, omega: float = 1.0, J: float = 2.0, T: float = 100.0, gamma: float = 0.01) -> CircuitSpec:
    """Symmetric adder with ``omega_alpha = 1.618 N omega`` and ``gamma_A = N gamma``."""
    return symmetric_adder(N, omega, 1.618 * N * omega, J, T, gamma, N * gamma)


# --------------------------------------------------------------------------
# presets


def _fixed_super_wheatstone(condition: int) -> CircuitSpec:
    return balanced_super_wheatstone(condition, rng=20 + condition)


PRESETS = {
    "fig2": lambda: resistor(1.0, 2.0, 0.5, 10.0, 0.5, 0.05),
    "fig3a": lambda: resistor(2.0, 2.5, 1.0, 5.0, 0.01, 0.05),
    "fig3b": lambda: resistor(5.0, 1.0, 1.0, 5.0, 0.01, 0.005),
    "fig3c": lambda: resistor(2.0, 5.0, 1.0, 5.0, 0.01, 0.05),
    "fig3d": lambda: resistor(1.0, 15.0, 1.0, 5.0, 0.01, 0.01),
    "fig4": lambda: three_qubit_loop([1.25, 1.5, 1.75], 1.0, 0.5, 0.75, 10.0, 0.1, 0.05),
    "fig6a": lambda: _fixed_super_wheatstone(1),
    "fig6b": lambda: _fixed_super_wheatstone(2),
    "fig6c": lambda: _fixed_super_wheatstone(3),
    "fig7": lambda: diode(1.5, 1.5, 0.5, 0.5, 1.0, 0.01, 0.1),
    "fig8": lambda: wheatstone_detuned(),
    "fig9": lambda: transistor(0.05, 1.0, 1.0, 1.0, 1.0, 1.0, 0.1, 0.2, 0.2, 0.01, 0.002, 0.003),
    "swb-cond1": lambda: _fixed_super_wheatstone(1),
    "swb-cond2": lambda: _fixed_super_wheatstone(2),
    "swb-cond3": lambda: _fixed_super_wheatstone(3),
    "swb-extended": lambda: balanced_super_wheatstone_extended(rng=28),
    "adder-n2": lambda: tuned_adder(2),
    "chain4": lambda: spin_chain([1.0] * 4, [0.65, 0.75, 0.56], 5.0, 0.1, 0.05),
}

PRESET_NOTES = {
    "fig2": "resistor, cold bath A on qubit 1",
    "fig3a": "resistor, detuned pair",
    "fig3b": "resistor, omega2 is the swept quantity (default 1.0)",
    "fig3c": "resistor, gamma_B is the swept quantity (default 0.05)",
    "fig3d": "resistor, J is the swept quantity (default 1.0)",
    "fig4": "three-qubit loop, bath B temperature is the swept quantity",
    "fig6a": "super-Wheatstone, balance condition 1",
    "fig6b": "super-Wheatstone, balance condition 2",
    "fig6c": "super-Wheatstone, balance condition 3",
    "fig7": "diode, forward bias (T_B > T_A)",
    "fig8": "detuned Wheatstone bridge at balance J13 = J14",
    "fig9": "transistor, base frequency 0.05",
    "swb-cond1": "super-Wheatstone, balance condition 1",
    "swb-cond2": "super-Wheatstone, balance condition 2",
    "swb-cond3": "super-Wheatstone, balance condition 3",
    "swb-extended": "eight-qubit bridge, J37 = J68 != J78",
    "adder-n2": "two-input adder, omega_alpha = 1.618 N omega, gamma_A = N gamma",
    "chain4": "four-qubit chain 1-4-3-2",
}


def preset(name: str) -> CircuitSpec:
    try:
        factory = PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; choose from {', '.join(sorted(PRESETS))}") from None
    return factory().with_name(name)
