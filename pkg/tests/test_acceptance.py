"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Every test records its verdict in ``conftest.ACCEPTANCE`` so the terminal
summary lists all twelve criteria together, then asserts.  Thresholds are the
stated ones; two criteria are known to be unattainable as written and are
left failing (see the notes next to them).
"""
from __future__ import annotations

import functools
import math
import time

import numpy as np
import pytest
from scipy.optimize import brentq

from conftest import ACCEPTANCE, random_density, random_diagonal_density
from qthermal import circuits
from qthermal.currents import (
    bath_current,
    bath_current_from_temperatures,
    chain_total_currents,
    effective_temperature,
    full_report,
    link_current,
    spin_current,
)
from qthermal.errors import NetlistError, NonUniqueSteadyState
from qthermal.hilbert import DensityMatrix, Operator, excited_population
from qthermal.liouvillian import (
    asymptotic_state,
    liouvillian_matrix,
    propagate,
    steady_state,
    steady_state_space,
)
from qthermal.netlist import format_circuit, parse_circuit, set_parameter
from qthermal.verify import check_adder

pytestmark = pytest.mark.acceptance

#: presets whose balanced couplings leave a degenerate kernel
DEGENERATE_PRESETS = {"fig6a", "fig6c", "swb-cond1", "swb-cond3", "swb-extended"}
#: tuned-adder mismatch from the oracle run (N=2, omega=1, J=2, gamma=0.01, T=100)
TUNED_ADDER_ORACLE = 0.01852
TUNED_ADDER_THRESHOLD = 0.025


def record(k: int, failures: list[str], detail: str) -> None:
    passed = not failures
    text = detail if passed else f"{detail}; " + "; ".join(failures[:5])
    ACCEPTANCE[k] = (passed, text)
    print(f"\nACCEPTANCE {k:2d} {'PASS' if passed else 'FAIL'} {text}")
    assert passed, text


def ground(spec) -> DensityMatrix:
    d = 2 ** spec.n
    return DensityMatrix.basis_state(d - 1, d)


@functools.lru_cache(maxsize=None)
def kernel(name: str):
    return steady_state_space(circuits.preset(name))


@functools.lru_cache(maxsize=None)
def preset_state(name: str) -> DensityMatrix:
    spec = circuits.preset(name)
    if name in DEGENERATE_PRESETS:
        return asymptotic_state(spec, ground(spec), kernel(name))
    return steady_state(spec).rho


def scale_of(spec, rho) -> float:
    s = full_report(spec, rho).scale
    return s if s > 0 else 1.0


def _draw(family: str, r: np.random.Generator):
    u = lambda a=0.5, b=2.0: float(r.uniform(a, b))  # noqa: E731
    if family == "resistor":
        return circuits.resistor(**circuits.random_resistor_parameters(r))
    if family == "loop":
        return circuits.three_qubit_loop([u(), u(), u()], u(0.1, 2), u(0.1, 2), u(0.1, 2), u(0.1, 20),
                                         u(0.005, 0.5), u(0.005, 0.5))
    if family == "diode":
        return circuits.diode(u(), u(), u(0.1, 2), u(0.1, 5), u(0.1, 5), u(0.005, 0.5), u(0.005, 0.5))
    if family == "transistor":
        return circuits.transistor(u(0.05, 1), u(), u(), u(0.1, 2), u(0.1, 2), u(0.1, 2),
                                   u(0.05, 1), u(0.05, 1), u(0.05, 1), u(0.001, 0.05), u(0.001, 0.05),
                                   u(0.001, 0.05))
    if family == "wheatstone":
        return circuits.wheatstone([u(), u(), u(), u()], u(0.1, 2), u(0.1, 2), u(0.1, 2), u(0.1, 2),
                                   u(0.1, 2), u(0.5, 20), u(0.01, 0.5), u(0.01, 0.5))
    if family.startswith("swb-cond"):
        return circuits.balanced_super_wheatstone(int(family[-1]), rng=r, T=u(1, 20))
    if family == "swb-extended":
        return circuits.balanced_super_wheatstone_extended(rng=r, T=u(1, 20), mirror=False)
    if family.startswith("adder-n"):
        N = int(family[-1])
        return circuits.adder([u() for _ in range(N)], u(), [u(0.1, 2) for _ in range(N)],
                              [u(0.5, 20) for _ in range(N)], [u(0.005, 0.5) for _ in range(N)], u(0.005, 0.5))
    raise AssertionError(family)


# --------------------------------------------------------------------------


def test_criterion_01_resistor_matches_closed_form():
    r = np.random.default_rng(101)
    failures, worst = [], 0.0
    t0 = time.perf_counter()
    for i in range(100):
        p = circuits.random_resistor_parameters(r)
        exact = circuits.analytic_resistor_steady_state(**p).to_dense()
        num = steady_state(circuits.resistor(**p)).rho.to_dense()
        err = float(np.abs(exact - num).max())
        worst = max(worst, err)
        if err > 1e-8:
            failures.append(f"draw {i}: max elementwise error {err:.2e}")
    elapsed = time.perf_counter() - t0
    if elapsed >= 5.0:
        failures.append(f"runtime {elapsed:.1f} s")
    record(1, failures, f"100 draws, worst elementwise error {worst:.2e}, {elapsed:.2f} s")


KIRCHHOFF_FAMILIES = ["resistor", "loop", "diode", "transistor", "wheatstone", "swb-cond1", "swb-cond2",
                      "swb-cond3", "swb-extended", "adder-n2", "adder-n3"]


def test_criterion_02_kirchhoff_current_law():
    r = np.random.default_rng(202)
    failures, worst = [], 0.0
    t0 = time.perf_counter()
    for family in KIRCHHOFF_FAMILIES:
        for i in range(20):
            spec = _draw(family, r)
            if family in ("swb-cond1", "swb-cond3"):
                rho = asymptotic_state(spec, random_diagonal_density(2 ** spec.n, r))
            else:
                rho = steady_state(spec).rho
            rep = full_report(spec, rho)
            res = max(abs(v) for v in rep.node_residuals.values()) / (rep.scale or 1.0)
            worst = max(worst, res)
            if res > 1e-9:
                failures.append(f"{family} draw {i}: node residual {res:.2e}")
    elapsed = time.perf_counter() - t0
    if elapsed >= 300:
        failures.append(f"runtime {elapsed:.0f} s")
    record(2, failures, f"{len(KIRCHHOFF_FAMILIES)} families x 20 draws, worst {worst:.2e}, {elapsed:.0f} s")


def _transformer_residual(spec, rho) -> float:
    worst = 0.0
    for c in spec.active_couplings:
        jab = link_current(spec, rho, c.a, c.b)
        jba = link_current(spec, rho, c.b, c.a)
        worst = max(worst, abs(jab / spec.omega(c.b) + jba / spec.omega(c.a)))
    return worst


def test_criterion_03_transformer_relation():
    r = np.random.default_rng(303)
    failures, worst = [], 0.0
    for name in sorted(circuits.PRESETS):
        spec = circuits.preset(name)
        res = _transformer_residual(spec, preset_state(name))
        worst = max(worst, res)
        if res > 1e-9:
            failures.append(f"{name} stationary: {res:.2e}")
        snaps = []
        dt = 1.0 / liouvillian_matrix(spec).norm_inf()
        propagate(spec, random_density(2 ** spec.n, r), 5 * dt, dt,
                  observe=lambda t, m: snaps.append(Operator(m.copy())))
        assert len(snaps) == 5
        for k, m in enumerate(snaps):
            res = _transformer_residual(spec, m)
            worst = max(worst, res)
            if res > 1e-9:
                failures.append(f"{name} snapshot {k}: {res:.2e}")
    record(3, failures, f"{len(circuits.PRESETS)} presets, stationary + 5 snapshots each, worst {worst:.2e}")


def _qubit1_temperature(omega1, omega2, J, T, gamma_A, gamma_B) -> float:
    rho = circuits.analytic_resistor_steady_state(omega1, omega2, J, T, gamma_A, gamma_B)
    p0 = excited_population(rho, 1)
    return omega1 / math.log(1.0 / p0 - 1.0)


def test_criterion_04_current_voltage_forms():
    failures = []
    # law on random draws
    r = np.random.default_rng(404)
    worst = worst_rel = 0.0
    for _ in range(50):
        p = circuits.random_resistor_parameters(r)
        spec = circuits.resistor(**p)
        rho = steady_state(spec).rho
        T1 = effective_temperature(spec, rho, "1")
        law = bath_current_from_temperatures(p["gamma_A"], p["omega1"], 0.0, T1)
        assert law == pytest.approx(-p["gamma_A"] * p["omega1"] / (1 + math.exp(p["omega1"] / T1)), rel=1e-14)
        err = abs(bath_current(spec, rho, "A") - law)
        worst, worst_rel = max(worst, err), max(worst_rel, err / abs(law))
    if worst > 1e-8:
        failures.append(f"law error {worst:.2e}")

    # plateau: gamma_A = 0.5, omega1 = 1 with the other parameters chosen so
    # that qubit 1 reaches T1 = 1000 (the fig2 couplings cap T1 near 1)
    hot = dict(omega1=1.0, omega2=0.01, J=1000.0, gamma_A=0.5, gamma_B=0.01)
    T_hot = brentq(lambda T: _qubit1_temperature(T=T, **hot) - 1e3, 1.0, 2000.0, xtol=1e-12)
    spec = circuits.resistor(T=T_hot, **hot)
    rho = steady_state(spec).rho
    T1_hot = effective_temperature(spec, rho, "1")
    J_hot = bath_current(spec, rho, "A")
    plateau_dev = abs(abs(J_hot) - 0.25)
    if abs(T1_hot - 1e3) > 1e-3:
        failures.append(f"realized T1 = {T1_hot:.6f}")
    if plateau_dev > 1e-6:
        failures.append(f"plateau |J_A1| = {abs(J_hot):.9f} at T1 = 1000, off 0.25 by {plateau_dev:.3e}")

    # low-temperature form with the fig2 parameters
    cold = dict(omega1=1.0, omega2=2.0, J=0.5, gamma_A=0.5, gamma_B=0.05)
    T_cold = brentq(lambda T: _qubit1_temperature(T=T, **cold) - 0.05, 0.08, 0.2, xtol=1e-14)
    spec = circuits.resistor(T=T_cold, **cold)
    rho = steady_state(spec).rho
    T1_cold = effective_temperature(spec, rho, "1")
    J_cold = bath_current(spec, rho, "A")
    low = -0.5 * 1.0 * math.exp(-1.0 / T1_cold)
    low_rel = abs(J_cold - low) / abs(low)
    if low_rel > 0.01:
        failures.append(f"low-T form off by {low_rel:.2e} at T1 = {T1_cold:.6f}")
    record(4, failures, f"law worst {worst:.2e} (relative {worst_rel:.2e}); plateau deviation {plateau_dev:.3e} (T={T_hot:.4f}); "
                        f"low-T relative error {low_rel:.2e} (T={T_cold:.6f})")


def test_criterion_05_spin_current_relation():
    failures, worst = [], 0.0
    for name in ("fig2", "chain4"):
        spec = circuits.preset(name)
        rho = preset_state(name)
        for c in spec.active_couplings:
            for a, b in ((c.a, c.b), (c.b, c.a)):
                heat = link_current(spec, rho, a, b)
                spin = spin_current(spec, rho, a, b)
                res = abs(abs(heat) - 0.5 * spec.omega(b) * abs(spin))
                worst = max(worst, res)
                if res > 1e-9:
                    failures.append(f"{name} {a}->{b}: {res:.2e}")
        cc = chain_total_currents(spec, rho)
        lr = abs(cc.I_left + cc.I_right)
        worst = max(worst, lr)
        if lr > 1e-9:
            failures.append(f"{name} I_L + I_R = {lr:.2e}")
    spec = circuits.preset("chain4")
    rho = preset_state("chain4")
    cc = chain_total_currents(spec, rho)
    ra = abs(cc.I_right - bath_current(spec, rho, "A"))
    if ra > 1e-9:
        failures.append(f"chain4 I_R - J_A1 = {ra:.2e}")
    record(5, failures, f"resistor and 4-qubit chain, worst {max(worst, ra):.2e}")


FIG8_TEMPERATURES = (2.0, 5.0, 10.0, 20.0, 50.0, 100.0)


def test_criterion_06_wheatstone_balance():
    failures, worst, weakest = [], 0.0, math.inf
    for T in FIG8_TEMPERATURES:
        for J13 in np.linspace(0.05, 0.5, 20):
            spec = circuits.wheatstone_detuned(J13=J13, T=T)
            rho = steady_state(spec).rho
            res = abs(link_current(spec, rho, "3", "4")) / scale_of(spec, rho)
            worst = max(worst, res)
            if res > 1e-8:
                failures.append(f"T={T:g} J13={J13:.3f}: {res:.2e}")
        spec = circuits.wheatstone_detuned(J13=0.2, J14=0.3, T=T)
        rho = steady_state(spec).rho
        ctrl = abs(link_current(spec, rho, "3", "4")) / scale_of(spec, rho)
        weakest = min(weakest, ctrl)
        if ctrl <= 1e-4:
            failures.append(f"negative control at T={T:g}: {ctrl:.2e}")
    record(6, failures, f"balanced worst {worst:.2e}; unbalanced control weakest {weakest:.2e}")


def _zero_on_kernel(spec, name, edges, rho) -> list[tuple[str, float]]:
    """Scale-relative currents on ``edges`` for the given state and every kernel element."""
    out = []
    states = [("asymptotic", rho)]
    if name in DEGENERATE_PRESETS:
        states += [(f"kernel[{i}]", Operator(Y)) for i, Y in enumerate(kernel(name).hermitian_basis())]
    for label, st in states:
        vals = [abs(bath_current(spec, st, b.id)) for b in spec.baths]
        for c in spec.active_couplings:
            vals += [abs(link_current(spec, st, c.a, c.b)), abs(link_current(spec, st, c.b, c.a))]
        scale = max(vals) or 1.0
        for a, b in edges:
            out.append((f"{label} J{a}{b}", abs(link_current(spec, st, a, b)) / scale))
    return out


def test_criterion_07_super_wheatstone_conditions():
    failures, worst = [], 0.0
    cases = [("swb-cond1", [("3", "4"), ("5", "6")]),
             ("swb-cond3", [("5", "6")]),
             ("swb-extended", [("3", "7"), ("7", "8"), ("8", "6")])]
    for name, edges in cases:
        spec = circuits.preset(name)
        for label, res in _zero_on_kernel(spec, name, edges, preset_state(name)):
            worst = max(worst, res)
            if res > 1e-8:
                failures.append(f"{name} {label}: {res:.2e}")
    ext = circuits.preset("swb-extended")
    if not (ext.coupling("3", "7").J == ext.coupling("6", "8").J != ext.coupling("7", "8").J):
        failures.append("extended preset does not have unequal central couplings")

    # condition 2: zero at J34 = J46 and a sign change of J37 across it; the
    # bracket is narrow because J37(J34) has further zeros away from balance
    base = circuits.preset("swb-cond2")
    for J46 in (0.8, 1.2, 1.6):
        signs = []
        for J34 in (J46 - 0.01, J46, J46 + 0.01):
            spec = set_parameter(set_parameter(base, "coupling(4,6).J", J46), "coupling(3,4).J", J34)
            rho = steady_state(spec).rho
            scale = scale_of(spec, rho)
            j37, j67 = link_current(spec, rho, "3", "7") / scale, link_current(spec, rho, "6", "7") / scale
            if J34 == J46:
                worst = max(worst, abs(j37), abs(j67))
                if max(abs(j37), abs(j67)) > 1e-8:
                    failures.append(f"cond2 J46={J46}: J37={j37:.2e} J67={j67:.2e}")
            else:
                signs.append(np.sign(j37))
        if signs[0] == signs[1] or 0 in signs:
            failures.append(f"cond2 J46={J46}: no sign change of J37")
    record(7, failures, f"conditions 1-3 and the 8-qubit bridge, worst {worst:.2e}")


def test_criterion_08_transistor_amplification():
    # The literal sum J_B + J_C + J_E = 0 fails for unequal frequencies; left
    # failing on purpose, the conserved energy balance is tested in test_circuits.
    base = circuits.preset("fig9")
    aC, aE, worst_sum = [], [], 0.0
    for TB in np.linspace(0.05, 1.0, 50):
        spec = set_parameter(base, "bath.B.T", TB)
        rep = circuits.transistor_report(spec)
        aC.append(abs(rep.alpha_C))
        aE.append(abs(rep.alpha_E))
        worst_sum = max(worst_sum, abs(rep.J_B + rep.J_C + rep.J_E))
    failures = []
    if not 6 <= max(aC) <= 10:
        failures.append(f"max alpha_C {max(aC):.3f}")
    if not 9 <= max(aE) <= 15:
        failures.append(f"max alpha_E {max(aE):.3f}")
    if worst_sum > 1e-9:
        failures.append(f"|J_B + J_C + J_E| reaches {worst_sum:.3e}")
    record(8, failures, f"max |alpha_C| {max(aC):.3f}, max |alpha_E| {max(aE):.3f}, "
                        f"max |J_B+J_C+J_E| {worst_sum:.2e}")


def test_criterion_09_adder():
    r = np.random.default_rng(909)
    failures, worst_I, worst_T = [], 0.0, 0.0
    for N in (2, 3):
        for _ in range(10):
            spec = _draw(f"adder-n{N}", r)
            (cur,) = [c for c in check_adder(spec, steady_state(spec).rho) if c.name == "adder_current"]
            worst_I = max(worst_I, abs(cur.residual))
            if abs(cur.residual) > 1e-9:
                failures.append(f"current law N={N}: {cur.residual:.2e}")
            spec = circuits.symmetric_adder(N, r.uniform(0.5, 2), r.uniform(0.5, 2), r.uniform(0.1, 2),
                                            r.uniform(0.5, 10), r.uniform(0.01, 0.2), r.uniform(0.01, 0.2))
            (tmp,) = [c for c in check_adder(spec, steady_state(spec).rho) if c.name == "adder_temperature"]
            worst_T = max(worst_T, abs(tmp.residual))
            if abs(tmp.residual) > 1e-6:
                failures.append(f"temperature identity N={N}: {tmp.residual:.2e}")

    T = 100.0
    spec = circuits.symmetric_adder(2, 1.0, 0.1, 1.0, T, 0.01, 0.01)
    rho = steady_state(spec).rho
    ratios = [(T - effective_temperature(spec, rho, q)) / (T / 3) for q in ("1", "2")]
    if max(abs(x - 1) for x in ratios) > 0.02:
        failures.append(f"high-T potential ratios {ratios}")

    spec = circuits.tuned_adder(2)
    rho = steady_state(spec).rho
    Tq = {q: effective_temperature(spec, rho, q) for q in ("1", "2", "alpha")}
    V_aA = Tq["alpha"] - spec.bath("A").T
    mismatch = abs((spec.bath("I").T - Tq["1"]) + (spec.bath("II").T - Tq["2"]) - V_aA) / V_aA
    assert mismatch == pytest.approx(TUNED_ADDER_ORACLE, abs=5e-5)
    if mismatch >= TUNED_ADDER_THRESHOLD:
        failures.append(f"tuned mismatch {mismatch:.4f}")
    record(9, failures, f"current law {worst_I:.2e}, temperature identity {worst_T:.2e}, "
                        f"high-T ratio {min(ratios):.4f}, tuned mismatch {mismatch:.5f}")


def test_criterion_10_diode_zero_and_sign_change():
    # at T_A = T_B every current is at round-off, so the reference scale is
    # the largest circuit current seen along the bias sweep
    base = circuits.preset("fig7")
    failures = []
    below, above, scales = [], [], []
    for TA in np.linspace(0.5, 1.5, 50):
        spec = set_parameter(base, "bath.A.T", TA)
        rho = steady_state(spec).rho
        j = bath_current(spec, rho, "A")
        scales.append(scale_of(spec, rho))
        (below if TA < 1.0 else above).append(np.sign(j))
    if len(set(below)) != 1 or len(set(above)) != 1 or below[0] == above[0] or 0 in below + above:
        failures.append(f"signs below {set(below)}, above {set(above)}")
    spec = set_parameter(base, "bath.A.T", base.bath("B").T)
    zero = abs(bath_current(spec, steady_state(spec).rho, "A")) / max(scales)
    if zero > 1e-9:
        failures.append(f"J_A1 at T_A = T_B: {zero:.2e}")
    record(10, failures, f"zero-bias current {zero:.2e} of sweep scale; "
                         f"sign {below[0]:+.0f} below, {above[0]:+.0f} above")


def test_criterion_11_dynamics_converge():
    r = np.random.default_rng(1111)
    failures, worst_dist, worst_drift = [], 0.0, 0.0
    for name in ("fig2", "fig4"):
        spec = circuits.preset(name)
        ss = steady_state(spec).rho.to_dense()
        sup = liouvillian_matrix(spec)
        ev = np.linalg.eigvals(sup.matrix.toarray() if hasattr(sup.matrix, "toarray") else sup.matrix)
        gap = -max(e.real for e in ev if abs(e) > 1e-10)
        t_final = 20.0 / gap
        dt = 1.0 / sup.norm_inf()
        for i in range(5):
            rho0 = random_density(2 ** spec.n, r)
            out = propagate(spec, rho0, t_final, dt).to_dense()
            dist = float(np.abs(out - ss).max())
            drift = abs(np.trace(out) - 1.0) / t_final
            worst_dist, worst_drift = max(worst_dist, dist), max(worst_drift, drift)
            if dist > 1e-6:
                failures.append(f"{name} start {i}: distance {dist:.2e}")
            if drift > 1e-9:
                failures.append(f"{name} start {i}: trace drift {drift:.2e} per unit time")
    record(11, failures, f"worst distance {worst_dist:.2e}, worst trace drift {worst_drift:.2e}/time")


def _fuzz_inputs(r: np.random.Generator, count: int):
    alphabet = np.frombuffer(b"qubitcoplngahJTme=0123456789.-+eE \n\t#AB,()", dtype=np.uint8)
    seeds = [format_circuit(circuits.preset(n)).encode() for n in sorted(circuits.PRESETS)]
    for i in range(count):
        kind = i % 3
        if kind == 0:
            yield r.integers(0, 256, int(r.integers(0, 200)), dtype=np.uint8).tobytes()
        elif kind == 1:
            yield r.choice(alphabet, int(r.integers(0, 200))).tobytes()
        else:
            b = bytearray(seeds[int(r.integers(len(seeds)))])
            for _ in range(int(r.integers(1, 6))):
                pos = int(r.integers(0, len(b) + 1))
                op = int(r.integers(3))
                if op == 0 and pos < len(b):
                    b[pos] = int(r.integers(256))
                elif op == 1 and pos < len(b):
                    del b[pos]
                else:
                    b.insert(pos, int(r.choice(alphabet)))
            yield bytes(b)


def test_criterion_12_parser_robustness():
    r = np.random.default_rng(1212)
    failures, parsed = [], 0
    for data in _fuzz_inputs(r, 100_000):
        try:
            parse_circuit(data)
            parsed += 1
        except NetlistError:
            pass
        except Exception as exc:  # noqa: BLE001 - any other exception is a crash
            failures.append(f"{type(exc).__name__} on {data[:40]!r}")
    for name in sorted(circuits.PRESETS):
        spec = circuits.preset(name)
        if parse_circuit(format_circuit(spec)) != spec:
            failures.append(f"preset {name} does not round-trip")
    record(12, failures, f"100000 inputs, {parsed} parsed, no crash; {len(circuits.PRESETS)} presets round-trip")


def test_degenerate_presets_really_are_degenerate():
    for name in sorted(DEGENERATE_PRESETS - {"swb-extended", "fig6a", "fig6c"}):
        with pytest.raises(NonUniqueSteadyState):
            steady_state(circuits.preset(name))
