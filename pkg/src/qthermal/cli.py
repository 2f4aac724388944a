"""Command-line front end.

Exit status: 0 success, 1 parse or usage error, 2 solver error,
3 verification failure.
"""
from __future__ import annotations

import argparse
import csv
import logging
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import circuits
from .currents import (
    bath_current,
    effective_temperature,
    full_report,
    link_current,
    spin_current,
    total_bath_current,
)
from .errors import NetlistError, ObservableError, QThermalError, SolverError
from .hilbert import DensityMatrix
from .liouvillian import asymptotic_state, steady_state
from .netlist import CircuitSpec, ParameterPath, format_circuit, get_parameter, load_circuit, set_parameter
from .verify import DEFAULT_TOLERANCES, all_passed, report, run_all, run_checks

log = logging.getLogger("qthermal")

EXIT_OK, EXIT_PARSE, EXIT_SOLVER, EXIT_VERIFY = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage, which would collide with solver errors
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_PARSE, f"{self.prog}: error: {message}\n")


# --------------------------------------------------------------------------
# observables


@dataclass(frozen=True)
class Observable:
    """One column of a sweep or one line of a filtered run.

    Selector syntax: ``bath:<bath>``, ``link:<from>-<to>``, ``spin:<from>-<to>``,
    ``temp:<qubit>``, ``total:<bath>`` and ``law:<check name>``.
    """

    kind: str
    args: tuple[str, ...]

    @classmethod
    def parse(cls, text: str) -> "Observable":
        kind, sep, rest = text.partition(":")
        if not sep or not rest:
            raise UsageError(f"bad observable {text!r}")
        if kind in ("link", "spin"):
            a, dash, b = rest.partition("-")
            if not dash or not a or not b:
                raise UsageError(f"{kind} observables take <from>-<to>: {text!r}")
            return cls(kind, (a, b))
        if kind in ("bath", "temp", "total", "law"):
            return cls(kind, (rest,))
        raise UsageError(f"unknown observable kind {kind!r}")

    def __str__(self):
        if self.kind in ("link", "spin"):
            return f"{self.kind}:{self.args[0]}-{self.args[1]}"
        return f"{self.kind}:{self.args[0]}"

    def check(self, spec: CircuitSpec) -> None:
        try:
            if self.kind in ("bath", "total"):
                spec.bath(self.args[0])
            elif self.kind == "temp":
                spec.site(self.args[0])
            elif self.kind in ("link", "spin"):
                if spec.coupling(*self.args) is None:
                    raise KeyError(f"no coupling {self.args[0]}-{self.args[1]}")
        except KeyError as exc:
            raise UsageError(f"observable {self}: {exc.args[0]}") from None


def default_observables(spec: CircuitSpec) -> list[Observable]:
    obs = [Observable("bath", (b.id,)) for b in spec.baths]
    for c in spec.couplings:
        obs.append(Observable("link", (c.a, c.b)))
        obs.append(Observable("link", (c.b, c.a)))
    obs += [Observable("temp", (q,)) for q in spec.qubit_ids]
    return obs


def evaluate(spec: CircuitSpec, rho, observables) -> list[float | None]:
    """Values of the selected observables; ``None`` where one is undefined."""
    laws = None
    out = []
    for o in observables:
        try:
            if o.kind == "bath":
                v = bath_current(spec, rho, o.args[0])
            elif o.kind == "total":
                v = total_bath_current(spec, rho, o.args[0])
            elif o.kind == "link":
                v = link_current(spec, rho, *o.args)
            elif o.kind == "spin":
                v = spin_current(spec, rho, *o.args)
            elif o.kind == "temp":
                v = effective_temperature(spec, rho, o.args[0])
            else:
                if laws is None:
                    laws = {c.name: c.residual for c in run_checks(spec, rho, steady=True)}
                v = laws.get(o.args[0])
        except ObservableError:
            v = None
        out.append(v)
    return out


def _fmt(v) -> str:
    return "" if v is None or not math.isfinite(v) else "%.17g" % v


# --------------------------------------------------------------------------
# commands


def _solve(spec: CircuitSpec, tol: float, initial: str | None):
    if initial is None:
        res = steady_state(spec, tol=tol)
        return res.rho, f"residual={res.residual:.3e} nullity={res.nullity} method={res.method}"
    d = 2 ** spec.n
    rho0 = DensityMatrix.basis_state(d - 1, d) if initial == "ground" else DensityMatrix.maximally_mixed(d)
    return asymptotic_state(spec, rho0), f"asymptotic state from {initial}"


def cmd_run(args) -> int:
    spec = load_circuit(args.file)
    observables = [Observable.parse(t) for t in args.observables or ()]
    for o in observables:
        o.check(spec)
    rho, info = _solve(spec, args.tol, args.initial)
    out = sys.stdout
    if observables:
        for o, v in zip(observables, evaluate(spec, rho, observables)):
            out.write(f"{o} {_fmt(v) or 'nan'}\n")
        return EXIT_OK
    out.write(f"# qubits={spec.n} {info}\n")
    for line in full_report(spec, rho).lines():
        out.write(line + "\n")
    return EXIT_OK


def _sweep_point(job):
    spec, path, value, observables, tol, initial = job
    try:
        point = set_parameter(spec, path, value)
        rho, _ = _solve(point, tol, initial)
        return evaluate(point, rho, observables), None
    except QThermalError as exc:
        return [None] * len(observables), f"{type(exc).__name__}: {exc}"


def sweep_grid(start: float, stop: float, steps: int, logspace: bool = False) -> np.ndarray:
    if steps < 2:
        raise UsageError("a sweep needs at least 2 steps")
    if start == stop:
        raise UsageError("sweep endpoints must differ")
    if logspace:
        if start <= 0 or stop <= 0:
            raise UsageError("log spacing needs positive endpoints")
        return np.geomspace(start, stop, steps)
    return np.linspace(start, stop, steps)


def run_sweep(spec: CircuitSpec, path: ParameterPath, grid, observables, tol=1e-9,
              workers: int = 1, initial: str | None = None):
    """Rows ``[value, obs...]`` in grid order plus a list of ``(value, error)`` notes."""
    jobs = [(spec, path, float(v), observables, tol, initial) for v in grid]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_point, jobs))
    else:
        results = [_sweep_point(j) for j in jobs]
    rows, notes = [], []
    for v, (vals, err) in zip(grid, results):
        rows.append([float(v)] + vals)
        if err:
            notes.append((float(v), err))
    return rows, notes


def cmd_sweep(args) -> int:
    spec = load_circuit(args.file)
    path = ParameterPath.parse(args.param)
    get_parameter(spec, path)
    grid = sweep_grid(args.start, args.stop, args.steps, args.log)
    observables = [Observable.parse(t) for t in args.observables] if args.observables else default_observables(spec)
    for o in observables:
        o.check(spec)
    try:
        fh = open(args.out, "w", newline="", encoding="utf-8") if args.out != "-" else None
    except OSError as exc:
        raise UsageError(f"cannot write {args.out}: {exc.strerror}") from None
    workers = args.workers or os.cpu_count() or 1
    rows, notes = run_sweep(spec, path, grid, observables, args.tol, workers, args.initial)
    for v, err in notes:
        sys.stderr.write(f"sweep point {path}={v!r}: {err}\n")
    target = fh or sys.stdout
    try:
        w = csv.writer(target, lineterminator="\n")
        w.writerow([str(path)] + [str(o) for o in observables])
        for row in rows:
            w.writerow([_fmt(x) for x in row])
    finally:
        if fh:
            fh.close()
    return EXIT_OK


def _parse_law_tols(items) -> dict:
    tols = {}
    for item in items or ():
        key, sep, val = item.partition("=")
        if not sep or key not in DEFAULT_TOLERANCES:
            raise UsageError(f"--law-tol expects KIND=VALUE with KIND in {', '.join(DEFAULT_TOLERANCES)}")
        try:
            tols[key] = float(val)
        except ValueError:
            raise UsageError(f"bad tolerance {val!r}") from None
    return tols


def cmd_verify(args) -> int:
    spec = load_circuit(args.file)
    tols = _parse_law_tols(args.law_tol)
    edges = [tuple(e.split("-", 1)) for e in args.balance] if args.balance else None
    if args.initial:
        rho, _ = _solve(spec, args.tol, args.initial)
        checks = run_checks(spec, rho, steady=True, tolerances=tols, balance_edges=edges)
    else:
        checks = run_all(spec, tolerances=tols, balance_edges=edges, solver_tol=args.tol, perturb=args.perturb)
    sys.stdout.write(report(checks))
    return EXIT_OK if all_passed(checks) else EXIT_VERIFY


def cmd_preset(args) -> int:
    try:
        spec = circuits.preset(args.name)
    except KeyError as exc:
        raise UsageError(exc.args[0]) from None
    text = format_circuit(spec, header=f"preset {args.name}: {circuits.PRESET_NOTES.get(args.name, '')}")
    if args.out:
        try:
            with open(args.out, "w", newline="\n", encoding="utf-8") as fh:
                fh.write(text)
        except OSError as exc:
            raise UsageError(f"cannot write {args.out}: {exc.strerror}") from None
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="qthermal", description="Quantum thermal circuit simulator")
    p.add_argument("-v", "--verbose", action="store_true", help="log solver details to stderr")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def solver_opts(sp):
        sp.add_argument("--tol", type=float, default=1e-9,
                        help="steady-state residual bound relative to ||L|| (default 1e-9)")
        sp.add_argument("--initial", choices=("ground", "mixed"),
                        help="use the long-time limit from this initial state (needed for degenerate circuits)")

    r = sub.add_parser("run", help="solve one circuit and print its currents")
    r.add_argument("file")
    solver_opts(r)
    r.add_argument("--observables", nargs="+", metavar="SEL")
    r.set_defaults(func=cmd_run)

    s = sub.add_parser("sweep", help="scan one parameter and write CSV")
    s.add_argument("file")
    s.add_argument("--param", required=True, help="e.g. bath.B.T or coupling(3,4).J")
    s.add_argument("--from", dest="start", type=float, required=True)
    s.add_argument("--to", dest="stop", type=float, required=True)
    s.add_argument("--steps", type=int, required=True)
    s.add_argument("--log", action="store_true", help="logarithmic grid")
    s.add_argument("--out", required=True, help="CSV path, or - for stdout")
    s.add_argument("--observables", nargs="+", metavar="SEL")
    s.add_argument("--workers", type=int, default=0, help="worker processes (default: CPU count)")
    solver_opts(s)
    s.set_defaults(func=cmd_sweep)

    v = sub.add_parser("verify", help="run the law checks")
    v.add_argument("file")
    solver_opts(v)
    v.add_argument("--law-tol", action="append", metavar="KIND=VALUE")
    v.add_argument("--balance", action="append", metavar="A-B", help="edge expected to carry no current")
    v.add_argument("--perturb", type=float, default=0.0, help=argparse.SUPPRESS)
    v.set_defaults(func=cmd_verify)

    pr = sub.add_parser("preset", help="write a named circuit file")
    pr.add_argument("name")
    pr.add_argument("--out")
    pr.set_defaults(func=cmd_preset)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except NetlistError as exc:
        sys.stderr.write(f"{getattr(args, 'file', '')}: {exc}\n")
        return EXIT_PARSE
    except (UsageError, OSError) as exc:
        sys.stderr.write(f"qthermal: {exc}\n")
        return EXIT_PARSE
    except SolverError as exc:
        sys.stderr.write(f"solver error: {exc}\n")
        return EXIT_SOLVER
    except QThermalError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
