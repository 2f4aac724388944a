"""Circuit data model and the line-oriented ``.qtc`` netlist format.

Grammar (one statement per line, ``#`` starts a comment)::

    qubit <id> omega=<float>
    coupling <id> <id> J=<float>
    bath <id> qubit=<id> T=<float> gamma=<float>

Ids are ASCII alphanumeric tokens.  Qubit order in the file fixes the tensor
order (first declared qubit = most significant factor).
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, replace

from .errors import NetlistError, ParameterPathError

MAX_QUBITS = 10

_ID = re.compile(r"[A-Za-z0-9]+\Z")
_FLOAT = re.compile(r"[+-]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?\Z")


@dataclass(frozen=True)
class Qubit:
    id: str
    omega: float


@dataclass(frozen=True)
class Coupling:
    a: str
    b: str
    J: float

    @property
    def key(self) -> frozenset:
        return frozenset((self.a, self.b))

    def touches(self, qid: str) -> bool:
        return qid in (self.a, self.b)

    def other(self, qid: str) -> str:
        return self.b if qid == self.a else self.a


@dataclass(frozen=True)
class Bath:
    id: str
    qubit: str
    T: float
    gamma: float


@dataclass(frozen=True)
class CircuitSpec:
    qubits: tuple[Qubit, ...]
    couplings: tuple[Coupling, ...] = ()
    baths: tuple[Bath, ...] = ()
    # free-form tag set by factories; not serialized
    name: str = field(default="", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "qubits", tuple(self.qubits))
        object.__setattr__(self, "couplings", tuple(self.couplings))
        object.__setattr__(self, "baths", tuple(self.baths))

    @property
    def n(self) -> int:
        return len(self.qubits)

    @property
    def qubit_ids(self) -> list[str]:
        return [q.id for q in self.qubits]

    def site(self, qid: str) -> int:
        """1-based tensor position of qubit ``qid``."""
        for i, q in enumerate(self.qubits, start=1):
            if q.id == qid:
                return i
        raise KeyError(f"unknown qubit {qid!r}")

    def qubit(self, qid: str) -> Qubit:
        return self.qubits[self.site(qid) - 1]

    def omega(self, qid: str) -> float:
        return self.qubit(qid).omega

    def bath(self, bid: str) -> Bath:
        for b in self.baths:
            if b.id == bid:
                return b
        raise KeyError(f"unknown bath {bid!r}")

    def bath_on(self, qid: str) -> Bath | None:
        for b in self.baths:
            if b.qubit == qid:
                return b
        return None

    def coupling(self, a: str, b: str) -> Coupling | None:
        key = frozenset((a, b))
        for c in self.couplings:
            if c.key == key:
                return c
        return None

    @property
    def active_couplings(self) -> tuple[Coupling, ...]:
        """Couplings with non-zero J; zero-J entries only exist for addressing."""
        return tuple(c for c in self.couplings if c.J != 0)

    def neighbours(self, qid: str) -> list[str]:
        return [c.other(qid) for c in self.active_couplings if c.touches(qid)]

    def with_name(self, name: str) -> "CircuitSpec":
        return replace(self, name=name)


def _finite(x: float) -> bool:
    return isinstance(x, (int, float)) and math.isfinite(x)


def _violations(spec: CircuitSpec):
    """Yield ``(message, kind, index)`` for every invariant violation, in order."""
    if spec.n == 0:
        yield "no qubits declared", "qubit", None
    if spec.n > MAX_QUBITS:
        yield f"{spec.n} qubits exceeds the limit of {MAX_QUBITS}", "qubit", MAX_QUBITS
    seen = set()
    for i, q in enumerate(spec.qubits):
        if not _ID.match(str(q.id)):
            yield f"invalid qubit id {q.id!r}", "qubit", i
        if q.id in seen:
            yield f"duplicate qubit id {q.id!r}", "qubit", i
        seen.add(q.id)
        if not _finite(q.omega):
            yield f"qubit {q.id}: omega must be finite", "qubit", i
        elif q.omega <= 0:
            yield f"qubit {q.id}: non-positive frequency omega={q.omega!r}", "qubit", i
    pairs = set()
    for i, c in enumerate(spec.couplings):
        for end in (c.a, c.b):
            if end not in seen:
                yield f"coupling references unknown qubit {end!r}", "coupling", i
        if c.a == c.b:
            yield f"self-coupling on qubit {c.a!r}", "coupling", i
        if c.key in pairs:
            yield f"duplicate coupling {c.a}-{c.b}", "coupling", i
        pairs.add(c.key)
        if not _finite(c.J):
            yield f"coupling {c.a}-{c.b}: J must be finite", "coupling", i
    bath_ids = set()
    bathed = set()
    for i, b in enumerate(spec.baths):
        if not _ID.match(str(b.id)):
            yield f"invalid bath id {b.id!r}", "bath", i
        if b.id in bath_ids:
            yield f"duplicate bath id {b.id!r}", "bath", i
        bath_ids.add(b.id)
        if b.qubit not in seen:
            yield f"bath {b.id} references unknown qubit {b.qubit!r}", "bath", i
        if b.qubit in bathed:
            yield f"multiple baths on qubit {b.qubit!r}", "bath", i
        bathed.add(b.qubit)
        if not _finite(b.T):
            yield f"bath {b.id}: T must be finite", "bath", i
        elif b.T < 0:
            yield f"bath {b.id}: negative temperature T={b.T!r}", "bath", i
        if not _finite(b.gamma):
            yield f"bath {b.id}: gamma must be finite", "bath", i
        elif b.gamma <= 0:
            yield f"bath {b.id}: non-positive rate gamma={b.gamma!r}", "bath", i


def validate(spec: CircuitSpec) -> None:
    """Raise :class:`NetlistError` for the first violated invariant."""
    for message, _, _ in _violations(spec):
        raise NetlistError(message)


# --------------------------------------------------------------------------
# parsing


def _parse_float(tok: str, line: int, col: int) -> float:
    if not _FLOAT.match(tok):
        raise NetlistError(f"invalid number {tok!r}", line, col)
    return float(tok)


def _parse_id(tok: str, line: int, col: int) -> str:
    if not _ID.match(tok):
        raise NetlistError(f"invalid id {tok!r}", line, col)
    return tok


def _tokens(text: str):
    """Yield (line_no, [(col, token), ...]) for non-empty statements."""
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        toks = [(m.start() + 1, m.group()) for m in re.finditer(r"\S+", line)]
        if toks:
            yield lineno, toks


def _keyword_args(toks, names, lineno):
    """Parse ``key=value`` tokens in the given order; returns dict key -> (col, value)."""
    if len(toks) != len(names):
        col = toks[len(names)][0] if len(toks) > len(names) else None
        raise NetlistError(f"expected {' '.join(n + '=...' for n in names)}", lineno, col)
    out = {}
    for (col, tok), name in zip(toks, names):
        key, sep, val = tok.partition("=")
        if not sep or key != name:
            raise NetlistError(f"expected {name}=<value>, got {tok!r}", lineno, col)
        if not val:
            raise NetlistError(f"missing value for {name}", lineno, col + len(key) + 1)
        out[name] = (col + len(key) + 1, val)
    return out


def parse_circuit(text) -> CircuitSpec:
    """Parse a ``.qtc`` document into a validated :class:`CircuitSpec`."""
    if isinstance(text, (bytes, bytearray)):
        try:
            text = bytes(text).decode("utf-8")
        except UnicodeDecodeError as exc:
            raise NetlistError(f"document is not valid UTF-8 (byte {exc.start})") from None
    qubits, couplings, baths = [], [], []
    where = {"qubit": [], "coupling": [], "bath": []}
    for lineno, toks in _tokens(text):
        col, kw = toks[0]
        args = toks[1:]
        if kw == "qubit":
            if not args:
                raise NetlistError("qubit statement needs an id", lineno)
            qid = _parse_id(args[0][1], lineno, args[0][0])
            kv = _keyword_args(args[1:], ["omega"], lineno)
            omega = _parse_float(kv["omega"][1], lineno, kv["omega"][0])
            qubits.append(Qubit(qid, omega))
            where["qubit"].append(lineno)
        elif kw == "coupling":
            if len(args) < 2:
                raise NetlistError("coupling statement needs two qubit ids", lineno)
            a = _parse_id(args[0][1], lineno, args[0][0])
            b = _parse_id(args[1][1], lineno, args[1][0])
            kv = _keyword_args(args[2:], ["J"], lineno)
            J = _parse_float(kv["J"][1], lineno, kv["J"][0])
            couplings.append(Coupling(a, b, J))
            where["coupling"].append(lineno)
        elif kw == "bath":
            if not args:
                raise NetlistError("bath statement needs an id", lineno)
            bid = _parse_id(args[0][1], lineno, args[0][0])
            kv = _keyword_args(args[1:], ["qubit", "T", "gamma"], lineno)
            qid = _parse_id(kv["qubit"][1], lineno, kv["qubit"][0])
            T = _parse_float(kv["T"][1], lineno, kv["T"][0])
            gamma = _parse_float(kv["gamma"][1], lineno, kv["gamma"][0])
            baths.append(Bath(bid, qid, T, gamma))
            where["bath"].append(lineno)
        else:
            raise NetlistError(f"unknown statement {kw!r}", lineno, col)
    spec = CircuitSpec(tuple(qubits), tuple(couplings), tuple(baths))
    for message, kind, index in _violations(spec):
        lines = where[kind]
        line = lines[index] if index is not None and index < len(lines) else None
        raise NetlistError(message, line)
    return spec


def load_circuit(path) -> CircuitSpec:
    with open(path, "rb") as fh:
        return parse_circuit(fh.read())


def format_circuit(spec: CircuitSpec, header: str | None = None) -> str:
    """Serialize to ``.qtc``; ``parse_circuit(format_circuit(s)) == s``."""
    lines = []
    if header:
        lines.extend(f"# {h}" if h else "#" for h in header.splitlines())
    lines.extend(f"qubit {q.id} omega={q.omega!r}" for q in spec.qubits)
    lines.extend(f"coupling {c.a} {c.b} J={c.J!r}" for c in spec.couplings)
    lines.extend(f"bath {b.id} qubit={b.qubit} T={b.T!r} gamma={b.gamma!r}" for b in spec.baths)
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# parameter addressing

_TARGETS = {"qubit": ("omega",), "coupling": ("J",), "bath": ("T", "gamma")}


@dataclass(frozen=True)
class ParameterPath:
    """Address of one scalar, e.g. ``bath.B.T`` or ``coupling(3,4).J``."""

    kind: str
    ids: tuple[str, ...]
    attr: str

    @classmethod
    def parse(cls, text: str) -> "ParameterPath":
        m = re.fullmatch(r"\s*coupling\(\s*(\w+)\s*,\s*(\w+)\s*\)\.(\w+)\s*", text)
        if m:
            return cls("coupling", (m.group(1), m.group(2)), m.group(3))._checked(text)
        parts = text.strip().split(".")
        if len(parts) < 3:
            raise ParameterPathError(f"cannot parse parameter path {text!r}")
        return cls(parts[0], tuple(parts[1:-1]), parts[-1])._checked(text)

    def _checked(self, text: str) -> "ParameterPath":
        if self.kind not in _TARGETS or self.attr not in _TARGETS[self.kind]:
            raise ParameterPathError(f"unknown parameter target in {text!r}")
        want = 2 if self.kind == "coupling" else 1
        if len(self.ids) != want:
            raise ParameterPathError(f"{self.kind} paths take {want} id(s): {text!r}")
        return self

    def __str__(self):
        if self.kind == "coupling":
            return f"coupling({self.ids[0]},{self.ids[1]}).{self.attr}"
        return f"{self.kind}.{self.ids[0]}.{self.attr}"


def get_parameter(spec: CircuitSpec, path: ParameterPath) -> float:
    if isinstance(path, str):
        path = ParameterPath.parse(path)
    coll, i = _locate(spec, path)
    return getattr(coll[i], path.attr)


def _locate(spec: CircuitSpec, path: ParameterPath):
    if path.kind == "qubit":
        for i, q in enumerate(spec.qubits):
            if q.id == path.ids[0]:
                return spec.qubits, i
    elif path.kind == "bath":
        for i, b in enumerate(spec.baths):
            if b.id == path.ids[0]:
                return spec.baths, i
    else:
        key = frozenset(path.ids)
        for i, c in enumerate(spec.couplings):
            if c.key == key:
                return spec.couplings, i
    raise ParameterPathError(f"parameter path {path} does not resolve")


def set_parameter(spec: CircuitSpec, path, value: float) -> CircuitSpec:
    """Copy of ``spec`` with one scalar replaced; the result is validated."""
    if isinstance(path, str):
        path = ParameterPath.parse(path)
    coll, i = _locate(spec, path)
    items = list(coll)
    items[i] = replace(items[i], **{path.attr: float(value)})
    field_name = {"qubit": "qubits", "coupling": "couplings", "bath": "baths"}[path.kind]
    new = replace(spec, **{field_name: tuple(items)})
    validate(new)
    return new
