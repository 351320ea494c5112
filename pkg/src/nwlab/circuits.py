"""Gate-DAG circuits, bulk evaluation and exhaustive search by wire count.

Size is the number of wires: input taps and constants are free, a gate of
fan-in ``k`` costs ``k``.  Gate semantics on ``k`` inputs with sum ``S``:
``and`` / ``or`` / ``not`` as usual, ``mod<m>`` is ``[S != 0 mod m]`` and
``maj`` is the strict majority ``[2S > k]``.

The search engine grows *states*, sets of gate-output functions, level by
level in total cost.  A level-``L`` state extends a level-``L-k`` state by
one fan-in-``k`` gate whose output is not already available; every minimal
circuit has distinct gate functions, so nothing is lost.  Parent pointers
turn any reached function into a witness circuit.
"""

from __future__ import annotations

import itertools
import json
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .errors import ArgumentError, CapacityError, StructuralError
from .truthtable import MAX_ARITY, TruthTable, full_mask, projection_bits

MAX_ENUM_ARITY = 4
MAX_ENUM_SIZE = 12

_KIND_RE = re.compile(r"^(and|or|not|maj|mod(\d+))$")


# bases ------------------------------------------------------------------


def parse_kind(kind: str) -> Tuple[str, int]:
    """``"mod3" -> ("mod", 3)``; other kinds carry modulus 0."""
    m = _KIND_RE.match(kind)
    if not m:
        raise ArgumentError(f"unknown gate kind {kind!r}")
    if m.group(2) is not None:
        mod = int(m.group(2))
        if mod < 2:
            raise ArgumentError(f"modulus must be >= 2, got {mod}")
        return "mod", mod
    return kind, 0


@dataclass(frozen=True)
class Basis:
    """Gate kinds with a per-kind fan-in policy (bounded means exactly 2)."""

    name: str
    kinds: Tuple[Tuple[str, bool], ...]  # (kind, unbounded)

    def __post_init__(self):
        if not self.kinds:
            raise ArgumentError("basis must contain at least one gate kind")

    def fanins(self, kind: str, budget: int) -> range:
        """Fan-ins allowed for ``kind`` within ``budget`` wires."""
        for k, unbounded in self.kinds:
            if k != kind:
                continue
            if k == "not":
                return range(1, min(1, budget) + 1)
            return range(2, (budget if unbounded else min(2, budget)) + 1)
        return range(0)

    def allows(self, kind: str, fanin: int) -> bool:
        return fanin in self.fanins(kind, max(fanin, 2))

    def kind_names(self) -> List[str]:
        return [k for k, _ in self.kinds]


_NAMED = {
    "aon": "and+or+not",
    "ac0": "and/u+or/u+not",
    "ac0[2]": "and/u+or/u+not+mod2/u",
    "tc0": "and/u+or/u+not+maj/u",
}


def parse_basis(name) -> Basis:
    """Named bases ``aon``, ``ac0``, ``ac0[m]``, ``tc0`` or a ``+``-joined kind list.

    A ``/u`` suffix marks unbounded fan-in, e.g. ``"and/u+or/u+not+mod3/u"``.
    """
    if isinstance(name, Basis):
        return name
    if not isinstance(name, str) or not name.strip():
        raise ArgumentError(f"invalid basis name {name!r}")
    key = name.strip().lower()
    spec = _NAMED.get(key)
    if spec is None:
        m = re.match(r"^ac0\[(\d+)\]$", key)
        spec = f"and/u+or/u+not+mod{m.group(1)}/u" if m else key
    kinds = []
    seen = set()
    for part in spec.split("+"):
        unbounded = part.endswith("/u")
        kind = part[:-2] if unbounded else part
        try:
            parse_kind(kind)
        except ArgumentError:
            raise ArgumentError(f"invalid basis name {name!r}") from None
        if kind in seen:
            raise ArgumentError(f"duplicate gate kind {kind!r} in basis {name!r}")
        seen.add(kind)
        kinds.append((kind, unbounded and kind != "not"))
    return Basis(key, tuple(kinds))


# gate semantics on packed tables --------------------------------------------


def _int_to_bits(v: int, size: int) -> np.ndarray:
    nbytes = max(1, (size + 7) // 8)
    raw = np.frombuffer(v.to_bytes(nbytes, "little"), dtype=np.uint8)
    return np.unpackbits(raw, bitorder="little")[:size]


def _bits_to_int(arr: np.ndarray) -> int:
    return int.from_bytes(np.packbits(arr, bitorder="little").tobytes(), "little")


def apply_gate(kind: str, args: Sequence[int], n: int) -> int:
    """Evaluate a gate on packed child tables (Python ints of ``2**n`` bits)."""
    base, mod = parse_kind(kind)
    if base == "and":
        out = full_mask(n)
        for a in args:
            out &= a
        return out
    if base == "or":
        out = 0
        for a in args:
            out |= a
        return out
    if base == "not":
        return args[0] ^ full_mask(n)
    size = 1 << n
    total = np.zeros(size, dtype=np.int32)
    for a in args:
        total += _int_to_bits(a, size)
    if base == "mod":
        return _bits_to_int((total % mod != 0).astype(np.uint8))
    return _bits_to_int((2 * total > len(args)).astype(np.uint8))


# circuits -------------------------------------------------------------------


@dataclass(frozen=True)
class Gate:
    kind: str
    args: Tuple[str, ...]


@dataclass(frozen=True)
class Circuit:
    n: int
    basis: str
    gates: Tuple[Gate, ...]
    output: str

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(
            g if isinstance(g, Gate) else Gate(g[0], tuple(g[1])) for g in self.gates))
        self.validate()

    @property
    def size(self) -> int:
        return sum(len(g.args) for g in self.gates)

    @property
    def depth(self) -> int:
        d: Dict[str, int] = {}
        for j, g in enumerate(self.gates):
            d[f"g{j}"] = 1 + max((d.get(a, 0) for a in g.args), default=0)
        return d.get(self.output, 0)

    def validate(self, basis: Optional[Basis] = None) -> None:
        if not 1 <= self.n <= MAX_ARITY:
            raise StructuralError(f"bad arity {self.n}")
        try:
            b = basis or parse_basis(self.basis)
        except ArgumentError as exc:
            raise StructuralError(str(exc)) from None
        known = {"c0", "c1"} | {f"x{i}" for i in range(1, self.n + 1)}
        for j, g in enumerate(self.gates):
            try:
                parse_kind(g.kind)
            except ArgumentError as exc:
                raise StructuralError(str(exc)) from None
            if g.kind not in b.kind_names():
                raise StructuralError(f"gate kind {g.kind!r} not in basis {b.name!r}")
            if not b.allows(g.kind, len(g.args)):
                raise StructuralError(f"fan-in {len(g.args)} not allowed for {g.kind!r}")
            if len(set(g.args)) != len(g.args):
                raise StructuralError(f"gate g{j} has repeated children")
            for a in g.args:
                if a not in known:
                    raise StructuralError(f"gate g{j} references unknown or later node {a!r}")
            known.add(f"g{j}")
        if self.output not in known:
            raise StructuralError(f"output {self.output!r} is not a node")

    def to_dict(self) -> dict:
        return {"n": self.n, "basis": self.basis,
                "gates": [{"kind": g.kind, "args": list(g.args)} for g in self.gates],
                "output": self.output}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), separators=(",", ":"))

    @classmethod
    def from_dict(cls, d: dict) -> "Circuit":
        try:
            gates = tuple(Gate(g["kind"], tuple(g["args"])) for g in d["gates"])
            return cls(int(d["n"]), d["basis"], gates, d["output"])
        except (KeyError, TypeError) as exc:
            raise StructuralError(f"malformed circuit JSON: {exc}") from None

    @classmethod
    def from_json(cls, text: str) -> "Circuit":
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise StructuralError(f"malformed circuit JSON: {exc}") from None


def node_values(c: Circuit) -> Dict[str, int]:
    vals = {"c0": 0, "c1": full_mask(c.n)}
    for i in range(c.n):
        vals[f"x{i + 1}"] = projection_bits(c.n, i)
    for j, g in enumerate(c.gates):
        vals[f"g{j}"] = apply_gate(g.kind, [vals[a] for a in g.args], c.n)
    return vals


def evaluate_all(c: Circuit, basis=None) -> TruthTable:
    """Truth table of ``c``, evaluated word-parallel on packed tables."""
    if basis is not None:
        c.validate(parse_basis(basis))
    return TruthTable(c.n, node_values(c)[c.output])


def evaluate_points(c: Circuit, idx: np.ndarray) -> np.ndarray:
    """Evaluate ``c`` on an array of input indices."""
    idx = np.asarray(idx, dtype=np.int64)
    vals = {"c0": np.zeros(idx.shape, dtype=np.uint8), "c1": np.ones(idx.shape, dtype=np.uint8)}
    for i in range(c.n):
        vals[f"x{i + 1}"] = ((idx >> i) & 1).astype(np.uint8)
    for j, g in enumerate(c.gates):
        base, mod = parse_kind(g.kind)
        ch = [vals[a] for a in g.args]
        if base == "and":
            v = np.logical_and.reduce(ch)
        elif base == "or":
            v = np.logical_or.reduce(ch)
        elif base == "not":
            v = 1 - ch[0]
        else:
            tot = np.sum(ch, axis=0, dtype=np.int32)
            v = tot % mod != 0 if base == "mod" else 2 * tot > len(ch)
        vals[f"g{j}"] = np.asarray(v, dtype=np.uint8)
    return vals[c.output]


def constant_circuit(n: int, value: int, basis: str = "aon") -> Circuit:
    return Circuit(n, basis, (), "c1" if value else "c0")


# enumeration engine ---------------------------------------------------------


class _Engine:
    """Resumable level-by-cost search for one ``(n, basis)``."""

    def __init__(self, n: int, basis: Basis):
        self.n = n
        self.basis = basis
        self.base = [0, full_mask(n)] + [projection_bits(n, i) for i in range(n)]
        self.base_names = ["c0", "c1"] + [f"x{i + 1}" for i in range(n)]
        self.base_set = frozenset(self.base)
        # levels[L]: state -> (parent state, kind, child functions, output)
        self.levels: List[Dict[frozenset, Optional[tuple]]] = [{frozenset(): None}]
        self.seen = {frozenset()}
        # function -> (cost, state containing it); first reach is at minimal cost
        self.reached: Dict[int, Tuple[int, frozenset]] = {f: (0, frozenset()) for f in self.base}

    @property
    def depth(self) -> int:
        return len(self.levels) - 1

    def extend_to(self, s: int) -> None:
        while self.depth < s:
            self._grow()

    def _grow(self) -> None:
        L = self.depth + 1
        new: Dict[frozenset, tuple] = {}
        n = self.n
        for kind in self.basis.kind_names():
            for k in self.basis.fanins(kind, L):
                for state in self.levels[L - k]:
                    avail = self.base + sorted(state)
                    avail_set = self.base_set | state
                    for combo in itertools.combinations(avail, k):
                        out = apply_gate(kind, combo, n)
                        if out in avail_set:
                            continue
                        nxt = state | {out}
                        if nxt in self.seen or nxt in new:
                            continue
                        new[nxt] = (state, kind, combo, out)
        for st, rec in new.items():
            self.seen.add(st)
            out = rec[3]
            if out not in self.reached:
                self.reached[out] = (L, st)
        self.levels.append(new)

    def functions_upto(self, s: int) -> set:
        self.extend_to(s)
        return {f for f, (c, _) in self.reached.items() if c <= s}

    def witness(self, f: int, basis_name: str) -> Circuit:
        cost, state = self.reached[f]
        if f in self.base_set:
            return Circuit(self.n, basis_name, (), self.base_names[self.base.index(f)])
        # walk parent pointers back to the empty state
        steps = []
        level = cost
        while state:
            parent, kind, combo, out = self.levels[level][state]
            steps.append((kind, combo, out))
            level -= sum(1 for _ in combo)
            state = parent
        steps.reverse()
        # keep only gates feeding the target
        producer = {out: i for i, (_, _, out) in enumerate(steps)}
        live, stack = set(), [producer[f]]
        while stack:
            i = stack.pop()
            if i in live:
                continue
            live.add(i)
            stack.extend(producer[a] for a in steps[i][1] if a in producer)
        names = dict(zip(self.base, self.base_names))
        gates = []
        for i, (kind, combo, out) in enumerate(steps):
            if i not in live:
                continue
            gates.append(Gate(kind, tuple(names[a] for a in combo)))
            names[out] = f"g{len(gates) - 1}"
        return Circuit(self.n, basis_name, tuple(gates), names[f])


_ENGINES: Dict[Tuple[int, Basis], _Engine] = {}


def _engine(n: int, basis: Basis) -> _Engine:
    key = (n, basis)
    if key not in _ENGINES:
        _ENGINES[key] = _Engine(n, basis)
    return _ENGINES[key]


def _guard(n: int, s: int, allow_large: bool) -> None:
    if s < 0:
        raise ArgumentError("size bound must be >= 0")
    if allow_large:
        return
    if n > MAX_ENUM_ARITY:
        raise CapacityError(f"enumeration limited to n <= {MAX_ENUM_ARITY}, got {n}")
    if s > MAX_ENUM_SIZE:
        raise CapacityError(f"enumeration limited to s <= {MAX_ENUM_SIZE}, got {s}")


def enumerate_functions(n: int, basis, s: int, allow_large: bool = False) -> set:
    """All tables computed by some circuit of at most ``s`` wires."""
    b = parse_basis(basis)
    _guard(n, s, allow_large)
    return {TruthTable(n, f) for f in _engine(n, b).functions_upto(s)}


def count_functions(n: int, basis, s: int, allow_large: bool = False) -> int:
    b = parse_basis(basis)
    _guard(n, s, allow_large)
    return len(_engine(n, b).functions_upto(s))


def exact_mcsp(y: TruthTable, basis, cap: int = MAX_ENUM_SIZE,
               allow_large: bool = False) -> Tuple[int, Circuit]:
    """Minimal wire count of a circuit for ``y`` and one witness attaining it."""
    b = parse_basis(basis)
    _guard(y.n, 0, allow_large)
    eng = _engine(y.n, b)
    while y.bits not in eng.reached or eng.reached[y.bits][0] > eng.depth:
        if eng.depth >= cap:
            raise CapacityError(f"no circuit of size <= {cap} found", partial=eng.depth)
        eng.extend_to(eng.depth + 1)
    return eng.reached[y.bits][0], eng.witness(y.bits, b.name)


def circuit_complexity(y: TruthTable, basis, cap: int = MAX_ENUM_SIZE) -> int:
    return exact_mcsp(y, basis, cap)[0]


@dataclass(frozen=True)
class McspInstance:
    y: TruthTable
    s: int

    def __post_init__(self):
        if not isinstance(self.y, TruthTable):
            raise ArgumentError("instance table must be a TruthTable")
        if not isinstance(self.s, (int, np.integer)) or self.s < 0:
            raise ArgumentError(f"size bound must be a nonnegative integer, got {self.s!r}")


def mcsp_decide(inst: McspInstance, basis) -> bool:
    """Whether ``inst.y`` has a circuit of at most ``inst.s`` wires."""
    if not isinstance(inst, McspInstance):
        raise ArgumentError("expected an McspInstance")
    b = parse_basis(basis)
    _guard(inst.y.n, 0, False)
    eng = _engine(inst.y.n, b)
    cap = min(inst.s, MAX_ENUM_SIZE)
    eng.extend_to(cap)
    hit = eng.reached.get(inst.y.bits)
    if hit is not None and hit[0] <= inst.s:
        return True
    if inst.s <= cap:
        return False
    # beyond the search cap only a found witness can answer
    return exact_mcsp(inst.y, b, cap=inst.s)[0] <= inst.s


def mcsp_decide_param(y: TruthTable, size_fn, basis) -> bool:
    """Parameterized variant with the bound ``s = size_fn(n)``."""
    return mcsp_decide(McspInstance(y, int(size_fn(y.n))), basis)


def complexity_sweep(n: int, basis, cap: int = MAX_ENUM_SIZE) -> Dict[int, int]:
    """``bits -> exact_mcsp`` for every table of arity ``n``."""
    b = parse_basis(basis)
    _guard(n, 0, False)
    if n > 3:
        raise CapacityError("full sweeps are limited to n <= 3")
    eng = _engine(n, b)
    total = 1 << (1 << n)
    while len([1 for c, _ in eng.reached.values() if c <= eng.depth]) < total:
        if eng.depth >= cap:
            raise CapacityError(f"sweep incomplete at size cap {cap}", partial=eng.depth)
        eng.extend_to(eng.depth + 1)
    return {f: c for f, (c, _) in eng.reached.items()}


def maxhard_tt(n: int, basis, cap: int = MAX_ENUM_SIZE) -> TruthTable:
    """Lexicographically first table of maximum circuit complexity."""
    sweep = complexity_sweep(n, basis, cap)
    top = max(sweep.values())
    return TruthTable(n, min(f for f, c in sweep.items() if c == top))


# counting and hardness ------------------------------------------------------


def counting_bound_log2(s: int) -> float:
    """``log2`` of the class-size bound ``2**(50 s log2 s)``."""
    return 50 * s * math.log2(s) if s >= 2 else 0.0


def hardness_bound(n: int, s: int, delta: float) -> float:
    """``exp(-delta**2 * 2**(n-1) + 50 s log2 s)``; may exceed 1 (vacuous)."""
    expo = -delta * delta * 2 ** (n - 1) + counting_bound_log2(s)
    return math.exp(expo) if expo < 700 else math.inf


@dataclass
class HardnessReport:
    n: int
    s: int
    delta: Fraction
    trials: int
    approximable: int
    class_size: int
    mode: str
    bound: float
    union_bound: float
    best_advantages: List[Fraction] = field(default_factory=list)

    @property
    def fraction(self) -> Optional[float]:
        return self.approximable / self.trials if self.trials else None


def _pack_rows(funcs: Iterable[int], n: int) -> np.ndarray:
    nbytes = max(8, (1 << n) // 8)
    buf = b"".join(f.to_bytes(nbytes, "little") for f in funcs)
    return np.frombuffer(buf, dtype=np.uint64).reshape(-1, nbytes // 8)


def hardness_experiment(n: int, s: int, delta, trials: int, rng: np.random.Generator,
                        basis="aon", max_states: int = 2_000_000) -> HardnessReport:
    """Fraction of random ``n``-bit functions with a size-``<= s`` circuit of advantage ``>= delta``.

    The class is enumerated in full with the search engine (guardrails lifted);
    if that exceeds ``max_states`` search states a capacity error is raised.
    """
    from .truthtable import sample_function

    if trials < 0:
        raise ArgumentError("trials must be >= 0")
    delta = Fraction(delta)
    b = parse_basis(basis)
    eng = _engine(n, b)
    while eng.depth < s:
        if sum(len(lv) for lv in eng.levels) > max_states:
            raise CapacityError("class enumeration exceeds the state budget", partial=eng.depth)
        eng.extend_to(eng.depth + 1)
    funcs = sorted(eng.functions_upto(s))
    bound = hardness_bound(n, s, float(delta))
    union = len(funcs) * math.exp(-float(delta) ** 2 * 2 ** (n - 1))
    rep = HardnessReport(n, s, delta, trials, 0, len(funcs), "exhaustive", bound, union)
    if trials == 0:
        return rep
    G = _pack_rows(funcs, n)
    size = 1 << n
    need = (Fraction(1, 2) + delta) * size  # agreements needed
    for _ in range(trials):
        f = sample_function(n, rng)
        F = _pack_rows([f.bits], n)[0]
        dis = np.bitwise_count(G ^ F).sum(axis=1)
        best = size - int(dis.min())
        rep.best_advantages.append(Fraction(best, size) - Fraction(1, 2))
        if best >= need:
            rep.approximable += 1
    return rep
