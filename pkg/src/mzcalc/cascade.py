"""Trees of series-connected interferometer loops.

Each loop has two output ports; a port either feeds another loop or ends
in a detector.  A particle reaching detector X has passed every loop on
the root-to-X path, so its probability is the product of the per-loop
port probabilities.  All shifters step together, so every loop on a path
is read at the same increment ``j = offset + kN``, where ``offset`` is
the start delay of the loop that feeds X.

Delays matter behind dark ports: if an upstream loop tests a true factor
its dark port is empty at every ``j = kN``, so the loops behind it are
observed ``ceil(sum/2)`` increments later, the sum running over the
``n`` of each loop from the first dark traversal down to the feeding
loop's parent.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterator, Optional, Union

from . import kernels
from .core import TWO_PI, PhaseSchedule, Port, detect_probability, phase_at_step
from .errors import CascadeConfigError, OrderingViolation, UnknownDetector

Child = Union["CascadeNode", str]

# Front-section truth table: (n1 factor, n2 factor, n4 factor) -> (I_A, I_B, I_C + I_D) in units of K/8
TABLE_I = {
    (True, True, True): (8, 0, 0),
    (True, True, False): (4, 4, 0),
    (True, False, True): (4, 0, 4),
    (True, False, False): (2, 2, 4),
    (False, True, True): (4, 0, 0),
    (False, True, False): (2, 2, 0),
    (False, False, True): (2, 0, 2),
    (False, False, False): (1, 1, 2),
}


@dataclass
class CascadeNode:
    label: str
    n: int
    bright: Child
    dark: Child
    start_delay: int = 0

    def children(self) -> Iterator[tuple[Port, Child]]:
        yield Port.BRIGHT, self.bright
        yield Port.DARK, self.dark


@dataclass(frozen=True)
class DetectorPath:
    detector: str
    loops: tuple  # of (CascadeNode, Port), root first
    offset: int

    @property
    def ns(self) -> list[int]:
        return [node.n for node, _ in self.loops]

    @property
    def signs(self) -> list[int]:
        return [port.sign for _, port in self.loops]

    @property
    def depth(self) -> int:
        return len(self.loops)


@dataclass
class CascadeSpec:
    """A loop tree plus the number under test.

    ``sum_horizon`` is a fixed observation count, ``"max"`` (largest n on
    the detector's path, the default) or ``"lcm"`` (least common multiple
    of the path's n values, one full common period).
    """

    root: CascadeNode
    N: int
    sum_horizon: Union[int, str] = "max"
    _paths: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.N < 1:
            raise CascadeConfigError(f"N must be positive, got {self.N}", "N")
        if isinstance(self.sum_horizon, str):
            if self.sum_horizon not in ("max", "lcm"):
                raise CascadeConfigError(
                    f"horizon must be 'max', 'lcm' or a positive integer, got {self.sum_horizon!r}",
                    "horizon",
                )
        elif self.sum_horizon < 1:
            raise CascadeConfigError(f"horizon must be >= 1, got {self.sum_horizon}", "horizon")
        self._paths = _collect_paths(self.root)

    @property
    def detectors(self) -> list[str]:
        return sorted(self._paths)

    def path(self, detector: str) -> DetectorPath:
        try:
            return self._paths[detector]
        except KeyError:
            raise UnknownDetector(f"no detector {detector!r}; have {self.detectors}") from None

    def horizon_for(self, detector: str) -> int:
        ns = self.path(detector).ns
        if self.sum_horizon == "max":
            return max(ns)
        if self.sum_horizon == "lcm":
            return math.lcm(*ns)
        return int(self.sum_horizon)

    def nodes(self) -> Iterator[CascadeNode]:
        stack = [self.root]
        while stack:
            node = stack.pop()
            yield node
            for _, child in node.children():
                if isinstance(child, CascadeNode):
                    stack.append(child)


def _collect_paths(root: CascadeNode) -> dict[str, DetectorPath]:
    paths: dict[str, DetectorPath] = {}
    seen_nodes: set[int] = set()
    labels: set[str] = set()

    def walk(node, trail, where):
        if not isinstance(node, CascadeNode):
            raise CascadeConfigError(f"expected a loop, got {type(node).__name__}", where)
        if id(node) in seen_nodes:
            raise CascadeConfigError(f"loop {node.label!r} appears twice (cycle or shared subtree)", where)
        seen_nodes.add(id(node))
        if node.label in labels:
            raise CascadeConfigError(f"duplicate loop label {node.label!r}", where)
        labels.add(node.label)
        if not isinstance(node.n, int) or node.n < 1:
            raise CascadeConfigError(f"n must be a positive integer, got {node.n!r}", f"{where}.n")
        if not isinstance(node.start_delay, int) or node.start_delay < 0:
            raise CascadeConfigError(
                f"delay must be a non-negative integer, got {node.start_delay!r}", f"{where}.delay"
            )
        for port, child in node.children():
            here = f"{where}.{port.value}"
            step = trail + ((node, port),)
            if isinstance(child, str):
                if not child:
                    raise CascadeConfigError("detector label must be non-empty", here)
                if child in paths:
                    raise CascadeConfigError(f"duplicate detector label {child!r}", here)
                paths[child] = DetectorPath(child, step, node.start_delay)
            else:
                walk(child, step, here)

    walk(root, (), "root")
    return paths


def observation_step(spec: CascadeSpec, detector: str, k: int) -> int:
    """Increment index of the k-th observation of ``detector``."""
    return spec.path(detector).offset + k * spec.N


def path_probability(spec: CascadeSpec, detector: str, k: int) -> float:
    """Probability that the particle of observation ``k`` reaches ``detector``."""
    if k < 1:
        raise ValueError(f"observation index must be >= 1, got {k}")
    path = spec.path(detector)
    return _product_at(path, spec.N, path.offset, k)


def _product_at(path: DetectorPath, N: int, offset: int, k: int) -> float:
    p = 1.0
    for node, port in path.loops:
        chi = phase_at_step(PhaseSchedule(n=node.n, N=N, offset=offset), k)
        p *= detect_probability(chi, port)
    return p


def step_distribution(spec: CascadeSpec, j: int) -> dict[str, float]:
    """Detector probabilities for a particle sent at absolute increment ``j``.

    Sums to one over all detectors.
    """
    out = {}
    for det in spec.detectors:
        p = 1.0
        for node, port in spec.path(det).loops:
            r = j % node.n
            if 2 * r > node.n:
                r = node.n - r
            p *= 0.5 * (1.0 + port.sign * math.cos(TWO_PI * r / node.n))
        out[det] = p
    return out


@dataclass(frozen=True)
class DetectorTally:
    detector: str
    expected_intensity: float
    units_of: float  # horizon / 2**depth, the truth-table unit
    horizon: int
    offset: int

    @property
    def in_units(self) -> float:
        return self.expected_intensity / self.units_of


def accumulate(spec: CascadeSpec, detector: str, horizon: Optional[int] = None,
               offset: Optional[int] = None) -> DetectorTally:
    """Expected count at ``detector`` summed over k = 1..K (ascending k).

    ``offset`` overrides the detector's own observation delay.
    """
    path = spec.path(detector)
    K = spec.horizon_for(detector) if horizon is None else int(horizon)
    off = path.offset if offset is None else int(offset)
    total = kernels.path_sum(path.ns, path.signs, spec.N, off, K)
    return DetectorTally(detector, total, K / 2**path.depth, K, off)


def dark_port_delay(parent_ns) -> int:
    """ceil(sum(parent_ns) / 2); 0 for an empty list."""
    s = sum(parent_ns)
    if s < 0:
        raise ValueError("n values must be positive")
    return (s + 1) // 2


def _check_increasing(ns, names):
    for i in range(len(ns) - 1):
        if not ns[i] < ns[i + 1]:
            raise OrderingViolation(
                f"candidates must be strictly increasing: {names[i]}={ns[i]} >= {names[i + 1]}={ns[i + 1]}"
            )
    if ns and ns[0] < 1:
        raise OrderingViolation(f"candidates must be positive, got {ns[0]}")


def build_fig2(N: int, ns, sum_horizon: Union[int, str] = "max") -> CascadeSpec:
    """Seven-loop, eight-detector tree testing n1..n7 at once.

    n1 feeds n2 (bright) and n3 (dark); n2 feeds n4 -> A, B and n5 -> C, D;
    n3 feeds n6 -> E, F and n7 -> G, H.
    """
    ns = [int(x) for x in ns]
    if len(ns) != 7:
        raise ValueError(f"need exactly 7 candidates, got {len(ns)}")
    _check_increasing(ns, [f"n{i}" for i in range(1, 8)])
    n1, n2, n3, n4, n5, n6, n7 = ns
    lower = dark_port_delay([n1, n3])
    loop4 = CascadeNode("n4", n4, "A", "B")
    loop5 = CascadeNode("n5", n5, "C", "D", dark_port_delay([n2]))
    loop6 = CascadeNode("n6", n6, "E", "F", lower)
    loop7 = CascadeNode("n7", n7, "G", "H", lower)
    loop2 = CascadeNode("n2", n2, loop4, loop5)
    loop3 = CascadeNode("n3", n3, loop6, loop7, dark_port_delay([n1]))
    root = CascadeNode("n1", n1, loop2, loop3)
    return CascadeSpec(root, N, sum_horizon)


def build_front_section(N: int, n1: int, n2: int, n4: int, sum_horizon: Union[int, str] = "max") -> CascadeSpec:
    """Loops n1, n2, n4 with n5 replaced by the C+D pair, no delays."""
    _check_increasing([n1, n2, n4], ["n1", "n2", "n4"])
    loop4 = CascadeNode("n4", n4, "A", "B")
    loop2 = CascadeNode("n2", n2, loop4, "C+D")
    root = CascadeNode("n1", n1, loop2, "lower")
    return CascadeSpec(root, N, sum_horizon)


@dataclass(frozen=True)
class Table1Report:
    N: int
    ns: tuple
    horizon: int
    unit: float
    intensities: dict  # detector -> expected count
    predicted_row: tuple  # factor flags for (n1, n2, n4)

    @property
    def in_units(self) -> dict:
        return {k: v / self.unit for k, v in self.intensities.items()}

    @property
    def table_values(self) -> dict:
        a, b, cd = TABLE_I[self.predicted_row]
        return {"A": a, "B": b, "C+D": cd}

    @property
    def deviation(self) -> dict:
        got = self.in_units
        return {k: got[k] - v for k, v in self.table_values.items()}


def table1_report(N: int, n1: int, n2: int, n4: int, K: Union[int, str] = "max") -> Table1Report:
    """I_A, I_B and I_C + I_D summed over a common horizon, with the
    truth-table row predicted from which of n1, n2, n4 divide N.

    ``K`` is an observation count, ``"max"`` (n4) or ``"lcm"``.
    """
    spec = build_front_section(N, n1, n2, n4, K)
    horizon = spec.horizon_for("A")
    tallies = {det: accumulate(spec, det, horizon=horizon).expected_intensity for det in ("A", "B", "C+D")}
    row = (N % n1 == 0, N % n2 == 0, N % n4 == 0)
    return Table1Report(N, (n1, n2, n4), horizon, horizon / 8, tallies, row)


# -- JSON configuration ------------------------------------------------------

def node_from_dict(data, where: str = "root") -> CascadeNode:
    if not isinstance(data, dict):
        raise CascadeConfigError("expected an object with label, n, bright, dark", where)
    unknown = set(data) - {"label", "n", "bright", "dark", "delay"}
    if unknown:
        raise CascadeConfigError(f"unknown field(s) {sorted(unknown)}", where)
    for key in ("label", "n", "bright", "dark"):
        if key not in data:
            raise CascadeConfigError(f"missing field {key!r}", where)
    if not isinstance(data["label"], str):
        raise CascadeConfigError("label must be a string", f"{where}.label")
    n = data["n"]
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise CascadeConfigError(f"n must be a positive integer, got {n!r}", f"{where}.n")
    delay = data.get("delay", 0)
    if isinstance(delay, bool) or not isinstance(delay, int) or delay < 0:
        raise CascadeConfigError(f"delay must be a non-negative integer, got {delay!r}", f"{where}.delay")

    def child(key):
        value = data[key]
        if isinstance(value, str):
            return value
        return node_from_dict(value, f"{where}.{key}")

    return CascadeNode(data["label"], n, child("bright"), child("dark"), delay)


def node_to_dict(node: CascadeNode) -> dict:
    def child(c):
        return c if isinstance(c, str) else node_to_dict(c)

    return {
        "label": node.label,
        "n": node.n,
        "bright": child(node.bright),
        "dark": child(node.dark),
        "delay": node.start_delay,
    }


def spec_from_json(text: str, N: Optional[int] = None, sum_horizon=None) -> CascadeSpec:
    """Parse a cascade file.

    The document is either a bare loop object or ``{"N": ..., "horizon":
    ..., "root": {...}}``; explicit arguments override file values.
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CascadeConfigError(exc.msg, f"line {exc.lineno} column {exc.colno}") from None
    if isinstance(data, dict) and "root" in data:
        unknown = set(data) - {"N", "horizon", "root", "comment"}
        if unknown:
            raise CascadeConfigError(f"unknown field(s) {sorted(unknown)}", "<top>")
        root = node_from_dict(data["root"])
        N = N if N is not None else data.get("N")
        sum_horizon = sum_horizon if sum_horizon is not None else data.get("horizon", "max")
    else:
        root = node_from_dict(data)
    if N is None:
        raise CascadeConfigError("N not given in file or on the command line", "N")
    if isinstance(N, bool) or not isinstance(N, int):
        raise CascadeConfigError(f"N must be an integer, got {N!r}", "N")
    return CascadeSpec(root, N, "max" if sum_horizon is None else sum_horizon)


def spec_to_json(spec: CascadeSpec) -> str:
    return json.dumps(
        {"N": spec.N, "horizon": spec.sum_horizon, "root": node_to_dict(spec.root)}, indent=2
    )
