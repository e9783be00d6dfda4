"""
Shared domain models for glassbound.

This module contains the immutable value types passed between services:
network specifications, box labels, walls, fractional-linear maps, cones,
cycle words and the graphs built from them.
"""
import hashlib
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

import networkx as nx
import numpy as np

from shared.constants import BIT_CHARS, CONDITION_UNIFORM_DECAY, EDGE_SEPARATOR, ERRORS, NO_CONTEXT
from shared.exceptions import DenominatorSignError, SpecError
from shared import rational


@dataclass(frozen=True, order=True)
class BoxLabel:
    """Sign pattern of a box; bit 1 means y_i > 0, most significant bit is y_1."""
    bits: Tuple[int, ...]

    @classmethod
    def from_string(cls, text: str, n: Optional[int] = None) -> "BoxLabel":
        if not isinstance(text, str) or not text or any(c not in BIT_CHARS for c in text):
            raise SpecError(f"{ERRORS['BAD_BITSTRING']}: {text!r}")
        if n is not None and len(text) != n:
            raise SpecError(f"{ERRORS['DIMENSION_MISMATCH']}: {text!r} is not a {n}-bit label")
        return cls(tuple(int(c) for c in text))

    @classmethod
    def from_index(cls, index: int, n: int) -> "BoxLabel":
        return cls(tuple((index >> (n - 1 - i)) & 1 for i in range(n)))

    @property
    def n(self) -> int:
        return len(self.bits)

    @property
    def index(self) -> int:
        value = 0
        for b in self.bits:
            value = (value << 1) | b
        return value

    def sign(self, i: int) -> int:
        return 1 if self.bits[i] else -1

    def flip(self, i: int) -> "BoxLabel":
        bits = list(self.bits)
        bits[i] = 1 - bits[i]
        return BoxLabel(tuple(bits))

    def __str__(self):
        return "".join(str(b) for b in self.bits)

    def __repr__(self):
        return f"BoxLabel('{self}')"


Edge = Tuple[BoxLabel, BoxLabel]


def parse_edge(text: str, n: Optional[int] = None) -> Edge:
    """Parse a "FROM>TO" bitstring pair."""
    parts = text.split(EDGE_SEPARATOR) if isinstance(text, str) else []
    if len(parts) != 2:
        raise SpecError(f"starting edge must look like 1111{EDGE_SEPARATOR}1110, got {text!r}")
    return BoxLabel.from_string(parts[0].strip(), n), BoxLabel.from_string(parts[1].strip(), n)


def format_edge(edge: Edge) -> str:
    return f"{edge[0]}{EDGE_SEPARATOR}{edge[1]}"


@dataclass(frozen=True)
class TrapDefinition:
    """Named cycle set carried by a network document."""
    edge: Edge
    cycles: Tuple[Tuple[str, Tuple[BoxLabel, ...]], ...]


@dataclass(frozen=True)
class NetworkSpec:
    """A Glass network with all thresholds translated to 0.

    gamma is indexed by BoxLabel.index and holds the production vector of
    every box.
    """
    n: int
    decay: rational.Vector
    gamma: Tuple[rational.Vector, ...]
    name: Optional[str] = None
    trap: Optional[TrapDefinition] = None

    def boxes(self) -> List[BoxLabel]:
        return [BoxLabel.from_index(i, self.n) for i in range(2 ** self.n)]

    def production(self, a: BoxLabel) -> rational.Vector:
        if a.n != self.n:
            raise SpecError(f"{ERRORS['DIMENSION_MISMATCH']}: box {a} in a {self.n}-variable network")
        return self.gamma[a.index]

    @property
    def uniform_decay(self) -> bool:
        return all(d == self.decay[0] for d in self.decay)

    def digest(self) -> str:
        """Stable content hash used for provenance."""
        h = hashlib.sha256()
        h.update(str(self.n).encode())
        for d in self.decay:
            h.update(rational.format_rational(d).encode() + b";")
        for row in self.gamma:
            h.update(",".join(rational.format_rational(x) for x in row).encode() + b";")
        return h.hexdigest()


@dataclass(frozen=True)
class FocalPoint:
    coords: rational.Vector

    def sign(self, i: int) -> int:
        return 1 if self.coords[i] > 0 else -1

    def __getitem__(self, i):
        return self.coords[i]

    def __len__(self):
        return len(self.coords)


@dataclass(frozen=True)
class ConditionEntry:
    condition: str
    passed: bool
    offender: Optional[str] = None
    detail: Optional[str] = None


@dataclass(frozen=True)
class ConditionReport:
    entries: Tuple[ConditionEntry, ...]

    @property
    def ok(self) -> bool:
        """True when every non-informational condition passed."""
        return all(e.passed for e in self.entries if e.condition != CONDITION_UNIFORM_DECAY)

    def failures(self) -> List[ConditionEntry]:
        return [e for e in self.entries if not e.passed]


@dataclass(frozen=True)
class WallId:
    """Wall crossed when leaving from_box for to_box along axis."""
    from_box: BoxLabel
    to_box: BoxLabel
    axis: int
    direction: int

    @classmethod
    def between(cls, a: BoxLabel, b: BoxLabel) -> "WallId":
        diff = [i for i in range(a.n) if a.bits[i] != b.bits[i]] if a.n == b.n else []
        if len(diff) != 1:
            raise SpecError(f"boxes {a} and {b} are not adjacent")
        axis = diff[0]
        return cls(a, b, axis, 1 if b.bits[axis] else -1)

    @property
    def n(self) -> int:
        return self.from_box.n

    @property
    def dimension(self) -> int:
        return self.n - 1

    def orthant_signs(self) -> Tuple[int, ...]:
        """Signs of the reduced coordinates on this wall."""
        return tuple(self.to_box.sign(i) for i in range(self.n) if i != self.axis)

    def orthant_rows(self) -> rational.Matrix:
        d = self.dimension
        return tuple(rational.unit(d, j, s) for j, s in enumerate(self.orthant_signs()))

    def label(self) -> str:
        """Sign pattern with the crossing axis shown as 0, e.g. "+++0"."""
        return "".join("0" if i == self.axis else ("+" if self.to_box.bits[i] else "-")
                       for i in range(self.n))

    def __str__(self):
        return format_edge((self.from_box, self.to_box))


@dataclass(frozen=True)
class FracLinMap:
    """Fractional-linear map y -> B y / (1 + psi.y)."""
    B: rational.Matrix
    psi: rational.Vector
    exit_axis: Optional[int] = None

    @property
    def dimension(self) -> int:
        return len(self.psi)

    def denominator(self, y) -> Fraction:
        return 1 + rational.dot(self.psi, y)

    def apply(self, y) -> rational.Vector:
        den = self.denominator(y)
        if den <= 0:
            raise DenominatorSignError(ERRORS["DENOMINATOR_SIGN"], {"denominator": str(den)})
        return tuple(x / den for x in rational.mat_vec(self.B, y))

    def reduce(self, axis: int) -> "FracLinMap":
        """Delete the given row and column, giving a map on wall coordinates."""
        return FracLinMap(rational.delete_row_col(self.B, axis), rational.delete_index(self.psi, axis), None)


@dataclass(frozen=True)
class WallPoint:
    wall: WallId
    y: tuple

    def reduced(self) -> tuple:
        return tuple(x for i, x in enumerate(self.y) if i != self.wall.axis)


@dataclass(frozen=True)
class CycleWord:
    """A first-return cycle, or a concatenation of them, through starting_edge.

    boxes runs from the box entered across the starting edge to the box the
    starting edge leaves, so the closing transition is the starting edge.
    """
    boxes: Tuple[BoxLabel, ...]
    starting_edge: Edge
    label: str
    parts: Tuple[str, ...] = ()

    def __post_init__(self):
        if not self.parts:
            object.__setattr__(self, "parts", (self.label,))

    @property
    def length(self) -> int:
        return len(self.boxes)

    @property
    def wall(self) -> WallId:
        return WallId.between(*self.starting_edge)

    def edges(self) -> List[Edge]:
        """Transitions in traversal order, closing with the starting edge."""
        m = len(self.boxes)
        return [(self.boxes[k], self.boxes[(k + 1) % m]) for k in range(m)]

    @classmethod
    def concat(cls, words) -> "CycleWord":
        words = list(words)
        if not words:
            raise SpecError("cannot concatenate an empty word list")
        edge = words[0].starting_edge
        if any(w.starting_edge != edge for w in words):
            raise SpecError("concatenated cycles must share a starting edge")
        boxes = tuple(b for w in words for b in w.boxes)
        parts = tuple(p for w in words for p in w.parts)
        return cls(boxes, edge, "".join(parts), parts)

    def __str__(self):
        return self.label


@dataclass(frozen=True)
class Cone:
    """Polyhedral cone {y : ineqs y >= 0} on a wall, with its extremal rays.

    The first wall.dimension rows of ineqs are the wall's orthant constraints.
    """
    wall: WallId
    ineqs: rational.Matrix
    rays: Tuple[rational.Vector, ...]

    @property
    def dimension(self) -> int:
        return self.wall.dimension

    @property
    def rows(self) -> rational.Matrix:
        """Constraints beyond the wall orthant."""
        return self.ineqs[self.dimension:]

    def contains_point(self, y) -> bool:
        return all(rational.dot(row, y) >= 0 for row in self.ineqs)


@dataclass
class TrappingReport:
    starting_edge: Edge
    cycles: Tuple[CycleWord, ...]
    verified: bool
    transient: Tuple[CycleWord, ...]
    empty: Tuple[CycleWord, ...]
    cones: Dict[str, Cone] = field(default_factory=dict)
    witnesses: Dict[str, Cone] = field(default_factory=dict)
    escapes: Tuple[str, ...] = ()

    @property
    def active(self) -> Tuple[CycleWord, ...]:
        removed = {c.label for c in self.transient} | {c.label for c in self.empty}
        return tuple(c for c in self.cycles if c.label not in removed)

    def cycle(self, label: str) -> CycleWord:
        for c in self.cycles:
            if c.label == label:
                return c
        raise SpecError(f"{ERRORS['UNKNOWN_LABEL']}: {label!r}")


@dataclass
class TransitionGraph:
    graph: nx.DiGraph

    @property
    def vertices(self) -> List[BoxLabel]:
        return sorted(self.graph.nodes)

    @property
    def edges(self) -> set:
        return set(self.graph.edges)


@dataclass
class RefinedGraph:
    """Graph over (box, context word) vertices; level 0 uses the empty word."""
    level: int
    graph: nx.DiGraph
    word_index: Dict[str, List[Tuple[BoxLabel, str]]]
    forbidden: Tuple[str, ...] = ()
    transient: Tuple[str, ...] = ()
    extra: Tuple[str, ...] = ()
    n_forbidden: int = 0
    spec: Optional[NetworkSpec] = None
    trap: Optional[TrappingReport] = None

    @property
    def vertices(self) -> List[Tuple[BoxLabel, str]]:
        return sorted(self.graph.nodes)

    @property
    def edges(self) -> set:
        return set(self.graph.edges)

    @property
    def words(self) -> List[str]:
        return sorted(w for w in self.word_index if w != NO_CONTEXT)


@dataclass(frozen=True)
class EntropyLevel:
    label: str
    k: Optional[int]
    entropy: float
    perron: float
    n_forbidden: int
    n_transient: int
    n_vertices: int
    n_edges: int


@dataclass
class Trajectory:
    """Boxes traversed by consecutive wall-to-wall transitions."""
    symbols: np.ndarray
    n: int
    end: Optional[WallPoint]
    terminal: bool = False
    elapsed: float = 0.0

    def __len__(self):
        return len(self.symbols)

    def labels(self) -> List[BoxLabel]:
        return [BoxLabel.from_index(int(s), self.n) for s in self.symbols]


@dataclass(frozen=True)
class FitResult:
    slope: float
    intercept: float
    n_range: Tuple[int, int]
    residual: float
