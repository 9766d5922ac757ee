"""Hypergraphical sources: validation, weight function and closed-form entropies.

Vertices are ``1..m``. Vertex subsets are carried around as integer bitmasks
where vertex ``i`` occupies bit ``i - 1``; helpers convert to and from plain
Python sets for display and I/O.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Sequence

MAX_VERTICES = 30


class SourceError(ValueError):
    """Structured rejection of a source description.

    ``code`` is a stable identifier (e.g. ``"FullCoverEdge"``) suitable for
    machine consumption; the message is for humans.
    """

    code = "SourceError"

    def __init__(self, message: str):
        super().__init__(f"{self.code}: {message}")


class ZeroWeightEdge(SourceError):
    code = "ZeroWeightEdge"


class FullCoverEdge(SourceError):
    code = "FullCoverEdge"


class EmptyEdgeSet(SourceError):
    code = "EmptyEdgeSet"


class TooFewVertices(SourceError):
    code = "TooFewVertices"


class EmptyIncidence(SourceError):
    code = "EmptyIncidence"


class DuplicateLabel(SourceError):
    code = "DuplicateLabel"


class MalformedSource(SourceError):
    code = "MalformedSource"


# ---------------------------------------------------------------- rationals

def parse_rational(value) -> Fraction:
    """Parse ``"p/q"``, an integer, or an integer-valued string into a Fraction.

    Floats are refused: the file format is bit-exact.
    """
    if isinstance(value, bool):
        raise MalformedSource(f"not a rational: {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, Fraction):
        return value
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError):
            pass
    raise MalformedSource(f"not a rational: {value!r}")


def format_rational(q: Fraction) -> str:
    q = Fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


# ---------------------------------------------------------------- bitmasks

def mask_of(vertices: Iterable[int]) -> int:
    mask = 0
    for v in vertices:
        mask |= 1 << (v - 1)
    return mask


def members(mask: int) -> list[int]:
    """Vertices (1-based) in ``mask``, ascending."""
    out = []
    i = 1
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return out


def popcount(mask: int) -> int:
    return bin(mask).count("1")


def full_mask(m: int) -> int:
    return (1 << m) - 1


def proper_subsets(m: int) -> Iterator[int]:
    """Nonempty proper subsets of ``{1..m}`` in increasing bitmask order."""
    return iter(range(1, full_mask(m)))


def fmt_set(mask: int) -> str:
    return "{" + ",".join(str(v) for v in members(mask)) + "}"


# ---------------------------------------------------------------- source

@dataclass(frozen=True)
class Edge:
    label: str
    mask: int
    weight: Fraction

    @property
    def verts(self) -> list[int]:
        return members(self.mask)


@dataclass(frozen=True)
class Hypergraph:
    """A validated hypergraphical source ``(V, E, xi, c)``.

    Edge identity is its position in ``edges``; parallel edges are allowed.
    Build instances through :func:`validate` rather than directly.
    """

    m: int
    edges: tuple[Edge, ...]

    @property
    def full(self) -> int:
        return full_mask(self.m)

    @property
    def labels(self) -> list[str]:
        return [e.label for e in self.edges]

    def edge(self, label: str) -> Edge:
        for e in self.edges:
            if e.label == label:
                return e
        raise KeyError(label)

    def edge_index(self, label: str) -> int:
        for k, e in enumerate(self.edges):
            if e.label == label:
                return k
        raise KeyError(label)

    def incident(self, vertex: int) -> list[int]:
        """Indices of edges incident to ``vertex``."""
        bit = 1 << (vertex - 1)
        return [k for k, e in enumerate(self.edges) if e.mask & bit]

    def to_dict(self) -> dict:
        return {
            "vertices": self.m,
            "edges": [
                {"label": e.label, "verts": e.verts, "weight": format_rational(e.weight)}
                for e in self.edges
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def scaled(self, factor) -> "Hypergraph":
        factor = Fraction(factor)
        return validate(self.m, [(e.label, e.verts, e.weight * factor) for e in self.edges])


def validate(m: int, edges: Sequence) -> Hypergraph:
    """Check a raw description and return a :class:`Hypergraph`.

    ``edges`` is a sequence of ``(label, verts, weight)`` triples, where
    ``weight`` is anything :func:`parse_rational` accepts.
    """
    if isinstance(m, bool) or not isinstance(m, int):
        raise MalformedSource(f"vertex count must be an integer, got {m!r}")
    if m < 3:
        raise TooFewVertices(f"need at least 3 vertices, got {m}")
    if m > MAX_VERTICES:
        raise MalformedSource(f"at most {MAX_VERTICES} vertices supported, got {m}")
    if not edges:
        raise EmptyEdgeSet("a source needs at least one edge")

    full = full_mask(m)
    seen: set[str] = set()
    out = []
    for item in edges:
        try:
            label, verts, weight = item
        except (TypeError, ValueError):
            raise MalformedSource(f"edge must be (label, verts, weight): {item!r}") from None
        label = str(label)
        if label in seen:
            raise DuplicateLabel(f"edge label {label!r} repeated")
        seen.add(label)
        verts = list(verts)
        if not verts:
            raise EmptyIncidence(f"edge {label!r} has no incident vertex")
        for v in verts:
            if isinstance(v, bool) or not isinstance(v, int) or not 1 <= v <= m:
                raise MalformedSource(f"edge {label!r}: vertex {v!r} not in 1..{m}")
        w = parse_rational(weight)
        if w <= 0:
            raise ZeroWeightEdge(f"edge {label!r} has non-positive weight {format_rational(w)}")
        mask = mask_of(verts)
        if mask == full:
            raise FullCoverEdge(f"edge {label!r} covers every vertex")
        out.append(Edge(label, mask, w))
    return Hypergraph(m, tuple(out))


def from_dict(data: Mapping) -> Hypergraph:
    if not isinstance(data, Mapping):
        raise MalformedSource("source must be a JSON object")
    if "vertices" not in data or "edges" not in data:
        raise MalformedSource("source needs 'vertices' and 'edges'")
    raw = data["edges"]
    if not isinstance(raw, list):
        raise MalformedSource("'edges' must be a list")
    edges = []
    for k, e in enumerate(raw):
        if not isinstance(e, Mapping) or "verts" not in e:
            raise MalformedSource(f"edge #{k} needs at least 'verts'")
        edges.append((e.get("label", f"e{k}"), e["verts"], e.get("weight", 1)))
    return validate(data["vertices"], edges)


def loads(text: str) -> Hypergraph:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedSource(f"invalid JSON: {exc}") from None
    return from_dict(data)


def load(path) -> Hypergraph:
    with open(path) as fh:
        return loads(fh.read())


# ---------------------------------------------------------------- functionals

def is_pin(hg: Hypergraph) -> bool:
    return all(popcount(e.mask) == 2 for e in hg.edges)


def weight_function(hg: Hypergraph) -> dict[int, Fraction]:
    """Map each support set ``B`` (bitmask) to ``c(B)``, the total weight of edges on ``B``.

    Only sets with positive weight appear, so the keys are exactly the support.
    """
    c: dict[int, Fraction] = {}
    for e in hg.edges:
        c[e.mask] = c.get(e.mask, Fraction(0)) + e.weight
    return dict(sorted(c.items()))


def entropy(hg: Hypergraph, subset: int) -> Fraction:
    """H(Z_B): total weight of edges meeting ``subset``."""
    return sum((e.weight for e in hg.edges if e.mask & subset), Fraction(0))


def cond_entropy(hg: Hypergraph, subset: int) -> Fraction:
    """H(Z_B | Z_{V\\B}): total weight of edges lying inside ``subset``."""
    return sum((e.weight for e in hg.edges if e.mask & ~subset == 0), Fraction(0))
