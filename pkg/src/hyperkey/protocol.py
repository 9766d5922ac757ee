"""Exact verification of linear GF(2) key-agreement schemes.

Each source bit ``X_{e,b,t}`` (edge ``e``, bit ``b < weight(e)``, time
``t < n``) is one GF(2) variable, indexed lexicographically by
``(t, edge index, b)``. Messages and key bits are linear forms over these
variables, stored as Python ints used as bit vectors.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Iterable, Mapping, Sequence

from . import model
from .capacity import NotPin, TreePacking, _pair_key, is_spanning_tree
from .model import Hypergraph, format_rational, is_pin, members


class SchemeError(ValueError):
    code = "SchemaError"


class SenderSupportViolated(SchemeError):
    code = "SenderSupportViolated"


class DependentKey(SchemeError):
    code = "DependentKey"


class InfeasiblePacking(ValueError):
    code = "InfeasiblePacking"


class DisconnectedTree(ValueError):
    code = "DisconnectedTree"


# ------------------------------------------------------------------ GF(2)

def gf2_rank(rows: Iterable[int]) -> int:
    basis: dict[int, int] = {}  # leading bit -> row
    for r in rows:
        while r:
            top = r.bit_length() - 1
            if top not in basis:
                basis[top] = r
                break
            r ^= basis[top]
    return len(basis)


def in_span(row: int, basis_rows: Iterable[int]) -> bool:
    rows = list(basis_rows)
    return gf2_rank(rows + [row]) == gf2_rank(rows)


# ------------------------------------------------------------------ source bits

@dataclass(frozen=True)
class BitSource:
    hg: Hypergraph
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise SchemeError("block length must be positive")
        for e in self.hg.edges:
            if e.weight.denominator != 1:
                raise SchemeError(f"edge {e.label!r} has non-integer weight; scale the source first")

    @property
    def per_time(self) -> int:
        return sum(int(e.weight) for e in self.hg.edges)

    @property
    def total_bits(self) -> int:
        return self.per_time * self.n

    def _offsets(self) -> list[int]:
        out, acc = [], 0
        for e in self.hg.edges:
            out.append(acc)
            acc += int(e.weight)
        return out

    def index(self, edge: int, bit: int, t: int) -> int:
        e = self.hg.edges[edge]
        if not 0 <= bit < int(e.weight) or not 0 <= t < self.n:
            raise SchemeError(f"no bit {bit} of edge {e.label!r} at time {t}")
        return t * self.per_time + self._offsets()[edge] + bit

    def var(self, label: str, bit: int = 0, t: int = 0) -> int:
        """Row with a single variable set."""
        try:
            k = self.hg.edge_index(label)
        except KeyError:
            raise SchemeError(f"unknown edge label {label!r}") from None
        return 1 << self.index(k, bit, t)

    def describe(self, index: int) -> tuple[str, int, int]:
        t, rest = divmod(index, self.per_time)
        for k, off in enumerate(self._offsets()):
            w = int(self.hg.edges[k].weight)
            if off <= rest < off + w:
                return self.hg.edges[k].label, rest - off, t
        raise IndexError(index)

    def observed(self, vertex: int) -> int:
        """Mask of every variable user ``vertex`` sees."""
        mask = 0
        for k in self.hg.incident(vertex):
            for t in range(self.n):
                for b in range(int(self.hg.edges[k].weight)):
                    mask |= 1 << self.index(k, b, t)
        return mask

    def row_terms(self, row: int) -> list[dict]:
        out = []
        k = 0
        while row:
            if row & 1:
                label, b, t = self.describe(k)
                out.append({"edge": label, "bit": b, "t": t})
            row >>= 1
            k += 1
        return out


# ------------------------------------------------------------------ schemes

@dataclass(frozen=True)
class LinearScheme:
    source: BitSource
    messages: tuple[tuple[int, int], ...]  # (sender, row)
    key: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "messages", tuple((int(s), int(r)) for s, r in self.messages))
        object.__setattr__(self, "key", tuple(self.key))
        check_sender_support(self)
        if gf2_rank(self.key) != len(self.key):
            raise DependentKey("key rows must be linearly independent")

    @property
    def n(self) -> int:
        return self.source.n

    @property
    def message_rows(self) -> list[int]:
        return [r for _, r in self.messages]

    def to_dict(self, source=None) -> dict:
        src = self.source
        return {
            "source": src.hg.to_dict() if source is None else source,
            "n": src.n,
            "messages": [{"sender": s, "terms": src.row_terms(r)} for s, r in self.messages],
            "key": [src.row_terms(r) for r in self.key],
        }


def check_sender_support(scheme: LinearScheme) -> None:
    src = scheme.source
    for sender, row in scheme.messages:
        if not 1 <= sender <= src.hg.m:
            raise SchemeError(f"sender {sender} is not a vertex")
        if row & ~src.observed(sender):
            raise SenderSupportViolated(f"user {sender} sends bits it does not observe")
        if row >> src.total_bits:
            raise SchemeError("message refers to bits beyond the block")


@dataclass
class SchemeVerdict:
    recoverable: bool
    failing_user: int | None
    secret: bool
    key_bits: int
    discussion_bits: int
    n: int

    @property
    def key_rate(self) -> Fraction:
        return Fraction(self.key_bits, self.n)

    @property
    def discussion_rate(self) -> Fraction:
        return Fraction(self.discussion_bits, self.n)

    @property
    def verified(self) -> bool:
        return self.recoverable and self.secret

    def to_dict(self) -> dict:
        return {
            "recoverable": self.recoverable,
            "failing_user": self.failing_user,
            "secret": self.secret,
            "key_bits": self.key_bits,
            "discussion_bits": self.discussion_bits,
            "n": self.n,
            "key_rate": format_rational(self.key_rate),
            "discussion_rate": format_rational(self.discussion_rate),
        }


def check_recoverability(scheme: LinearScheme) -> tuple[bool, int | None]:
    """Every user must span every key row from its own bits plus all messages."""
    check_sender_support(scheme)
    src = scheme.source
    msgs = scheme.message_rows
    for v in range(1, src.hg.m + 1):
        seen = src.observed(v)
        own = [1 << k for k in range(src.total_bits) if seen >> k & 1]
        base = own + msgs
        r0 = gf2_rank(base)
        for key in scheme.key:
            if gf2_rank(base + [key]) != r0:
                return False, v
    return True, None


def check_perfect_secrecy(scheme: LinearScheme) -> bool:
    """Key uniform and independent of the messages, via rank additivity."""
    msgs = scheme.message_rows
    return gf2_rank(msgs + list(scheme.key)) == gf2_rank(msgs) + gf2_rank(scheme.key)


def scheme_rates(scheme: LinearScheme) -> SchemeVerdict:
    ok, who = check_recoverability(scheme)
    return SchemeVerdict(ok, who, check_perfect_secrecy(scheme), len(scheme.key), len(scheme.messages), scheme.n)


# ------------------------------------------------------------------ tree protocol

def tree_protocol(hg: Hypergraph, packing: TreePacking) -> LinearScheme:
    """Turn a fractional tree packing into an explicit GF(2) scheme.

    With ``L`` the common denominator of the multiplicities, the block length
    is ``L`` and tree ``j`` is used ``eta_j * L`` times, each use drawing fresh
    bits from the pair capacities. Per use, the smallest tree edge carries the
    key bit; rooting at its smaller endpoint, each other tree edge is sent
    XORed with the edge above its upper endpoint.
    """
    if not is_pin(hg):
        raise NotPin("tree protocol applies to PINs only")
    for tree in packing.trees:
        if not is_spanning_tree(hg.m, tree):
            raise DisconnectedTree(f"{[members(p) for p in tree]} is not a spanning tree")
    if not packing.is_feasible(hg):
        raise InfeasiblePacking("packing exceeds a pair capacity")

    L = lcm(*(e.denominator for e in packing.eta)) if packing.eta else 1
    src = BitSource(hg, L)
    pools: dict[int, list[int]] = {}
    for t in range(L):
        for k, e in enumerate(hg.edges):
            for b in range(int(e.weight)):
                pools.setdefault(e.mask, []).append(src.index(k, b, t))
    cursor = {pair: 0 for pair in pools}

    def take(pair: int) -> int:
        idx = pools[pair][cursor[pair]]
        cursor[pair] += 1
        return 1 << idx

    messages: list[tuple[int, int]] = []
    key: list[int] = []
    for tree, eta in zip(packing.trees, packing.eta):
        uses = int(eta * L)
        ordered = sorted(tree, key=_pair_key)
        for _ in range(uses):
            bit = {pair: take(pair) for pair in ordered}
            e0 = ordered[0]
            root = members(e0)[0]
            adj: dict[int, list[int]] = {}
            for pair in ordered:
                u, v = members(pair)
                adj.setdefault(u, []).append(pair)
                adj.setdefault(v, []).append(pair)
            ref = {root: bit[e0]}
            stack = [root]
            while stack:
                u = stack.pop()
                for pair in adj[u]:
                    a, b = members(pair)
                    child = b if a == u else a
                    if child in ref:
                        continue
                    ref[child] = bit[pair]
                    if pair != e0:
                        messages.append((u, bit[pair] ^ ref[u]))
                    stack.append(child)
            key.append(bit[e0])
    return LinearScheme(src, tuple(messages), tuple(key))


# ------------------------------------------------------------------ JSON

def _row_from_terms(src: BitSource, terms: Sequence[Mapping]) -> int:
    row = 0
    for term in terms:
        if not isinstance(term, Mapping) or "edge" not in term:
            raise SchemeError(f"bad term {term!r}")
        bit = term.get("bit", 0)
        t = term.get("t", 0)
        if not isinstance(bit, int) or not isinstance(t, int):
            raise SchemeError(f"bad term {term!r}")
        row ^= src.var(term["edge"], bit, t)
    return row


def scheme_from_dict(data: Mapping, source: Hypergraph | None = None, base_dir: str = ".") -> LinearScheme:
    """Parse the scheme file format.

    ``source`` overrides the file's ``"source"`` entry, which may be an inline
    hypergraph object or a path relative to ``base_dir``.
    """
    if not isinstance(data, Mapping):
        raise SchemeError("scheme must be a JSON object")
    if source is None:
        ref = data.get("source")
        if isinstance(ref, Mapping):
            source = model.from_dict(ref)
        elif isinstance(ref, str):
            source = model.load(os.path.join(base_dir, ref))
        else:
            raise SchemeError("scheme needs a source")
    n = data.get("n")
    if not isinstance(n, int) or isinstance(n, bool):
        raise SchemeError("'n' must be an integer")
    src = BitSource(source, n)
    try:
        messages = [(m["sender"], _row_from_terms(src, m["terms"])) for m in data.get("messages", [])]
        key = [_row_from_terms(src, terms) for terms in data["key"]]
    except (KeyError, TypeError) as exc:
        raise SchemeError(f"malformed scheme: {exc}") from None
    return LinearScheme(src, tuple(messages), tuple(key))


def load_scheme(path, source: Hypergraph | None = None) -> LinearScheme:
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemeError(f"invalid JSON: {exc}") from None
    return scheme_from_dict(data, source, os.path.dirname(os.path.abspath(path)))
