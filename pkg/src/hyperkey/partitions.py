"""Vertex partitions and the edge-cut ratio used by the edge-partition bound."""

from __future__ import annotations

import os
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

from .model import Hypergraph, fmt_set, mask_of, members

DEFAULT_MAX_M = 12


class LimitExceeded(ValueError):
    code = "LimitExceeded"


def max_m() -> int:
    """Enumeration limit; ``HYPERKEY_MAX_M`` overrides the default of 12."""
    raw = os.environ.get("HYPERKEY_MAX_M")
    return int(raw) if raw else DEFAULT_MAX_M


def check_limit(m: int, limit: int | None = None) -> None:
    limit = max_m() if limit is None else limit
    if m > limit:
        raise LimitExceeded(f"{m} vertices exceeds the enumeration limit {limit}")


@dataclass(frozen=True)
class Partition:
    """Blocks as bitmasks, sorted by smallest element."""

    blocks: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.blocks)

    @classmethod
    def of(cls, *blocks) -> "Partition":
        masks = [mask_of(b) for b in blocks]
        return cls(tuple(sorted(masks, key=lambda b: b & -b)))

    @classmethod
    def singletons(cls, m: int) -> "Partition":
        return cls(tuple(1 << i for i in range(m)))

    def as_lists(self) -> list[list[int]]:
        return [members(b) for b in self.blocks]

    def __str__(self) -> str:
        return "".join(fmt_set(b) for b in self.blocks)


def enumerate_partitions(m: int, min_blocks: int = 2, limit: int | None = None) -> Iterator[Partition]:
    """Yield every partition of ``{1..m}`` with at least ``min_blocks`` blocks.

    Order is lexicographic in the restricted growth string
    ``a_1 a_2 ... a_m`` (``a_1 = 0``, ``a_{i+1} <= 1 + max(a_1..a_i)``), which
    is duplicate-free and fixes the tie-breaking order used downstream.
    """
    check_limit(m, limit)
    if m < 1:
        return
    rgs = [0] * m

    def rec(i: int, top: int) -> Iterator[Partition]:
        # top: number of blocks used by rgs[:i]
        if top + (m - i) < min_blocks:
            return
        if i == m:
            blocks = [0] * top
            for v, a in enumerate(rgs):
                blocks[a] |= 1 << v
            yield Partition(tuple(blocks))
            return
        for a in range(top + 1):
            rgs[i] = a
            yield from rec(i + 1, max(top, a + 1))

    yield from rec(1, 1)


def cut_count(hg: Hypergraph, partition: Partition) -> int:
    """max over edges of the number of blocks the edge meets."""
    return max(sum(1 for b in partition.blocks if e.mask & b) for e in hg.edges)


def alpha(hg: Hypergraph, partition: Partition) -> Fraction:
    if len(partition) < 2:
        raise ValueError("partition needs at least two blocks")
    return Fraction(cut_count(hg, partition) - 1, len(partition) - 1)
