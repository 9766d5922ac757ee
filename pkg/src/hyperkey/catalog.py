"""Built-in sources and hand-written key-agreement schemes."""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations

from .capacity import TreePacking, tree_packing_number
from .model import Hypergraph, mask_of, validate
from .protocol import BitSource, LinearScheme, SchemeVerdict, tree_protocol


def motivating_pin() -> Hypergraph:
    """Path 1 - 2 - 3 with one bit on {1,2} and two parallel bits on {2,3}."""
    return validate(3, [("a", [1, 2], 1), ("b", [2, 3], 1), ("c", [2, 3], 1)])


def triangle() -> Hypergraph:
    return validate(3, [("a", [1, 2], 1), ("b", [2, 3], 1), ("c", [1, 3], 1)])


def receptacle() -> Hypergraph:
    return validate(5, [("a", [1, 2, 3], 1), ("b", [1, 3, 4], 1), ("c", [1, 2, 4], 1), ("d", [1, 5], 1)])


def scoop() -> Hypergraph:
    """Same as :func:`receptacle` but with edge d moved from vertex 1 to vertex 2."""
    return validate(5, [("a", [1, 2, 3], 1), ("b", [1, 3, 4], 1), ("c", [1, 2, 4], 1), ("d", [2, 5], 1)])


def complete_pin(m: int, weight=1) -> Hypergraph:
    edges = [(f"e{i}{j}" if m < 10 else f"e{i}_{j}", [i, j], weight) for i, j in combinations(range(1, m + 1), 2)]
    return validate(m, edges)


def triangle_packing() -> TreePacking:
    half = Fraction(1, 2)
    trees = [
        (mask_of([1, 2]), mask_of([2, 3])),
        (mask_of([1, 2]), mask_of([1, 3])),
        (mask_of([1, 3]), mask_of([2, 3])),
    ]
    return TreePacking(trees, [half, half, half])


def _scheme(hg: Hypergraph, n: int, messages, key) -> LinearScheme:
    src = BitSource(hg, n)

    def row(terms):
        r = 0
        for label, t in terms:
            r ^= src.var(label, 0, t)
        return r

    return LinearScheme(src, tuple((s, row(ts)) for s, ts in messages), tuple(row(ts) for ts in key))


def scheme_3_1() -> LinearScheme:
    # user 2 reveals a xor b; user 3 recovers a from its own b
    return _scheme(motivating_pin(), 1, [(2, [("a", 0), ("b", 0)])], [[("a", 0)]])


def scheme_4_5() -> LinearScheme:
    return _scheme(
        receptacle(),
        2,
        [
            (1, [("a", 0), ("d", 0)]),
            (1, [("c", 0), ("d", 1)]),
            (1, [("a", 0), ("b", 0), ("d", 1)]),
        ],
        [[("d", 0)], [("d", 1)]],
    )


def scheme_4_8() -> LinearScheme:
    return _scheme(
        scoop(),
        2,
        [
            (1, [("a", 0), ("b", 0), ("c", 0)]),
            (2, [("a", 0), ("d", 1)]),
            (2, [("c", 0), ("d", 0)]),
        ],
        [[("d", 0)], [("d", 1)]],
    )


def builtin_examples() -> dict[str, tuple[Hypergraph, LinearScheme, SchemeVerdict]]:
    """The three hand-written schemes with the verdicts they are known to earn."""
    out = {}
    for name, make, n, key_bits, msg_bits in (
        ("example_3_1", scheme_3_1, 1, 1, 1),
        ("example_4_5", scheme_4_5, 2, 2, 3),
        ("example_4_8", scheme_4_8, 2, 2, 3),
    ):
        scheme = make()
        out[name] = (scheme.source.hg, scheme, SchemeVerdict(True, None, True, key_bits, msg_bits, n))
    return out


# ------------------------------------------------------------------ CLI catalog

NAMES = ("example_3_1", "triangle", "receptacle", "complete_pin_m", "scoop")
DEFAULT_COMPLETE_M = 4


def named(name: str, m: int | None = None) -> tuple[Hypergraph, LinearScheme]:
    """Source and scheme for a catalog name.

    ``complete_pin_m`` takes its size from ``m`` (default 4); ``complete_pin_5``
    style names fix it directly.
    """
    if name == "example_3_1":
        return motivating_pin(), scheme_3_1()
    if name == "triangle":
        hg = triangle()
        return hg, tree_protocol(hg, triangle_packing())
    if name == "receptacle":
        return receptacle(), scheme_4_5()
    if name == "scoop":
        return scoop(), scheme_4_8()
    if name.startswith("complete_pin_"):
        tail = name[len("complete_pin_"):]
        if tail != "m":
            if not tail.isdigit():
                raise KeyError(name)
            m = int(tail)
        hg = complete_pin(m or DEFAULT_COMPLETE_M)
        return hg, tree_protocol(hg, tree_packing_number(hg))
    raise KeyError(name)
