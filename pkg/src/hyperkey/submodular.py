"""Greedy chains, crossing-pair lamination, and the lamination inequality.

Set functions here take a bitmask over the indices of a ground set and return
a :class:`~fractions.Fraction`. A :class:`MassAssignment` is a nonnegative
mass on subsets of a named ground set; its *element weights* are
``w_s = sum of mass over sets containing s``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

from .model import Hypergraph, format_rational, parse_rational, popcount

SetFunction = Callable[[int], Fraction]

MAX_GROUND = 12


class GroundSetTooLarge(ValueError):
    code = "GroundSetTooLarge"


class NegativeWeight(ValueError):
    code = "NegativeWeight"


class NotCrossing(ValueError):
    code = "NotCrossing"


class NotInSupport(ValueError):
    code = "NotInSupport"


@dataclass(frozen=True)
class MassAssignment:
    ground: tuple
    mass: Mapping[int, Fraction] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for b, v in self.mass.items():
            v = Fraction(v)
            if v < 0:
                raise NegativeWeight(f"negative mass {v} on {self.names(b)}")
            if v:
                clean[b] = v
        object.__setattr__(self, "mass", dict(sorted(clean.items())))

    @property
    def size(self) -> int:
        return len(self.ground)

    @property
    def support(self) -> list[int]:
        return list(self.mass)

    def __getitem__(self, subset) -> Fraction:
        return self.mass.get(self.mask(subset), Fraction(0))

    def mask(self, subset) -> int:
        if isinstance(subset, int):
            return subset
        index = {s: k for k, s in enumerate(self.ground)}
        out = 0
        for s in subset:
            out |= 1 << index[s]
        return out

    def names(self, mask: int) -> list:
        return [s for k, s in enumerate(self.ground) if mask >> k & 1]

    def weights(self) -> list[Fraction]:
        w = [Fraction(0)] * self.size
        for b, v in self.mass.items():
            for k in range(self.size):
                if b >> k & 1:
                    w[k] += v
        return w

    def total(self) -> Fraction:
        return sum(self.mass.values(), Fraction(0))

    def objective(self, f: SetFunction) -> Fraction:
        """sum of mu(B) f(B); mass on the empty set is skipped (f normalized)."""
        return sum((v * f(b) for b, v in self.mass.items() if b), Fraction(0))

    def is_chain(self) -> bool:
        sup = self.support
        return not any(crosses(a, b) for i, a in enumerate(sup) for b in sup[i + 1:])

    def is_laminar(self) -> bool:
        sup = self.support
        return not any(crosses(a, b) and a & b for i, a in enumerate(sup) for b in sup[i + 1:])

    def to_dict(self) -> dict:
        return {
            "ground": list(self.ground),
            "mass": [{"set": self.names(b), "value": format_rational(v)} for b, v in self.mass.items()],
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "MassAssignment":
        ground = tuple(data["ground"])
        if len(set(ground)) != len(ground):
            raise ValueError("ground elements must be distinct")
        proto = cls(ground)
        mass: dict[int, Fraction] = {}
        for item in data.get("mass", []):
            b = proto.mask(item["set"])
            mass[b] = mass.get(b, Fraction(0)) + parse_rational(item["value"])
        return cls(ground, mass)

    @classmethod
    def loads(cls, text: str) -> "MassAssignment":
        return cls.from_dict(json.loads(text))


def crosses(b1: int, b2: int) -> bool:
    """True when ``{b1, b2} != {b1 & b2, b1 | b2}``, i.e. neither contains the other."""
    inter = b1 & b2
    return inter != b1 and inter != b2


def is_submodular(f: SetFunction, n: int):
    """Exhaustive check over a ground set of size ``n``.

    Returns ``(True, None)`` or ``(False, (B1, B2))`` with a violating pair.
    Uses the equivalent local form ``f(A+i) + f(A+j) >= f(A) + f(A+i+j)``, so
    the witness is always a pair differing in one element each.
    """
    if n > MAX_GROUND:
        raise GroundSetTooLarge(f"ground set of size {n} exceeds {MAX_GROUND}")
    values = [f(b) for b in range(1 << n)]
    for a in range(1 << n):
        free = [k for k in range(n) if not a >> k & 1]
        for x, i in enumerate(free):
            ai = a | 1 << i
            for j in free[x + 1:]:
                aj = a | 1 << j
                if values[ai] + values[aj] < values[a] + values[ai | aj]:
                    return False, (ai, aj)
    return True, None


def greedy_chain(weights: Sequence, ground: Sequence | None = None) -> MassAssignment:
    """Optimal mass for ``min sum mu(B) f(B)`` subject to element weights ``weights``.

    Elements are ordered by decreasing weight, ties by ground index; each
    prefix ``S_j`` gets the drop ``w_{s_j} - w_{s_{j+1}}`` and the full set gets
    the smallest weight.
    """
    w = [Fraction(x) for x in weights]
    if any(x < 0 for x in w):
        raise NegativeWeight("greedy chain needs nonnegative weights")
    ground = tuple(ground) if ground is not None else tuple(range(len(w)))
    order = sorted(range(len(w)), key=lambda k: (-w[k], k))
    mass: dict[int, Fraction] = {}
    prefix = 0
    for pos, k in enumerate(order):
        prefix |= 1 << k
        nxt = w[order[pos + 1]] if pos + 1 < len(order) else Fraction(0)
        if w[k] - nxt:
            mass[prefix] = w[k] - nxt
    return MassAssignment(ground, mass)


def laminate_step(mu: MassAssignment, b1, b2) -> MassAssignment:
    """Move ``min(mu(B1), mu(B2))`` from ``B1, B2`` onto ``B1 & B2`` and ``B1 | B2``."""
    b1, b2 = mu.mask(b1), mu.mask(b2)
    if b1 not in mu.mass or b2 not in mu.mass:
        raise NotInSupport("both sets must carry positive mass")
    if not crosses(b1, b2):
        raise NotCrossing("sets are nested")
    delta = min(mu.mass[b1], mu.mass[b2])
    mass = dict(mu.mass)
    mass[b1] -= delta
    mass[b2] -= delta
    for b in (b1 & b2, b1 | b2):
        mass[b] = mass.get(b, Fraction(0)) + delta
    return MassAssignment(mu.ground, mass)


def _first_crossing(mu: MassAssignment):
    sup = mu.support
    for i, a in enumerate(sup):
        for b in sup[i + 1:]:
            if crosses(a, b):
                return a, b
    return None


def laminate(mu: MassAssignment, trace: list | None = None) -> MassAssignment:
    """Apply crossing-pair steps until the support is a chain.

    Pairs are picked by scanning the support in increasing bitmask order and
    the scan restarts after every step. When ``trace`` is a list, each step is
    appended to it as ``(B1, B2, delta)``.
    """
    while True:
        pair = _first_crossing(mu)
        if pair is None:
            return mu
        if trace is not None:
            trace.append((pair[0], pair[1], min(mu.mass[pair[0]], mu.mass[pair[1]])))
        mu = laminate_step(mu, *pair)


# ------------------------------------------------------------ the inequality

@dataclass
class LaminationCheck:
    holds: bool
    left: Fraction
    right: Fraction
    laminated: MassAssignment

    @property
    def slack(self) -> Fraction:
        return self.left - self.right


def node_ground(hg: Hypergraph) -> tuple:
    """Ground set ``N = V u E``: vertices as ints, then edge labels."""
    return tuple(range(1, hg.m + 1)) + tuple(hg.labels)


def verify_lamination_inequality(hg: Hypergraph, zero_edges: Iterable[str], mu: MassAssignment) -> LaminationCheck:
    """Check ``sum mu(B) H(Y0|Y_B) >= sum mu*(B) H(Y0|Y_{B - 0})`` in closed form.

    ``mu`` lives on ``N = V u E`` (see :func:`node_ground`). ``Y0`` is the joint
    of the edge variables named in ``zero_edges``; vertex variables carry no
    entropy and edge variables carry their edge weights, so every conditional
    entropy is a sum of edge weights. ``mu*`` is the lamination of ``mu``
    lifted onto ``{0} u N``.
    """
    ground = node_ground(hg)
    if tuple(mu.ground) != ground:
        raise ValueError("mass must be over the vertices followed by the edge labels")
    m = hg.m
    zero = [hg.edge_index(lb) for lb in zero_edges]
    weight = [e.weight for e in hg.edges]

    def h0_given(b: int) -> Fraction:
        # bits 0..m-1 are vertices, bit m+k is edge k
        return sum((weight[k] for k in zero if not b >> (m + k) & 1), Fraction(0))

    left = sum((v * h0_given(b) for b, v in mu.mass.items()), Fraction(0))

    # element 0 sits at bit 0; every lifted set contains it, as do their meets and joins
    lifted = MassAssignment((0,) + ground, {(b << 1) | 1: v for b, v in mu.mass.items()})
    star = laminate(lifted)
    right = sum((v * h0_given(b >> 1) for b, v in star.mass.items() if b & 1), Fraction(0))
    return LaminationCheck(left >= right, left, right, star)


def modular(values: Sequence) -> SetFunction:
    vals = [Fraction(v) for v in values]
    return lambda b: sum((vals[k] for k in range(len(vals)) if b >> k & 1), Fraction(0))


def cardinality(g: Callable[[int], object]) -> SetFunction:
    return lambda b: Fraction(g(popcount(b)))
