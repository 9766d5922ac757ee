"""Omniscience rate, unconstrained capacity, tree packing and the upper envelope."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from . import bounds as bd
from . import lp as lpmod
from .model import Hypergraph, cond_entropy, entropy, format_rational, is_pin, members, weight_function
from .partitions import check_limit

_ZERO = Fraction(0)
DEFAULT_TREE_CAP = 10**5


class NotPin(ValueError):
    code = "NotPin"


class TreeCapExceeded(ValueError):
    code = "TreeCapExceeded"


class DisconnectedSupport(ValueError):
    """The support graph is disconnected, so the packing value (and capacity) is 0."""

    code = "DisconnectedSupport"


@dataclass
class CapacityProfile:
    H_total: Fraction
    R_CO: Fraction
    CS_inf: Fraction
    r: list[Fraction]
    best_slope: Fraction | None
    best_kind: str | None = None

    def envelope(self, R) -> Fraction:
        """``min(best_slope * R, CS_inf)``; a vacuous slope leaves only ``CS_inf``."""
        R = Fraction(R)
        if R < 0:
            raise ValueError("discussion rate must be nonnegative")
        if self.best_slope is None:
            return self.CS_inf
        return min(self.best_slope * R, self.CS_inf)

    @property
    def R_S(self) -> Fraction | None:
        """Smallest R at which the envelope reaches ``CS_inf``."""
        if self.best_slope is None:
            return None
        if self.CS_inf == 0:
            return _ZERO
        if self.best_slope == 0:
            return None
        return self.CS_inf / self.best_slope

    def to_dict(self) -> dict:
        f = format_rational
        return {
            "H_total": f(self.H_total),
            "R_CO": f(self.R_CO),
            "CS_inf": f(self.CS_inf),
            "r": [f(x) for x in self.r],
            "best_slope": "vacuous" if self.best_slope is None else f(self.best_slope),
            "best_kind": self.best_kind,
            "R_S": None if self.R_S is None else f(self.R_S),
        }


# ------------------------------------------------------------------ omniscience

def rco(hg: Hypergraph, limit: int | None = None) -> tuple[Fraction, list[Fraction]]:
    """Minimum total omniscience rate and one optimal rate vector.

    Solved by adding violated Slepian-Wolf constraints to a small LP until
    the optimum satisfies all ``2^m - 2`` of them; the answer is the optimum
    of the full program.
    """
    check_limit(hg.m, limit)
    m, full = hg.m, hg.full
    need = {b: cond_entropy(hg, b) for b in range(1, full)}
    active = sorted({1 << i for i in range(m)} | {full & ~(1 << i) for i in range(m)})
    while True:
        prog = lpmod.LinearProgram(m, [1] * m, "min", lower=[None] * m)
        for b in active:
            prog.add_sparse({v - 1: 1 for v in members(b)}, ">=", need[b])
        sol = lpmod.solve(prog)
        assert sol.optimal, sol.status
        r = sol.x
        violated = [b for b, h in need.items() if sum((r[v - 1] for v in members(b)), _ZERO) < h]
        if not violated:
            return sol.value, r
        active = sorted(set(active) | set(violated))


def cs_infinity(hg: Hypergraph, limit: int | None = None) -> Fraction:
    return entropy(hg, hg.full) - rco(hg, limit)[0]


def omniscience_profile(hg: Hypergraph, slope: Fraction | None, kind: str | None, limit: int | None = None) -> CapacityProfile:
    value, r = rco(hg, limit)
    h = entropy(hg, hg.full)
    return CapacityProfile(h, value, h - value, r, slope, kind)


def pin_capacity_curve(hg: Hypergraph, limit: int | None = None) -> CapacityProfile:
    """Exact capacity curve of a PIN: ``min(R/(m-2), C_S(inf))``."""
    if not is_pin(hg):
        raise NotPin("every edge must join exactly two vertices")
    return omniscience_profile(hg, Fraction(1, hg.m - 2), bd.EP, limit)


# ------------------------------------------------------------------ trees

@dataclass
class TreePacking:
    trees: list[tuple[int, ...]]  # each tree: sorted pair bitmasks
    eta: list[Fraction]

    @property
    def value(self) -> Fraction:
        return sum(self.eta, _ZERO)

    def load(self) -> dict[int, Fraction]:
        out: dict[int, Fraction] = {}
        for tree, eta in zip(self.trees, self.eta):
            for pair in tree:
                out[pair] = out.get(pair, _ZERO) + eta
        return out

    def is_feasible(self, hg: Hypergraph) -> bool:
        c = weight_function(hg)
        if any(e < 0 for e in self.eta):
            return False
        if not all(is_spanning_tree(hg.m, t) for t in self.trees):
            return False
        return all(load <= c.get(pair, _ZERO) for pair, load in self.load().items())

    def to_dict(self) -> dict:
        return {
            "value": format_rational(self.value),
            "trees": [
                {"edges": [members(p) for p in t], "eta": format_rational(e)}
                for t, e in zip(self.trees, self.eta)
            ],
        }


def _pair_key(pair: int) -> tuple[int, ...]:
    return tuple(members(pair))


class _DSU:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self.parent[rb] = ra
        return True


def _connected(m: int, pairs: Sequence[int]) -> bool:
    dsu = _DSU(m)
    comps = m
    for p in pairs:
        u, v = members(p)
        if dsu.union(u - 1, v - 1):
            comps -= 1
    return comps == 1


def is_spanning_tree(m: int, pairs: Sequence[int]) -> bool:
    return len(pairs) == m - 1 and _connected(m, pairs)


def spanning_trees(m: int, pairs: Sequence[int], cap: int = DEFAULT_TREE_CAP) -> list[tuple[int, ...]]:
    """All spanning trees of the simple graph on ``pairs``.

    Branches on each edge in turn: keep it (contracting its endpoints) or drop
    it, pruning a drop that disconnects the remaining graph.
    """
    pairs = sorted(set(pairs), key=_pair_key)
    if not _connected(m, pairs):
        return []
    out: list[tuple[int, ...]] = []

    def rec(k: int, chosen: list[int]) -> None:
        if len(chosen) == m - 1:
            out.append(tuple(chosen))
            if len(out) > cap:
                raise TreeCapExceeded(f"more than {cap} spanning trees")
            return
        if k == len(pairs):
            return
        p = pairs[k]
        dsu = _DSU(m)
        for q in chosen:
            u, v = members(q)
            dsu.union(u - 1, v - 1)
        u, v = members(p)
        if dsu.find(u - 1) != dsu.find(v - 1):
            rec(k + 1, chosen + [p])
        rest = chosen + pairs[k + 1:]
        if _connected(m, rest):
            rec(k + 1, chosen)

    rec(0, [])
    return out


def tree_packing_number(hg: Hypergraph, tree_cap: int = DEFAULT_TREE_CAP) -> TreePacking:
    """Optimal fractional packing of spanning trees under pair capacities ``c(B)``."""
    if not is_pin(hg):
        raise NotPin("tree packing applies to PINs only")
    c = weight_function(hg)
    pairs = list(c)
    trees = spanning_trees(hg.m, pairs, tree_cap)
    if not trees:
        raise DisconnectedSupport("support graph is disconnected; packing value is 0")
    prog = lpmod.LinearProgram(len(trees), [1] * len(trees), "max")
    for pair in sorted(pairs, key=_pair_key):
        prog.add_sparse({j: 1 for j, t in enumerate(trees) if pair in t}, "<=", c[pair])
    sol = lpmod.solve(prog)
    assert sol.optimal
    keep = [(t, e) for t, e in zip(trees, sol.x) if e]
    return TreePacking([t for t, _ in keep], [e for _, e in keep])


# ------------------------------------------------------------------ envelope

def upper_envelope(
    hg: Hypergraph,
    rho_grid: Iterable | None = None,
    limit: int | None = None,
    jobs: int = 1,
):
    """Best of the EP, VP and lamination slopes, capped at ``C_S(inf)``.

    Returns ``(profile, reports)`` where ``reports`` maps bound kind to its
    :class:`~hyperkey.bounds.BoundReport`. Ties go to EP, then VP, then
    lamination.
    """
    ep = bd.ep_bound_tightest(hg, limit)
    vp = bd.vp_bound(hg)
    seeds = [bd.ep_as_lamination(hg, ep.witness)]
    if vp.raw["tau"] is not None:
        seeds.append(bd.vp_as_lamination(hg))
    lam = bd.lamination_bound_search(hg, rho_grid, seeds=seeds, limit=limit, jobs=jobs)
    reports = {bd.EP: ep, bd.VP: vp, bd.LAMINATION: lam}
    best = bd.best_of([ep, vp, lam])
    profile = omniscience_profile(hg, best.slope, best.kind if best.slope is not None else None, limit)
    if is_pin(hg):
        exact = Fraction(1, hg.m - 2)
        if profile.CS_inf > 0 and best.slope != exact:
            raise RuntimeError(f"PIN slope {best.slope} disagrees with exact capacity slope {exact}")
    return profile, reports
