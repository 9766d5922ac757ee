"""Upper bounds on the key rate as a function of the discussion rate.

Every bound is reported in slope form, ``C_S(R) <= slope * R``, together with
a witness that reproduces it exactly. A ``slope`` of ``None`` marks a vacuous
bound.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from math import ceil
from typing import Iterable, Mapping, Sequence

from . import lp as lpmod
from .model import Hypergraph, fmt_set, format_rational, mask_of, proper_subsets
from .partitions import Partition, alpha, check_limit, enumerate_partitions

EP, VP, LAMINATION = "EP", "VP", "Lamination"
_ZERO = Fraction(0)


class PackingViolated(ValueError):
    code = "PackingViolated"


class DominanceViolated(ValueError):
    code = "DominanceViolated"


class TauUnbounded(ValueError):
    code = "TauUnbounded"


@dataclass(frozen=True)
class LaminationParams:
    rho: Fraction
    lam: Mapping[int, Fraction] = field(default_factory=dict)
    pi: Mapping[int, Fraction] = field(default_factory=dict)

    @classmethod
    def of(cls, rho, lam: Mapping = (), pi: Mapping = ()) -> "LaminationParams":
        """Build from maps keyed by bitmask or by an iterable of vertices."""

        def norm(d):
            out = {}
            for k, v in dict(d).items():
                key = k if isinstance(k, int) else mask_of(k)
                v = Fraction(v)
                if v:
                    out[key] = out.get(key, _ZERO) + v
            return dict(sorted(out.items()))

        return cls(Fraction(rho), norm(lam), norm(pi))

    def to_dict(self) -> dict:
        return {
            "rho": format_rational(self.rho),
            "lambda": {fmt_set(b): format_rational(v) for b, v in self.lam.items()},
            "pi": {fmt_set(b): format_rational(v) for b, v in self.pi.items()},
        }


@dataclass
class BoundReport:
    kind: str
    slope: Fraction | None
    witness: object
    raw: dict

    @property
    def vacuous(self) -> bool:
        return self.slope is None

    def sort_key(self):
        return (self.slope is None, self.slope if self.slope is not None else _ZERO)

    def to_dict(self) -> dict:
        if isinstance(self.witness, Partition):
            witness = self.witness.as_lists()
        elif isinstance(self.witness, LaminationParams):
            witness = self.witness.to_dict()
        elif self.witness is None:
            witness = None
        else:
            witness = [format_rational(u) for u in self.witness]
        return {
            "kind": self.kind,
            "slope": "vacuous" if self.slope is None else format_rational(self.slope),
            "witness": witness,
            "raw": {k: (None if v is None else format_rational(v)) for k, v in self.raw.items()},
        }


def best_of(reports: Iterable[BoundReport]) -> BoundReport:
    """Smallest slope; the earliest report wins ties."""
    best = None
    for r in reports:
        if best is None or r.sort_key() < best.sort_key():
            best = r
    return best


# ------------------------------------------------------------------ EP

def ep_bound(hg: Hypergraph, partition: Partition) -> BoundReport:
    a = alpha(hg, partition)
    slope = a / (1 - a) if a < 1 else None
    return BoundReport(EP, slope, partition, {"alpha": a})


def ep_bound_tightest(hg: Hypergraph, limit: int | None = None) -> BoundReport:
    best = None
    for p in enumerate_partitions(hg.m, 2, limit):
        rep = ep_bound(hg, p)
        if best is None or rep.sort_key() < best.sort_key():
            best = rep
    return best


# ------------------------------------------------------------------ VP

def _vp_program(hg: Hypergraph) -> lpmod.LinearProgram:
    prog = lpmod.LinearProgram(hg.m, [1] * hg.m, "max")
    for e in hg.edges:
        prog.add_sparse({v - 1: 1 for v in e.verts}, "<=", 1)
    return prog


def vp_tau(hg: Hypergraph):
    """``(tau, u)`` for ``max u(V)`` s.t. ``u(xi(e)) <= 1``; ``(None, None)`` if unbounded."""
    sol = lpmod.solve(_vp_program(hg))
    if sol.status == lpmod.UNBOUNDED:
        return None, None
    return sol.value, sol.x


def vp_tau_unique(hg: Hypergraph) -> bool:
    prog = _vp_program(hg)
    sol = lpmod.solve(prog)
    return sol.optimal and lpmod.unique_optimum(prog, sol)


def vp_bound(hg: Hypergraph) -> BoundReport:
    tau, u = vp_tau(hg)
    if tau is None:
        # an isolated vertex shares nothing, so no key is possible
        return BoundReport(VP, _ZERO, None, {"tau": None})
    slope = 1 / (tau - 1) if tau > 1 else None
    return BoundReport(VP, slope, u, {"tau": tau})


# ------------------------------------------------------------ lamination

def beta(hg: Hypergraph, pi: Mapping[int, Fraction]) -> Fraction:
    return min(sum((v for b, v in pi.items() if e.mask & ~b == 0), _ZERO) for e in hg.edges)


def gamma(params: LaminationParams) -> Fraction:
    keys = set(params.lam) | set(params.pi)
    return params.rho + sum(
        (params.pi.get(b, _ZERO) - params.rho * params.lam.get(b, _ZERO) for b in keys), _ZERO
    )


def check_params(hg: Hypergraph, params: LaminationParams) -> None:
    full = hg.full
    if params.rho < 0:
        raise DominanceViolated("rho must be nonnegative")
    for name, d in (("lambda", params.lam), ("pi", params.pi)):
        for b, v in d.items():
            if not 0 < b < full or b & ~full:
                raise ValueError(f"{name} has a non-proper set {fmt_set(b)}")
            if v < 0:
                raise ValueError(f"{name}({fmt_set(b)}) is negative")
    for i in range(hg.m):
        load = sum((v for b, v in params.lam.items() if b >> i & 1), _ZERO)
        if load > 1:
            raise PackingViolated(f"vertex {i + 1} is covered {format_rational(load)} > 1 times by lambda")
    for b in set(params.lam) | set(params.pi):
        if params.pi.get(b, _ZERO) < params.rho * params.lam.get(b, _ZERO):
            raise DominanceViolated(f"pi({fmt_set(b)}) < rho * lambda({fmt_set(b)})")


def lamination_bound_eval(hg: Hypergraph, params: LaminationParams) -> BoundReport:
    check_params(hg, params)
    b = beta(hg, params.pi)
    g = gamma(params)
    slope = (g - b) / b if b > 0 else None
    return BoundReport(LAMINATION, slope, params, {"beta": b, "gamma": g})


def ep_as_lamination(hg: Hypergraph, partition: Partition) -> BoundReport:
    share = Fraction(1, len(partition) - 1)
    comp = {hg.full & ~c: share for c in partition.blocks}
    params = LaminationParams(Fraction(1), dict(sorted(comp.items())), dict(sorted(comp.items())))
    rep = lamination_bound_eval(hg, params)
    a = alpha(hg, partition)
    assert rep.raw["gamma"] == 1 and rep.raw["beta"] == 1 - a
    return rep


def vp_as_lamination(hg: Hypergraph, u: Sequence | None = None) -> BoundReport:
    """``rho = 0``, ``lambda = 0``, ``pi(V - {i}) = u_i`` for an optimal packing ``u``.

    ``u`` defaults to the solver's optimum; a supplied ``u`` must be optimal.
    """
    tau, best = vp_tau(hg)
    if tau is None:
        raise TauUnbounded("some vertex lies in no edge")
    if u is None:
        u = best
    else:
        u = [Fraction(x) for x in u]
        if len(u) != hg.m or any(x < 0 for x in u) or sum(u, _ZERO) != tau or any(
            sum((u[v - 1] for v in e.verts), _ZERO) > 1 for e in hg.edges
        ):
            raise ValueError("u is not an optimal vertex packing")
    pi = {hg.full & ~(1 << i): ui for i, ui in enumerate(u) if ui}
    rep = lamination_bound_eval(hg, LaminationParams(_ZERO, {}, dict(sorted(pi.items()))))
    top = max(sum((u[v - 1] for v in e.verts), _ZERO) for e in hg.edges)
    assert rep.raw["gamma"] == tau and rep.raw["beta"] == tau - top
    return rep


def default_rho_grid(hg: Hypergraph) -> list[Fraction]:
    w = [e.weight for e in hg.edges]
    w_min, w_total = min(w), sum(w)
    steps = ceil(8 * w_total / w_min)
    return [_ZERO] + [k * w_min / 4 for k in range(1, steps + 1)]


def _ratio_program(hg: Hypergraph, rho: Fraction, family: Sequence[int]) -> lpmod.LinearProgram:
    """Linear-fractional ``min gamma/beta`` at fixed rho, homogenized.

    Columns: ``s``, then ``y_B = s*lambda(B)``, then ``z_B = s*pi(B)`` for each
    ``B`` in ``family``; ``s = 1/beta``.
    """
    k = len(family)
    obj = [rho] + [-rho] * k + [Fraction(1)] * k
    prog = lpmod.LinearProgram(1 + 2 * k, obj, "min")
    for i in range(hg.m):
        terms = {1 + j: 1 for j, b in enumerate(family) if b >> i & 1}
        terms[0] = -1
        prog.add_sparse(terms, "<=", 0)
    for j in range(k):
        prog.add_sparse({1 + k + j: 1, 1 + j: -rho}, ">=", 0)
    for e in hg.edges:
        prog.add_sparse({1 + k + j: 1 for j, b in enumerate(family) if e.mask & ~b == 0}, ">=", 1)
    return prog


def _search_one(args) -> BoundReport | None:
    hg, rho, family = args
    prog = _ratio_program(hg, rho, family)
    sol = lpmod.solve(prog)
    if not sol.optimal:
        return None
    k = len(family)
    s, y, z = sol.x[0], sol.x[1:1 + k], sol.x[1 + k:]
    if s > 0:
        params = LaminationParams.of(rho, dict(zip(family, (v / s for v in y))), dict(zip(family, (v / s for v in z))))
    else:
        # recession direction: the ratio is approached by scaling pi alone
        params = LaminationParams.of(_ZERO, {}, dict(zip(family, z)))
    rep = lamination_bound_eval(hg, params)
    assert rep.slope is not None and rep.slope + 1 <= sol.value
    return rep


def lamination_bound_search(
    hg: Hypergraph,
    rho_grid: Iterable | None = None,
    support: Iterable | None = None,
    seeds: Iterable[BoundReport] = (),
    limit: int | None = None,
    jobs: int = 1,
) -> BoundReport:
    """Best lamination bound over a grid of rho values.

    For each rho the remaining problem, minimizing ``gamma/beta`` over
    ``(lambda, pi)``, is a linear-fractional program and is solved exactly.
    ``support`` optionally restricts the sets carrying lambda/pi mass. The EP
    and VP reductions are always included as candidates (``seeds`` may supply
    them precomputed), so the result is never worse than either.
    """
    check_limit(hg.m, limit)
    grid = sorted({Fraction(r) for r in (default_rho_grid(hg) if rho_grid is None else rho_grid)})
    if any(r < 0 for r in grid):
        raise ValueError("rho must be nonnegative")
    if support is None:
        family = list(proper_subsets(hg.m))
    else:
        family = sorted({b if isinstance(b, int) else mask_of(b) for b in support})

    candidates: list[BoundReport] = []
    seeds = list(seeds)
    if not seeds:
        seeds = [ep_as_lamination(hg, ep_bound_tightest(hg, limit).witness)]
        if vp_tau(hg)[0] is not None:
            seeds.append(vp_as_lamination(hg))
    for rep in seeds:
        candidates.append(_as_lamination_report(hg, rep))

    tasks = [(hg, rho, family) for rho in grid]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            found = list(pool.map(_search_one, tasks))
    else:
        found = [_search_one(t) for t in tasks]
    candidates.extend(r for r in found if r is not None)
    return best_of(candidates)


def _as_lamination_report(hg: Hypergraph, rep: BoundReport) -> BoundReport:
    if rep.kind == LAMINATION:
        return rep
    if rep.kind == EP:
        return ep_as_lamination(hg, rep.witness)
    return vp_as_lamination(hg)


def reevaluate(hg: Hypergraph, rep: BoundReport) -> BoundReport:
    """Recompute a report from its witness alone."""
    if rep.kind == EP:
        return ep_bound(hg, rep.witness)
    if rep.kind == VP:
        if rep.witness is None:
            return vp_bound(hg)
        u = list(rep.witness)
        assert all(sum((u[v - 1] for v in e.verts), _ZERO) <= 1 for e in hg.edges)
        tau = sum(u, _ZERO)
        return BoundReport(VP, 1 / (tau - 1) if tau > 1 else None, u, {"tau": tau})
    return lamination_bound_eval(hg, rep.witness)
