"""Immediate descendants: orbits of allowable subgroups under automorphisms."""

from __future__ import annotations

from dataclasses import dataclass

from .act import (
    Automorphism,
    AutGroup,
    Lineage,
    automorphism_group,
    multiplicator_action,
)
from .cover import CoverData, child_from_cover, p_cover
from .fpmat import FpMatrix, Subspace, act_on_subspace, enumerate_supplements
from .pcgroup import Element, PcGroup


def allowable_subspaces(cd: CoverData, step: int) -> list[Subspace]:
    """Kernels of the step-s elementary quotients that raise the class:
    proper supplements of the nucleus inside the multiplicator."""
    if step < 1 or step > cd.nucleus_rank:
        return []
    return list(enumerate_supplements(cd.nucleus, step))


@dataclass
class OrbitData:
    rep: Subspace
    size: int
    stabilizer_images: list[tuple[Element, ...]]


def _action_pairs(
    cd: CoverData, autos: list[Automorphism]
) -> list[tuple[Automorphism, FpMatrix]]:
    uniq: dict[tuple, tuple[Automorphism, FpMatrix]] = {}
    for a in autos:
        if a.images not in uniq:
            uniq[a.images] = (a, multiplicator_action(cd, a.images))
    return list(uniq.values())


def _orbits_from_elements(
    cd: CoverData, aut: AutGroup, allowable: list[Subspace]
) -> list[OrbitData]:
    pairs = _action_pairs(cd, aut.elements)
    assert len(pairs) == aut.order, "element list does not carry the whole group"
    out = []
    seen: set = set()
    for U in allowable:
        if U.key() in seen:
            continue
        orbit: set = set()
        stab: list[tuple[Element, ...]] = []
        for a, m in pairs:
            V = act_on_subspace(m, U)
            orbit.add(V.key())
            if V == U and not a.is_identity():
                stab.append(a.images)
        seen |= orbit
        assert len(stab) + 1 == aut.order // len(orbit)
        out.append(OrbitData(rep=U, size=len(orbit), stabilizer_images=sorted(stab)))
    return out


def _orbits_by_schreier(
    cd: CoverData, aut: AutGroup, allowable: list[Subspace]
) -> list[OrbitData]:
    pairs = _action_pairs(cd, aut.gens)
    inverses = [a.inverse() for a, _ in pairs]
    ident = aut.identity()
    out = []
    seen: set = set()
    for U in allowable:
        if U.key() in seen:
            continue
        trans: dict = {U.key(): (ident, ident)}
        frontier = [U]
        stab: dict[tuple, None] = {}
        while frontier:
            V = frontier.pop()
            tV, tVinv = trans[V.key()]
            for (a, m), ainv in zip(pairs, inverses):
                W = act_on_subspace(m, V)
                got = trans.get(W.key())
                if got is None:
                    trans[W.key()] = (a.compose(tV), tVinv.compose(ainv))
                    frontier.append(W)
                else:
                    tW, tWinv = got
                    s = tWinv.compose(a.compose(tV))
                    if not s.is_identity():
                        stab.setdefault(s.images)
        seen |= trans.keys()
        out.append(
            OrbitData(rep=U, size=len(trans), stabilizer_images=sorted(stab))
        )
    return out


def subspace_orbits(
    cd: CoverData, aut: AutGroup, step: int
) -> list[OrbitData]:
    allowable = allowable_subspaces(cd, step)
    if not allowable:
        return []
    if aut.elements is not None:
        return _orbits_from_elements(cd, aut, allowable)
    return _orbits_by_schreier(cd, aut, allowable)


@dataclass
class DescendantRecord:
    parent: PcGroup
    group: PcGroup
    step: int
    orbit_size: int
    kernel: Subspace
    aut_order: int


def is_capable(G: PcGroup) -> bool:
    """Capable means some immediate descendant exists (the nucleus is nonzero)."""
    return p_cover(G).nucleus_rank > 0


def immediate_descendants(
    G: PcGroup,
    aut: AutGroup | None = None,
    steps: list[int] | None = None,
    strategy: str = "auto",
    budget: int = 200_000,
    check: bool = True,
) -> list[DescendantRecord]:
    cd = p_cover(G)
    nu = cd.nucleus_rank
    if nu == 0:
        return []
    if aut is None:
        aut = automorphism_group(G, strategy=strategy, budget=budget)
    d = len(G.min_gen_indices())
    out = []
    for s in steps or range(1, nu + 1):
        for od in subspace_orbits(cd, aut, s):
            data = child_from_cover(cd, od.rep, check=check)
            child = data.group
            child.lineage = Lineage(
                parent=G,
                parent_aut=aut,
                cover=cd,
                child=data,
                orbit_size=od.size,
                stabilizer_images=od.stabilizer_images,
            )
            assert aut.order % od.size == 0
            out.append(
                DescendantRecord(
                    parent=G,
                    group=child,
                    step=s,
                    orbit_size=od.size,
                    kernel=od.rep,
                    aut_order=aut.order // od.size * G.p ** (d * s),
                )
            )
    return out


def _orbit_count_fast(
    cd: CoverData, aut: AutGroup, allowable: list[Subspace], closure_cap: int = 100_000
) -> list[Subspace]:
    """Orbit representatives only; builds the full matrix image when feasible."""
    if aut.elements is not None:
        mats = list({multiplicator_action(cd, a.images) for a in aut.elements})
        translate = mats
    else:
        gens = list({multiplicator_action(cd, a.images) for a in aut.gens})
        ident = FpMatrix.identity(cd.mult_rank, cd.base.p)
        closure = {ident}
        queue = [ident]
        while queue and len(closure) <= min(aut.order, closure_cap):
            m = queue.pop()
            for g in gens:
                nxt = m @ g
                if nxt not in closure:
                    closure.add(nxt)
                    queue.append(nxt)
        if queue:  # capped out: fall back to per-state breadth-first sweep
            translate = None
            mats = gens
        else:
            translate = list(closure)
    reps = []
    seen: set = set()
    for U in allowable:
        if U.key() in seen:
            continue
        reps.append(U)
        if translate is not None:
            for m in translate:
                seen.add(act_on_subspace(m, U).key())
        else:
            orbit = {U.key()}
            frontier = [U]
            while frontier:
                V = frontier.pop()
                for m in mats:
                    W = act_on_subspace(m, V)
                    if W.key() not in orbit:
                        orbit.add(W.key())
                        frontier.append(W)
            seen |= orbit
    return reps


def descendant_counters(
    G: PcGroup,
    aut: AutGroup | None = None,
    strategy: str = "auto",
    budget: int = 200_000,
) -> tuple[tuple[int, int], ...]:
    """Per-step (total, capable) counts of immediate descendant classes."""
    cd = p_cover(G)
    nu = cd.nucleus_rank
    if nu == 0:
        return ()
    if aut is None:
        aut = automorphism_group(G, strategy=strategy, budget=budget)
    out = []
    for s in range(1, nu + 1):
        reps = _orbit_count_fast(cd, aut, allowable_subspaces(cd, s))
        total = len(reps)
        capable = 0
        for U in reps:
            child = child_from_cover(cd, U, check=False).group
            if p_cover(child).nucleus_rank > 0:
                capable += 1
        out.append((total, capable))
    return tuple(out)


def format_counters(counters: tuple[tuple[int, int], ...]) -> str:
    """(4/1;7/5) style: per-step class/capable counts."""
    if not counters:
        return "()"
    return "(" + ";".join(f"{n}/{c}" for n, c in counters) + ")"
