"""Characteristic series, numeric invariants, and canonical parent quotients."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fpmat import nullspace, rref
from .pcgroup import PcGroup, Subgroup, abelian_invariants, quotient_by_normal


def commutator_subgroup(G: PcGroup, A: Subgroup, B: Subgroup) -> Subgroup:
    gens = [G.comm(a, b) for a in A.igs for b in B.igs]
    return Subgroup.generated(G, gens, normal_under=G.gens)


def lower_central_series(G: PcGroup) -> list[Subgroup]:
    """[G, [G,G], [[G,G],G], ...] down to the trivial subgroup."""
    out = [Subgroup.full(G)]
    while out[-1].order_log:
        nxt = commutator_subgroup(G, out[-1], Subgroup.full(G))
        if nxt.order_log == out[-1].order_log:
            raise AssertionError("lower central series stalled; not nilpotent?")
        out.append(nxt)
    return out


def lower_p_central_series(G: PcGroup) -> list[Subgroup]:
    """Descending series with steps [previous, G] * previous^p."""
    out = [Subgroup.full(G)]
    while out[-1].order_log:
        prev = out[-1]
        gens = [G.comm(a, g) for a in prev.igs for g in G.gens]
        gens += [G.pow(a, G.p) for a in prev.igs]
        nxt = Subgroup.generated(G, gens, normal_under=G.gens)
        if nxt.order_log == prev.order_log:
            raise AssertionError("p-central series stalled")
        out.append(nxt)
    return out


def derived_series(G: PcGroup) -> list[Subgroup]:
    out = [Subgroup.full(G)]
    while out[-1].order_log:
        prev = out[-1]
        nxt = commutator_subgroup(G, prev, prev)
        out.append(nxt)
        if nxt.order_log == 0:
            break
        if nxt.order_log == prev.order_log:
            raise AssertionError("derived series stalled")
    return out


def _section_kernel(G: PcGroup, K: Subgroup, P_low: Subgroup, modulus: Subgroup) -> Subgroup:
    """Elements u of K with [u, g] in modulus for every generator g.

    Assumes [K, G] <= P_low and that P_low/modulus is central elementary
    abelian, so the condition is linear over the coordinates of K.
    """
    if K.order_log == 0:
        return K
    Q, project, _ = quotient_by_normal(G, modulus)
    S = Subgroup.generated(Q, [project(b) for b in P_low.igs])
    rows = []
    for u in K.igs:
        row: list[int] = []
        for g in G.gens:
            c = G.comm(u, g)
            row.extend(S.coordinates(project(c)))
        rows.append(row)
    mat = np.array(rows, dtype=np.int64)
    if mat.shape[1] == 0 or not mat.any():
        return K
    kernel = nullspace(mat.T, G.p)
    if kernel.shape[0] == 0:
        return Subgroup.trivial(G)
    ech, _ = rref(kernel, G.p)
    ws = []
    for v in ech:
        w = G.identity
        for t, coeff in enumerate(v):
            if coeff:
                w = G.mul(w, G.pow(K.igs[t], int(coeff)))
        ws.append(w)
    return Subgroup.generated(G, ws)


def centre(G: PcGroup) -> Subgroup:
    """Centre, found layer by layer along the lower p-central series."""
    series = lower_p_central_series(G)
    K = Subgroup.full(G)
    for m in range(1, len(series)):
        K = _section_kernel(G, K, series[m - 1], series[m])
        if K.order_log == 0:
            break
    return K


def upper_central_series(G: PcGroup) -> list[Subgroup]:
    """[1, Z(G), Z_2(G), ...] ending at the hypercentre (= G when nilpotent)."""
    out = [Subgroup.trivial(G)]
    while True:
        prev = out[-1]
        if prev.order_log == G.n:
            return out
        Q, project, lift = quotient_by_normal(G, prev)
        z = centre(Q)
        gens = [lift(b) for b in z.igs] + list(prev.igs)
        nxt = Subgroup.generated(G, gens, normal_under=G.gens)
        if nxt.order_log == prev.order_log:
            return out
        out.append(nxt)


@dataclass(frozen=True)
class GroupInvariants:
    order_log: int
    rank: int                 # minimal number of generators
    nilpotency_class: int
    p_class: int              # exponent-p class
    coclass: int
    derived_length: int
    abelianization: tuple[int, ...]

    def as_dict(self) -> dict:
        return {
            "order_log": self.order_log,
            "rank": self.rank,
            "class": self.nilpotency_class,
            "p_class": self.p_class,
            "coclass": self.coclass,
            "derived_length": self.derived_length,
            "abelianization": list(self.abelianization),
        }


def group_invariants(G: PcGroup) -> GroupInvariants:
    lcs = lower_central_series(G)
    pcs = lower_p_central_series(G)
    ds = derived_series(G)
    cl = len(lcs) - 1
    return GroupInvariants(
        order_log=G.n,
        rank=G.n - pcs[1].order_log,
        nilpotency_class=cl,
        p_class=len(pcs) - 1,
        coclass=G.n - cl,
        derived_length=len(ds) - 1,
        abelianization=abelian_invariants(G),
    )


PARENT_KINDS = ("P1", "P2", "P3", "P4")


def parent(G: PcGroup, kind: str = "P3"):
    """Canonical parent quotient: (quotient group, projection).

    P1: by the centre; P2: by the last nontrivial lower-central term;
    P3: by the last nontrivial lower p-central term; P4: by the last
    nontrivial derived term.
    """
    if kind == "P1":
        N = centre(G)
    elif kind == "P2":
        N = lower_central_series(G)[-2]
    elif kind == "P3":
        N = lower_p_central_series(G)[-2]
    elif kind == "P4":
        N = derived_series(G)[-2]
    else:
        raise ValueError(f"unknown parent kind {kind!r}; use one of {PARENT_KINDS}")
    if N.order_log == G.n:
        raise ValueError("group is trivial or series too short for a parent")
    Q, project, _ = quotient_by_normal(G, N)
    return Q, project


def parent_iterated(G: PcGroup, kind: str, times: int) -> PcGroup:
    for _ in range(times):
        G, _ = parent(G, kind)
    return G


def gamma_quotient_invariants(G: PcGroup) -> list[tuple[int, ...]]:
    """Abelian invariants of the lower-central sections, top down."""
    lcs = lower_central_series(G)
    out = []
    for i in range(len(lcs) - 1):
        out.append(abelian_invariants(G, lcs[i], lcs[i + 1]))
    return out


def zeta_quotient_invariants(G: PcGroup) -> list[tuple[int, ...]]:
    """Abelian invariants of the upper-central sections, bottom up."""
    ucs = upper_central_series(G)
    out = []
    for i in range(len(ucs) - 1):
        out.append(abelian_invariants(G, ucs[i + 1], ucs[i]))
    return out
