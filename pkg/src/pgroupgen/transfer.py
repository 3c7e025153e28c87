"""Artin transfers, layered kernel/target types, sigma and Schur classification."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .act import AutGroup
from .cover import p_cover
from .fpmat import FpMatrix, Subspace, act_on_subspace, enumerate_subspaces
from .pcgroup import (
    Element,
    PcGroup,
    Subgroup,
    abelian_invariants,
    quotient_by_normal,
)
from .series import commutator_subgroup


class UnsupportedShapeError(ValueError):
    pass


def derived_part(G: PcGroup, H: Subgroup) -> Subgroup:
    """[H, H], closed inside H (not the normal closure in G)."""
    comms = [G.comm(a, b) for i, a in enumerate(H.igs) for b in H.igs[:i]]
    return Subgroup.generated(G, comms, normal_under=H.igs)


@dataclass
class AbelianizationData:
    G: PcGroup
    ab: PcGroup            # the abelianization as a pc group
    project: object
    lift: object
    derived: Subgroup


def abelianization_data(G: PcGroup) -> AbelianizationData:
    derived = commutator_subgroup(G, Subgroup.full(G), Subgroup.full(G))
    ab, project, lift = quotient_by_normal(G, derived)
    return AbelianizationData(G=G, ab=ab, project=project, lift=lift,
                              derived=derived)


@dataclass
class LayeredSubgroup:
    label: str | None
    subgroup: Subgroup
    image: Subgroup        # image in the abelianization
    space: Subspace        # the same image as a subspace of the abelianization


@dataclass
class SubgroupLayering:
    abdata: AbelianizationData
    layers: list[list[LayeredSubgroup]]
    rank: int

    @property
    def G(self) -> PcGroup:
        return self.abdata.G

    @property
    def ab(self) -> PcGroup:
        return self.abdata.ab

    @property
    def derived(self) -> Subgroup:
        return self.abdata.derived


def _layer1_spaces(rank: int, p: int) -> list[Subspace]:
    """Fixed listing of the index-p subgroups (as subspaces of F_p^rank)."""
    e = np.eye(rank, dtype=np.int64)
    if rank == 2:
        x, y = e[0], e[1]
        rows = [[y], [x]] + [[(x + t * y) % p] for t in range(1, p)]
        return [Subspace.from_rows(r, rank, p) for r in rows]
    if rank == 3 and p == 2:
        x, y, z = e[0], e[1], e[2]
        combos = [
            (y, z), (z, x), (x, y), (x, (y + z) % 2),
            (y, (z + x) % 2), (z, (x + y) % 2), ((x + y) % 2, (y + z) % 2),
        ]
        return [Subspace.from_rows(list(c), rank, p) for c in combos]
    raise UnsupportedShapeError(
        f"no fixed layer-1 listing for rank {rank}, p {p}"
    )


def subgroup_layering(G: PcGroup) -> SubgroupLayering:
    """Subgroups between the derived subgroup and G, layered by index."""
    abdata = abelianization_data(G)
    ab, project, lift = abdata.ab, abdata.project, abdata.lift
    derived = abdata.derived
    if any(w for w in ab.pres.power):
        raise UnsupportedShapeError(
            "layering needs an elementary abelianization"
        )
    rank, p = ab.n, G.p
    if rank not in (2, 3) or (rank == 3 and p != 2):
        raise UnsupportedShapeError(
            f"layering supports rank 2, and rank 3 at p=2; got rank {rank}"
        )
    layers: list[list[LayeredSubgroup]] = []
    full_space = Subspace.full(rank, p)
    layers.append(
        [LayeredSubgroup("G", Subgroup.full(G), Subgroup.full(ab), full_space)]
    )

    def preimage(space: Subspace) -> LayeredSubgroup:
        gens = [lift(tuple(int(v) for v in row)) for row in space.basis]
        sub = Subgroup.generated(G, gens + list(derived.igs))
        image = Subgroup.generated(ab, [project(g) for g in sub.igs])
        return LayeredSubgroup(None, sub, image, space)

    layer1 = []
    for idx, space in enumerate(_layer1_spaces(rank, p), start=1):
        ls = preimage(space)
        ls.label = f"{'S' if rank == 3 else 'H'}_{idx}"
        layer1.append(ls)
    layers.append(layer1)
    for ell in range(2, rank + 1):
        layers.append(
            [preimage(s) for s in enumerate_subspaces(rank, rank - ell, p)]
        )
    return SubgroupLayering(abdata=abdata, layers=layers, rank=rank)


@dataclass
class TransferHom:
    G: PcGroup
    H: Subgroup
    H_derived: Subgroup
    values: dict[Element, Element]  # abelianization element -> value in H
    kernel: Subgroup                # subgroup of the abelianization

    def same_map(self, other: "TransferHom") -> bool:
        """Equal as maps into H modulo [H, H]."""
        return self.values.keys() == other.values.keys() and all(
            self.H_derived.contains(
                self.G.mul(v, self.G.inv(other.values[a]))
            )
            for a, v in self.values.items()
        )


def artin_transfer(
    G: PcGroup,
    H: Subgroup,
    ab_data: AbelianizationData | None = None,
    transversal: list[Element] | None = None,
) -> TransferHom:
    """Transfer to H via coset products: V(g) = prod_i r_i g r_{pi(i)}^{-1}."""
    data = ab_data or abelianization_data(G)
    ab, project, lift = data.ab, data.project, data.lift
    if not H.contains_subgroup(data.derived):
        raise ValueError("transfer target must contain the derived subgroup")
    image = Subgroup.generated(ab, [project(g) for g in H.igs])
    # cosets of H correspond to elements of the abelianization modulo image
    quo, to_quo, from_quo = quotient_by_normal(ab, image)

    def coset(g: Element) -> Element:
        return to_quo(project(g))

    keys = list(quo.elements())
    if transversal is None:
        transversal = [lift(from_quo(k)) for k in keys]
    else:
        keyed = {coset(t): t for t in transversal}
        if sorted(keyed) != sorted(keys):
            raise ValueError("not a transversal of the target subgroup")
        transversal = [keyed[k] for k in keys]
    index = {k: i for i, k in enumerate(keys)}
    hd = derived_part(G, H)
    values: dict[Element, Element] = {}
    for a in ab.elements():
        g = lift(a)
        v = G.identity
        for r in transversal:
            w = G.mul(r, g)
            dest = transversal[index[coset(w)]]
            h = G.mul(w, G.inv(dest))
            assert H.contains(h)
            v = G.mul(v, h)
        values[a] = v
    kernel_elems = [a for a, v in values.items() if hd.contains(v)]
    kernel = Subgroup.generated(ab, kernel_elems)
    return TransferHom(G=G, H=H, H_derived=hd, values=values, kernel=kernel)


def _kernel_code(kernel: Subgroup, lay: SubgroupLayering) -> int | tuple:
    ab = lay.ab
    if kernel == Subgroup.full(ab):
        return 0
    for idx, ls in enumerate(lay.layers[1], start=1):
        if kernel == ls.image:
            return idx
    if kernel == Subgroup.trivial(ab):
        return 1
    for ell, layer in enumerate(lay.layers[2:], start=2):
        for idx, ls in enumerate(layer, start=1):
            if kernel == ls.image:
                return (ell, idx)
    # no listed subgroup matches: fall back to the subspace itself
    warnings.warn(
        "transfer kernel matches no listed subgroup; reporting its subspace",
        stacklevel=2,
    )
    return ("subspace", Subspace.from_rows(list(kernel.igs), ab.n, ab.p).key())


@dataclass
class TransferData:
    kappa_layered: tuple[tuple, ...]
    ttt_layered: tuple[tuple, ...]
    kappa1: tuple
    kappa1_normalized: tuple | None
    tkt_name: str | None
    sigma: bool | None
    schur_defect: int


def layered_transfer_types(
    G: PcGroup, layering: SubgroupLayering | None = None
) -> tuple[tuple[tuple, ...], tuple[tuple, ...]]:
    """Kernel codes and target abelian types for every layered subgroup."""
    lay = layering or subgroup_layering(G)
    kappa: list[tuple] = []
    ttt: list[tuple] = []
    for layer in lay.layers:
        codes = []
        types = []
        for ls in layer:
            hom = artin_transfer(G, ls.subgroup, lay.abdata)
            codes.append(_kernel_code(hom.kernel, lay))
            types.append(abelian_invariants(G, ls.subgroup))
        kappa.append(tuple(codes))
        ttt.append(tuple(types))
    return tuple(kappa), tuple(ttt)


# -- relabeling equivalence and the named catalogue ----------------------------

_PERM_CACHE: dict[tuple[int, int], list[tuple[int, ...]]] = {}


def layer1_permutation_group(rank: int, p: int) -> list[tuple[int, ...]]:
    """Permutations of the layer-1 listing induced by basis changes."""
    key = (rank, p)
    if key in _PERM_CACHE:
        return _PERM_CACHE[key]
    from .act import gl_generator_matrices

    spaces = _layer1_spaces(rank, p)
    pos = {s.key(): i for i, s in enumerate(spaces)}
    gens = gl_generator_matrices(rank, p)
    ident = FpMatrix.identity(rank, p)
    seen = {ident}
    queue = [ident]
    perms = set()
    while queue:
        m = queue.pop()
        perms.add(tuple(pos[act_on_subspace(m, s).key()] for s in spaces))
        for g in gens:
            nxt = m @ g
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    out = sorted(perms)
    _PERM_CACHE[key] = out
    return out


def normalize_kappa1(kappa1: tuple, rank: int, p: int) -> tuple:
    """Lexicographic minimum under simultaneous position/value relabeling."""
    best = None
    for perm in layer1_permutation_group(rank, p):
        relabeled: list = [0] * len(kappa1)
        for i, code in enumerate(kappa1):
            value = code
            if isinstance(code, int) and code >= 1:
                value = perm[code - 1] + 1
            relabeled[perm[i]] = value
        cand = tuple(relabeled)
        if best is None or cand < best:
            best = cand
    return best


_LAYERED_PERM_CACHE: dict[tuple[int, int], list[tuple[tuple[int, ...], ...]]] = {}


def layered_listing_permutations(
    rank: int, p: int
) -> list[tuple[tuple[int, ...], ...]]:
    """Joint permutations of every intermediate layer listing under basis changes.

    Each entry holds one permutation per layer 1..rank-1, all induced by the
    same change of minimal generators.
    """
    key = (rank, p)
    if key in _LAYERED_PERM_CACHE:
        return _LAYERED_PERM_CACHE[key]
    from .act import gl_generator_matrices

    listings = [_layer1_spaces(rank, p)] + [
        list(enumerate_subspaces(rank, rank - ell, p)) for ell in range(2, rank)
    ]
    positions = [{s.key(): i for i, s in enumerate(spaces)} for spaces in listings]
    gens = gl_generator_matrices(rank, p)
    ident = FpMatrix.identity(rank, p)
    seen = {ident}
    queue = [ident]
    perms = set()
    while queue:
        m = queue.pop()
        perms.add(
            tuple(
                tuple(pos[act_on_subspace(m, s).key()] for s in spaces)
                for spaces, pos in zip(listings, positions)
            )
        )
        for g in gens:
            nxt = m @ g
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    out = sorted(perms)
    _LAYERED_PERM_CACHE[key] = out
    return out


def _code_token(code) -> tuple:
    """Sortable key for a kernel code of any shape."""
    if isinstance(code, int):
        return (0, 0, code)
    if isinstance(code, tuple) and len(code) == 2 and isinstance(code[0], int):
        return (1, code[0], code[1])
    return (2, 0, repr(code))


def normalize_kappa_layered(
    kappa: tuple[tuple, ...], rank: int, p: int
) -> tuple[tuple, ...]:
    """Lexicographic minimum of a layered kernel-code family under relabeling.

    Positions and subgroup-valued codes of the intermediate layers are
    permuted simultaneously; the single-entry top and bottom layers are kept
    verbatim.
    """

    def map_value(code, perms):
        if isinstance(code, int) and code >= 1:
            return perms[0][code - 1] + 1
        if (
            isinstance(code, tuple)
            and len(code) == 2
            and isinstance(code[0], int)
            and 1 <= code[0] < rank
        ):
            ell, idx = code
            return (ell, perms[ell - 1][idx - 1] + 1)
        return code

    best = None
    best_key = None
    for perms in layered_listing_permutations(rank, p):
        cand = [kappa[0]]
        for ell in range(1, rank):
            layer = kappa[ell]
            relabeled = [0] * len(layer)
            for i, code in enumerate(layer):
                relabeled[perms[ell - 1][i]] = map_value(code, perms)
            cand.append(tuple(relabeled))
        cand.append(kappa[rank])
        key = tuple(_code_token(c) for layer in cand for c in layer)
        if best_key is None or key < best_key:
            best = tuple(cand)
            best_key = key
    return best


_TKT_NAMES_33 = {
    "c.18": (0, 1, 2, 2),
    "c.21": (2, 0, 3, 4),
    "E.6": (1, 1, 2, 2),
    "E.8": (2, 2, 3, 4),
    "E.9": (2, 3, 3, 4),
    "E.14": (3, 1, 2, 2),
    "H.4": (2, 1, 2, 2),
    "G.16": (2, 1, 3, 4),
}


def tkt_name_33(kappa1: tuple) -> str | None:
    norm = normalize_kappa1(kappa1, 2, 3)
    for name, kap in _TKT_NAMES_33.items():
        if normalize_kappa1(kap, 2, 3) == norm:
            return name
    return None


def transfer_data(G: PcGroup, aut: AutGroup | None = None) -> TransferData:
    """Layered kernel/target data plus sigma and Schur classification."""
    lay = subgroup_layering(G)
    kappa, ttt = layered_transfer_types(G, lay)
    kappa1 = kappa[1]
    normalized = None
    name = None
    if all(isinstance(c, int) for c in kappa1):
        normalized = normalize_kappa1(kappa1, lay.rank, G.p)
        if lay.rank == 2 and G.p == 3:
            name = tkt_name_33(kappa1)
    sigma = None
    if aut is not None:
        sigma = is_sigma_group(G, aut)
    return TransferData(
        kappa_layered=kappa,
        ttt_layered=ttt,
        kappa1=kappa1,
        kappa1_normalized=normalized,
        tkt_name=name,
        sigma=sigma,
        schur_defect=p_cover(G).schur_defect,
    )


# -- sigma and Schur classification --------------------------------------------


def is_sigma_group(G: PcGroup, aut: AutGroup) -> bool:
    """Does some automorphism invert the abelianization?"""
    data = abelianization_data(G)
    ab, project, lift = data.ab, data.project, data.lift
    pre = [lift(g) for g in ab.gens]

    def induced(a) -> tuple:
        return tuple(project(a.apply(g)) for g in pre)

    target = tuple(ab.inv(g) for g in ab.gens)
    start = tuple(ab.gens)
    if target == start:
        return True
    if aut.elements is not None:
        return any(induced(a) == target for a in aut.elements)
    gen_maps = list({induced(a) for a in aut.gens})
    seen = {start}
    queue = [start]
    while queue:
        m = queue.pop()
        for g in gen_maps:
            nxt = tuple(ab.evaluate_vector(m[k], g) for k in range(ab.n))
            if nxt not in seen:
                if nxt == target:
                    return True
                seen.add(nxt)
                queue.append(nxt)
    return False


def classify_sigma(G: PcGroup, aut: AutGroup) -> dict[str, bool]:
    """Sigma / Schur / Schur-sigma flags."""
    defect = p_cover(G).schur_defect
    sigma = is_sigma_group(G, aut)
    return {
        "is_sigma": sigma,
        "is_schur": defect == 0,
        "is_schur_sigma": sigma and defect == 0,
    }
