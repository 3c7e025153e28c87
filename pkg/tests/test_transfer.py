"""Transfer maps checked against a naive coset-product oracle.

The oracle below recomputes every transfer from the definition on the full
element list, with its own transversal selection, and the kernels must agree
element by element.  Classical facts pinned directly: the transfer of a
cyclic p^2 group to its maximal subgroup has kernel of order p, elementary
abelian groups transfer trivially to every maximal subgroup (each coset
product telescopes to a p-th power, which is the identity), and the maximal
subgroups of the dihedral group of order 16 are cyclic, dihedral, dihedral.
"""

import random

import pytest
from test_pcgroup import (
    cyclic4 as _cyclic4_pres,
    dihedral8 as _dihedral8_pres,
    dihedral16 as _dihedral16_pres,
    heisenberg27 as _heisenberg27_pres,
    quaternion8 as _quaternion8_pres,
)

from pgroupgen.act import AutGroup, brute_automorphism_group
from pgroupgen.descend import immediate_descendants
from pgroupgen.fpmat import Subspace
from pgroupgen.pcgroup import PcGroup, PcPresentation, Subgroup, check_consistency
from pgroupgen.transfer import (
    UnsupportedShapeError,
    abelianization_data,
    artin_transfer,
    classify_sigma,
    derived_part,
    is_sigma_group,
    layer1_permutation_group,
    layered_transfer_types,
    normalize_kappa1,
    subgroup_layering,
    tkt_name_33,
    transfer_data,
)


def cyclic4():
    return PcGroup(_cyclic4_pres())


def dihedral8():
    return PcGroup(_dihedral8_pres())


def dihedral16():
    return PcGroup(_dihedral16_pres())


def heisenberg27():
    return PcGroup(_heisenberg27_pres())


def quaternion8():
    return PcGroup(_quaternion8_pres())


def elementary(p, d):
    pres = PcPresentation(
        p=p, names=[f"g{i}" for i in range(d)], weights=[1] * d,
        power=[() for _ in range(d)], comm={}, definitions={},
    )
    return PcGroup(pres)


def cyclic9():
    pres = PcPresentation(
        p=3, names=["x", "s"], weights=[1, 2],
        power=[((1, 1),), ()], comm={}, definitions={1: ("p", 0)},
    )
    return PcGroup(pres)


def dihedral16_rotation_first():
    """The order-16 dihedral group again, with the rotation listed first."""
    pres = PcPresentation(
        p=2, names=["x", "y", "s2", "s3"], weights=[1, 1, 2, 3],
        power=[((2, 1),), (), ((3, 1),), ()],
        comm={(1, 0): ((2, 1),), (2, 1): ((3, 1),)},
        definitions={2: ("c", 1, 0), 3: ("p", 2)},
    )
    return PcGroup(pres)


# ---------------------------------------------------------------- naive oracle


def naive_transfer_kernel_flags(G, H):
    """{g: V(g) in [H,H]} for all g, from scratch on the element list."""
    elements = sorted(G.elements())
    hd = derived_part(G, H)
    reps = []
    for e in elements:
        if not any(H.contains(G.mul(e, G.inv(r))) for r in reps):
            reps.append(e)
    assert len(reps) * (2 ** H.order_log if G.p == 2 else 3 ** H.order_log) \
        == len(elements)

    def rep_of(g):
        for r in reps:
            if H.contains(G.mul(g, G.inv(r))):
                return r
        raise AssertionError("no coset representative found")

    flags = {}
    for g in elements:
        v = G.identity
        for r in reps:
            w = G.mul(r, g)
            v = G.mul(v, G.mul(w, G.inv(rep_of(w))))
        flags[g] = hd.contains(v)
    return flags


def library_kernel_flags(G, H):
    data = abelianization_data(G)
    hom = artin_transfer(G, H, data)
    return {g: hom.kernel.contains(data.project(g)) for g in sorted(G.elements())}


def maximal_subgroups(G):
    data = abelianization_data(G)
    lay = subgroup_layering(G)
    return [ls.subgroup for ls in lay.layers[1]]


@pytest.mark.parametrize(
    "make", [dihedral8, quaternion8, dihedral16, heisenberg27],
    ids=["D8", "Q8", "D16", "He27"],
)
def test_kernels_match_naive_oracle(make):
    G = make()
    for H in maximal_subgroups(G):
        assert library_kernel_flags(G, H) == naive_transfer_kernel_flags(G, H)


def test_deeper_layer_matches_naive_oracle():
    G = dihedral16()
    lay = subgroup_layering(G)
    for ls in lay.layers[2]:
        assert library_kernel_flags(G, ls.subgroup) == \
            naive_transfer_kernel_flags(G, ls.subgroup)


# ------------------------------------------------------------- direct classics


def test_transfer_to_whole_group_is_identity():
    G = heisenberg27()
    data = abelianization_data(G)
    hom = artin_transfer(G, Subgroup.full(G), data)
    for a, v in hom.values.items():
        assert data.project(v) == a
    assert hom.kernel.order_log == 0


def test_cyclic_p_squared_kernel_has_order_p():
    C9 = cyclic9()
    H = Subgroup.generated(C9, [C9.gens[1]])
    hom = artin_transfer(C9, H)
    assert hom.kernel.order_log == 1
    # the transfer is the cubing map
    assert hom.values[(1, 0)] == (0, 1)


@pytest.mark.parametrize("p", [2, 3])
def test_elementary_rank2_transfers_are_trivial(p):
    G = elementary(p, 2)
    for H in maximal_subgroups(G):
        hom = artin_transfer(G, H)
        assert all(v == G.identity for v in hom.values.values())
        assert hom.kernel.order_log == 2  # total kernel


def test_heisenberg_kappa_all_total():
    kappa, ttt = layered_transfer_types(heisenberg27())
    assert kappa == ((1,), (0, 0, 0, 0), (0,))
    assert ttt == (((1, 1),), ((1, 1),) * 4, ((1,),))


def test_dihedral16_layered_types():
    kappa, ttt = layered_transfer_types(dihedral16())
    # maximal subgroups: the rotation subgroup is cyclic of order 8, the
    # other two are dihedral of order 8
    assert ttt[0] == ((1, 1),)
    assert ttt[1] == ((3,), (1, 1), (1, 1))
    assert ttt[2] == ((2,),)  # the derived subgroup is cyclic of order 4
    assert kappa[0] == (1,)
    # every kernel code is a listed value, not a raw subspace payload
    assert all(isinstance(c, int) for layer in kappa for c in layer)


# -------------------------------------------------- transversal independence


def test_transversal_independence():
    rng = random.Random(7)
    for make in (heisenberg27, dihedral16):
        G = make()
        data = abelianization_data(G)
        for H in maximal_subgroups(G):
            base = artin_transfer(G, H, data)
            h_elems = list(H.elements())
            quo_reps = [
                G.mul(rng.choice(h_elems), r)
                for r in _canonical_transversal(G, H, data)
            ]
            alt = artin_transfer(G, H, data, transversal=quo_reps)
            assert base.same_map(alt)
            assert base.kernel == alt.kernel


def _canonical_transversal(G, H, data):
    from pgroupgen.pcgroup import quotient_by_normal

    image = Subgroup.generated(data.ab, [data.project(g) for g in H.igs])
    quo, to_quo, from_quo = quotient_by_normal(data.ab, image)
    return [data.lift(from_quo(k)) for k in quo.elements()]


def test_bad_transversal_rejected():
    G = heisenberg27()
    H = maximal_subgroups(G)[0]
    with pytest.raises(ValueError):
        artin_transfer(G, H, transversal=[G.identity, G.identity, G.identity])


def test_target_must_contain_derived():
    G = dihedral16()
    tiny = Subgroup.generated(G, [G.gens[3]])
    with pytest.raises(ValueError):
        artin_transfer(G, tiny)


def test_transfer_is_homomorphism():
    G = dihedral16()
    data = abelianization_data(G)
    for H in maximal_subgroups(G):
        hom = artin_transfer(G, H, data)
        hd = hom.H_derived
        for a in data.ab.elements():
            for b in data.ab.elements():
                lhs = hom.values[data.ab.mul(a, b)]
                rhs = G.mul(hom.values[a], hom.values[b])
                assert hd.contains(G.mul(lhs, G.inv(rhs)))


# ------------------------------------------------------------------- layering


def test_layering_shapes():
    lay33 = subgroup_layering(heisenberg27())
    assert [len(l) for l in lay33.layers] == [1, 4, 1]
    assert [ls.label for ls in lay33.layers[1]] == ["H_1", "H_2", "H_3", "H_4"]
    lay222 = subgroup_layering(elementary(2, 3))
    assert [len(l) for l in lay222.layers] == [1, 7, 7, 1]
    assert [ls.label for ls in lay222.layers[1]][:2] == ["S_1", "S_2"]
    # fixed listing: S_1 = <y, z>, S_7 = <xy, yz>
    assert lay222.layers[1][0].space == Subspace.from_rows(
        [[0, 1, 0], [0, 0, 1]], 3, 2
    )
    assert lay222.layers[1][6].space == Subspace.from_rows(
        [[1, 1, 0], [0, 1, 1]], 3, 2
    )
    # the last layer is the derived subgroup itself
    assert lay33.layers[-1][0].subgroup == lay33.derived


def test_layer1_listing_rank2():
    lay = subgroup_layering(heisenberg27())
    want = [
        [[0, 1]], [[1, 0]], [[1, 1]], [[1, 2]],
    ]
    for ls, rows in zip(lay.layers[1], want):
        assert ls.space == Subspace.from_rows(rows, 2, 3)


def test_unsupported_shapes():
    with pytest.raises(UnsupportedShapeError):
        subgroup_layering(cyclic4())        # cyclic abelianization
    with pytest.raises(UnsupportedShapeError):
        subgroup_layering(cyclic9())
    with pytest.raises(UnsupportedShapeError):
        subgroup_layering(elementary(3, 3))  # rank 3 only supported at p=2


# ------------------------------------------- normalization and the catalogue


def test_layer1_permutation_group_sizes():
    assert len(layer1_permutation_group(2, 3)) == 24   # all of Sym(4)
    assert len(layer1_permutation_group(2, 2)) == 6    # all of Sym(3)
    assert len(layer1_permutation_group(3, 2)) == 168  # simple group of order 168


def test_normalization_is_orbit_invariant():
    kap = (2, 3, 3, 4)
    norm = normalize_kappa1(kap, 2, 3)
    for perm in layer1_permutation_group(2, 3):
        relabeled = [0] * 4
        for i, code in enumerate(kap):
            relabeled[perm[i]] = perm[code - 1] + 1 if code >= 1 else 0
        assert normalize_kappa1(tuple(relabeled), 2, 3) == norm


def test_catalogue_names():
    assert tkt_name_33((0, 1, 2, 2)) == "c.18"
    assert tkt_name_33((2, 0, 3, 4)) == "c.21"
    assert tkt_name_33((1, 1, 2, 2)) == "E.6"
    assert tkt_name_33((2, 2, 3, 4)) == "E.8"
    assert tkt_name_33((2, 3, 3, 4)) == "E.9"
    assert tkt_name_33((2, 4, 3, 4)) == "E.9"   # same class, other labeling
    assert tkt_name_33((3, 1, 2, 2)) == "E.14"
    assert tkt_name_33((4, 1, 2, 2)) == "E.14"
    assert tkt_name_33((2, 1, 2, 2)) == "H.4"
    assert tkt_name_33((2, 1, 3, 4)) == "G.16"
    assert tkt_name_33((0, 0, 0, 0)) is None


def test_catalogue_classes_are_distinct():
    from pgroupgen.transfer import _TKT_NAMES_33

    norms = {normalize_kappa1(k, 2, 3) for k in _TKT_NAMES_33.values()}
    assert len(norms) == len(_TKT_NAMES_33)


def test_same_group_different_listing_normalizes_alike():
    a = dihedral16()
    b = dihedral16_rotation_first()
    assert not check_consistency(b)
    ka, ta = layered_transfer_types(a)
    kb, tb = layered_transfer_types(b)
    assert ta[1] != tb[1]  # the listings really do differ
    assert sorted(ta[1]) == sorted(tb[1])
    assert normalize_kappa1(ka[1], 2, 2) == normalize_kappa1(kb[1], 2, 2)


# ----------------------------------------------------------- sigma and Schur


def test_elementary_33_is_sigma():
    G = elementary(3, 2)
    from pgroupgen.act import automorphism_group

    aut = automorphism_group(G)
    assert is_sigma_group(G, aut)


def test_sigma_small_groups():
    for make, expect in [
        (heisenberg27, True),
        (cyclic9, True),       # inversion exists in the cyclic case
        (dihedral16, True),    # p = 2: inversion is trivial on the quotient
    ]:
        G = make()
        aut = brute_automorphism_group(G)
        assert is_sigma_group(G, aut) is expect


def test_sigma_needs_a_witness():
    G = heisenberg27()
    only_identity = AutGroup(
        group=G, gens=[], order=1, elements=None
    )
    assert not is_sigma_group(G, only_identity)


def test_sigma_generator_closure_matches_element_scan():
    G = heisenberg27()
    for child in immediate_descendants(G):
        C = child.group
        full = brute_automorphism_group(C, budget=2_000_000)
        gens_only = AutGroup(group=C, gens=full.gens, order=full.order,
                             elements=None)
        assert is_sigma_group(C, full) == is_sigma_group(C, gens_only)


def test_classify_sigma_flags():
    G = heisenberg27()
    aut = brute_automorphism_group(G)
    flags = classify_sigma(G, aut)
    # multiplicator has rank 2, so the group is sigma but not Schur
    assert flags == {
        "is_sigma": True, "is_schur": False, "is_schur_sigma": False,
    }
    Q8 = quaternion8()
    flags = classify_sigma(Q8, brute_automorphism_group(Q8))
    assert flags["is_schur"]
    assert flags["is_sigma"]
    assert flags["is_schur_sigma"]


def test_transfer_data_bundle():
    G = heisenberg27()
    aut = brute_automorphism_group(G)
    td = transfer_data(G, aut)
    assert td.kappa1 == (0, 0, 0, 0)
    assert td.kappa1_normalized == (0, 0, 0, 0)
    assert td.tkt_name is None
    assert td.sigma is True
    assert td.schur_defect == 2
    assert td.ttt_layered[1] == ((1, 1),) * 4
