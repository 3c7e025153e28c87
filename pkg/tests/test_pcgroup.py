"""Collection arithmetic against permutation and multiplication-table oracles."""

import random

import pytest
from _oracles import (
    check_table_is_group,
    element_order_multiset,
    group_table,
    perm_closure,
    perm_comm,
    perm_from_cycles,
    perm_group_order_multiset,
    perm_identity,
    perm_inv,
    perm_mul,
)

from pgroupgen.pcgroup import (
    PcGroup,
    PcPresentation,
    Subgroup,
    abelian_invariants,
    check_consistency,
    homomorphism_ok,
    quotient_by_normal,
)


def cyclic4():
    return PcPresentation(
        p=2, names=["a", "b"], weights=[1, 2],
        power=[((1, 1),), ()], comm={}, definitions={1: ("p", 0)},
    )


def dihedral8():
    # x reflection, y rotation of order 4, s2 = [y,x] = y^2
    return PcPresentation(
        p=2, names=["x", "y", "s2"], weights=[1, 1, 2],
        power=[(), ((2, 1),), ()], comm={(1, 0): ((2, 1),)},
        definitions={2: ("c", 1, 0)},
    )


def quaternion8():
    return PcPresentation(
        p=2, names=["x", "y", "s2"], weights=[1, 1, 2],
        power=[((2, 1),), ((2, 1),), ()], comm={(1, 0): ((2, 1),)},
        definitions={2: ("c", 1, 0)},
    )


def dihedral16():
    # y is the order-8 rotation, x a reflection; y^2 = s2^-1 = s2 s3
    return PcPresentation(
        p=2, names=["x", "y", "s2", "s3"], weights=[1, 1, 2, 3],
        power=[(), ((2, 1), (3, 1)), ((3, 1),), ()],
        comm={(1, 0): ((2, 1),), (2, 0): ((3, 1),), (2, 1): ()},
        definitions={2: ("c", 1, 0), 3: ("p", 2)},
    )


def heisenberg27():
    return PcPresentation(
        p=3, names=["x", "y", "s2"], weights=[1, 1, 2],
        power=[(), (), ()], comm={(1, 0): ((2, 1),)},
        definitions={2: ("c", 1, 0)},
    )


def dihedral16_missing_chain():
    # drops s2^2 = s3 (the "all defaults trivial" reading); inconsistent
    return PcPresentation(
        p=2, names=["x", "y", "s2", "s3"], weights=[1, 1, 2, 3],
        power=[(), ((2, 1),), (), ()],
        comm={(1, 0): ((2, 1),), (2, 0): ((3, 1),)},
    )


ALL_CONSISTENT = [cyclic4, dihedral8, quaternion8, dihedral16, heisenberg27]


@pytest.mark.parametrize("make", ALL_CONSISTENT)
def test_consistency_passes(make):
    assert check_consistency(PcGroup(make())) == []


def test_consistency_catches_missing_power_chain():
    assert check_consistency(PcGroup(dihedral16_missing_chain())) != []


@pytest.mark.parametrize("make", ALL_CONSISTENT)
def test_multiplication_table_is_a_group(make):
    G = PcGroup(make())
    elems, table = group_table(G)
    check_table_is_group(table, elems.index(G.identity))


def dihedral_perm_gens(n):
    """Dihedral group of order 2n on n points: rotation r, reflection f."""
    r = perm_from_cycles(n, [tuple(range(n))])
    f = tuple((n - i) % n for i in range(n))
    return r, f


def test_dihedral8_matches_permutation_realization():
    G = PcGroup(dihedral8())
    r, f = dihedral_perm_gens(4)
    assert element_order_multiset(G) == perm_group_order_multiset([r, f])
    # explicit relation check under x->f, y->r, s2->r^2
    images = [f, r, perm_mul(r, r)]
    ident = perm_identity(4)
    assert perm_mul(images[0], images[0]) == ident
    assert perm_mul(images[1], images[1]) == images[2]
    assert perm_comm(images[1], images[0]) == images[2]


def test_dihedral16_matches_permutation_realization():
    G = PcGroup(dihedral16())
    r, f = dihedral_perm_gens(8)
    assert element_order_multiset(G) == perm_group_order_multiset([r, f])


def quaternion_perm_gens():
    # regular action of Q8 on its 8 elements: 1,-1,i,-i,j,-j,k,-k
    names = ["1", "-1", "i", "-i", "j", "-j", "k", "-k"]
    idx = {nm: t for t, nm in enumerate(names)}

    def neg(nm):
        return nm[1:] if nm.startswith("-") else "-" + nm

    def q_mul(a, b):
        sign = 1
        for nm in (a, b):
            if nm.startswith("-"):
                sign = -sign
        ua, ub = a.lstrip("-"), b.lstrip("-")
        table = {
            ("1", "1"): "1", ("1", "i"): "i", ("1", "j"): "j", ("1", "k"): "k",
            ("i", "1"): "i", ("j", "1"): "j", ("k", "1"): "k",
            ("i", "i"): "-1", ("j", "j"): "-1", ("k", "k"): "-1",
            ("i", "j"): "k", ("j", "i"): "-k",
            ("j", "k"): "i", ("k", "j"): "-i",
            ("k", "i"): "j", ("i", "k"): "-j",
        }
        out = table[(ua, ub)]
        if sign < 0:
            out = neg(out) if not out.startswith("-") else out[1:]
        return out

    def right_mult_perm(g):
        return tuple(idx[q_mul(names[t], g)] for t in range(8))

    return right_mult_perm("i"), right_mult_perm("j")


def test_quaternion8_matches_permutation_realization():
    G = PcGroup(quaternion8())
    i, j = quaternion_perm_gens()
    assert element_order_multiset(G) == perm_group_order_multiset([i, j])
    assert element_order_multiset(G) != element_order_multiset(PcGroup(dihedral8()))


def heisenberg_perm_gens():
    # unitriangular 3x3 matrices over F_3 acting on column vectors F_3^3
    def mat_perm(m):
        vecs = [(a, b, c) for a in range(3) for b in range(3) for c in range(3)]
        idx = {v: t for t, v in enumerate(vecs)}

        def apply(v):
            return tuple(
                sum(m[r][c] * v[c] for c in range(3)) % 3 for r in range(3)
            )

        return tuple(idx[apply(v)] for v in vecs)

    x = mat_perm([[1, 1, 0], [0, 1, 0], [0, 0, 1]])
    y = mat_perm([[1, 0, 0], [0, 1, 1], [0, 0, 1]])
    return x, y


def test_heisenberg_matches_matrix_realization():
    G = PcGroup(heisenberg27())
    x, y = heisenberg_perm_gens()
    closure = perm_closure([x, y])
    assert len(closure) == 27
    assert element_order_multiset(G) == perm_group_order_multiset([x, y])


def test_collection_basics():
    G = PcGroup(dihedral8())
    x, y, s2 = G.gens
    assert G.mul(x, x) == G.identity
    assert G.mul(y, y) == s2
    assert G.comm(y, x) == s2
    assert G.element_order(y) == 4
    assert G.element_order(G.mul(x, y)) == 2
    for e in G.elements():
        assert G.mul(e, G.inv(e)) == G.identity
        assert G.mul(G.inv(e), e) == G.identity


def test_inverse_and_power_against_table():
    for make in ALL_CONSISTENT:
        G = PcGroup(make())
        elems = list(G.elements())
        rnd = random.Random(3)
        for _ in range(30):
            a, b = rnd.choice(elems), rnd.choice(elems)
            assert G.inv(G.mul(a, b)) == G.mul(G.inv(b), G.inv(a))
            assert G.pow(a, 5) == G.mul(a, G.pow(a, 4))
            assert G.conj(a, b) == G.mul(a, G.comm(a, b))


def test_subgroup_igs_membership_and_canonical_form():
    G = PcGroup(dihedral16())
    x, y, s2, s3 = G.gens
    H = Subgroup.generated(G, [y])
    assert H.order_log == 3  # <y> is cyclic of order 8
    assert H.contains(s2) and H.contains(s3) and not H.contains(x)
    H2 = Subgroup.generated(G, [G.mul(y, s3), s2])
    assert H.igs == H2.igs
    rnd = random.Random(5)
    elems = [e for e in H.elements()]
    for _ in range(10):
        gens = rnd.sample(elems, 3)
        K = Subgroup.generated(G, gens)
        assert all(H.contains(b) for b in K.igs)
    # coordinates round-trip
    for e in elems:
        coords = H.coordinates(e)
        out = G.identity
        for b, c in zip(H.igs, coords):
            out = G.mul(out, G.pow(b, c))
        assert out == e


def test_normal_closure():
    G = PcGroup(dihedral8())
    x = G.gens[0]
    N = Subgroup.generated(G, [x], normal_under=G.gens)
    assert N.order_log == 2
    assert N.contains(G.gens[2])  # s2 = [y,x]^-1-ish lands inside


def test_quotient_by_centre_of_dihedral16():
    G = PcGroup(dihedral16())
    s3 = G.gens[3]
    N = Subgroup.generated(G, [s3], normal_under=G.gens)
    assert N.order_log == 1
    Q, project, lift = quotient_by_normal(G, N, check=True)
    assert Q.order_log == 3
    D8 = PcGroup(dihedral8())
    assert element_order_multiset(Q) == element_order_multiset(D8)
    rnd = random.Random(11)
    elems = list(G.elements())
    for _ in range(40):
        a, b = rnd.choice(elems), rnd.choice(elems)
        assert project(G.mul(a, b)) == Q.mul(project(a), project(b))
    for q in Q.elements():
        assert project(lift(q)) == q


def test_quotient_to_trivial_group():
    G = PcGroup(cyclic4())
    N = Subgroup.full(G)
    Q, project, _ = quotient_by_normal(G, N)
    assert Q.order_log == 0
    assert project(G.gens[0]) == ()


@pytest.mark.parametrize("make,expected", [
    (cyclic4, (2,)),
    (dihedral8, (1, 1)),
    (quaternion8, (1, 1)),
    (dihedral16, (1, 1)),
    (heisenberg27, (1, 1)),
])
def test_abelianization_invariants(make, expected):
    G = PcGroup(make())
    assert abelian_invariants(G) == expected


def test_abelian_invariants_of_sections():
    G = PcGroup(dihedral16())
    y = G.gens[1]
    s3 = G.gens[3]
    H = Subgroup.generated(G, [y])
    K = Subgroup.generated(G, [s3])
    assert abelian_invariants(G, H, Subgroup.trivial(G)) == (3,)  # C_8
    assert abelian_invariants(G, H, K) == (2,)  # C_4
    full = Subgroup.full(G)
    K2 = Subgroup.generated(G, [G.gens[2], G.gens[3]])
    assert abelian_invariants(G, full, K2) == (1, 1)


def test_abelian_invariants_rejects_nonnormal_or_small_K():
    G = PcGroup(dihedral8())
    x = G.gens[0]
    H = Subgroup.full(G)
    K = Subgroup.generated(G, [x])
    with pytest.raises(ValueError):
        abelian_invariants(G, H, K)  # [H,H] not inside K


def test_inert_skip_matches_full_check():
    # tailed variant: central order-p tails appended to relation right sides
    tailed = PcPresentation(
        p=2, names=["x", "y", "s2", "t1", "t2"], weights=[1, 1, 2, 3, 3],
        power=[((3, 1),), ((2, 1), (4, 1)), ((4, 1),), (), ()],
        comm={(1, 0): ((2, 1),), (2, 0): ((3, 1), (4, 1))},
    )
    full = check_consistency(PcGroup(tailed), skip_inert=False)
    fast = check_consistency(PcGroup(tailed), skip_inert=True)
    assert set(full) == set(fast)
    for make in ALL_CONSISTENT:
        assert check_consistency(PcGroup(make()), skip_inert=True) == []
    broken = dihedral16_missing_chain()
    assert set(check_consistency(PcGroup(broken), skip_inert=True)) == set(
        check_consistency(PcGroup(broken), skip_inert=False)
    )


def test_text_and_json_round_trip():
    for make in ALL_CONSISTENT:
        pres = make()
        again = PcPresentation.from_text(pres.to_text())
        assert again.p == pres.p and again.names == pres.names
        assert again.weights == pres.weights and again.power == pres.power
        assert again.comm == pres.comm and again.definitions == pres.definitions
        assert PcPresentation.from_json(pres.to_json()).signature() == pres.signature()
        assert pres.signature() == make().signature()


def test_text_format_shape():
    pres = heisenberg27()
    text = pres.to_text()
    assert text.startswith("p=3; gens x,y,s2;")
    assert "comm [y,x] = s2" in text
    assert PcPresentation.from_text("p=3; gens a; w(a)=1;").n == 1


def test_homomorphism_check():
    G = PcGroup(dihedral8())
    H = PcGroup(dihedral8())
    assert homomorphism_ok(G, H, list(H.gens))
    x, y, s2 = H.gens
    assert homomorphism_ok(G, H, [H.mul(x, s2), y, s2])
    assert not homomorphism_ok(G, H, [y, x, s2])  # y^2 = s2 breaks


def test_element_coercion():
    G = PcGroup(heisenberg27())
    assert G.element("x y^2") == (1, 2, 0)
    assert G.element([(0, 1), (1, 2)]) == (1, 2, 0)
    assert G.element((1, 2, 0)) == (1, 2, 0)
    assert G.element("1") == G.identity
