"""Descendant enumeration cross-validated between strategies and oracles.

Small-case expectations are classical (the three maximal-class groups of
order 16 over the dihedral group of order 8; cyclic and quaternion behaviour)
or fixed counter values for the exponent-3 group of order 27.  Deeper
assertions avoid magic numbers entirely: the lifted automorphism data must
agree with an independent brute-force computation on the same child.
"""

import pytest
from _oracles import element_order_multiset
from test_pcgroup import cyclic4, dihedral8, heisenberg27, quaternion8

from pgroupgen.act import AutGroup, automorphism_group, brute_automorphism_group
from pgroupgen.cover import p_cover
from pgroupgen.descend import (
    allowable_subspaces,
    descendant_counters,
    format_counters,
    immediate_descendants,
    is_capable,
    subspace_orbits,
)
from pgroupgen.pcgroup import PcGroup


def test_counters_for_extraspecial27():
    G = PcGroup(heisenberg27())
    counters = descendant_counters(G)
    assert counters == ((4, 1), (7, 5))
    assert format_counters(counters) == "(4/1;7/5)"


def test_counters_for_small_two_groups():
    # of the three children only the dihedral one is capable: the quaternion
    # and semidihedral groups of order 16 already have trivial nucleus
    assert descendant_counters(PcGroup(dihedral8())) == ((3, 1),)
    assert descendant_counters(PcGroup(cyclic4())) == ((1, 1),)
    assert descendant_counters(PcGroup(quaternion8())) == ()
    assert format_counters(()) == "()"


def test_capability():
    assert is_capable(PcGroup(dihedral8()))
    assert not is_capable(PcGroup(quaternion8()))


def test_immediate_descendants_of_dihedral8():
    G = PcGroup(dihedral8())
    records = immediate_descendants(G)
    assert len(records) == 3
    assert all(r.step == 1 for r in records)
    assert sum(r.orbit_size for r in records) == len(
        allowable_subspaces(p_cover(G), 1)
    )
    multisets = {tuple(element_order_multiset(r.group)) for r in records}
    from test_cover import quaternion16, semidihedral16
    from test_pcgroup import dihedral16

    assert multisets == {
        tuple(element_order_multiset(PcGroup(dihedral16()))),
        tuple(element_order_multiset(PcGroup(semidihedral16()))),
        tuple(element_order_multiset(PcGroup(quaternion16()))),
    }


@pytest.mark.parametrize("make", [dihedral8, heisenberg27])
def test_lifted_automorphism_groups_match_brute_force(make):
    G = PcGroup(make())
    for rec in immediate_descendants(G):
        lifted = automorphism_group(rec.group, strategy="lifted")
        assert lifted.order == rec.aut_order
        for a in lifted.gens:
            assert a.verify()
        brute = brute_automorphism_group(rec.group, budget=2_000_000)
        assert lifted.order == brute.order


def test_grandchild_counters_with_lifted_versus_brute_automorphisms():
    G = PcGroup(heisenberg27())
    records = immediate_descendants(G, steps=[1])
    capable = [r for r in records if is_capable(r.group)]
    assert len(capable) == 1
    E = capable[0].group
    with_lifted = descendant_counters(E, aut=automorphism_group(E, "lifted"))
    with_brute = descendant_counters(E, aut=brute_automorphism_group(E))
    assert with_lifted == with_brute


def test_schreier_orbits_agree_with_element_stabilizers():
    G = PcGroup(heisenberg27())
    cd = p_cover(G)
    full = brute_automorphism_group(G)
    # same group handed over without its element list forces the
    # transversal/stabilizer-generator path
    gens_only = AutGroup(group=G, gens=full.elements, order=full.order)
    for step in (1, 2):
        by_elements = subspace_orbits(cd, full, step)
        by_schreier = subspace_orbits(cd, gens_only, step)
        assert [(o.rep.key(), o.size) for o in by_elements] == [
            (o.rep.key(), o.size) for o in by_schreier
        ]
        for oe, os_ in zip(by_elements, by_schreier):
            target = full.order // oe.size
            closure = _automorphism_closure(G, os_.stabilizer_images)
            assert len(closure) == target
            element_closure = _automorphism_closure(G, oe.stabilizer_images)
            assert closure == element_closure


def _automorphism_closure(G, image_tuples):
    from pgroupgen.act import Automorphism

    ident = Automorphism(G, tuple(G.gens))
    gens = [Automorphism(G, imgs) for imgs in image_tuples]
    seen = {ident.images}
    queue = [ident]
    while queue:
        a = queue.pop()
        for g in gens:
            nxt = g.compose(a)
            if nxt.images not in seen:
                seen.add(nxt.images)
                queue.append(nxt)
    return seen


def test_descendant_enumeration_is_deterministic():
    G = PcGroup(heisenberg27())
    first = immediate_descendants(G)
    second = immediate_descendants(G)
    assert [r.kernel.key() for r in first] == [r.kernel.key() for r in second]
    assert [r.group.pres.signature() for r in first] == [
        r.group.pres.signature() for r in second
    ]
    assert descendant_counters(G) == descendant_counters(G)


def test_children_carry_lineage_and_definitions():
    G = PcGroup(heisenberg27())
    for rec in immediate_descendants(G):
        child = rec.group
        assert child.lineage is not None
        assert child.lineage.parent is G
        defs = child.pres.definitions
        for k in range(child.n):
            if child.pres.weights[k] > 1:
                assert k in defs
