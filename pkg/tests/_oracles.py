"""Independent brute-force oracles shared by the test modules."""

import itertools

import numpy as np


def perm_mul(a, b):
    """Apply a first, then b."""
    return tuple(b[a[i]] for i in range(len(a)))


def perm_inv(a):
    out = [0] * len(a)
    for i, v in enumerate(a):
        out[v] = i
    return tuple(out)


def perm_identity(n):
    return tuple(range(n))


def perm_from_cycles(n, cycles):
    out = list(range(n))
    for cyc in cycles:
        for i, v in enumerate(cyc):
            out[v] = cyc[(i + 1) % len(cyc)]
    return tuple(out)


def perm_order(a):
    n = 1
    x = a
    ident = perm_identity(len(a))
    while x != ident:
        x = perm_mul(x, a)
        n += 1
    return n


def perm_closure(gens):
    ident = perm_identity(len(gens[0]))
    seen = {ident}
    frontier = [ident]
    while frontier:
        nxt = []
        for x in frontier:
            for g in gens:
                y = perm_mul(x, g)
                if y not in seen:
                    seen.add(y)
                    nxt.append(y)
        frontier = nxt
    return seen


def perm_comm(a, b):
    return perm_mul(perm_mul(perm_inv(a), perm_inv(b)), perm_mul(a, b))


def group_table(G):
    """Full Cayley table of a PcGroup; rows/cols indexed by element rank."""
    elems = list(G.elements())
    index = {e: i for i, e in enumerate(elems)}
    n = len(elems)
    table = np.zeros((n, n), dtype=np.int64)
    for i, a in enumerate(elems):
        for j, b in enumerate(elems):
            table[i, j] = index[G.mul(a, b)]
    return elems, table


def check_table_is_group(table, identity_index):
    """Latin square + identity + inverses + full associativity."""
    n = table.shape[0]
    for i in range(n):
        assert sorted(table[i]) == list(range(n)), "row not a permutation"
        assert sorted(table[:, i]) == list(range(n)), "column not a permutation"
    assert all(table[identity_index, j] == j for j in range(n))
    assert all(table[i, identity_index] == i for i in range(n))
    for i in range(n):
        assert identity_index in table[i], "missing inverse"
    left = table[table]
    right = table[:, table]
    assert left.shape == (n, n, n)
    assert np.array_equal(left, right), "associativity fails"


def element_order_multiset(G):
    return sorted(G.element_order(e) for e in G.elements())


def perm_group_order_multiset(gens):
    return sorted(perm_order(x) for x in perm_closure(gens))


def brute_isomorphic(G, H):
    """Exhaustive isomorphism search for small groups.

    Tries every assignment of H-elements to the minimal generators of G,
    extends through the definitions, and checks for a bijective
    homomorphism.
    """
    from pgroupgen.pcgroup import Subgroup, homomorphism_ok, push_through_definitions

    if G.p != H.p or G.order_log != H.order_log:
        return False
    mins = G.min_gen_indices()
    els = list(H.elements())
    for combo in itertools.product(els, repeat=len(mins)):
        full = push_through_definitions(G, H, list(combo))
        if not homomorphism_ok(G, H, full):
            continue
        if Subgroup.generated(H, full).order_log == H.order_log:
            return True
    return False
