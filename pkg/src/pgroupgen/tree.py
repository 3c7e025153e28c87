"""Descendant trees: growth, pruning, mainlines, branch periodicity, covers.

A tree node is addressed by its id path, the sequence of (step, index) edges
taken from the root in the deterministic enumeration order of
immediate_descendants.  Indices count all enumerated children, so a vertex
keeps its address no matter which pruning is applied.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field, replace

import numpy as np

from .act import (
    AutGroup,
    BudgetExceededError,
    Lineage,
    automorphism_group,
    lifted_automorphism_group,
    multiplicator_action,
)
from .cover import MissingDefinitionsError, child_from_cover, p_cover
from .descend import immediate_descendants
from .fpmat import Subspace, act_on_subspace, nullspace
from .pcgroup import (
    PcGroup,
    PcPresentation,
    Subgroup,
    infer_definitions,
    push_through_definitions,
    quotient_by_normal,
)
from .series import (
    derived_series,
    gamma_quotient_invariants,
    group_invariants,
    lower_p_central_series,
    zeta_quotient_invariants,
)
from .transfer import (
    UnsupportedShapeError,
    is_sigma_group,
    layered_transfer_types,
    normalize_kappa_layered,
    subgroup_layering,
    tkt_name_33,
)

IdPath = tuple  # ((step, index), ...), both 1-based; () is the root


# -- fingerprints ---------------------------------------------------------------


@dataclass(frozen=True)
class Fingerprint:
    """Isomorphism-invariant summary used for node labels and selection.

    counters cover the steps the surrounding tree was grown with (None until
    the vertex is expanded); kappa is the relabeling-normalized layered
    kernel type and ttt the per-layer sorted target types.  Fields that need
    a cover or a supported layering shape degrade to None instead of failing.
    """

    order_log: int
    rank: int
    nilpotency_class: int
    p_class: int
    coclass: int
    derived_length: int
    abelianization: tuple
    gamma_types: tuple
    mu: int | None = None
    nu: int | None = None
    counters: tuple | None = None
    kappa: tuple | None = None
    ttt: tuple | None = None

    def core(self) -> tuple:
        """The cover-free part (defined for every group)."""
        return (
            self.order_log,
            self.rank,
            self.nilpotency_class,
            self.p_class,
            self.coclass,
            self.derived_length,
            self.abelianization,
            self.gamma_types,
        )

    def as_dict(self) -> dict:
        return {
            "order_log": self.order_log,
            "rank": self.rank,
            "class": self.nilpotency_class,
            "p_class": self.p_class,
            "coclass": self.coclass,
            "derived_length": self.derived_length,
            "abelianization": list(self.abelianization),
            "gamma_types": [list(t) for t in self.gamma_types],
            "mu": self.mu,
            "nu": self.nu,
            "counters": None if self.counters is None else [list(c) for c in self.counters],
            "kappa": _codes_to_json(self.kappa),
            "ttt": None if self.ttt is None else [[list(t) for t in layer] for layer in self.ttt],
        }


def _codes_to_json(kappa):
    if kappa is None:
        return None
    return [[list(c) if isinstance(c, tuple) else c for c in layer] for layer in kappa]


def _codes_from_json(data):
    if data is None:
        return None
    return tuple(
        tuple(tuple(c) if isinstance(c, list) else c for c in layer) for layer in data
    )


def fingerprint(G: PcGroup) -> Fingerprint:
    inv = group_invariants(G)
    gamma = tuple(tuple(t) for t in gamma_quotient_invariants(G))
    mu = nu = None
    try:
        cd = p_cover(G)
        mu, nu = cd.mult_rank, cd.nucleus_rank
    except MissingDefinitionsError:
        pass
    kappa = ttt = None
    try:
        lay = subgroup_layering(G)
        kraw, traw = layered_transfer_types(G, lay)
        kappa = normalize_kappa_layered(kraw, lay.rank, G.p)
        ttt = tuple(tuple(sorted(layer)) for layer in traw)
    except UnsupportedShapeError:
        pass
    return Fingerprint(
        order_log=inv.order_log,
        rank=inv.rank,
        nilpotency_class=inv.nilpotency_class,
        p_class=inv.p_class,
        coclass=inv.coclass,
        derived_length=inv.derived_length,
        abelianization=tuple(inv.abelianization),
        gamma_types=gamma,
        mu=mu,
        nu=nu,
        kappa=kappa,
        ttt=ttt,
    )


# -- growth and pruning specifications --------------------------------------------


@dataclass(frozen=True)
class GrowthSpec:
    """How far to grow and which edges to take.

    steps=None takes every step size the nucleus allows, so stored counters
    agree with descendant_counters wherever the horizon did not interfere;
    a restricted steps tuple restricts the counters the same way.  max_class
    bounds the nilpotency class of expanded vertices.
    """

    max_order_log: int
    steps: tuple | None = None
    max_class: int | None = None
    max_nodes: int | None = None
    aut_strategy: str = "auto"
    budget: int = 200_000

    def __post_init__(self):
        if self.max_order_log < 1:
            raise ValueError("max_order_log must be positive")
        if self.steps is not None:
            if not self.steps or any(s < 1 for s in self.steps):
                raise ValueError("steps must be a nonempty tuple of positive sizes")
        if self.max_nodes is not None and self.max_nodes < 1:
            raise ValueError("max_nodes must be positive")


@dataclass(frozen=True)
class PruneSpec:
    """Filters applied to every non-root vertex as it is generated.

    kappa_allow entries may be catalogue names, layer-1 code tuples, or full
    layered code families; a vertex passes if any form matches its raw
    transfer data.  max_depth measures distance from the spine of capable
    vertices.  A vertex without transfer data fails any kappa filter.
    """

    sigma_only: bool = False
    kappa_allow: tuple | None = None
    metabelian_only: bool = False
    max_depth: int | None = None
    abelianization: tuple | None = None
    max_mu_minus_nu: int | None = None

    def is_active(self) -> bool:
        return any(
            (
                self.sigma_only,
                self.kappa_allow is not None,
                self.metabelian_only,
                self.max_depth is not None,
                self.abelianization is not None,
                self.max_mu_minus_nu is not None,
            )
        )

    def admits(self, node: "TreeNode") -> bool:
        fp = node.fingerprint
        if self.abelianization is not None and fp.abelianization != tuple(
            self.abelianization
        ):
            return False
        if self.metabelian_only and fp.derived_length > 2:
            return False
        if self.max_depth is not None and node.depth > self.max_depth:
            return False
        if self.max_mu_minus_nu is not None:
            if fp.mu is None or fp.nu is None or fp.mu - fp.nu > self.max_mu_minus_nu:
                return False
        if self.sigma_only and not node.sigma:
            return False
        if self.kappa_allow is not None:
            if not _kappa_matches(self.kappa_allow, node.tkt_name, node.kappa_raw):
                return False
        return True


def _kappa_matches(allow: tuple, tkt: str | None, kappa_raw: tuple | None) -> bool:
    for entry in allow:
        if isinstance(entry, str):
            if tkt is not None and tkt == entry:
                return True
        elif kappa_raw is not None:
            entry = tuple(tuple(x) if isinstance(x, list) else x for x in entry)
            if entry and isinstance(entry[0], tuple):
                if kappa_raw == entry:
                    return True
            elif len(kappa_raw) > 1 and kappa_raw[1] == entry:
                return True
    return False


# -- tree nodes ------------------------------------------------------------------


@dataclass
class TreeNode:
    group: PcGroup | None
    id_path: IdPath
    step: int
    orbit_size: int
    aut_order: int
    fingerprint: Fingerprint
    sigma: bool | None
    schur: bool | None
    tkt_name: str | None
    kappa_raw: tuple | None
    depth: int
    capable: bool
    expanded: bool = False
    children: list = field(default_factory=list)

    @property
    def terminal(self) -> bool:
        return not self.capable

    @property
    def parent_path(self) -> IdPath | None:
        return self.id_path[:-1] if self.id_path else None


@dataclass
class DescendantTree:
    nodes: dict
    spec: GrowthSpec
    prune: PruneSpec | None
    p: int
    complete: bool
    notes: list = field(default_factory=list)

    @property
    def root(self) -> TreeNode:
        return self.nodes[()]

    def node(self, path: IdPath) -> TreeNode:
        return self.nodes[tuple(path)]

    def children(self, path: IdPath) -> list:
        return [self.nodes[c] for c in self.nodes[tuple(path)].children]

    def vertices(self) -> list:
        return [self.nodes[k] for k in sorted(self.nodes, key=lambda q: (len(q), q))]

    def max_order_log(self) -> int:
        return max(n.fingerprint.order_log for n in self.nodes.values())


def _node_transfer(G: PcGroup):
    """Raw layered kernel codes plus the (3,3) catalogue name, shape permitting."""
    try:
        lay = subgroup_layering(G)
    except UnsupportedShapeError:
        return None, None
    kraw, _ = layered_transfer_types(G, lay)
    name = None
    if lay.rank == 2 and G.p == 3 and all(isinstance(c, int) for c in kraw[1]):
        name = tkt_name_33(kraw[1])
    return kraw, name


def _make_node(G: PcGroup, path: IdPath, step, orbit, aut, depth) -> TreeNode:
    fp = fingerprint(G)
    kraw, tkt = _node_transfer(G)
    sigma = is_sigma_group(G, aut) if aut is not None else None
    schur = None if fp.mu is None else (fp.mu == fp.rank)
    node = TreeNode(
        group=G,
        id_path=path,
        step=step,
        orbit_size=orbit,
        aut_order=aut.order if aut is not None else 0,
        fingerprint=fp,
        sigma=sigma,
        schur=schur,
        tkt_name=tkt,
        kappa_raw=kraw,
        depth=depth,
        capable=bool(fp.nu),
    )
    if not node.capable:
        node.expanded = True
        node.fingerprint = replace(fp, counters=())
    return node


def grow(
    root: PcGroup,
    spec: GrowthSpec,
    prune: PruneSpec | None = None,
    root_aut: AutGroup | None = None,
) -> DescendantTree:
    """Breadth-first descendant tree of the root under the given limits."""
    if root.pres.definitions is None and any(w > 1 for w in root.pres.weights):
        inferred = infer_definitions(root.pres)
        if inferred is not None:
            root = PcGroup(inferred)
    nodes: dict = {}
    auts: dict = {}
    complete = True
    notes: list = []

    aut0 = root_aut or automorphism_group(
        root, strategy=spec.aut_strategy, budget=spec.budget
    )
    nodes[()] = _make_node(root, (), 0, 1, aut0, 0)
    auts[()] = aut0
    queue = deque([()])
    while queue:
        path = queue.popleft()
        node = nodes[path]
        aut = auts.pop(path)
        if not node.capable:
            continue
        fp = node.fingerprint
        if spec.max_class is not None and fp.nilpotency_class >= spec.max_class:
            continue
        wanted = [s for s in (spec.steps or range(1, fp.nu + 1)) if s <= fp.nu]
        allowed = [s for s in wanted if fp.order_log + s <= spec.max_order_log]
        if not allowed:
            continue
        if spec.max_nodes is not None and len(nodes) >= spec.max_nodes:
            complete = False
            notes.append(f"node budget hit before expanding {path}")
            break
        counter_parts = []
        try:
            for s in sorted(allowed):
                recs = immediate_descendants(
                    node.group, aut=aut, steps=[s], budget=spec.budget
                )
                ncap = 0
                for idx, rec in enumerate(recs, start=1):
                    cpath = path + ((s, idx),)
                    caut = lifted_automorphism_group(rec.group)
                    child = _make_node(rec.group, cpath, s, rec.orbit_size, caut, 0)
                    child.depth = (
                        0 if (node.depth == 0 and child.capable) else node.depth + 1
                    )
                    if child.capable:
                        ncap += 1
                    if prune is not None and not prune.admits(child):
                        continue
                    nodes[cpath] = child
                    node.children.append(cpath)
                    if child.capable:
                        auts[cpath] = caut
                        queue.append(cpath)
                counter_parts.append((len(recs), ncap))
        except BudgetExceededError as exc:
            complete = False
            notes.append(f"budget exceeded expanding {path}: {exc}")
            continue
        node.fingerprint = replace(node.fingerprint, counters=tuple(counter_parts))
        node.expanded = len(allowed) == len(wanted)
    return DescendantTree(
        nodes=nodes, spec=spec, prune=prune, p=root.p, complete=complete, notes=notes
    )


def prune_tree(
    tree: DescendantTree, prune: PruneSpec, protect: tuple = ()
) -> DescendantTree:
    """Re-filter an existing tree; protected paths survive regardless."""
    protected = {tuple(tuple(e) for e in q) for q in protect}
    kept = {(): tree.root}
    for path in sorted(tree.nodes, key=lambda q: (len(q), q)):
        if path == ():
            continue
        node = tree.nodes[path]
        if node.parent_path not in kept:
            continue
        if path in protected or prune.admits(node):
            kept[path] = node
    out_nodes = {
        path: replace(node, children=[c for c in node.children if c in kept])
        for path, node in kept.items()
    }
    return DescendantTree(
        nodes=out_nodes,
        spec=tree.spec,
        prune=prune,
        p=tree.p,
        complete=tree.complete,
        notes=list(tree.notes),
    )


# -- mainlines and branches --------------------------------------------------------


class MainlineAmbiguityError(ValueError):
    def __init__(self, msg, candidates=()):
        super().__init__(msg)
        self.candidates = list(candidates)


def _subtree_max_order(tree: DescendantTree) -> dict:
    out: dict = {}
    for path in sorted(tree.nodes, key=len, reverse=True):
        node = tree.nodes[path]
        best = node.fingerprint.order_log
        for c in node.children:
            best = max(best, out[c])
        out[path] = best
    return out


def find_mainline(tree: DescendantTree, policy="capable-horizon") -> list:
    """Id paths of the distinguished infinite-path proxy, root first.

    The default policy walks step-1 edges towards capable children whose
    subtree reaches the deepest order present in the tree; several such
    children raise MainlineAmbiguityError.  An explicit list of id paths is
    validated and returned as given.
    """
    if not isinstance(policy, str):
        chain = [tuple(tuple(e) for e in q) for q in policy]
        if not chain or chain[0] != ():
            raise ValueError("an explicit mainline must start at the root ()")
        for a, b in zip(chain, chain[1:]):
            if b not in tree.nodes or tree.nodes[b].parent_path != a:
                raise ValueError(f"{b} does not extend {a} in this tree")
        return chain
    if policy != "capable-horizon":
        raise ValueError(f"unknown mainline policy {policy!r}")
    horizon = tree.max_order_log()
    reach = _subtree_max_order(tree)
    chain = [()]
    while True:
        node = tree.nodes[chain[-1]]
        cands = [
            c
            for c in node.children
            if tree.nodes[c].step == 1
            and tree.nodes[c].capable
            and reach[c] == horizon
        ]
        if not cands:
            return chain
        if len(cands) > 1:
            raise MainlineAmbiguityError(
                f"{len(cands)} capable step-1 children below {chain[-1]} reach the horizon",
                candidates=cands,
            )
        chain.append(cands[0])


@dataclass
class Branch:
    order_log: int
    root_path: IdPath
    member_paths: list
    complete: bool


def branches(tree: DescendantTree, mainline: list | None = None) -> list:
    """Children hanging off each mainline vertex, with their full subtrees."""
    chain = mainline if mainline is not None else find_mainline(tree)
    on_chain = set(chain)
    out = []
    for path in chain:
        node = tree.nodes[path]
        members: list = []
        stack = [c for c in node.children if c not in on_chain]
        while stack:
            q = stack.pop()
            members.append(q)
            stack.extend(tree.nodes[q].children)
        members.sort(key=lambda q: (len(q), q))
        complete = node.expanded and all(tree.nodes[q].expanded for q in members)
        out.append(
            Branch(
                order_log=node.fingerprint.order_log,
                root_path=path,
                member_paths=members,
                complete=complete,
            )
        )
    return out


# -- branch periodicity -------------------------------------------------------------


def _branch_label(node: TreeNode, base: TreeNode) -> tuple:
    fp, bfp = node.fingerprint, base.fingerprint
    return (
        node.step,
        fp.order_log - bfp.order_log,
        fp.nilpotency_class - bfp.nilpotency_class,
        fp.p_class - bfp.p_class,
        fp.coclass - bfp.coclass,
        fp.derived_length,
        fp.rank,
        fp.abelianization,
        fp.mu,
        fp.nu,
        fp.counters,
        fp.kappa,
        node.sigma,
    )


def _encode(tree: DescendantTree, path: IdPath, base: TreeNode) -> tuple:
    node = tree.nodes[path]
    kids = tuple(sorted(_encode(tree, c, base) for c in node.children))
    return (_branch_label(node, base), kids)


def _pair_witnesses(tree, pa, pb, base_a, base_b, out):
    out.append((pa, pb))
    ka = sorted(tree.nodes[pa].children, key=lambda c: _encode(tree, c, base_a))
    kb = sorted(tree.nodes[pb].children, key=lambda c: _encode(tree, c, base_b))
    for ca, cb in zip(ka, kb):
        _pair_witnesses(tree, ca, cb, base_a, base_b, out)


@dataclass
class PeriodReport:
    period: int
    onset_order_log: int
    onset_position: int
    compared: list
    witnesses: list
    branch_orders: list
    branch_sizes: list


def detect_periodicity(
    tree: DescendantTree, mainline: list | None = None
) -> PeriodReport:
    """Smallest shift making the complete branches repeat along the mainline.

    Branch contents are compared through canonical encodings built from
    shift-invariant labels.  Raises when fewer than two branches are
    complete or no shift works.
    """
    chain = mainline if mainline is not None else find_mainline(tree)
    on_chain = set(chain)
    blist = branches(tree, chain)
    encs: list = []
    for br in blist:
        if not br.complete:
            encs.append(None)
            continue
        base = tree.nodes[br.root_path]
        top = [c for c in tree.nodes[br.root_path].children if c not in on_chain]
        encs.append(tuple(sorted(_encode(tree, c, base) for c in top)))
    usable = [i for i, e in enumerate(encs) if e is not None]
    if len(usable) < 2:
        raise ValueError("periodicity needs at least two complete branches")
    hi = max(usable)
    for d in range(1, hi + 1):
        for onset in range(hi):
            pairs = [
                (i, i + d)
                for i in range(onset, hi - d + 1)
                if encs[i] is not None and encs[i + d] is not None
            ]
            if not pairs:
                continue
            if all(encs[i] == encs[j] for i, j in pairs):
                witnesses: list = []
                i0, j0 = pairs[0]
                base_a = tree.nodes[blist[i0].root_path]
                base_b = tree.nodes[blist[j0].root_path]
                ka = sorted(
                    (c for c in tree.nodes[blist[i0].root_path].children if c not in on_chain),
                    key=lambda c: _encode(tree, c, base_a),
                )
                kb = sorted(
                    (c for c in tree.nodes[blist[j0].root_path].children if c not in on_chain),
                    key=lambda c: _encode(tree, c, base_b),
                )
                for ca, cb in zip(ka, kb):
                    _pair_witnesses(tree, ca, cb, base_a, base_b, witnesses)
                return PeriodReport(
                    period=d,
                    onset_order_log=blist[onset].order_log,
                    onset_position=onset,
                    compared=pairs,
                    witnesses=witnesses,
                    branch_orders=[b.order_log for b in blist],
                    branch_sizes=[
                        len(b.member_paths) if e is not None else None
                        for b, e in zip(blist, encs)
                    ],
                )
    raise ValueError("no period found among the complete branches")


# -- isomorphism testing --------------------------------------------------------------


def _prescreen(G: PcGroup, H: PcGroup) -> bool:
    if G.p != H.p or G.n != H.n:
        return False
    if group_invariants(G) != group_invariants(H):
        return False
    if gamma_quotient_invariants(G) != gamma_quotient_invariants(H):
        return False
    if zeta_quotient_invariants(G) != zeta_quotient_invariants(H):
        return False
    pg = lower_p_central_series(G)
    ph = lower_p_central_series(H)
    if [s.order_log for s in pg] != [s.order_log for s in ph]:
        return False
    return True


def _quotient_kernel(cd, Q: PcGroup, big: PcGroup, phi, level: int):
    """Kernel subspace of the cover surjection onto big/P_(level+2).

    phi holds representatives in big of the images of Q's minimal
    generators.  Returns the kernel, the cover generator images, the
    quotient, and its lift back into big.
    """
    series = lower_p_central_series(big)
    T, project, lift = quotient_by_normal(big, series[level + 1])
    imgs = [project(x) for x in phi]
    cover_imgs = push_through_definitions(cd.group, T, imgs)
    layer = Subgroup.generated(T, [project(b) for b in series[level].igs])
    base_n = cd.base.n
    rows = [layer.coordinates(cover_imgs[base_n + t]) for t in range(cd.mult_rank)]
    A = np.array(rows, dtype=np.int64) % big.p
    kernel = Subspace.from_rows(nullspace(A.T, big.p), cd.mult_rank, big.p)
    return kernel, cover_imgs, T, lift


def _orbit_search(cd, aut: AutGroup, start: Subspace, target: Subspace, budget: int):
    """BFS the orbit of start under aut acting on the multiplicator.

    Returns (aligner mapping start to target or None, orbit size, schreier
    stabilizer generator images for start).
    """
    pairs = [(a, multiplicator_action(cd, a.images)) for a in aut.gens]
    inverses = [a.inverse() for a, _ in pairs]
    ident = aut.identity()
    trans = {start.key(): (ident, ident)}
    frontier = deque([start])
    stab: dict = {}
    while frontier:
        V = frontier.popleft()
        tV, tVinv = trans[V.key()]
        for (a, m), ainv in zip(pairs, inverses):
            W = act_on_subspace(m, V)
            got = trans.get(W.key())
            if got is None:
                if len(trans) >= budget:
                    raise BudgetExceededError(f"subspace orbit larger than {budget}")
                trans[W.key()] = (a.compose(tV), tVinv.compose(ainv))
                frontier.append(W)
            else:
                s = got[1].compose(a.compose(tV))
                if not s.is_identity():
                    stab.setdefault(s.images)
    got = trans.get(target.key())
    aligner = got[0] if got is not None else None
    return aligner, len(trans), sorted(stab)


def isomorphic(G: PcGroup, H: PcGroup, budget: int = 200_000) -> bool | None:
    """Decide isomorphism by aligning p-central chains; None when over budget.

    Both groups are rebuilt class by class over a shared abstract quotient;
    at each level the kernels of the two cover surjections must lie in one
    orbit of the automorphism action on the multiplicator.
    """
    if G is H:
        return True
    if not _prescreen(G, H):
        return False
    p = G.p
    ming_G = G.min_gen_indices()
    d = len(ming_G)
    pcl = group_invariants(G).p_class
    Q = PcGroup(
        PcPresentation(
            p=p,
            names=[f"a{i + 1}" for i in range(d)],
            weights=[1] * d,
            power=[() for _ in range(d)],
            comm={},
            definitions={},
        )
    )
    aut = automorphism_group(Q)
    phi_g = [G.gens[i] for i in ming_G]
    phi_h = [H.gens[i] for i in H.min_gen_indices()]
    for level in range(1, pcl):
        cd = p_cover(Q)
        K_g, _, _, _ = _quotient_kernel(cd, Q, G, phi_g, level)
        K_h, cov_h, T_h, lift_h = _quotient_kernel(cd, Q, H, phi_h, level)
        if K_g.dim != K_h.dim:
            return False
        try:
            aligner, orbit_size, stab = _orbit_search(cd, aut, K_g, K_h, budget)
        except BudgetExceededError:
            return None
        if aligner is None:
            return False
        base_imgs = cov_h[: Q.n]
        phi_h = [
            lift_h(Q.evaluate_vector(aligner.images[i], base_imgs, target=T_h))
            for i in range(d)
        ]
        data = child_from_cover(cd, K_g)
        data.group.lineage = Lineage(
            parent=Q,
            parent_aut=aut,
            cover=cd,
            child=data,
            orbit_size=orbit_size,
            stabilizer_images=stab,
        )
        Q = data.group
        aut = lifted_automorphism_group(Q)
    return True


# -- covers ------------------------------------------------------------------------


@dataclass
class CoverReport:
    member_paths: list
    balanced_paths: list
    horizon_limited: bool


def cover_sets(P: PcGroup, tree: DescendantTree, budget: int = 200_000) -> CoverReport:
    """Tree vertices of derived length three whose metabelianization is P.

    P must be metabelian.  The balanced members are the Schur sigma-groups
    among them.  Completeness depends on the tree horizon; the report flags
    frontiers and budget-limited comparisons.
    """
    p_inv = group_invariants(P)
    if p_inv.derived_length > 2:
        raise ValueError("cover targets must be metabelian")
    members: list = []
    balanced: list = []
    unknown = False
    for node in tree.vertices():
        fp = node.fingerprint
        if fp.derived_length != 3 or node.group is None:
            continue
        D = node.group
        second = derived_series(D)[2]
        M, _, _ = quotient_by_normal(D, second)
        m_inv = group_invariants(M)
        if (
            m_inv.order_log != p_inv.order_log
            or m_inv.abelianization != p_inv.abelianization
            or m_inv.nilpotency_class != p_inv.nilpotency_class
        ):
            continue
        verdict = isomorphic(M, P, budget=budget)
        if verdict is None:
            unknown = True
            continue
        if verdict:
            members.append(node.id_path)
            if node.schur and node.sigma:
                balanced.append(node.id_path)
    frontier = any(not n.expanded for n in tree.nodes.values())
    return CoverReport(
        member_paths=members,
        balanced_paths=balanced,
        horizon_limited=frontier or unknown,
    )


# -- serialization -------------------------------------------------------------------

SCHEMA_VERSION = 1


def tree_to_json(tree: DescendantTree) -> dict:
    nodes = []
    for path in sorted(tree.nodes, key=lambda q: (len(q), q)):
        node = tree.nodes[path]
        nodes.append(
            {
                "id_path": [list(e) for e in path],
                "step": node.step,
                "orbit_size": node.orbit_size,
                "aut_order": node.aut_order,
                "sigma": node.sigma,
                "schur": node.schur,
                "tkt": node.tkt_name,
                "depth": node.depth,
                "capable": node.capable,
                "expanded": node.expanded,
                "fingerprint": node.fingerprint.as_dict(),
                "presentation": node.group.pres.to_json() if node.group else None,
                "children": [[list(e) for e in c] for c in node.children],
            }
        )
    return {
        "schema": SCHEMA_VERSION,
        "p": tree.p,
        "complete": tree.complete,
        "max_order_log": tree.spec.max_order_log,
        "steps": list(tree.spec.steps) if tree.spec.steps else None,
        "notes": list(tree.notes),
        "nodes": nodes,
    }


def tree_to_json_bytes(tree: DescendantTree) -> bytes:
    return (
        json.dumps(tree_to_json(tree), sort_keys=True, separators=(",", ":")) + "\n"
    ).encode()


def _fingerprint_from_dict(data: dict) -> Fingerprint:
    return Fingerprint(
        order_log=data["order_log"],
        rank=data["rank"],
        nilpotency_class=data["class"],
        p_class=data["p_class"],
        coclass=data["coclass"],
        derived_length=data["derived_length"],
        abelianization=tuple(data["abelianization"]),
        gamma_types=tuple(tuple(t) for t in data["gamma_types"]),
        mu=data["mu"],
        nu=data["nu"],
        counters=None
        if data["counters"] is None
        else tuple(tuple(c) for c in data["counters"]),
        kappa=_codes_from_json(data["kappa"]),
        ttt=None
        if data["ttt"] is None
        else tuple(tuple(tuple(t) for t in layer) for layer in data["ttt"]),
    )


def tree_from_json(data: dict) -> DescendantTree:
    if data.get("schema") != SCHEMA_VERSION:
        raise ValueError(f"unsupported tree schema {data.get('schema')!r}")
    nodes = {}
    for rec in data["nodes"]:
        path = tuple(tuple(e) for e in rec["id_path"])
        group = None
        if rec["presentation"]:
            group = PcGroup(PcPresentation.from_json(rec["presentation"]))
        nodes[path] = TreeNode(
            group=group,
            id_path=path,
            step=rec["step"],
            orbit_size=rec["orbit_size"],
            aut_order=rec["aut_order"],
            fingerprint=_fingerprint_from_dict(rec["fingerprint"]),
            sigma=rec["sigma"],
            schur=rec["schur"],
            tkt_name=rec["tkt"],
            kappa_raw=None,
            depth=rec["depth"],
            capable=rec["capable"],
            expanded=rec["expanded"],
            children=[tuple(tuple(e) for e in c) for c in rec["children"]],
        )
    spec = GrowthSpec(
        max_order_log=data["max_order_log"],
        steps=tuple(data["steps"]) if data["steps"] else None,
    )
    return DescendantTree(
        nodes=nodes,
        spec=spec,
        prune=None,
        p=data["p"],
        complete=data["complete"],
        notes=list(data.get("notes", [])),
    )


def _dot_id(path: IdPath) -> str:
    if not path:
        return "root"
    return "n" + "_".join(f"{s}x{i}" for s, i in path)


def tree_to_dot(tree: DescendantTree, mainline: list | None = None) -> str:
    """Graphviz rendering with an order scale and a highlighted mainline."""
    if mainline is None:
        try:
            chain = set(find_mainline(tree))
        except (MainlineAmbiguityError, ValueError):
            chain = set()
    else:
        chain = set(tuple(tuple(e) for e in q) for q in mainline)
    levels: dict = {}
    for path, node in tree.nodes.items():
        levels.setdefault(node.fingerprint.order_log, []).append(path)
    lines = [
        "digraph descendants {",
        "  rankdir=TB;",
        "  node [shape=box, fontsize=10];",
    ]
    scale = sorted(levels)
    for n in scale:
        lines.append(f'  scale_{n} [label="{tree.p}^{n}", shape=plaintext];')
    for a, b in zip(scale, scale[1:]):
        lines.append(f"  scale_{a} -> scale_{b} [style=invis];")
    for path in sorted(tree.nodes, key=lambda q: (len(q), q)):
        node = tree.nodes[path]
        tags = []
        if node.tkt_name:
            tags.append(node.tkt_name)
        if node.sigma:
            tags.append("sigma")
        if node.sigma and node.schur:
            tags.append("Schur")
        label = (
            f"{tree.p}^{node.fingerprint.order_log}"
            f" cl{node.fingerprint.nilpotency_class}"
            f" cc{node.fingerprint.coclass}"
        )
        if tags:
            label += "\\n" + " ".join(tags)
        style = ' style=filled fillcolor="#e8e8ff"' if path in chain else ""
        lines.append(f'  {_dot_id(path)} [label="{label}"{style}];')
    for n in scale:
        ids = " ".join(_dot_id(q) + ";" for q in sorted(levels[n]))
        lines.append(f"  {{ rank=same; scale_{n}; {ids} }}")
    for path in sorted(tree.nodes, key=lambda q: (len(q), q)):
        node = tree.nodes[path]
        for c in node.children:
            child = tree.nodes[c]
            attrs = []
            if path in chain and c in chain:
                attrs.append("penwidth=2.2")
            if child.step == 2:
                attrs.append("style=dashed")
            elif child.step > 2:
                attrs.append("style=dotted")
            extra = f" [{', '.join(attrs)}]" if attrs else ""
            lines.append(f"  {_dot_id(path)} -> {_dot_id(c)}{extra};")
    lines.append("}")
    return "\n".join(lines) + "\n"


# -- named verification suites --------------------------------------------------------


def verify_suite(name: str, **params):
    """Run a named cross-check suite; see the verify module for the catalogue."""
    from . import verify as _verify

    return _verify.run_suite(name, **params)
