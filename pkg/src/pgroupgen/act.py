"""Automorphism groups and their action on the multiplicator of the cover."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .cover import ChildData, CoverData
from .fpmat import FpMatrix, rref, solve
from .pcgroup import Element, PcGroup, Subgroup, homomorphism_ok
from .series import lower_p_central_series


class BudgetExceededError(RuntimeError):
    """Raised when a brute-force search would exceed its work budget."""


@dataclass(frozen=True)
class Automorphism:
    group: PcGroup
    images: tuple[Element, ...]

    def apply(self, e: Element) -> Element:
        return self.group.evaluate_vector(e, self.images)

    def compose(self, other: "Automorphism") -> "Automorphism":
        """self after other: x -> self(other(x))."""
        return Automorphism(
            self.group, tuple(self.apply(img) for img in other.images)
        )

    def is_identity(self) -> bool:
        return self.images == tuple(self.group.gens)

    def verify(self) -> bool:
        if not homomorphism_ok(self.group, self.group, list(self.images)):
            return False
        sub = Subgroup.generated(self.group, list(self.images))
        return sub.order_log == self.group.order_log

    def inverse(self) -> "Automorphism":
        """Solve alpha(x) = g layer by layer down the p-central series."""
        G = self.group
        layers = _layer_data(G)
        pre = [self._solve(layers, g) for g in G.gens]
        return Automorphism(G, tuple(pre))

    def _solve(self, layers: list["_Layer"], y: Element) -> Element:
        G = self.group
        x = G.identity
        for lay in layers:
            z = G.mul(G.inv(self.apply(x)), y)
            if z == G.identity:
                return x
            c = lay.coords(z)
            rows = [lay.coords(self.apply(b)) for b in lay.basis]
            u = solve(np.array(rows, dtype=np.int64).T, c, G.p)
            assert u is not None, "automorphism is not surjective on a layer"
            for b, e in zip(lay.basis, u):
                if e:
                    x = G.mul(x, G.pow(b, int(e)))
        z = G.mul(G.inv(self.apply(x)), y)
        assert z == G.identity, "element has no preimage"
        return x


class _Layer:
    """One factor of the lower p-central series, with linear coordinates."""

    def __init__(self, G: PcGroup, term: Subgroup, next_term: Subgroup):
        self.G = G
        self.term = term
        m = len(term.igs)
        rows = [term.coordinates(e) for e in next_term.igs]
        if rows:
            red, piv = rref(np.array(rows, dtype=np.int64), G.p)
            self.red, self.piv = red, piv
        else:
            self.red = np.zeros((0, m), dtype=np.int64)
            self.piv = ()
        self.free = [c for c in range(m) if c not in self.piv]
        self.basis = [term.igs[f] for f in self.free]

    def coords(self, e: Element) -> np.ndarray:
        v = np.array(self.term.coordinates(e), dtype=np.int64)
        for i, pc in enumerate(self.piv):
            if v[pc]:
                v = (v - v[pc] * self.red[i]) % self.G.p
        return v[self.free]


def _layer_data(G: PcGroup) -> list[_Layer]:
    cached = getattr(G, "_layers", None)
    if cached is None:
        series = lower_p_central_series(G)
        cached = [
            _Layer(G, series[j], series[j + 1]) for j in range(len(series) - 1)
        ]
        G._layers = cached
    return cached


@dataclass
class Lineage:
    """How a group arose as an immediate descendant, for automorphism lifting."""

    parent: PcGroup
    parent_aut: "AutGroup"
    cover: CoverData
    child: ChildData
    orbit_size: int
    stabilizer_images: list[tuple[Element, ...]]  # generators of the point stabilizer


@dataclass
class AutGroup:
    group: PcGroup
    gens: list[Automorphism]
    order: int
    elements: list[Automorphism] | None = field(default=None, repr=False)

    def identity(self) -> Automorphism:
        return Automorphism(self.group, tuple(self.group.gens))


def gl_order(d: int, p: int) -> int:
    order = 1
    pd = p**d
    for i in range(d):
        order *= pd - p**i
    return order


def _primitive_root(p: int) -> int:
    for g in range(2, p):
        seen, x = set(), 1
        for _ in range(p - 1):
            x = x * g % p
            seen.add(x)
        if len(seen) == p - 1:
            return g
    return 1


def gl_generator_matrices(d: int, p: int) -> list[FpMatrix]:
    mats = []
    if p > 2 and d >= 1:
        diag = np.eye(d, dtype=np.int64)
        diag[0, 0] = _primitive_root(p)
        mats.append(FpMatrix(diag, p))
    for i in range(d):
        for j in range(d):
            if i != j:
                m = np.eye(d, dtype=np.int64)
                m[i, j] = 1
                mats.append(FpMatrix(m, p))
    return mats


def is_elementary_abelian(G: PcGroup) -> bool:
    return (
        not G.pres.comm
        and all(not w for w in G.pres.power)
    )


def _gl_aut_group(G: PcGroup) -> AutGroup:
    d, p = G.n, G.p
    gens = []
    for m in gl_generator_matrices(d, p):
        images = tuple(tuple(int(x) for x in row) for row in m.a)
        gens.append(Automorphism(G, images))
    return AutGroup(group=G, gens=gens, order=gl_order(d, p))


def _forced_images(
    G: PcGroup, partial: dict[int, Element]
) -> list[Element] | None:
    """Extend images of the weight-1 generators through the definitions."""
    defs = G.pres.definitions or {}
    images: list[Element | None] = [partial.get(i) for i in range(G.n)]
    for k in sorted(defs):
        d = defs[k]
        if d[0] == "p":
            i = d[1]
            if images[i] is None:
                return None
            w = G.pres.power[i]
            val = G.pow(images[i], G.p)
        else:
            _, j, i = d
            if images[i] is None or images[j] is None:
                return None
            w = G.pres.comm.get((j, i), ())
            val = G.comm(images[j], images[i])
        # relation: lhs = prefix * g_k, so images[k] = prefix(images)^-1 * lhs
        prefix = w[:-1]
        acc = G.identity
        for g, e in prefix:
            if images[g] is None:
                return None
            acc = G.mul(acc, G.pow(images[g], e))
        images[k] = G.mul(G.inv(acc), val)
    if any(img is None for img in images):
        return None
    return images  # type: ignore[return-value]


def brute_automorphism_group(G: PcGroup, budget: int = 200_000) -> AutGroup:
    """Enumerate automorphisms directly; needs definitions for non-minimal gens."""
    if is_elementary_abelian(G):
        return _gl_aut_group(G)
    minimal = G.min_gen_indices()
    defs = G.pres.definitions or {}
    underived = [
        k for k in range(G.n) if G.pres.weights[k] > 1 and k not in defs
    ]
    if underived:
        raise ValueError(
            "brute search needs definitions for all higher-weight generators"
        )
    series = lower_p_central_series(G)
    frattini = series[1]
    by_order: dict[int, list[Element]] = {}
    candidates: dict[int, list[Element]] = {}
    for i in minimal:
        o = G.element_order(G.gens[i])
        if o not in by_order:
            by_order[o] = [
                e
                for e in G.elements()
                if not frattini.contains(e) and G.element_order(e) == o
            ]
        candidates[i] = by_order[o]

    # modulo the Frattini subgroup only the weight-1 exponents survive
    def frat_coords(e: Element) -> np.ndarray:
        return np.array([e[i] for i in minimal], dtype=np.int64)

    found: list[Automorphism] = []
    tried = 0
    d = len(minimal)

    def backtrack(pos: int, partial: dict[int, Element], rows: list[np.ndarray]):
        nonlocal tried
        if pos == d:
            tried += 1
            if tried > budget:
                raise BudgetExceededError(
                    f"brute automorphism search exceeded budget {budget}"
                )
            images = _forced_images(G, partial)
            if images is None:
                return
            if homomorphism_ok(G, G, images):
                found.append(Automorphism(G, tuple(images)))
            return
        i = minimal[pos]
        for e in candidates[i]:
            row = frat_coords(e)
            mat = np.array(rows + [row], dtype=np.int64)
            _, piv = rref(mat, G.p)
            if len(piv) != pos + 1:
                continue  # dependent modulo Frattini
            partial[i] = e
            backtrack(pos + 1, partial, rows + [row])
            del partial[i]

    backtrack(0, {}, [])
    if not found:
        raise AssertionError("no automorphisms found; search is broken")
    return AutGroup(group=G, gens=found, order=len(found), elements=found)


def _zero_pad(e: Element, total: int) -> Element:
    return tuple(list(e) + [0] * (total - len(e)))


def lift_to_child(images: tuple[Element, ...], child: ChildData) -> Automorphism:
    """Descend an automorphism of the parent to the child along the cover.

    Only the weight-1 images are free choices (zero-tail lifts); every other
    generator's image is forced through its definition, which is where the
    new central coordinates enter.
    """
    C = child.group
    partial = {
        i: _zero_pad(images[i], C.n) for i in C.min_gen_indices()
    }
    full = _forced_images(C, partial)
    assert full is not None
    return Automorphism(C, tuple(full))


def central_automorphisms(child: ChildData) -> list[Automorphism]:
    """g_i -> g_i * u_t for minimal g_i and new central u_t."""
    C = child.group
    n = C.n - child.step
    out = []
    for i in C.min_gen_indices():
        for t in range(n, C.n):
            partial = {k: C.gens[k] for k in C.min_gen_indices()}
            partial[i] = C.mul(C.gens[i], C.gens[t])
            full = _forced_images(C, partial)
            assert full is not None
            out.append(Automorphism(C, tuple(full)))
    return out


def lifted_automorphism_group(G: PcGroup) -> AutGroup:
    lin: Lineage | None = getattr(G, "lineage", None)
    if lin is None:
        raise ValueError("group has no lineage data; use another strategy")
    assert lin.parent_aut.order % lin.orbit_size == 0
    d = len(lin.child.group.min_gen_indices())
    s = lin.child.step
    order = lin.parent_aut.order // lin.orbit_size * lin.parent.p ** (d * s)
    gens = [lift_to_child(imgs, lin.child) for imgs in lin.stabilizer_images]
    gens += central_automorphisms(lin.child)
    return AutGroup(group=G, gens=gens, order=order)


def automorphism_group(
    G: PcGroup, strategy: str = "auto", budget: int = 200_000
) -> AutGroup:
    if strategy not in ("auto", "lifted", "brute"):
        raise ValueError(f"unknown strategy {strategy!r}")
    if strategy == "lifted":
        return lifted_automorphism_group(G)
    if strategy == "brute":
        return brute_automorphism_group(G, budget)
    if getattr(G, "lineage", None) is not None:
        return lifted_automorphism_group(G)
    if is_elementary_abelian(G):
        return _gl_aut_group(G)
    return brute_automorphism_group(G, budget)


def multiplicator_action(cd: CoverData, images: tuple[Element, ...]) -> FpMatrix:
    """Matrix (rows = images of tail basis vectors) of an automorphism on the
    multiplicator of the cover, via the unique extension to the cover."""
    C = cd.group
    n, p, q = cd.base.n, cd.base.p, cd.mult_rank
    partial = {
        i: _zero_pad(images[i], C.n) for i in C.min_gen_indices()
    }
    full = _forced_images(C, partial)
    assert full is not None
    rows = np.zeros((q, q), dtype=np.int64)
    for t in range(q):
        rows[t] = cd.tail_coords(full[n + t])
    return FpMatrix(rows, p)
