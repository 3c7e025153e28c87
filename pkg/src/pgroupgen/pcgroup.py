"""Weighted power-commutator presentations of finite p-groups and collection."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from .fpmat import inv_mod, is_prime

Word = tuple[tuple[int, int], ...]  # ((gen, exp), ...), gens strictly ascending
Element = tuple[int, ...]

_NAME_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


def word_from_vector(vec: Sequence[int], p: int) -> Word:
    return tuple((i, int(e) % p) for i, e in enumerate(vec) if int(e) % p)


def vector_from_word(word: Word, n: int) -> list[int]:
    vec = [0] * n
    for g, e in word:
        vec[g] = e
    return vec


def _validate_word(word: Word, low: int, n: int, p: int, what: str) -> None:
    last = low
    for g, e in word:
        if not (low < g < n):
            raise ValueError(f"{what}: generator index {g} must lie in ({low}, {n})")
        if g <= last and (g, e) != word[0]:
            raise ValueError(f"{what}: generator indices must strictly increase")
        if not (1 <= e < p):
            raise ValueError(f"{what}: exponent {e} outside [1, {p})")
        last = g


@dataclass
class PcPresentation:
    """Power-commutator presentation with p-central weights.

    power[i] is the normal word for g_i^p; comm[(j, i)] (j > i) the one for
    [g_j, g_i] = g_j^-1 g_i^-1 g_j g_i; omitted entries are trivial.  Right
    hand sides may only use generators of strictly larger index, which makes
    collection terminate.  definitions[k] marks the relation that introduces
    g_k: ("p", i) for g_k = g_i^p or ("c", j, i) for g_k = [g_j, g_i].
    """

    p: int
    names: list[str]
    weights: list[int]
    power: list[Word]
    comm: dict[tuple[int, int], Word]
    definitions: dict[int, tuple] | None = None

    def __post_init__(self) -> None:
        if not is_prime(self.p):
            raise ValueError(f"{self.p} is not prime")
        n = len(self.names)
        if len(set(self.names)) != n:
            raise ValueError("generator names must be distinct")
        for nm in self.names:
            if not _NAME_RE.match(nm):
                raise ValueError(f"bad generator name {nm!r}")
        if len(self.weights) != n or len(self.power) != n:
            raise ValueError("weights/power length mismatch")
        if any(w < 1 for w in self.weights):
            raise ValueError("weights must be positive")
        for i, w in enumerate(self.power):
            self.power[i] = tuple((g, e % self.p) for g, e in w if e % self.p)
            _validate_word(self.power[i], i, n, self.p, f"pow {self.names[i]}")
        clean = {}
        for (j, i), w in self.comm.items():
            if not (0 <= i < j < n):
                raise ValueError(f"bad commutator pair ({j}, {i})")
            w = tuple((g, e % self.p) for g, e in w if e % self.p)
            if w:
                _validate_word(w, j, n, self.p, f"comm [{self.names[j]},{self.names[i]}]")
                clean[(j, i)] = w
        self.comm = clean
        if self.definitions is not None:
            # the defined generator must be the last (hence highest) letter,
            # with exponent 1, of its defining relation's right-hand side
            for k, d in self.definitions.items():
                if d[0] == "p":
                    _, i = d
                    w = self.power[i]
                    what = f"pow {self.names[i]}"
                elif d[0] == "c":
                    _, j, i = d
                    w = self.comm.get((j, i), ())
                    what = f"comm [{self.names[j]},{self.names[i]}]"
                else:
                    raise ValueError(f"bad definition tag {d!r}")
                if not w or w[-1] != (k, 1):
                    raise ValueError(
                        f"definition of {self.names[k]} does not match {what}"
                    )

    @property
    def n(self) -> int:
        return len(self.names)

    def word_to_text(self, word: Word) -> str:
        if not word:
            return "1"
        parts = []
        for g, e in word:
            parts.append(self.names[g] if e == 1 else f"{self.names[g]}^{e}")
        return " ".join(parts)

    def word_from_text(self, text: str) -> Word:
        text = text.strip()
        if text == "1":
            return ()
        out = []
        index = {nm: i for i, nm in enumerate(self.names)}
        for part in text.split():
            if "^" in part:
                nm, _, ex = part.partition("^")
                e = int(ex)
            else:
                nm, e = part, 1
            if nm not in index:
                raise ValueError(f"unknown generator {nm!r} in word {text!r}")
            out.append((index[nm], e % self.p))
        return tuple(t for t in out if t[1])

    def to_text(self) -> str:
        stmts = [f"p={self.p}", "gens " + ",".join(self.names)]
        stmts += [f"w({nm})={w}" for nm, w in zip(self.names, self.weights)]
        for i in range(self.n):
            if self.power[i]:
                stmts.append(f"pow {self.names[i]} = {self.word_to_text(self.power[i])}")
        for (j, i) in sorted(self.comm):
            stmts.append(
                f"comm [{self.names[j]},{self.names[i]}] = {self.word_to_text(self.comm[(j, i)])}"
            )
        if self.definitions:
            for k in sorted(self.definitions):
                d = self.definitions[k]
                if d[0] == "p":
                    stmts.append(f"def {self.names[k]} = pow {self.names[d[1]]}")
                else:
                    stmts.append(f"def {self.names[k]} = comm [{self.names[d[1]]},{self.names[d[2]]}]")
        return "; ".join(stmts) + ";"

    @classmethod
    def from_text(cls, text: str) -> "PcPresentation":
        stmts = [s.strip() for s in text.split(";") if s.strip()]
        p = None
        names: list[str] = []
        weights: dict[str, int] = {}
        pow_stmts: list[tuple[str, str]] = []
        comm_stmts: list[tuple[str, str, str]] = []
        def_stmts: list[tuple[str, str]] = []
        for s in stmts:
            if s.startswith("p="):
                p = int(s[2:])
            elif s.startswith("gens "):
                names = [nm.strip() for nm in s[5:].split(",") if nm.strip()]
            elif s.startswith("w("):
                m = re.match(r"^w\(([^)]+)\)\s*=\s*(-?\d+)$", s)
                if not m:
                    raise ValueError(f"bad weight statement {s!r}")
                weights[m.group(1).strip()] = int(m.group(2))
            elif s.startswith("pow "):
                m = re.match(r"^pow\s+(\S+)\s*=\s*(.+)$", s)
                if not m:
                    raise ValueError(f"bad power statement {s!r}")
                pow_stmts.append((m.group(1), m.group(2)))
            elif s.startswith("comm "):
                m = re.match(r"^comm\s*\[\s*([^,\]]+)\s*,\s*([^,\]]+)\s*\]\s*=\s*(.+)$", s)
                if not m:
                    raise ValueError(f"bad commutator statement {s!r}")
                comm_stmts.append((m.group(1).strip(), m.group(2).strip(), m.group(3)))
            elif s.startswith("def "):
                m = re.match(r"^def\s+(\S+)\s*=\s*(.+)$", s)
                if not m:
                    raise ValueError(f"bad definition statement {s!r}")
                def_stmts.append((m.group(1), m.group(2).strip()))
            else:
                raise ValueError(f"unrecognized statement {s!r}")
        if p is None or not names:
            raise ValueError("presentation text needs p= and gens statements")
        index = {nm: i for i, nm in enumerate(names)}
        wlist = [weights.get(nm, 1) for nm in names]
        pres = cls(
            p=p,
            names=list(names),
            weights=wlist,
            power=[() for _ in names],
            comm={},
            definitions=None,
        )
        for nm, rhs in pow_stmts:
            pres.power[index[nm]] = pres.word_from_text(rhs)
        for a, b, rhs in comm_stmts:
            j, i = index[a], index[b]
            pres.comm[(j, i)] = pres.word_from_text(rhs)
        defs: dict[int, tuple] = {}
        for nm, rhs in def_stmts:
            k = index[nm]
            if rhs.startswith("pow "):
                defs[k] = ("p", index[rhs[4:].strip()])
            elif rhs.startswith("comm "):
                m = re.match(r"^comm\s*\[\s*([^,\]]+)\s*,\s*([^,\]]+)\s*\]$", rhs)
                if not m:
                    raise ValueError(f"bad definition rhs {rhs!r}")
                defs[k] = ("c", index[m.group(1).strip()], index[m.group(2).strip()])
            else:
                raise ValueError(f"bad definition rhs {rhs!r}")
        pres.definitions = defs or None
        return cls(
            p=pres.p,
            names=pres.names,
            weights=pres.weights,
            power=pres.power,
            comm=pres.comm,
            definitions=pres.definitions,
        )

    def to_json(self) -> dict:
        out = {
            "schema": "pcpres/1",
            "p": self.p,
            "gens": list(self.names),
            "weights": list(self.weights),
            "pow": {self.names[i]: self.word_to_text(w) for i, w in enumerate(self.power) if w},
            "comm": {
                f"[{self.names[j]},{self.names[i]}]": self.word_to_text(w)
                for (j, i), w in sorted(self.comm.items())
            },
        }
        if self.definitions:
            defs = {}
            for k, d in sorted(self.definitions.items()):
                if d[0] == "p":
                    defs[self.names[k]] = f"pow {self.names[d[1]]}"
                else:
                    defs[self.names[k]] = f"comm [{self.names[d[1]]},{self.names[d[2]]}]"
            out["defs"] = defs
        return out

    @classmethod
    def from_json(cls, data: dict) -> "PcPresentation":
        if data.get("schema") != "pcpres/1":
            raise ValueError("not a pcpres/1 document")
        stmts = [f"p={data['p']}", "gens " + ",".join(data["gens"])]
        stmts += [f"w({nm})={w}" for nm, w in zip(data["gens"], data["weights"])]
        stmts += [f"pow {nm} = {w}" for nm, w in data.get("pow", {}).items()]
        stmts += [f"comm {lhs} = {w}" for lhs, w in data.get("comm", {}).items()]
        stmts += [f"def {nm} = {rhs}" for nm, rhs in data.get("defs", {}).items()]
        return cls.from_text("; ".join(stmts) + ";")

    def signature(self) -> bytes:
        return json.dumps(self.to_json(), sort_keys=True, separators=(",", ":")).encode()


class PcGroup:
    """A consistent pc presentation together with collection arithmetic.

    Elements are exponent tuples; the group has order p^n once the
    presentation passes check_consistency.
    """

    def __init__(self, pres: PcPresentation):
        self.pres = pres
        self.p = pres.p
        self.n = pres.n
        self.identity: Element = tuple([0] * self.n)
        self.gens: list[Element] = [
            tuple(1 if j == i else 0 for j in range(self.n)) for i in range(self.n)
        ]
        self._memo: dict[tuple[Element, int, int], Element] = {}
        self.lineage = None  # set by descendant construction for lifted automorphisms

    # -- arithmetic ------------------------------------------------------

    def element(self, spec) -> Element:
        """Coerce an exponent sequence, (gen, exp) word, or name string."""
        if isinstance(spec, str):
            return self.evaluate_word(self.pres.word_from_text(spec), self.gens)
        if isinstance(spec, tuple) and len(spec) == self.n and all(
            isinstance(x, int) for x in spec
        ):
            return tuple(x % self.p for x in spec)
        seq = list(spec)
        if all(isinstance(x, int) for x in seq):
            if len(seq) != self.n:
                raise ValueError("exponent vector length mismatch")
            return tuple(x % self.p for x in seq)
        out = self.identity
        for g, e in seq:
            out = self.mul_gen_power(out, g, e)
        return out

    def mul_gen_power(self, a: Element, g: int, e: int) -> Element:
        """Collected product a * g^e."""
        if e == 0:
            return a
        if e < 0 or e >= 2 * self.p:
            return self.mul(a, self.pow(self.gens[g], e))
        key = (a, g, e)
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        p = self.p
        n = self.n
        power = self.pres.power
        comm = self.pres.comm
        vec = list(a)
        stack: list[tuple[int, int]] = [(g, e)]
        while stack:
            g1, e1 = stack.pop()
            m = -1
            for idx in range(n - 1, g1, -1):
                if vec[idx]:
                    m = idx
                    break
            if m < 0:
                total = vec[g1] + e1
                vec[g1] = total % p
                q = total // p
                if q:
                    w = power[g1]
                    for _ in range(q):
                        for wg, we in reversed(w):
                            stack.append((wg, we))
            else:
                if e1 > 1:
                    stack.append((g1, e1 - 1))
                for wg, we in reversed(comm.get((m, g1), ())):
                    stack.append((wg, we))
                stack.append((m, 1))
                vec[m] -= 1
                stack.append((g1, 1))
        res = tuple(vec)
        self._memo[key] = res
        return res

    def mul(self, a: Element, b: Element) -> Element:
        for g in range(self.n):
            if b[g]:
                a = self.mul_gen_power(a, g, b[g])
        return a

    def inv(self, a: Element) -> Element:
        res = self.identity
        prod = a
        for i in range(self.n):
            e = prod[i]
            if e:
                res = self.mul_gen_power(res, i, self.p - e)
                prod = self.mul_gen_power(prod, i, self.p - e)
        assert prod == self.identity
        return res

    def pow(self, a: Element, k: int) -> Element:
        if k < 0:
            return self.pow(self.inv(a), -k)
        out = self.identity
        base = a
        while k:
            if k & 1:
                out = self.mul(out, base)
            base = self.mul(base, base)
            k >>= 1
        return out

    def comm(self, a: Element, b: Element) -> Element:
        return self.mul(self.mul(self.inv(a), self.inv(b)), self.mul(a, b))

    def conj(self, a: Element, b: Element) -> Element:
        return self.mul(self.inv(b), self.mul(a, b))

    def evaluate_word(self, word: Word, images: Sequence[Element], target: "PcGroup" = None) -> Element:
        H = target or self
        out = H.identity
        for g, e in word:
            out = H.mul(out, H.pow(images[g], e))
        return out

    def evaluate_vector(self, vec: Element, images: Sequence[Element], target: "PcGroup" = None) -> Element:
        H = target or self
        out = H.identity
        for g in range(len(vec)):
            if vec[g]:
                out = H.mul(out, H.pow(images[g], vec[g]))
        return out

    def element_order(self, a: Element) -> int:
        k = 0
        while a != self.identity:
            a = self.pow(a, self.p)
            k += 1
        return self.p ** k

    @property
    def order_log(self) -> int:
        return self.n

    def min_gen_indices(self) -> list[int]:
        return [i for i, w in enumerate(self.pres.weights) if w == 1]

    def elements(self):
        """All p^n exponent tuples (use only at small orders)."""
        import itertools as _it

        for tup in _it.product(range(self.p), repeat=self.n):
            yield tup


def check_consistency(group: PcGroup | PcPresentation, skip_inert: bool = False) -> list[str]:
    """Overlap (associativity) checks; empty list means consistent.

    skip_inert drops overlaps whose lowest generator neither appears in any
    nontrivial commutator nor has a nontrivial power; sound for the tailed
    covers built here and validated against the full check in tests.
    """
    G = group if isinstance(group, PcGroup) else PcGroup(group)
    p, n = G.p, G.n
    pres = G.pres
    inert = set()
    if skip_inert:
        touched = set()
        for (j, i) in pres.comm:
            touched.add(j)
            touched.add(i)
        for i in range(n):
            if i not in touched and not pres.power[i]:
                inert.add(i)
    bad: list[str] = []
    gens = G.gens

    def name(i):
        return pres.names[i]

    for i in range(n):
        if i in inert:
            continue
        lhs = G.mul(G.pow(gens[i], p), gens[i])
        rhs = G.mul(gens[i], G.pow(gens[i], p))
        if lhs != rhs:
            bad.append(f"overlap {name(i)}^p.{name(i)}")
    for j in range(n):
        for i in range(j):
            if i in inert or j in inert:
                continue
            a = G.mul(G.pow(gens[j], p), gens[i])
            b = G.mul(G.pow(gens[j], p - 1), G.mul(gens[j], gens[i]))
            if a != b:
                bad.append(f"overlap {name(j)}^p.{name(i)}")
            a = G.mul(gens[j], G.pow(gens[i], p))
            b = G.mul(G.mul(gens[j], gens[i]), G.pow(gens[i], p - 1))
            if a != b:
                bad.append(f"overlap {name(j)}.{name(i)}^p")
    for k in range(n):
        for j in range(k):
            for i in range(j):
                if i in inert or j in inert or k in inert:
                    continue
                a = G.mul(gens[k], G.mul(gens[j], gens[i]))
                b = G.mul(G.mul(gens[k], gens[j]), gens[i])
                if a != b:
                    bad.append(f"overlap {name(k)}.{name(j)}.{name(i)}")
    return bad


class Subgroup:
    """Subgroup given by an induced (echelonized) generating sequence."""

    def __init__(self, G: PcGroup, igs: list[Element]):
        self.G = G
        self.igs = igs  # leading indices strictly ascending, leading exponent 1
        self._table = {_lead(b): b for b in igs}

    @classmethod
    def trivial(cls, G: PcGroup) -> "Subgroup":
        return cls(G, [])

    @classmethod
    def full(cls, G: PcGroup) -> "Subgroup":
        return cls.generated(G, G.gens)

    @classmethod
    def generated(
        cls,
        G: PcGroup,
        gens: Iterable[Element],
        normal_under: Iterable[Element] | None = None,
    ) -> "Subgroup":
        """Closure of gens; normal_under adds closure under those conjugations."""
        basis: dict[int, Element] = {}
        conj = list(normal_under) if normal_under is not None else []

        def sift(e: Element) -> Element:
            while e != G.identity:
                l = _lead(e)
                b = basis.get(l)
                if b is None:
                    return e
                e = G.mul(G.pow(b, -e[l]), e)
            return e

        queue = [G.element(x) for x in gens]
        while queue:
            e = sift(queue.pop())
            if e == G.identity:
                continue
            l = _lead(e)
            e = G.pow(e, inv_mod(e[l], G.p))
            basis[l] = e
            queue.append(G.pow(e, G.p))
            for other in list(basis.values()):
                if other is not e:
                    queue.append(G.comm(e, other))
            for g in conj:
                queue.append(G.comm(e, g))
        leads = sorted(basis)
        # canonical form: clear every other lead column
        for pos in range(len(leads) - 1, -1, -1):
            l = leads[pos]
            b = basis[l]
            for m in leads[pos + 1:]:
                if b[m]:
                    b = G.mul(b, G.pow(basis[m], -b[m]))
            basis[l] = b
        return cls(G, [basis[l] for l in leads])

    @property
    def leads(self) -> list[int]:
        return [_lead(e) for e in self.igs]

    @property
    def order_log(self) -> int:
        return len(self.igs)

    def sift(self, e: Element,
             record: list[tuple[int, int]] | None = None) -> Element:
        G = self.G
        table = self._table
        while e != G.identity:
            l = _lead(e)
            b = table.get(l)
            if b is None:
                return e
            if record is not None:
                record.append((l, e[l]))
            e = G.mul(G.pow(b, -e[l]), e)
        return e

    def contains(self, e: Element) -> bool:
        return self.sift(e) == self.G.identity

    def contains_subgroup(self, other: "Subgroup") -> bool:
        return all(self.contains(b) for b in other.igs)

    def coordinates(self, e: Element) -> list[int]:
        """Exponents c with e = prod igs[t]^c[t] (ascending); raises outside."""
        rec: list[tuple[int, int]] = []
        if self.sift(e, rec) != self.G.identity:
            raise ValueError("element outside subgroup")
        coeff = {l: c for l, c in rec}
        return [coeff.get(l, 0) for l in self.leads]

    def elements(self):
        import itertools as _it

        G = self.G
        for exps in _it.product(range(G.p), repeat=len(self.igs)):
            out = G.identity
            for b, e in zip(self.igs, exps):
                out = G.mul(out, G.pow(b, e))
            yield out

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Subgroup)
            and self.G is other.G
            and self.igs == other.igs
        )

    def __hash__(self) -> int:
        return hash((id(self.G), tuple(self.igs)))

    def __repr__(self) -> str:
        return f"Subgroup(order=p^{self.order_log}, leads={self.leads})"


def _lead(e: Element) -> int:
    for i, x in enumerate(e):
        if x:
            return i
    raise ValueError("identity has no leading index")


def quotient_by_normal(
    G: PcGroup, N: Subgroup, check: bool = False
) -> tuple[PcGroup, Callable[[Element], Element], Callable[[Element], Element]]:
    """Quotient G/N for N normal; returns (Q, project, lift).

    project sends an element to its canonical coset representative written in
    the surviving generators; lift pads a Q-element back into G.
    """
    leads = set(N.leads)
    keep = [i for i in range(G.n) if i not in leads]
    table = {_lead(b): b for b in N.igs}

    def clean(e: Element) -> Element:
        for l in sorted(leads):
            if e[l]:
                e = G.mul(e, G.pow(table[l], -e[l]))
        return e

    def project(e: Element) -> Element:
        c = clean(e)
        return tuple(c[i] for i in keep)

    def lift(qe: Element) -> Element:
        vec = [0] * G.n
        for pos, i in enumerate(keep):
            vec[i] = qe[pos]
        return tuple(vec)

    pres = PcPresentation(
        p=G.p,
        names=[G.pres.names[i] for i in keep],
        weights=[G.pres.weights[i] for i in keep],
        power=[word_from_vector(project(G.pow(G.gens[i], G.p)), G.p) for i in keep],
        comm={},
        definitions=None,
    )
    for bj, j in enumerate(keep):
        for bi in range(bj):
            i = keep[bi]
            w = word_from_vector(project(G.comm(G.gens[j], G.gens[i])), G.p)
            if w:
                pres.comm[(bj, bi)] = w
    pres = PcPresentation(
        p=pres.p, names=pres.names, weights=pres.weights,
        power=pres.power, comm=pres.comm, definitions=None,
    )
    Q = PcGroup(pres)
    if check:
        bad = check_consistency(Q)
        if bad:
            raise AssertionError(f"inconsistent quotient presentation: {bad[:3]}")
    return Q, project, lift


def abelian_invariants(
    G: PcGroup, H: Subgroup | None = None, K: Subgroup | None = None
) -> tuple[int, ...]:
    """p-logarithms of the abelian invariants of H/K, weakly decreasing.

    H defaults to G; K defaults to [H,H] (so the result describes the
    abelianization).  K must be normal in H with abelian quotient.
    """
    from sympy import Matrix
    from sympy.matrices.normalforms import smith_normal_form

    if H is None:
        H = Subgroup.full(G)
    derived = Subgroup.generated(
        G,
        [G.comm(a, b) for a in H.igs for b in H.igs if a != b],
        normal_under=H.igs,
    )
    if K is None:
        K = derived
    else:
        joint = Subgroup.generated(G, list(K.igs) + list(derived.igs))
        if joint.order_log != K.order_log:
            raise ValueError("K must contain [H,H] for an abelian quotient")
    for b in K.igs:
        if not H.contains(b):
            raise ValueError("K must be contained in H")
    t = len(H.igs)
    if t == 0:
        return ()
    rows = []
    for i, u in enumerate(H.igs):
        row = [0] * t
        row[i] = G.p
        for j, c in enumerate(H.coordinates(G.pow(u, G.p))):
            row[j] -= c
        rows.append(row)
    for b in K.igs:
        rows.append(H.coordinates(b))
    for a in H.igs:
        for b in H.igs:
            if a != b:
                rows.append(H.coordinates(G.comm(a, b)))
    snf = smith_normal_form(Matrix(rows))
    logs = []
    for i in range(min(snf.rows, snf.cols)):
        d = abs(int(snf[i, i]))
        if d > 1:
            e = 0
            while d % G.p == 0:
                d //= G.p
                e += 1
            if d != 1:
                raise AssertionError("section is not a p-group")
            logs.append(e)
    free = t - sum(1 for i in range(min(snf.rows, snf.cols)) if snf[i, i] != 0)
    if free:
        raise AssertionError("section is infinite; missing relations")
    return tuple(sorted(logs, reverse=True))


def push_through_definitions(
    src: PcGroup, target: PcGroup, minimal_images: Sequence[Element]
) -> list[Element]:
    """Extend minimal-generator images to every generator via the definitions.

    The right-hand side of a defining relation ends with the defined
    generator, so each image is forced once the earlier ones are known.  The
    images need not define a homomorphism; the chase is pure bookkeeping.
    """
    defs = src.pres.definitions
    if defs is None:
        raise ValueError("source presentation carries no definitions")
    out: list[Element | None] = [None] * src.n
    mins = src.min_gen_indices()
    if len(minimal_images) != len(mins):
        raise ValueError(
            f"expected {len(mins)} minimal-generator images, got {len(minimal_images)}"
        )
    for i, img in zip(mins, minimal_images):
        out[i] = target.element(img)

    def value(word: Word) -> Element:
        acc = target.identity
        for g, e in word:
            acc = target.mul(acc, target.pow(out[g], e))
        return acc

    for k in range(src.n):
        if out[k] is not None:
            continue
        d = defs.get(k)
        if d is None:
            raise ValueError(f"generator {src.pres.names[k]} lacks a definition")
        if d[0] == "p":
            _, i = d
            word = src.pres.power[i]
            lhs = target.pow(out[i], src.p)
        else:
            _, j, i = d
            word = src.pres.comm[(j, i)]
            lhs = target.comm(out[j], out[i])
        out[k] = target.mul(target.inv(value(word[:-1])), lhs)
    return out


def infer_definitions(pres: PcPresentation) -> PcPresentation | None:
    """Recover defining relations for a presentation that lost them.

    Quotient constructions return presentations without definitions; when
    every non-minimal generator still appears as the last letter of some
    commutator or power relation, an equivalent defining set can be chosen.
    Returns None when some generator admits no such relation.
    """
    if pres.definitions is not None:
        return pres
    defs: dict[int, tuple] = {}
    for k in range(pres.n):
        if pres.weights[k] == 1:
            continue
        found = None
        for (j, i) in sorted(pres.comm):
            word = pres.comm[(j, i)]
            if word and word[-1] == (k, 1):
                found = ("c", j, i)
                break
        if found is None:
            for i in range(pres.n):
                word = pres.power[i]
                if word and word[-1] == (k, 1):
                    found = ("p", i)
                    break
        if found is None:
            return None
        defs[k] = found
    return PcPresentation(
        p=pres.p,
        names=list(pres.names),
        weights=list(pres.weights),
        power=[tuple(w) for w in pres.power],
        comm=dict(pres.comm),
        definitions=defs,
    )


def homomorphism_ok(G: PcGroup, H: PcGroup, images: Sequence[Element]) -> bool:
    """Do gen -> images define a homomorphism (all relations preserved)?"""
    p = G.p
    for i in range(G.n):
        lhs = H.pow(images[i], p)
        rhs = G.evaluate_word(G.pres.power[i], images, target=H)
        if lhs != rhs:
            return False
    for (j, i) in G.pres.comm:
        lhs = H.comm(images[j], images[i])
        rhs = G.evaluate_word(G.pres.comm[(j, i)], images, target=H)
        if lhs != rhs:
            return False
    for j in range(G.n):
        for i in range(j):
            if (j, i) not in G.pres.comm:
                if H.comm(images[j], images[i]) != H.identity:
                    return False
    return True
