"""p-covering groups via relation tails, and p-quotients of fp presentations."""

from __future__ import annotations

import re
from collections import OrderedDict
from dataclasses import dataclass, replace

import numpy as np

from .fpmat import Subspace, nullspace, rref, solve
from .pcgroup import (
    Element,
    PcGroup,
    PcPresentation,
    Subgroup,
    Word,
    check_consistency,
)
from .series import lower_p_central_series

RelKey = tuple  # ("p", i) or ("c", j, i)


def relation_keys(pres: PcPresentation) -> list[RelKey]:
    keys: list[RelKey] = [("p", i) for i in range(pres.n)]
    for j in range(pres.n):
        for i in range(j):
            keys.append(("c", j, i))
    return keys


def is_restricted(pres: PcPresentation, key: RelKey) -> bool:
    """Tails on these relations suffice to span the multiplicator."""
    if key[0] == "p":
        return True
    _, j, i = key
    return pres.weights[i] == 1


@dataclass
class CoverData:
    """The p-cover of base: central extension by the p-multiplicator."""

    base: PcGroup
    group: PcGroup                      # cover on base.n + mult_rank generators
    tail_keys: list[RelKey]             # defining relation of each new generator
    rel_tails: dict[RelKey, np.ndarray]  # tail vector of every relation
    nucleus: Subspace                   # inside F_p^mult_rank

    @property
    def mult_rank(self) -> int:
        return self.group.n - self.base.n

    @property
    def nucleus_rank(self) -> int:
        return self.nucleus.dim

    @property
    def schur_defect(self) -> int:
        return self.mult_rank - len(self.base.min_gen_indices())

    def tail_coords(self, e: Element) -> np.ndarray:
        n = self.base.n
        assert not any(e[:n]), "element is not in the multiplicator"
        return np.array(e[n:], dtype=np.int64)

    def mult_element(self, vec) -> Element:
        n = self.base.n
        out = [0] * self.group.n
        for t, v in enumerate(np.asarray(vec, dtype=np.int64) % self.group.p):
            out[n + t] = int(v)
        return tuple(out)


class MissingDefinitionsError(ValueError):
    pass


def _fresh_tail_names(pres: PcPresentation, count: int) -> list[str]:
    used = set(pres.names)
    out = []
    k = 1
    while len(out) < count:
        nm = f"c{k}"
        if nm not in used:
            out.append(nm)
        k += 1
    return out


def tailed_presentation(pres: PcPresentation) -> tuple[PcPresentation, list[RelKey]]:
    """Append a fresh central order-p tail to every non-defining relation."""
    defs = pres.definitions or {}
    defined_by: dict[RelKey, int] = {}
    for k, d in defs.items():
        defined_by[("p", d[1]) if d[0] == "p" else ("c", d[1], d[2])] = k
    undefined = [
        pres.names[k]
        for k in range(pres.n)
        if pres.weights[k] > 1 and k not in defs
    ]
    if undefined:
        raise MissingDefinitionsError(
            f"generators {undefined} of weight > 1 lack definitions; "
            "rebuild the group through the descendant machinery"
        )
    keys = [k for k in relation_keys(pres) if k not in defined_by]
    # non-restricted tails first, so they are always eliminated
    keys.sort(key=lambda k: (is_restricted(pres, k), k))
    n = pres.n
    names = pres.names + _fresh_tail_names(pres, len(keys))
    weights = list(pres.weights)
    for key in keys:
        if key[0] == "p":
            weights.append(pres.weights[key[1]] + 1)
        else:
            weights.append(pres.weights[key[1]] + pres.weights[key[2]])
    power = [list(w) for w in pres.power] + [[] for _ in keys]
    comm = {k: list(w) for k, w in pres.comm.items()}
    for t, key in enumerate(keys):
        if key[0] == "p":
            power[key[1]] = list(power[key[1]]) + [(n + t, 1)]
        else:
            _, j, i = key
            comm[(j, i)] = list(comm.get((j, i), ())) + [(n + t, 1)]
    tailed = PcPresentation(
        p=pres.p,
        names=names,
        weights=weights,
        power=[tuple(w) for w in power],
        comm={k: tuple(w) for k, w in comm.items()},
        definitions=None,
    )
    return tailed, keys


def _overlap_differences(G: PcGroup, n_base: int) -> list[np.ndarray]:
    """Tail vectors of all consistency overlaps among the base generators."""
    p = G.p
    gens = G.gens
    diffs = []

    def record(a: Element, b: Element):
        if a == b:
            return
        assert a[:n_base] == b[:n_base], "overlap difference leaks outside tails"
        d = (np.array(a[n_base:], dtype=np.int64) - np.array(b[n_base:], dtype=np.int64)) % p
        diffs.append(d)

    for i in range(n_base):
        record(G.mul(G.pow(gens[i], p), gens[i]), G.mul(gens[i], G.pow(gens[i], p)))
    for j in range(n_base):
        for i in range(j):
            record(
                G.mul(G.pow(gens[j], p), gens[i]),
                G.mul(G.pow(gens[j], p - 1), G.mul(gens[j], gens[i])),
            )
            record(
                G.mul(gens[j], G.pow(gens[i], p)),
                G.mul(G.mul(gens[j], gens[i]), G.pow(gens[i], p - 1)),
            )
    for k in range(n_base):
        for j in range(k):
            for i in range(j):
                record(
                    G.mul(gens[k], G.mul(gens[j], gens[i])),
                    G.mul(G.mul(gens[k], gens[j]), gens[i]),
                )
    return diffs


_COVER_CACHE: OrderedDict[bytes, CoverData] = OrderedDict()
_COVER_CACHE_MAX = 128


def p_cover(G: PcGroup, check: bool = True, use_cache: bool = True) -> CoverData:
    """Largest central elementary-abelian extension with the same generator rank."""
    cache_key = G.pres.signature()
    if use_cache and cache_key in _COVER_CACHE:
        _COVER_CACHE.move_to_end(cache_key)
        return replace(_COVER_CACHE[cache_key], base=G)
    pres = G.pres
    tailed, keys = tailed_presentation(pres)
    T = PcGroup(tailed)
    n, p = pres.n, pres.p
    q0 = len(keys)
    diffs = _overlap_differences(T, n)
    if diffs:
        mat = np.array(diffs, dtype=np.int64)
        red, pivots = rref(mat, p)
    else:
        red = np.zeros((0, q0), dtype=np.int64)
        pivots = ()
    free = [c for c in range(q0) if c not in pivots]
    for f in free:
        if not is_restricted(pres, keys[f]):
            raise AssertionError(
                "a non-restricted tail survived elimination; definitions are unsound"
            )
    # tail vector of every relation, over the surviving tails
    piv_expr = {c: (-red[i][free]) % p for i, c in enumerate(pivots)}
    rel_tails: dict[RelKey, np.ndarray] = {}
    for t, key in enumerate(keys):
        if t in piv_expr:
            rel_tails[key] = piv_expr[t].astype(np.int64)
        else:
            vec = np.zeros(len(free), dtype=np.int64)
            vec[free.index(t)] = 1
            rel_tails[key] = vec
    defs = dict(pres.definitions or {})
    defined_by = {}
    for k, d in defs.items():
        defined_by[("p", d[1]) if d[0] == "p" else ("c", d[1], d[2])] = k
    q = len(free)
    names = pres.names + _fresh_tail_names(pres, q)
    weights = list(pres.weights)
    power: list[Word] = []
    comm: dict[tuple[int, int], Word] = {}
    for t, f in enumerate(free):
        key = keys[f]
        if key[0] == "p":
            weights.append(pres.weights[key[1]] + 1)
            defs[n + t] = ("p", key[1])
        else:
            weights.append(pres.weights[key[1]] + pres.weights[key[2]])
            defs[n + t] = ("c", key[1], key[2])

    def tail_word(vec: np.ndarray) -> Word:
        return tuple((n + t, int(v)) for t, v in enumerate(vec) if v)

    for i in range(n):
        key = ("p", i)
        base_word = pres.power[i]
        if key in rel_tails:
            power.append(tuple(base_word) + tail_word(rel_tails[key]))
        else:
            power.append(tuple(base_word))
    power += [() for _ in range(q)]
    for j in range(n):
        for i in range(j):
            key = ("c", j, i)
            base_word = pres.comm.get((j, i), ())
            w = tuple(base_word) + (tail_word(rel_tails[key]) if key in rel_tails else ())
            if w:
                comm[(j, i)] = w
    cover_pres = PcPresentation(
        p=p, names=names, weights=weights, power=power, comm=comm, definitions=defs,
    )
    cover = PcGroup(cover_pres)
    if check:
        bad = check_consistency(cover, skip_inert=True)
        if bad:
            raise AssertionError(f"inconsistent cover: {bad[:3]}")
    # nucleus: the deepest lower p-central term, viewed inside the tail space
    cl_p = len(lower_p_central_series(G)) - 1
    series = lower_p_central_series(cover)
    if cl_p < len(series):
        nuc = series[cl_p]
    else:
        nuc = Subgroup.trivial(cover)
    rows = []
    for b in nuc.igs:
        assert not any(b[:n]), "nucleus escapes the multiplicator"
        rows.append(b[n:])
    nucleus = Subspace.from_rows(rows, q, p) if rows else Subspace.zero(q, p)
    cd = CoverData(
        base=G,
        group=cover,
        tail_keys=[keys[f] for f in free],
        rel_tails=rel_tails,
        nucleus=nucleus,
    )
    if use_cache:
        _COVER_CACHE[cache_key] = cd
        while len(_COVER_CACHE) > _COVER_CACHE_MAX:
            _COVER_CACHE.popitem(last=False)
    return cd


@dataclass
class ChildData:
    group: PcGroup
    kernel: Subspace
    step: int
    cover_images: list[Element]  # images of the cover generators in the child


def child_from_cover(cd: CoverData, M: Subspace, check: bool = True) -> ChildData:
    """Quotient of the cover by a subspace M of the multiplicator."""
    base = cd.base
    n, p, q = base.n, base.p, cd.mult_rank
    if M.ambient != q:
        raise ValueError("kernel lives in the wrong space")
    s = q - M.dim
    piv = set(M.pivots)
    free_cols = [c for c in range(q) if c not in piv]

    def reduce_vec(vec: np.ndarray) -> np.ndarray:
        v = vec.copy() % p
        for i, pc in enumerate(M.pivots):
            if v[pc]:
                v = (v - v[pc] * M.basis[i]) % p
        return v[free_cols]

    pres = base.pres
    names = pres.names + _fresh_tail_names(pres, s)
    weights = list(pres.weights)
    defs = dict(pres.definitions or {})
    for t, c in enumerate(free_cols):
        key = cd.tail_keys[c]
        if key[0] == "p":
            weights.append(pres.weights[key[1]] + 1)
            defs[n + t] = ("p", key[1])
        else:
            weights.append(pres.weights[key[1]] + pres.weights[key[2]])
            defs[n + t] = ("c", key[1], key[2])

    def tail_word(vec: np.ndarray) -> Word:
        return tuple((n + t, int(v)) for t, v in enumerate(vec) if v)

    power: list[Word] = []
    for i in range(n):
        key = ("p", i)
        w = tuple(pres.power[i])
        if key in cd.rel_tails:
            w = w + tail_word(reduce_vec(cd.rel_tails[key]))
        power.append(w)
    power += [() for _ in range(s)]
    comm: dict[tuple[int, int], Word] = {}
    for j in range(n):
        for i in range(j):
            key = ("c", j, i)
            w = tuple(pres.comm.get((j, i), ()))
            if key in cd.rel_tails:
                w = w + tail_word(reduce_vec(cd.rel_tails[key]))
            if w:
                comm[(j, i)] = w
    child_pres = PcPresentation(
        p=p, names=names, weights=weights, power=power, comm=comm, definitions=defs,
    )
    child = PcGroup(child_pres)
    if check:
        bad = check_consistency(child, skip_inert=True)
        if bad:
            raise AssertionError(f"inconsistent child: {bad[:3]}")
    images: list[Element] = list(child.gens[:n])
    for c in range(q):
        vec = np.zeros(q, dtype=np.int64)
        vec[c] = 1
        out = [0] * child.n
        for t, v in enumerate(reduce_vec(vec)):
            out[n + t] = int(v)
        images.append(tuple(out))
    return ChildData(group=child, kernel=M, step=s, cover_images=images)


# -- finitely presented (pro-p) inputs ---------------------------------------

FpWord = list  # list of (gen_index, exponent) letters, exponents any integers


@dataclass
class FpPresentation:
    p: int
    gens: list[str]
    relators: list[FpWord]
    texts: list[str]

    @property
    def n(self) -> int:
        return len(self.gens)


class _Tok:
    def __init__(self, text: str):
        self.toks = re.findall(r"\[|\]|\(|\)|\^|,|-?\d+|[A-Za-z_][A-Za-z0-9_]*", text)
        self.pos = 0

    def peek(self):
        return self.toks[self.pos] if self.pos < len(self.toks) else None

    def next(self):
        t = self.peek()
        if t is None:
            raise ValueError("unexpected end of word")
        self.pos += 1
        return t


def _invert(word: FpWord) -> FpWord:
    return [(g, -e) for g, e in reversed(word)]


def _collapse(word: FpWord) -> FpWord:
    out: FpWord = []
    for g, e in word:
        if out and out[-1][0] == g:
            e += out.pop()[1]
        if e:
            out.append((g, e))
    return out


def _parse_word(tok: _Tok, index: dict[str, int]) -> FpWord:
    out: FpWord = []
    while True:
        t = tok.peek()
        if t is None or t in (")", "]", ","):
            return out
        out.extend(_parse_factor(tok, index))


def _parse_atom(tok: _Tok, index: dict[str, int]) -> FpWord:
    t = tok.next()
    if t == "(":
        w = _parse_word(tok, index)
        if tok.next() != ")":
            raise ValueError("expected )")
        return w
    if t == "[":
        u = _parse_word(tok, index)
        if tok.next() != ",":
            raise ValueError("expected , in commutator")
        v = _parse_word(tok, index)
        if tok.next() != "]":
            raise ValueError("expected ]")
        return _invert(u) + _invert(v) + u + v
    if t in index:
        return [(index[t], 1)]
    raise ValueError(f"unexpected token {t!r}")


def _parse_factor(tok: _Tok, index: dict[str, int]) -> FpWord:
    base = _parse_atom(tok, index)
    while tok.peek() == "^":
        tok.next()
        t = tok.peek()
        if t is not None and re.fullmatch(r"-?\d+", t):
            e = int(tok.next())
            if e == 0:
                base = []
            elif e > 0:
                base = base * e
            else:
                base = _invert(base) * (-e)
        else:
            conj = _parse_atom(tok, index)
            base = _invert(conj) + base + conj
    return base


def parse_fp_presentation(text: str) -> FpPresentation:
    """Format: p=3; gens a,t,z; rel a^3 = z^2; rel [t, t^a] = z; ..."""
    stmts = [s.strip() for s in text.split(";") if s.strip()]
    p = None
    gens: list[str] = []
    rel_texts: list[str] = []
    for s in stmts:
        if s.startswith("p="):
            p = int(s[2:])
        elif s.startswith("gens "):
            gens = [g.strip() for g in s[5:].split(",") if g.strip()]
        elif s.startswith("rel "):
            rel_texts.append(s[4:].strip())
        else:
            raise ValueError(f"unrecognized statement {s!r}")
    if p is None or not gens:
        raise ValueError("fp presentation needs p= and gens statements")
    index = {g: i for i, g in enumerate(gens)}
    relators: list[FpWord] = []
    for rt in rel_texts:
        if "=" in rt:
            lhs_text, rhs_text = rt.split("=", 1)
        else:
            lhs_text, rhs_text = rt, "1"
        lhs = _parse_side(lhs_text.strip(), index)
        rhs = _parse_side(rhs_text.strip(), index)
        relators.append(_collapse(lhs + _invert(rhs)))
    return FpPresentation(p=p, gens=gens, relators=relators, texts=rel_texts)


def _parse_side(text: str, index: dict[str, int]) -> FpWord:
    if text == "1":
        return []
    tok = _Tok(text)
    w = _parse_word(tok, index)
    if tok.peek() is not None:
        raise ValueError(f"trailing tokens in {text!r}")
    return w


def evaluate_fp_word(word: FpWord, images: list[Element], H: PcGroup) -> Element:
    out = H.identity
    for g, e in word:
        out = H.mul(out, H.pow(images[g], e))
    return out


@dataclass
class PQuotientResult:
    group: PcGroup
    images: list[Element]   # images of the fp generators
    p_class: int
    stabilized: bool        # quotient already maximal before max_class


def p_quotient(fp: FpPresentation, max_class: int) -> PQuotientResult:
    """Largest quotient of p-class <= max_class, by iterated covers."""
    p = fp.p
    mat = np.zeros((len(fp.relators), fp.n), dtype=np.int64)
    for r, rel in enumerate(fp.relators):
        for g, e in rel:
            mat[r, g] = (mat[r, g] + e) % p
    red, pivots = rref(mat, p)
    free = [c for c in range(fp.n) if c not in pivots]
    d = len(free)
    if d == 0:
        raise ValueError("the p-quotient is trivial: relators span all generators mod p")
    pres = PcPresentation(
        p=p,
        names=[f"g{i+1}" for i in range(d)],
        weights=[1] * d,
        power=[() for _ in range(d)],
        comm={},
        definitions={},
    )
    Q = PcGroup(pres)
    images: list[Element] = []
    for c in range(fp.n):
        vec = [0] * d
        if c in free:
            vec[free.index(c)] = 1
        else:
            i = pivots.index(c)
            for t, f in enumerate(free):
                vec[t] = int(-red[i, f]) % p
        images.append(tuple(vec))
    # Generator images may be corrected by central tails; a relator's value
    # then shifts by its exponent-sum combination of the tails, so only the
    # left-kernel combinations of the raw values are forced into the kernel.
    left = nullspace(mat.T, p)
    cls = 1
    while cls < max_class:
        cd = p_cover(Q)
        q = cd.mult_rank
        lifted = [tuple(list(img) + [0] * q) for img in images]
        vals = np.zeros((len(fp.relators), q), dtype=np.int64)
        for r, rel in enumerate(fp.relators):
            vals[r] = cd.tail_coords(evaluate_fp_word(rel, lifted, cd.group))
        forced = (left @ vals) % p if len(left) else np.zeros((0, q), dtype=np.int64)
        M0 = Subspace.from_rows(forced, q, p)
        if M0.dim == q:
            return PQuotientResult(group=Q, images=images, p_class=cls, stabilized=True)
        # pick tails making every relator vanish mod M0: reduce the raw
        # values to quotient coordinates and solve the exponent-sum system
        red_vals = vals.copy()
        for r in range(red_vals.shape[0]):
            v = red_vals[r]
            for i, pc in enumerate(M0.pivots):
                if v[pc]:
                    v = (v - v[pc] * M0.basis[i]) % p
            red_vals[r] = v
        tails = np.zeros((fp.n, q), dtype=np.int64)
        for col in range(q):
            if col in M0.pivots or not red_vals[:, col].any():
                continue
            x = solve(mat, (-red_vals[:, col]) % p, p)
            if x is None:
                raise AssertionError("tail correction system must be consistent")
            tails[:, col] = x
        data = child_from_cover(cd, M0)
        images = [
            _map_through(data, tuple(list(img) + [int(t) for t in tails[i]]))
            for i, img in enumerate(images)
        ]
        Q = data.group
        cls += 1
    return PQuotientResult(group=Q, images=images, p_class=cls, stabilized=False)


def _map_through(data: ChildData, cover_element: Element) -> Element:
    child = data.group
    out = child.identity
    for g, e in enumerate(cover_element):
        if e:
            out = child.mul(out, child.pow(data.cover_images[g], e))
    return out
