"""Parametrized presentation families of small-coclass 2- and 3-groups.

Each builder transcribes one presentation family with a fixed generator
listing; unlisted relations are trivial.  Two families (the maximal-class
ones) carry their commutator-chain power relations implicitly: those are the
unique consistent completions and are derived here by normalizing signed
exponent vectors over the abelian commutator block, from the top generator
downwards.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .cover import FpPresentation, parse_fp_presentation
from .pcgroup import PcGroup, PcPresentation, Word, check_consistency


class ParamError(ValueError):
    pass


@dataclass(frozen=True)
class FamilySpec:
    tag: str
    params: dict[str, int] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "params", dict(self.params))


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise ParamError(msg)


# ------------------------------------------------------- chain normalization


def _normalize_block(p: int, raw: dict[int, dict[int, int]]
                     ) -> dict[int, dict[int, int]]:
    """Normal p-th power vectors for an abelian block, highest index first.

    raw[i] holds integer exponents (any sign) of g_i^p on indices > i;
    entries are reduced into [0, p) with carries resolved through the
    already-normalized higher powers.
    """
    norm: dict[int, dict[int, int]] = {}
    for i in sorted(raw, reverse=True):
        norm[i] = _reduce_vector(p, raw[i], norm)
    return norm


def _reduce_vector(p: int, vec: dict[int, int],
                   norm: dict[int, dict[int, int]]) -> dict[int, int]:
    """Reduce a signed exponent vector using normalized block powers."""
    vec = dict(vec)
    while True:
        todo = sorted(k for k in vec if not (0 <= vec[k] < p))
        if not todo:
            break
        k = todo[0]
        r = vec[k] % p
        q = (vec[k] - r) // p
        vec[k] = r
        for m, e in norm.get(k, {}).items():
            vec[m] = vec.get(m, 0) + q * e
    return {k: e for k, e in sorted(vec.items()) if e}


def _word(vec: dict[int, int]) -> Word:
    return tuple((k, e) for k, e in sorted(vec.items()) if e)


# --------------------------------------------------------- p = 2, coclass 1


def two_group_maximal_class(z: int, w: int, n: int) -> PcPresentation:
    """Order 2^n, two generators, one commutator chain.

    (z, w) = (0, 0) dihedral, (0, 1) generalized quaternion,
    (1, 0) semidihedral (n >= 4).
    """
    _require(n >= 3, "need n >= 3")
    _require(0 <= z <= 1 and 0 <= w <= 1, "parameters z, w must be 0 or 1")
    if (z, w) == (1, 0):
        _require(n >= 4, "the semidihedral series starts at n = 4")
    p = 2
    names = ["x", "y"] + [f"s{j}" for j in range(2, n)]
    weights = [1, 1] + list(range(2, n))
    idx = {nm: i for i, nm in enumerate(names)}
    s = {j: idx[f"s{j}"] for j in range(2, n)}
    # implicit chain: the commutator subgroup is cyclic and conjugating the
    # y-power relation by x forces s_j^2 = s_{j+1}^(-1)
    raw = {s[j]: ({s[j + 1]: -1} if j + 1 <= n - 1 else {})
           for j in range(2, n)}
    norm = _normalize_block(p, raw)
    power: list[Word] = [()] * len(names)
    power[idx["x"]] = _word(_reduce_vector(p, {s[n - 1]: w}, norm))
    yvec = {s[2]: -1}
    yvec[s[n - 1]] = yvec.get(s[n - 1], 0) + z
    power[idx["y"]] = _word(_reduce_vector(p, yvec, norm))
    for j in range(2, n):
        power[s[j]] = _word(norm[s[j]])
    comm: dict[tuple[int, int], Word] = {(idx["y"], idx["x"]): ((s[2], 1),)}
    for j in range(3, n):
        comm[(s[j - 1], idx["x"])] = ((s[j], 1),)
    definitions = {s[2]: ("c", idx["y"], idx["x"])}
    for j in range(3, n):
        definitions[s[j]] = ("c", s[j - 1], idx["x"])
    return PcPresentation(p=p, names=names, weights=weights, power=power,
                          comm=comm, definitions=definitions)


# --------------------------------------------------------- p = 3, coclass 1


def three_group_maximal_class(a: int, z: int, w: int, n: int) -> PcPresentation:
    """Order 3^n, two generators, one commutator chain.

    a = 0 gives an abelian maximal subgroup, a = 1 none; the implicit chain
    relation s_j^3 s_{j+1}^3 s_{j+2} = 1 (indices past n-1 dropped) is the
    consistent completion of the two listed power relations.
    """
    _require(n >= 3, "need n >= 3")
    _require(0 <= a <= 1, "parameter a must be 0 or 1")
    _require(-1 <= z <= 1 and -1 <= w <= 1, "parameters z, w must be in -1..1")
    if n == 3:
        _require(a == 0, "order 27 admits no a = 1 form (s_2 is central)")
    p = 3
    names = ["x", "y"] + [f"s{j}" for j in range(2, n)]
    weights = [1, 1] + list(range(2, n))
    idx = {nm: i for i, nm in enumerate(names)}
    s = {j: idx[f"s{j}"] for j in range(2, n)}
    raw = {}
    for j in range(2, n):
        vec: dict[int, int] = {}
        if j + 1 <= n - 1:
            vec[s[j + 1]] = -3
        if j + 2 <= n - 1:
            vec[s[j + 2]] = -1
        raw[s[j]] = vec
    norm = _normalize_block(p, raw)
    power: list[Word] = [()] * len(names)
    power[idx["x"]] = _word(_reduce_vector(p, {s[n - 1]: w}, norm))
    yvec = {s[2]: -3}
    if 3 <= n - 1:
        yvec[s[3]] = yvec.get(s[3], 0) - 1
    yvec[s[n - 1]] = yvec.get(s[n - 1], 0) + z
    power[idx["y"]] = _word(_reduce_vector(p, yvec, norm))
    for j in range(2, n):
        power[s[j]] = _word(norm[s[j]])
    comm: dict[tuple[int, int], Word] = {(idx["y"], idx["x"]): ((s[2], 1),)}
    for j in range(3, n):
        comm[(s[j - 1], idx["x"])] = ((s[j], 1),)
    # listed as [y, s_2] = s_{n-1}^a; stored on the (s_2, y) side, inverted
    if a:
        comm[(s[2], idx["y"])] = _word(
            _reduce_vector(p, {s[n - 1]: -a}, norm)
        )
    definitions = {s[2]: ("c", idx["y"], idx["x"])}
    for j in range(3, n):
        definitions[s[j]] = ("c", s[j - 1], idx["x"])
    return PcPresentation(p=p, names=names, weights=weights, power=power,
                          comm=comm, definitions=definitions)


# ------------------------------------------- p = 2, two-generator coclass r


def coclass_r_two_group(r: int, c: int, deeper: bool = False) -> PcPresentation:
    """Three-generator 2-group of coclass r and class c, order 2^(c+r).

    deeper=True swaps the involution relation x^2 = 1 for x^2 = s_c, moving
    one step down from the mainline.
    """
    _require(r >= 3, "need coclass r >= 3")
    _require(c >= max(3, r - 1), f"need class c >= {max(3, r - 1)}")
    if deeper:
        _require(c >= r, "the depth-1 form needs c >= r")
    p = 2
    names = ["x", "y", "z"] + [f"s{j}" for j in range(2, c + 1)] \
        + [f"t{k}" for k in range(2, r)]
    weights = [1, 1, 1] + list(range(2, c + 1)) + list(range(2, r))
    idx = {nm: i for i, nm in enumerate(names)}
    s = {j: idx[f"s{j}"] for j in range(2, c + 1)}
    t = {k: idx[f"t{k}"] for k in range(2, r)}

    power: list[Word] = [()] * len(names)
    comm: dict[tuple[int, int], Word] = {}
    power[idx["x"]] = ((s[c], 1),) if deeper else ()
    power[idx["y"]] = ((s[2], 1), (s[3], 1))
    power[idx["z"]] = tuple((t[k], 1) for k in (2, 3) if k in t)
    for j in range(2, c + 1):
        power[s[j]] = tuple((s[i], 1) for i in (j + 1, j + 2) if i in s)
    for k in range(2, r):
        power[t[k]] = tuple((t[i], 1) for i in (k + 1, k + 2) if i in t)
    comm[(idx["y"], idx["x"])] = ((s[2], 1),)
    comm[(idx["z"], idx["x"])] = ((t[2], 1),)
    for j in range(3, c + 1):
        comm[(s[j - 1], idx["x"])] = ((s[j], 1),)
    for k in range(3, r):
        comm[(t[k - 1], idx["x"])] = ((t[k], 1),)
    definitions = {
        s[2]: ("c", idx["y"], idx["x"]),
        t[2]: ("c", idx["z"], idx["x"]),
    }
    for j in range(3, c + 1):
        definitions[s[j]] = ("c", s[j - 1], idx["x"])
    for k in range(3, r):
        definitions[t[k]] = ("c", t[k - 1], idx["x"])
    return PcPresentation(p=p, names=names, weights=weights, power=power,
                          comm=comm, definitions=definitions)


# ------------------------------------- p = 3, two-generator coclass 2, 3, 4


def _tower_skeleton(c: int, extra: list[tuple[str, int]]):
    names = ["x", "y"] + [f"s{j}" for j in range(2, c + 1)] \
        + [nm for nm, _ in extra]
    weights = [1, 1] + list(range(2, c + 1)) + [w for _, w in extra]
    idx = {nm: i for i, nm in enumerate(names)}
    s = {j: idx[f"s{j}"] for j in range(2, c + 1)}
    return names, weights, idx, s


def tower_33_coclass2(z: int, w: int, c: int) -> PcPresentation:
    """Metabelian 3-group with abelianization (3,3), coclass 2, order 3^(c+2)."""
    _require(c >= 5, "need class c >= 5")
    _require(0 <= w <= 1 and 0 <= z <= 2, "need w in 0..1, z in 0..2")
    names, weights, idx, s = _tower_skeleton(c, [("t3", 3)])
    t3 = idx["t3"]
    power: list[Word] = [()] * len(names)
    power[idx["x"]] = ((s[c], 1),) if w else ()
    power[idx["y"]] = _word({s[3]: 2, s[4]: 1, s[c]: z})
    for j in range(2, c - 2):
        power[s[j]] = ((s[j + 2], 2), (s[j + 3], 1))
    power[s[c - 2]] = ((s[c], 2),)
    comm = {(idx["y"], idx["x"]): ((s[2], 1),),
            (s[2], idx["y"]): ((t3, 1),)}
    for j in range(3, c + 1):
        comm[(s[j - 1], idx["x"])] = ((s[j], 1),)
    definitions = {s[2]: ("c", idx["y"], idx["x"]),
                   t3: ("c", s[2], idx["y"])}
    for j in range(3, c + 1):
        definitions[s[j]] = ("c", s[j - 1], idx["x"])
    return PcPresentation(p=3, names=names, weights=weights, power=power,
                          comm=comm, definitions=definitions)


def tower_33_coclass3(z: int, w: int, c: int) -> PcPresentation:
    """Non-metabelian 3-group with abelianization (3,3), coclass 3, 3^(c+3)."""
    _require(c >= 5, "need class c >= 5")
    _require(0 <= w <= 1 and 0 <= z <= 2, "need w in 0..1, z in 0..2")
    names, weights, idx, s = _tower_skeleton(c, [("t3", 3), ("u5", 5)])
    t3, u5 = idx["t3"], idx["u5"]
    power: list[Word] = [()] * len(names)
    power[idx["x"]] = ((s[c], 1),) if w else ()
    power[idx["y"]] = _word({s[3]: 2, s[4]: 1, s[c]: z})
    power[s[2]] = _word({s[4]: 2, s[5]: 1, u5: 1})
    for j in range(3, c - 2):
        power[s[j]] = ((s[j + 2], 2), (s[j + 3], 1))
    power[s[c - 2]] = ((s[c], 2),)
    power[t3] = ((u5, 2),)
    comm = {
        (idx["y"], idx["x"]): ((s[2], 1),),
        (s[2], idx["y"]): ((t3, 1),),
        (s[3], idx["y"]): ((u5, 1),),
        (s[4], idx["y"]): ((u5, 1),),
        (s[3], s[2]): ((u5, 2),),
    }
    for j in range(3, c + 1):
        comm[(s[j - 1], idx["x"])] = ((s[j], 1),)
    definitions = {s[2]: ("c", idx["y"], idx["x"]),
                   t3: ("c", s[2], idx["y"]),
                   u5: ("c", s[4], idx["y"])}
    for j in range(3, c + 1):
        definitions[s[j]] = ("c", s[j - 1], idx["x"])
    return PcPresentation(p=3, names=names, weights=weights, power=power,
                          comm=comm, definitions=definitions)


def tower_33_coclass4(z: int, w: int, c: int) -> PcPresentation:
    """Non-metabelian 3-group with abelianization (3,3), coclass 4, 3^(c+4)."""
    _require(c >= 7, "need class c >= 7")
    _require(0 <= w <= 1 and 0 <= z <= 2, "need w in 0..1, z in 0..2")
    names, weights, idx, s = _tower_skeleton(
        c, [("t3", 3), ("u5", 5), ("u7", 7)]
    )
    t3, u5, u7 = idx["t3"], idx["u5"], idx["u7"]
    power: list[Word] = [()] * len(names)
    power[idx["x"]] = ((s[c], 1),) if w else ()
    power[idx["y"]] = _word({s[3]: 2, s[4]: 1, s[c]: z})
    power[s[2]] = _word({s[4]: 2, s[5]: 1, u5: 1})
    power[s[3]] = _word({s[5]: 2, s[6]: 1, u7: 2})
    for j in range(4, c - 2):
        power[s[j]] = ((s[j + 2], 2), (s[j + 3], 1))
    power[s[c - 2]] = ((s[c], 2),)
    power[t3] = _word({u5: 2, u7: 2})
    power[u5] = ((u7, 2),)
    comm = {
        (idx["y"], idx["x"]): ((s[2], 1),),
        (s[2], idx["y"]): ((t3, 1),),
        (s[3], idx["y"]): _word({u5: 1, u7: 2}),
        (s[4], idx["y"]): ((u5, 1),),
        (s[5], idx["y"]): ((u7, 2),),
        (s[3], s[2]): _word({u5: 2, u7: 2}),
        (s[4], s[2]): ((u7, 2),),
        (s[5], s[2]): ((u7, 2),),
        (s[4], s[3]): ((u7, 1),),
        (s[6], idx["y"]): ((u7, 1),),
    }
    for j in range(3, c + 1):
        comm[(s[j - 1], idx["x"])] = ((s[j], 1),)
    definitions = {s[2]: ("c", idx["y"], idx["x"]),
                   t3: ("c", s[2], idx["y"]),
                   u5: ("c", s[4], idx["y"]),
                   u7: ("c", s[6], idx["y"])}
    for j in range(3, c + 1):
        definitions[s[j]] = ("c", s[j - 1], idx["x"])
    return PcPresentation(p=3, names=names, weights=weights, power=power,
                          comm=comm, definitions=definitions)


# --------------------------------------------------- pro-3, three parameters


def three_parameter_fp(f: int, g: int, h: int) -> FpPresentation:
    """Three-generator pro-3 presentation; finite quotients via p_quotient."""
    for name, val in (("f", f), ("g", g), ("h", h)):
        _require(0 <= val <= 2, f"parameter {name} must be in 0..2")
    text = (
        "p=3; gens a,t,z; "
        f"rel a^3 = z^{f}; "
        f"rel [t, t^a] = z^{g}; "
        f"rel t t^a t^(a^2) = z^{h}; "
        "rel z^3 = 1; rel [z,a] = 1; rel [z,t] = 1;"
    )
    return parse_fp_presentation(text)


# -------------------------------------------------------------- entry points


_PC_BUILDERS = {
    "Gn_2_cocl1": (two_group_maximal_class, ("z", "w", "n")),
    "Gn_3_cocl1": (three_group_maximal_class, ("a", "z", "w", "n")),
    "Grc_mainline": (coclass_r_two_group, ("r", "c")),
    "G2c_33": (tower_33_coclass2, ("z", "w", "c")),
    "G3c_33": (tower_33_coclass3, ("z", "w", "c")),
    "G4c_33": (tower_33_coclass4, ("z", "w", "c")),
}

_ALIASES = {
    "G3c_mainline": ("Grc_mainline", {"r": 3}),
    "G4c_mainline": ("Grc_mainline", {"r": 4}),
    "G5c_mainline": ("Grc_mainline", {"r": 5}),
}

_EXPECTED_ORDER_LOG = {
    "Gn_2_cocl1": lambda q: q["n"],
    "Gn_3_cocl1": lambda q: q["n"],
    "Grc_mainline": lambda q: q["c"] + q["r"],
    "Grc_depth1": lambda q: q["c"] + q["r"],
    "G2c_33": lambda q: q["c"] + 2,
    "G3c_33": lambda q: q["c"] + 3,
    "G4c_33": lambda q: q["c"] + 4,
}


def family_tags() -> list[str]:
    return sorted(_PC_BUILDERS) + ["Grc_depth1", "Gfgh"] + sorted(_ALIASES)


def instantiate(spec: FamilySpec) -> PcPresentation | FpPresentation:
    """Build the presentation for a family tag; pc instances are verified."""
    tag, params = spec.tag, dict(spec.params)
    if tag in _ALIASES:
        base, extra = _ALIASES[tag]
        return instantiate(FamilySpec(base, {**params, **extra}))
    if tag == "Gfgh":
        return three_parameter_fp(**{k: params[k] for k in ("f", "g", "h")})
    if tag == "Grc_depth1":
        pres = coclass_r_two_group(params["r"], params["c"], deeper=True)
        expected = _EXPECTED_ORDER_LOG[tag](params)
    elif tag in _PC_BUILDERS:
        fn, argnames = _PC_BUILDERS[tag]
        missing = [a for a in argnames if a not in params]
        _require(not missing, f"missing parameters {missing} for {tag}")
        pres = fn(**{a: params[a] for a in argnames})
        expected = _EXPECTED_ORDER_LOG[tag](params)
    else:
        raise ParamError(f"unknown family tag {tag!r}")
    bad = check_consistency(pres)
    if bad:
        raise AssertionError(
            f"family {tag} {params} transcription is inconsistent: {bad[:3]}"
        )
    if pres.n != expected:
        raise AssertionError(
            f"family {tag} {params}: {pres.n} generators, expected {expected}"
        )
    return pres


def family_sweep(tag: str, ranges: dict[str, list[int]],
                 max_class: int = 2) -> list[dict]:
    """Instantiate a parameter grid; deterministic row order.

    Rows carry group invariants and, where the abelianization shape allows,
    the transfer data.  The fp family is swept through its p-quotient of the
    requested class.
    """
    from .series import group_invariants
    from .transfer import UnsupportedShapeError, transfer_data

    names = list(ranges)
    rows = []
    for combo in itertools.product(*(list(ranges[k]) for k in names)):
        params = dict(zip(names, combo))
        try:
            pres = instantiate(FamilySpec(tag, params))
        except ParamError as exc:
            rows.append({"params": params, "error": str(exc)})
            continue
        if isinstance(pres, FpPresentation):
            from .cover import p_quotient

            G = p_quotient(pres, max_class).group
        else:
            G = PcGroup(pres)
        row = {"params": params, "invariants": group_invariants(G)}
        try:
            row["transfer"] = transfer_data(G)
        except UnsupportedShapeError:
            row["transfer"] = None
        rows.append(row)
    return rows
