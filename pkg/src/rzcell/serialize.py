"""JSON interchange for models, towers, lattices, and polygons.

Rationals are "num/den" strings; ring elements of the quadratic extension
are "a+b*u@v" meaning (a + b u) p^v (the @v part optional); generator
matrices are nested integer lists, with 2-lists [a, b] for quadratic
entries.
"""

from __future__ import annotations

import re
from fractions import Fraction as Q

from .errors import DomainError
from .generators import make_level_form
from .hncore import FlatGroupModel, PDivTower
from .hermitian import HermitianSpace, PadicLattice
from .pgroup import Module, Pairing, Subgroup
from .ring import Zq


def q_str(x: Q) -> str:
    return str(Q(x))


def parse_q(s) -> Q:
    if isinstance(s, int):
        return Q(s)
    return Q(str(s))


def _elt_to_json(ring: Zq, x):
    if ring.deg == 1:
        return x
    return [x[0], x[1]]


def _elt_from_json(ring: Zq, v):
    if isinstance(v, int):
        return ring.from_int(v)
    if isinstance(v, (list, tuple)) and len(v) == 2:
        return ring.make(v[0], v[1])
    raise DomainError(f"bad ring element {v!r}")


WELT = re.compile(r"^(-?\d+)(?:([+-]\d+)\*u)?(?:@(-?\d+))?$")


def welt_to_str(ring: Zq, x, v: int = 0) -> str:
    if ring.deg == 1:
        a, b = x, 0
    else:
        a, b = x
    s = f"{a}"
    if b:
        s += f"+{b}*u" if b > 0 else f"{b}*u"
    if v:
        s += f"@{v}"
    return s


def welt_from_str(ring: Zq, s: str):
    m = WELT.match(s.replace(" ", ""))
    if not m:
        raise DomainError(f"bad lattice entry {s!r}")
    a = int(m.group(1))
    b = int(m.group(2)) if m.group(2) else 0
    v = int(m.group(3)) if m.group(3) else 0
    return ring.make(a, b), v


# -- models -----------------------------------------------------------------------


def model_to_json(model: FlatGroupModel) -> dict:
    ring = model.module.ring
    out = {
        "p": ring.p,
        "ring_deg": ring.deg,
        "ambient": list(model.module.exps),
        "deg": [
            [[[_elt_to_json(ring, x) for x in row] for row in B.rows],
             q_str(model.deg(B))]
            for B in model.lattice()
        ],
    }
    if model.generic_type or model.special_type:
        out["annotations"] = {
            "generic_type": list(model.generic_type or ()),
            "special_type": list(model.special_type or ()),
        }
    return out


def model_from_json(data: dict) -> FlatGroupModel:
    p = int(data["p"])
    deg_ring = int(data.get("ring_deg", 1))
    exps = tuple(int(e) for e in data["ambient"])
    ring = Zq(p, max(exps), deg_ring)
    module = Module(ring, exps)
    table = {}
    for rows, val in data["deg"]:
        sub = module.subgroup(
            [tuple(_elt_from_json(ring, x) for x in row) for row in rows]
        )
        table[sub.key()] = parse_q(val)
    for B in module.all_submodules():
        if B.key() not in table:
            raise DomainError("degree table does not cover the lattice")
    ann = data.get("annotations") or {}
    perp = None
    if "perp" in data and data["perp"] is not None:
        gram = [
            [_elt_from_json(ring, x) for x in row] for row in data["perp"]
        ]
        pairing = Pairing(module, gram, max(exps))
        perp = pairing.perp
    return FlatGroupModel(
        module,
        table,
        perp=perp,
        generic_type=tuple(ann["generic_type"]) if ann.get("generic_type") else None,
        special_type=tuple(ann["special_type"]) if ann.get("special_type") else None,
    )


# -- towers -----------------------------------------------------------------------


def tower_to_json(tower: PDivTower, gram=None) -> dict:
    ring = tower.module.ring
    out = {
        "p": tower.p,
        "ring_deg": ring.deg,
        "rank": tower.module.rank,
        "K": tower.K_max,
        "d": tower.d,
        "basic": tower.basic,
        "unitary": tower.unitary,
        "label": tower.label,
        "deg": [],
    }
    if gram is not None:
        out["gram"] = [[_elt_to_json(ring, x) for x in row] for row in gram]
    from .hncore import torsion_lattice

    for B in torsion_lattice(tower.module, tower.K_max):
        rows = [[_elt_to_json(ring, x) for x in row] for row in B.rows]
        out["deg"].append([rows, q_str(tower.deg(B))])
    return out


def tower_from_json(data: dict) -> PDivTower:
    p = int(data["p"])
    deg_ring = int(data.get("ring_deg", 1))
    K = int(data["K"])
    rank = int(data["rank"])
    ring = Zq(p, K, deg_ring)
    module = Module(ring, (K,) * rank)
    table = {}
    for rows, val in data["deg"]:
        sub = module.subgroup(
            [tuple(_elt_from_json(ring, x) for x in row) for row in rows]
        )
        table[sub.key()] = parse_q(val)
    perp_factory = pair_value = None
    if data.get("gram"):
        gram = tuple(
            tuple(_elt_from_json(ring, x) for x in row)
            for row in data["gram"]
        )
        sesq = deg_ring == 2
        perp_factory, pair_value = make_level_form(
            module, gram, sesquilinear=sesq
        )
    return PDivTower(
        module,
        int(data["d"]),
        table,
        basic=bool(data.get("basic", False)),
        unitary=bool(data.get("unitary", False)),
        perp_factory=perp_factory,
        pair_value=pair_value,
        label=data.get("label", ""),
    )


# -- hermitian lattices ---------------------------------------------------------------


def lattice_to_json(L: PadicLattice) -> dict:
    ring = L.ring
    sp = L.space
    return {
        "p": ring.p,
        "M": ring.K,
        "n": sp.n,
        "gram": [[welt_to_str(ring, x) for x in row] for row in sp.gram],
        "basis": [
            [welt_to_str(ring, x, -L.scale) for x in row] for row in L.rows
        ],
    }


def lattice_from_json(data: dict):
    p = int(data["p"])
    M = int(data["M"])
    n = int(data["n"])
    ring = Zq(p, M, 2)
    gram = []
    for row in data["gram"]:
        out = []
        for s in row:
            x, v = welt_from_str(ring, s)
            if v:
                raise DomainError("gram entries must be integral (no @v)")
            out.append(x)
        gram.append(out)
    sp = HermitianSpace(ring, gram)
    entries = []
    vmin = 0
    for row in data["basis"]:
        for s in row:
            _, v = welt_from_str(ring, s)
            vmin = min(vmin, v)
    scale = -vmin
    rows = []
    for row in data["basis"]:
        out = []
        for s in row:
            x, v = welt_from_str(ring, s)
            out.append(ring.mul(x, ring.ppow(v + scale)))
        rows.append(tuple(out))
    return PadicLattice(sp, rows, scale)
