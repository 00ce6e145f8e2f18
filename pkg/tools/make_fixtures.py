"""Regenerate the canned instances shipped under src/rzcell/fixtures/."""

import json
import os
import sys
from fractions import Fraction as Q

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from rzcell import serialize
from rzcell.generators import (
    bump_unitary_tower,
    hasse_curve_tower,
    split_multislope_model,
)
from rzcell.hncore import FlatGroupModel, validate
from rzcell.pgroup import Module
from rzcell.ring import Zq

OUT = os.path.join(os.path.dirname(__file__), "..", "src", "rzcell", "fixtures")


def write(name, data):
    path = os.path.join(OUT, name)
    with open(path, "w") as fh:
        json.dump(data, fh, sort_keys=True, indent=1)
        fh.write("\n")
    print("wrote", path)


def ordinary_ep():
    model = split_multislope_model(3, [((1,), Q(1)), ((1,), Q(0))])
    model.generic_type = (1, 1)
    model.special_type = (1, 1)
    data = serialize.model_to_json(model.freeze())
    write("ordinary_Ep.json", data)


def supersingular_ep():
    # level-1 weights of the Hodge-height-1/4 supersingular curve model
    t = hasse_curve_tower(3, 2, Q(1, 4))
    module = Module(Zq(3, 1, 1), (1, 1))
    big = t.module
    table = {}
    for B in module.all_submodules():
        rows = [
            tuple(big.ring.mul(x, big.ring.ppow(1)) for x in row)
            for row in B.rows
        ]
        table[B.key()] = t.deg(big.subgroup(rows))
    model = FlatGroupModel(module, table)
    ok, v = validate(model)
    assert ok, v
    write("supersingular_Ep.json", serialize.model_to_json(model))


def two_kernel_pel_tower():
    t = hasse_curve_tower(3, 4, Q(1, 12))
    from rzcell.pgroup import standard_symplectic_gram

    data = serialize.tower_to_json(t, gram=standard_symplectic_gram(2))
    write("two_kernel_pel_tower.json", data)


def bump_exit1_tower():
    R = Zq(3, 3, 2)
    iso = None
    for a in range(27):
        for b in range(27):
            if (1 + a * a - R.c * b * b) % 27 == 0:
                iso = ((1, 0), (a, b))
                break
        if iso:
            break
    t = bump_unitary_tower(3, 2, 3, iso, scran_exp=2, excess=Q(1, 2))
    from rzcell.generators import identity_gram

    data = serialize.tower_to_json(t, gram=identity_gram(R, 2))
    write("bump_exit1_tower.json", data)


def building_configs():
    write("building_n2_p3.json", {"n": 2, "p": 3, "radius": 1})
    write("building_n3_p3.json", {"n": 3, "p": 3, "radius": 1})


def polygons():
    from rzcell.polygon import ConcavePolygon, hodge_unitary

    write("basic_line_n4.json", ConcavePolygon.line(Q(1, 2), 4).to_json())
    write("hodge_n4.json", hodge_unitary(4).to_json())


def residue_space():
    write(
        "residue_dim4_p3.json",
        {"p": 3, "gram": [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]]},
    )


def hermitian_lattice():
    from rzcell.hermitian import HermitianSpace

    ring = Zq(3, 8, 2)
    sp = HermitianSpace(ring, [[1, 0, 0], [0, 1, 0], [0, 0, 1]])
    write("selfdual_lattice_n3.json", serialize.lattice_to_json(sp.standard_lattice()))


if __name__ == "__main__":
    os.makedirs(OUT, exist_ok=True)
    ordinary_ep()
    supersingular_ep()
    two_kernel_pel_tower()
    bump_exit1_tower()
    building_configs()
    polygons()
    residue_space()
    hermitian_lattice()
