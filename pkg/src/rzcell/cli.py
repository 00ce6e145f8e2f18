"""Single command-line entry point.

Subcommands: polygon, hn, fargues, hermitian, building, cells.  JSON in,
JSON or TSV out; all output deterministic for a fixed configuration.  Exit
codes: 0 success, 2 validation failure, 3 resource exhaustion, 4 fargues
terminated outside C, 64 usage, 65 malformed input.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys
from fractions import Fraction as Q

from . import serialize
from .errors import (
    DepthExhausted,
    DomainError,
    Exceeds,
    NotGroupLike,
    PrecisionError,
    RzcellError,
)
from .polygon import (
    ConcavePolygon,
    dual,
    enumerate_newton_set,
    hodge_unitary,
    leq,
    normalize,
    stratification_coincidence_check,
)

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_RESOURCE = 3
EXIT_OUTSIDE_C = 4
EXIT_USAGE = 64
EXIT_BADDATA = 65


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        sys.exit(EXIT_USAGE)


def _load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as ex:
        sys.stderr.write(
            f"malformed JSON in {path}: line {ex.lineno} column {ex.colno}\n"
        )
        sys.exit(EXIT_BADDATA)
    except OSError as ex:
        sys.stderr.write(f"cannot read {path}: {ex}\n")
        sys.exit(EXIT_BADDATA)


def _emit(data, fmt):
    if fmt == "json":
        sys.stdout.write(json.dumps(data, sort_keys=True, indent=1) + "\n")
    else:
        _emit_tsv(data)


def _emit_tsv(data, prefix=""):
    if isinstance(data, dict):
        for k in sorted(data):
            _emit_tsv(data[k], f"{prefix}{k}\t")
    elif isinstance(data, list):
        for i, v in enumerate(data):
            _emit_tsv(v, f"{prefix}{i}\t")
    else:
        sys.stdout.write(f"{prefix}{data}\n")


def _poly_json(P: ConcavePolygon):
    return P.to_json()


# -- polygon ------------------------------------------------------------------------


def cmd_polygon(args):
    if args.action == "enumerate":
        polys = enumerate_newton_set(args.n)
        _emit(
            {
                "n": args.n,
                "count": len(polys),
                "coincidence": stratification_coincidence_check(args.n),
                "enumeration_rule": "integral-abscissas+symmetric+denominator",
                "polygons": [_poly_json(P) for P in polys],
            },
            args.format,
        )
    elif args.action == "check":
        P = ConcavePolygon.from_json(_load_json(args.lhs))
        R = ConcavePolygon.from_json(_load_json(args.rhs))
        _emit({"leq": leq(P, R)}, args.format)
    elif args.action == "dual":
        P = ConcavePolygon.from_json(_load_json(args.input))
        _emit(_poly_json(dual(P)), args.format)
    elif args.action == "normalize":
        P = ConcavePolygon.from_json(_load_json(args.input))
        _emit(_poly_json(normalize(P, args.d)), args.format)
    elif args.action == "hodge":
        _emit(_poly_json(hodge_unitary(args.n)), args.format)
    return EXIT_OK


# -- hn ---------------------------------------------------------------------------


def cmd_hn(args):
    from .hncore import dualize, hn_filtration, hn_polygon, hn_slopes, validate

    model = serialize.model_from_json(_load_json(args.input))
    if args.action == "validate":
        ok, violations = validate(model, check_submodular=args.submodular)
        _emit({"valid": ok, "violations": violations}, args.format)
        return EXIT_OK if ok else EXIT_INVALID
    if args.action == "filtrate":
        chain = hn_filtration(model)
        _emit(
            {
                "heights": [B.ht for B in chain],
                "degrees": [serialize.q_str(model.deg(B)) for B in chain],
                "slopes": [serialize.q_str(s) for s in hn_slopes(model)],
            },
            args.format,
        )
    elif args.action == "polygon":
        _emit(_poly_json(hn_polygon(model)), args.format)
    elif args.action == "dualize":
        _emit(serialize.model_to_json(dualize(model).freeze()), args.format)
    return EXIT_OK


# -- fargues -----------------------------------------------------------------------


def cmd_fargues(args):
    from .fargues import in_C, in_hecke_orbit_C, run_algorithm, run_pel, total_kernel

    tower = serialize.tower_from_json(_load_json(args.input))
    ok, problems = tower.validate_all()
    if not ok:
        _emit({"valid": False, "violations": problems}, args.format)
        return EXIT_INVALID
    if args.action == "run" or args.action == "pel":
        try:
            trace = run_algorithm(tower)
        except DepthExhausted as ex:
            _emit({"status": "depth-exhausted", "detail": str(ex)}, args.format)
            return EXIT_RESOURCE
        out = {
            "status": trace.status,
            "stages": trace.stages,
            "kernel_slopes": [serialize.q_str(s) for s in trace.slopes],
            "mu_max_sequence": [serialize.q_str(m) for m in trace.mu_max_seq],
            "kernel_heights": [B.ht for B in trace.kernel_chain],
        }
        if trace.status != "semi-stable":
            _emit(out, args.format)
            return EXIT_RESOURCE
        E, N = total_kernel(trace)
        out["total_kernel_height"] = E.ht
        out["N"] = N
        if args.action == "pel":
            try:
                pel = run_pel(tower)
            except DepthExhausted as ex:
                out["pel"] = {"status": "depth-exhausted", "detail": str(ex)}
                _emit(out, args.format)
                return EXIT_RESOURCE
            out["pel"] = {
                "case": pel.case,
                "N_used": pel.N_used,
                "claim_iterations": pel.claim_iterations,
                "residue_dim": pel.residue_dim,
                "orth_slope_pairs": [
                    [serialize.q_str(a), serialize.q_str(b)]
                    for a, b in pel.orth_slope_pairs
                ],
            }
        _emit(out, args.format)
        return EXIT_OK if N <= 1 else EXIT_OUTSIDE_C
    if args.action == "predicates":
        r1 = in_C(tower)
        r2 = in_hecke_orbit_C(tower)
        _emit(
            {
                "in_C": r1.value,
                "in_C_reason": r1.reason,
                "in_hecke_orbit_C": r2.value,
                "orbit_reason": r2.reason,
            },
            args.format,
        )
        if r1.value is None:
            return EXIT_RESOURCE
        return EXIT_OK
    return EXIT_OK


# -- hermitian ---------------------------------------------------------------------


def cmd_hermitian(args):
    from .hermitian import (
        ResidueHermitianSpace,
        dual_lattice,
        is_vertex,
        lagrangian,
        type_t,
    )

    if args.action == "dual":
        L = serialize.lattice_from_json(_load_json(args.input))
        _emit(serialize.lattice_to_json(dual_lattice(L)), args.format)
    elif args.action == "vertex":
        L = serialize.lattice_from_json(_load_json(args.input))
        v = is_vertex(L, args.i)
        out = {"is_vertex": v, "i": args.i}
        if v:
            out["type"] = type_t(L, args.i)
        _emit(out, args.format)
    elif args.action == "lagrangian":
        data = _load_json(args.input)
        sp = ResidueHermitianSpace(int(data["p"]), data["gram"])
        W = lagrangian(sp)
        _emit(
            {
                "dim": sp.dim,
                "lagrangian": [[list(x) for x in w] for w in W],
            },
            args.format,
        )
    return EXIT_OK


# -- building ----------------------------------------------------------------------


def cmd_building(args):
    from .building import (
        BuildingBall,
        base_vertex,
        building_space,
        is_simplex,
        neighbors,
        stratum_dim,
        t_max,
    )

    sp = building_space(args.n, args.p, precision=args.precision)
    v = base_vertex(sp)
    if args.action == "ball":
        try:
            ball = BuildingBall(v, args.radius)
        except PrecisionError as ex:
            sys.stderr.write(f"{ex}\n")
            return EXIT_RESOURCE
        rows = []
        for w in ball.vertices:
            rows.append(
                {
                    "type": w.t,
                    "dim": stratum_dim(w),
                    "dist": ball.dist[w.key()],
                    "adjacent": len(ball.adjacency(w)),
                }
            )
        _emit(
            {
                "n": args.n,
                "p": args.p,
                "t_max": t_max(args.n),
                "size": len(rows),
                "vertices": rows,
            },
            args.format,
        )
    elif args.action == "simplex":
        nb = neighbors(v)
        edge = [v, nb[0]] if nb else [v]
        _emit({"example_simplex_size": len(edge), "is_simplex": is_simplex(edge)}, args.format)
    elif args.action == "dims":
        _emit(
            {
                "n": args.n,
                "t_max": t_max(args.n),
                "dims": {str(t): (t - 1) // 2 for t in range(1, t_max(args.n) + 1, 2)},
            },
            args.format,
        )
    return EXIT_OK


# -- cells -------------------------------------------------------------------------


def cmd_cells(args):
    from .cells import (
        CellContext,
        GammaElement,
        ball_indices,
        displacement_growth_check,
        fixed_point_count,
        locally_finite_certificate,
        norm_root,
        phi,
    )
    from .gmatrix import mat_inverse

    random.seed(args.seed)
    ctx = CellContext(args.n, args.p, precision=args.precision)
    o = ctx.identity_index()
    if args.action == "ball":
        try:
            ball = ball_indices(o, Q(args.rho) ** 2, phi_value=0, cap=args.radius_cap)
        except Exceeds as ex:
            sys.stderr.write(f"{ex}\n")
            return EXIT_RESOURCE
        _emit(
            {
                "rho": args.rho,
                "size": len(ball),
                "seed": args.seed,
                "indices": [
                    {
                        "s": serialize.q_str(i.s),
                        "t": serialize.q_str(i.t),
                        "phi": phi(i),
                        "x_inv": list(
                            ctx.base_lattice.relative_position(i.x_lattice)
                        ),
                        "y_type": i.y.t,
                    }
                    for i in ball
                ],
            },
            args.format,
        )
    elif args.action == "locfin":
        try:
            sample = ball_indices(o, Q(args.rho) ** 2, phi_value=0, cap=args.radius_cap)
            rep = locally_finite_certificate(sample, Q(args.c), cap=args.radius_cap)
        except Exceeds as ex:
            sys.stderr.write(f"{ex}\n")
            return EXIT_RESOURCE
        _emit(
            {
                "sample_size": len(sample),
                "c": args.c,
                "max_neighbors": rep["max_neighbors"],
                "seed": args.seed,
            },
            args.format,
        )
    elif args.action == "displacement":
        gam = _example_gamma(ctx)
        try:
            rep = displacement_growth_check(
                gam, o, list(range(1, args.rho + 1)), cap=args.radius_cap
            )
        except Exceeds as ex:
            sys.stderr.write(f"{ex}\n")
            return EXIT_RESOURCE
        _emit(
            {
                "radii": [str(r) for r, _, _ in rep],
                "min_displacement_sq": [
                    None if d is None else serialize.q_str(d) for _, d, _ in rep
                ],
                "shell_sizes": [s for _, _, s in rep],
            },
            args.format,
        )
    elif args.action == "fixcount":
        R = ctx.ring
        h = _example_elliptic_h(ctx)
        h_rep = mat_inverse(R, h)
        try:
            count, stab = fixed_point_count(ctx, h_rep, h, radius=args.radius_cap)
        except (Exceeds, PrecisionError) as ex:
            sys.stderr.write(f"{ex}\n")
            return EXIT_RESOURCE
        _emit({"count": count, "stabilized": stab}, args.format)
    return EXIT_OK


def _example_elliptic_h(ctx):
    from .cells import norm_root

    R = ctx.ring
    u = R.make(0, 1)
    y = norm_root(R, R.sub(R.from_int(ctx.p), R.make(R.norm(u), 0)))
    if y is None:
        raise DomainError("no elliptic example available for this p")
    return ctx.g_element(((u, y), (R.neg(R.conj(y)), R.conj(u))), 0)


def _example_gamma(ctx):
    from .cells import GammaElement

    R = ctx.ring
    h = _example_elliptic_h(ctx)
    if ctx.n == 2:
        g = ctx.j_element(((R.zero, R.one), (R.ppow(1), R.zero)), 1)
    else:
        g = ctx.j_element(
            tuple(
                tuple(R.one if i == j else R.zero for j in range(ctx.n))
                for i in range(ctx.n)
            ),
            1,
        )
        h = ctx.g_element(
            tuple(
                tuple(
                    R.ppow(2) if i == j else R.zero for j in range(ctx.n)
                )
                for i in range(ctx.n)
            ),
            0,
        )
    return GammaElement(ctx, h, g)


# -- main --------------------------------------------------------------------------


def build_parser():
    top = _Parser(prog="rzcell", description=__doc__)
    top.add_argument("--format", choices=("json", "tsv"), default="json")
    top.add_argument("--seed", type=int, default=0)
    top.add_argument("--threads", type=int, default=1,
                     help="accepted for interface compatibility; execution "
                          "is serial and output is thread-count independent")
    top.add_argument(
        "--precision",
        type=int,
        default=int(os.environ.get("RZCELL_PRECISION", "12")),
    )
    top.add_argument("--radius-cap", dest="radius_cap", type=int, default=5)
    sub = top.add_subparsers(dest="command", required=True)

    pg = sub.add_parser("polygon")
    pg.add_argument("action", choices=("enumerate", "check", "dual", "normalize", "hodge"))
    pg.add_argument("--n", type=int, default=2)
    pg.add_argument("--d", type=int, default=1)
    pg.add_argument("--input")
    pg.add_argument("--lhs")
    pg.add_argument("--rhs")
    pg.set_defaults(func=cmd_polygon)

    hn = sub.add_parser("hn")
    hn.add_argument("action", choices=("validate", "filtrate", "polygon", "dualize"))
    hn.add_argument("--input", required=True)
    hn.add_argument("--submodular", action="store_true")
    hn.set_defaults(func=cmd_hn)

    fg = sub.add_parser("fargues")
    fg.add_argument("action", choices=("run", "pel", "predicates"))
    fg.add_argument("--input", required=True)
    fg.set_defaults(func=cmd_fargues)

    hm = sub.add_parser("hermitian")
    hm.add_argument("action", choices=("dual", "vertex", "lagrangian"))
    hm.add_argument("--input", required=True)
    hm.add_argument("--i", type=int, default=0)
    hm.set_defaults(func=cmd_hermitian)

    bd = sub.add_parser("building")
    bd.add_argument("action", choices=("ball", "simplex", "dims"))
    bd.add_argument("--n", type=int, required=True)
    bd.add_argument("--p", type=int, required=True)
    bd.add_argument("--i", type=int, default=0)
    bd.add_argument("--type", type=int, default=None)
    bd.add_argument("--radius", type=int, default=1)
    bd.set_defaults(func=cmd_building)

    cl = sub.add_parser("cells")
    cl.add_argument("action", choices=("ball", "locfin", "displacement", "fixcount"))
    cl.add_argument("--n", type=int, default=2)
    cl.add_argument("--p", type=int, default=3)
    cl.add_argument("--rho", type=int, default=2)
    cl.add_argument("--c", type=int, default=2)
    cl.set_defaults(func=cmd_cells)
    return top


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        code = args.func(args)
    except (DomainError, NotGroupLike) as ex:
        sys.stderr.write(f"invalid input: {ex}\n")
        return EXIT_INVALID
    except (DepthExhausted, Exceeds, PrecisionError) as ex:
        sys.stderr.write(f"resource exhausted: {ex}\n")
        return EXIT_RESOURCE
    except RzcellError as ex:
        sys.stderr.write(f"error: {ex}\n")
        return EXIT_INVALID
    return code


if __name__ == "__main__":
    sys.exit(main())
