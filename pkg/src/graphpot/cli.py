"""Command-line front end: space-file ingestion, command dispatch and
deterministic report emission.

Space files are JSON with keys `vertices` (list of {"id": ...}), `edges`
(list of {"from", "to", "weight"}; undirected — each edge expands to a
symmetric pair, duplicates are summed), `absorbing` (list of ids),
`base_point` (id) and optional `killing` ({id: probability}).

All numeric output is printed with 17 significant digits in a stable column
order with no timestamps, so identical inputs give byte-identical files.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from . import __version__
from .errors import GraphPotError, SchemaError
from .spaces import Domain, HarmonicSpace, generate


# ---------------------------------------------------------------------------
# space files


def parse_space_file(path) -> HarmonicSpace:
    """Read and validate a JSON space file."""
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except FileNotFoundError:
        raise SchemaError(f"space file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise SchemaError(f"{path}: top level must be an object")
    for key in ("vertices", "edges", "absorbing", "base_point"):
        if key not in doc:
            raise SchemaError(f"{path}: missing required key {key!r}")
    ids = []
    for i, v in enumerate(doc["vertices"]):
        if not isinstance(v, dict) or "id" not in v:
            raise SchemaError(f"{path}: vertices[{i}] must be an object with an 'id'")
        ids.append(str(v["id"]))
    if len(set(ids)) != len(ids):
        raise SchemaError(f"{path}: duplicate vertex ids")
    index = {v: i for i, v in enumerate(ids)}
    rows, cols, vals = [], [], []
    for i, e in enumerate(doc["edges"]):
        if not isinstance(e, dict) or not {"from", "to", "weight"} <= set(e):
            raise SchemaError(f"{path}: edges[{i}] needs 'from', 'to', 'weight'")
        for end in ("from", "to"):
            if str(e[end]) not in index:
                raise SchemaError(f"{path}: edges[{i}].{end} references unknown "
                                  f"vertex {e[end]!r}")
        w = float(e["weight"])
        if w < 0:
            raise SchemaError(f"{path}: edges[{i}] "
                              f"({e['from']} -> {e['to']}) has negative weight {w}")
        a, b = index[str(e["from"])], index[str(e["to"])]
        rows += [a, b]
        cols += [b, a]
        vals += [w, w]
    n = len(ids)
    W = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))  # duplicates summed
    killing = doc.get("killing")
    if killing is not None:
        if not isinstance(killing, dict):
            raise SchemaError(f"{path}: 'killing' must map id -> probability")
        for v in killing:
            if str(v) not in index:
                raise SchemaError(f"{path}: killing references unknown vertex {v!r}")
        killing = {str(v): float(q) for v, q in killing.items()}
    try:
        return HarmonicSpace(ids, W, [str(a) for a in doc["absorbing"]],
                             str(doc["base_point"]), killing=killing)
    except GraphPotError as exc:
        raise SchemaError(f"{path}: {exc}") from None


def serialize_space(space: HarmonicSpace, path) -> None:
    """Write a space as a JSON space file (undirected upper-triangle edges)."""
    U = sp.triu(space.W, format="coo")
    edges = [{"from": space.ids[i], "to": space.ids[j], "weight": float(w)}
             for i, j, w in sorted(zip(U.row.tolist(), U.col.tolist(), U.data.tolist()))]
    doc = {
        "vertices": [{"id": v} for v in space.ids],
        "edges": edges,
        "absorbing": [space.ids[i] for i in np.flatnonzero(space.absorbing)],
        "base_point": space.ids[space.base_point],
    }
    if space.killing.any():
        doc["killing"] = {space.ids[i]: float(q)
                          for i, q in enumerate(space.killing) if q > 0}
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


# ---------------------------------------------------------------------------
# report emission


def _fmt(x) -> str:
    if isinstance(x, float) or isinstance(x, np.floating):
        return "%.17g" % float(x)
    return str(x)


def write_csv(path, header, rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


def write_summary(path, command, argv, entries, seed=None, tolerances=None) -> None:
    lines = [f"tool graphpot {__version__}",
             "command " + " ".join([command] + list(argv))]
    if seed is not None:
        lines.append(f"seed {seed}")
    for k, v in (tolerances or {}).items():
        lines.append(f"tolerance {k} {_fmt(v)}")
    for k, v in entries:
        lines.append(f"{k} {_fmt(v)}")
    Path(path).write_text("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# helpers


def _load_space(arg: str) -> HarmonicSpace:
    p = Path(arg)
    if p.exists():
        return parse_space_file(p)
    return generate(arg)


def _parse_data(arg: str) -> dict:
    """Parse 'id:value,id:value' boundary data."""
    out = {}
    for part in arg.split(","):
        part = part.strip()
        if not part:
            continue
        if ":" not in part:
            raise SchemaError(f"bad data item {part!r}; expected id:value")
        k, v = part.rsplit(":", 1)
        out[k.strip()] = float(v)
    return out


def _parse_set(arg: str) -> list:
    return [s.strip() for s in arg.split(",") if s.strip()]


def _outdir(args) -> Path:
    d = Path(args.out)
    d.mkdir(parents=True, exist_ok=True)
    return d


# ---------------------------------------------------------------------------
# subcommands


def _cmd_gen(args, argv):
    space = generate(args.space)
    out = _outdir(args)
    serialize_space(space, out / "space.json")
    write_summary(out / "gen_summary.txt", "gen", argv,
                  [("vertices", space.n),
                   ("absorbing", int(space.absorbing.sum())),
                   ("base_point", space.ids[space.base_point])])
    return 0


def _cmd_dirichlet(args, argv):
    from .dirichlet import solve_dirichlet

    space = _load_space(args.space)
    dom = Domain.whole_interior(space)
    g = _parse_data(args.g)
    sol = solve_dirichlet(dom, g, tol=args.tol)
    out = _outdir(args)
    rows = [(space.ids[i], sol[i]) for i in sorted(dom.vertices().tolist())]
    write_csv(out / "dirichlet.csv", ["vertex_id", "value"], rows)
    write_summary(out / "dirichlet_summary.txt", "dirichlet", argv,
                  [("vertices", len(rows))],
                  tolerances={"solver": args.tol if args.tol else 1e-12})
    return 0


def _cmd_balayage(args, argv):
    from .balayage import reduite

    space = _load_space(args.space)
    A = _parse_set(args.set)
    if ":" in args.u:
        data = _parse_data(args.u)
        u = np.zeros(space.n)
        for k, v in data.items():
            u[space._idx(k)] = v
    else:
        u = float(args.u)
    v = reduite(u, A, space, tol=args.tol)
    out = _outdir(args)
    write_csv(out / "balayage.csv", ["vertex_id", "value"],
              [(vid, v[i]) for i, vid in enumerate(space.ids)])
    write_summary(out / "balayage_summary.txt", "balayage", argv,
                  [("set_size", len(A))], tolerances={"sweep": args.tol})
    return 0


def _cmd_capacity(args, argv):
    from .balayage import capacity

    space = _load_space(args.space)
    A = _parse_set(args.set)
    cap = capacity(A, space)
    entries = [("capacity", cap)]
    if space.spacing is not None:
        entries.append(("normalized_capacity", space.spacing * cap))
    out = _outdir(args)
    write_summary(out / "capacity_summary.txt", "capacity", argv, entries)
    write_csv(out / "capacity.csv", ["set_size", "capacity"], [(len(A), cap)])
    return 0


def _cmd_green(args, argv):
    from .martin import green_function

    space = _load_space(args.space)
    table = green_function(space)
    out = _outdir(args)
    if args.x is not None and args.y is not None:
        val = table.green(args.x, args.y)
        write_csv(out / "green.csv", ["x_id", "y_id", "value"],
                  [(args.x, args.y, val)])
    else:
        rows = [(rx, ry, table.G[i, j])
                for i, rx in enumerate(table.row_ids)
                for j, ry in enumerate(table.row_ids)]
        write_csv(out / "green.csv", ["x_id", "y_id", "value"], rows)
    write_summary(out / "green_summary.txt", "green", argv,
                  [("non_absorbing", len(table.row_ids))])
    return 0


def _cmd_martin(args, argv):
    from .martin import compactify, minimality_test

    space = _load_space(args.space)
    atlas = compactify(space, mode=args.mode)
    flags = minimality_test(atlas)
    out = _outdir(args)
    write_csv(out / "atlas.csv", ["point_id", "minimal", "provenance"],
              [(pid, int(f), atlas.provenance)
               for pid, f in zip(atlas.point_ids, flags)])
    rows = []
    for j, pid in enumerate(atlas.point_ids):
        for pos, vi in enumerate(atlas.probe):
            rows.append((space.ids[vi], pid, atlas.columns[pos, j]))
    write_csv(out / "kernels.csv", ["x_id", "point_id", "K"], rows)
    entries = [("atlas_size", atlas.size)]
    for note in atlas.notices:
        entries.append(("notice", note))
    write_summary(out / "martin_summary.txt", "martin", argv, entries)
    return 0


def _cmd_measure(args, argv):
    from .measure import harmonic_measure

    space = _load_space(args.space)
    dom = Domain.whole_interior(space)
    om = harmonic_measure(dom, args.x)
    out = _outdir(args)
    write_csv(out / "measure.csv", ["boundary_id", "weight"],
              list(zip(om.ids, om.weights)))
    write_summary(out / "measure_summary.txt", "measure", argv,
                  [("start", args.x), ("total_mass", om.total),
                   ("route_gap", om.route_gap)])
    return 0


def _cmd_represent(args, argv):
    from .measure import harmonic_measure, represent

    space = _load_space(args.space)
    dom = Domain.whole_interior(space)
    g = _parse_data(args.g)
    x = args.x if args.x is not None else space.ids[space.base_point]
    val = represent(dom, g, x)
    om = harmonic_measure(dom, x)
    out = _outdir(args)
    write_csv(out / "represent.csv", ["boundary_id", "weight", "g"],
              [(b, w, g.get(b, 0.0)) for b, w in zip(om.ids, om.weights)])
    write_summary(out / "represent_summary.txt", "represent", argv,
                  [("x", x), ("value", val)])
    return 0


def _cmd_wiener(args, argv):
    from .polar import thorn_lattice, wiener_series

    variant = "thorn" if args.geometry == "thorn" else ("cone", args.aperture)
    space, A, tip = thorn_lattice(args.n, variant)
    rep = wiener_series(space, A, tip, n_max=args.shells, obstacle=args.obstacle)
    out = _outdir(args)
    write_csv(out / "wiener.csv", ["k", "capacity", "increment", "partial_sum"],
              rep.csv_rows())
    verdict = "decaying"
    if len(rep.increments) >= 2 and rep.increments[-1] >= rep.increments[-2]:
        verdict = "non-decaying"
    entries = [("geometry", args.geometry), ("n", args.n),
               ("shells", len(rep.shells)), ("verdict", verdict)]
    for note in rep.notices:
        entries.append(("notice", note))
    write_summary(out / "wiener_summary.txt", "wiener", argv, entries)
    return 0


def _cmd_regularity(args, argv):
    from .polar import REGULARITY_TOL, regularity_test, thorn_lattice

    variant = "thorn" if args.geometry == "thorn" else ("cone", args.aperture)
    space, A, tip = thorn_lattice(args.n, variant)
    tol = REGULARITY_TOL if args.tol is None else args.tol
    attained, gap = regularity_test(space, A, tip, tol=tol)
    out = _outdir(args)
    write_csv(out / "regularity.csv", ["resolution", "gap", "attained"],
              [(args.n, gap, int(attained))])
    write_summary(out / "regularity_summary.txt", "regularity", argv,
                  [("geometry", args.geometry), ("gap", gap),
                   ("attained", attained)], tolerances={"gap": tol})
    return 0


def _cmd_polar(args, argv):
    from .polar import polar_flag, refinement_family

    levels = [int(s) for s in _parse_set(args.levels)]
    fam = refinement_family(args.shape, levels)
    flag, caps = polar_flag(fam, vanish_ratio=args.vanish_ratio)
    out = _outdir(args)
    write_csv(out / "polar.csv", ["resolution", "capacity"],
              list(zip(levels, caps)))
    write_summary(out / "polar_summary.txt", "polar", argv,
                  [("shape", args.shape), ("flag", flag)],
                  tolerances={"vanish_ratio": args.vanish_ratio})
    return 0


def _cmd_witness(args, argv):
    from .polar import polar_witness, refinement_family

    levels = [int(s) for s in _parse_set(args.levels)]
    fam = refinement_family(args.shape, levels)
    point = tuple(float(s) for s in _parse_set(args.point))
    check = tuple(float(s) for s in _parse_set(args.check))
    w = polar_witness(fam, x_check=check, vanish_ratio=args.vanish_ratio)
    rows = [(lvl, w.partial_value(point, j + 1), w.partial_value(check, j + 1))
            for j, lvl in enumerate(levels)]
    out = _outdir(args)
    write_csv(out / "witness.csv", ["level", "value_on_set", "value_at_check"], rows)
    write_summary(out / "witness_summary.txt", "witness", argv,
                  [("shape", args.shape), ("levels", len(levels))],
                  tolerances={"vanish_ratio": args.vanish_ratio})
    return 0


def _cmd_mc(args, argv):
    from .mc import mc_green, mc_hitting

    space = _load_space(args.space)
    out = _outdir(args)
    if args.target == "hitting":
        dom = Domain.whole_interior(space)
        est = mc_hitting(dom, args.x, args.samples, seed=args.seed)
        write_csv(out / "mc.csv", ["boundary_id", "weight", "stderr"],
                  [(b, w, s) for b, w, s in
                   zip(est.ids, est.weights, est.stderr)])
        entries = [("target", "hitting"), ("x", args.x),
                   ("samples", args.samples), ("total_mass", est.total)]
    else:
        if args.y is None:
            raise SchemaError("mc --target green needs --y")
        mean, err = mc_green(space, args.x, args.y, args.samples, seed=args.seed)
        write_csv(out / "mc.csv", ["x_id", "y_id", "estimate", "stderr"],
                  [(args.x, args.y, mean, err)])
        entries = [("target", "green"), ("samples", args.samples)]
    write_summary(out / "mc_summary.txt", "mc", argv, entries, seed=args.seed)
    return 0


def _cmd_verify(args, argv):
    lines, failures = run_verification(quick=args.quick)
    out = _outdir(args)
    Path(out / "verify_report.txt").write_text("\n".join(lines) + "\n")
    sys.stdout.write("\n".join(lines) + "\n")
    return 1 if failures else 0


def run_verification(quick: bool = False):
    """Deterministic invariant suite; returns (report lines, failure count)."""
    from .balayage import capacity, dirichlet_via_balayage, reduite, reduite_oracle
    from .dirichlet import solve_dirichlet
    from .martin import compactify, green_function, minimality_test
    from .measure import harmonic_measure, pushforward_compare

    lines = [f"graphpot {__version__} verification"]
    failures = 0

    def check(name, fn):
        nonlocal failures
        try:
            fn()
            lines.append(f"ok   {name}")
        except Exception as exc:
            failures += 1
            lines.append(f"FAIL {name}: {exc}")

    path5 = generate("path(5)")
    dom = Domain.whole_interior(path5)

    def closed_forms():
        h = solve_dirichlet(dom, {"0": 0.0, "4": 1.0})
        assert abs(h[1] - 0.25) < 1e-10 and abs(h[2] - 0.5) < 1e-10
        t = green_function(path5)
        assert abs(t.green("2", "2") - 2.0) < 1e-10
        assert abs(t.green("1", "1") - 1.5) < 1e-10
        assert abs(capacity(["2"], path5) - 0.5) < 1e-10
        om = harmonic_measure(dom, "1")
        assert abs(om["0"] - 0.75) < 1e-10
        atlas = compactify(path5)
        assert np.max(np.abs(atlas.column("0") - [1.5, 1.0, 0.5])) < 1e-10

    check("closed forms on path(5)", closed_forms)

    def sweeping():
        v = reduite(1.0, ["2"], path5)
        w = reduite_oracle(1.0, ["2"], path5)
        assert np.max(np.abs(v - w)) < 1e-9
        g = {"0": 0.0, "4": 1.0}
        a = dirichlet_via_balayage(dom, g)
        b = solve_dirichlet(dom, g)
        idx = dom.vertices()
        assert np.max(np.abs(a[idx] - b[idx])) < 1e-9

    check("sweeping identities on path(5)", sweeping)

    def boundary_structure():
        atlas = compactify(path5)
        flags = minimality_test(atlas)
        assert all(flags)
        pushforward_compare(atlas, "1")

    check("boundary atlas on path(5)", boundary_structure)

    if not quick:
        grid = generate("grid2d(5)")
        gdom = Domain.whole_interior(grid)

        def grid_identity():
            rng = np.random.default_rng(12345)
            for _ in range(20):
                g = {grid.ids[i]: float(v) for i, v in
                     zip(gdom.boundary, rng.random(gdom.boundary.size))}
                from .measure import represent

                val = represent(gdom, g, grid.ids[grid.base_point])
                sol = solve_dirichlet(gdom, g)
                assert abs(val - sol[grid.base_point]) < 1e-10

        check("representation identity on grid2d(5)", grid_identity)

        def mc_consistency():
            from .mc import mc_green

            mean, err = mc_green(path5, "2", "2", 20000, seed=7)
            assert abs(mean - 2.0) < 3 * max(err, 1e-12)

        check("trajectory estimate of G(2,2)", mc_consistency)

    lines.append(f"failures {failures}")
    return lines, failures


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="graphpot",
                                description="discrete potential theory toolkit")
    p.add_argument("--version", action="version", version=f"graphpot {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, **kw):
        sp_ = sub.add_parser(name, **kw)
        sp_.set_defaults(fn=fn)
        sp_.add_argument("--out", default=".", help="output directory")
        return sp_

    s = add("gen", _cmd_gen, help="generate a geometry and write a space file")
    s.add_argument("--space", required=True, help="descriptor, e.g. path(5)")

    s = add("dirichlet", _cmd_dirichlet, help="solve the boundary value problem")
    s.add_argument("--space", required=True)
    s.add_argument("--g", required=True, help="boundary data id:value,...")
    s.add_argument("--tol", type=float, default=None)

    s = add("balayage", _cmd_balayage, help="sweep a function onto a set")
    s.add_argument("--space", required=True)
    s.add_argument("--u", required=True, help="constant or id:value,...")
    s.add_argument("--set", required=True, help="comma-separated vertex ids")
    s.add_argument("--tol", type=float, default=1e-12)

    s = add("capacity", _cmd_capacity, help="capacity of a vertex set")
    s.add_argument("--space", required=True)
    s.add_argument("--set", required=True)

    s = add("green", _cmd_green, help="Green function table or entry")
    s.add_argument("--space", required=True)
    s.add_argument("--x")
    s.add_argument("--y")

    s = add("martin", _cmd_martin, help="boundary atlas and kernels")
    s.add_argument("--space", required=True)
    s.add_argument("--mode", choices=["absorbing", "exhaustion"],
                   default="absorbing")

    s = add("measure", _cmd_measure, help="exit distribution from a vertex")
    s.add_argument("--space", required=True)
    s.add_argument("--x", required=True)

    s = add("represent", _cmd_represent,
            help="integral representation of a boundary value problem")
    s.add_argument("--space", required=True)
    s.add_argument("--g", required=True)
    s.add_argument("--x")

    s = add("wiener", _cmd_wiener, help="shell capacity sums at the tip")
    s.add_argument("--geometry", choices=["thorn", "cone"], required=True)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--aperture", type=float, default=45.0)
    s.add_argument("--shells", type=int, default=None)
    s.add_argument("--obstacle", choices=["intersection", "difference"],
                   default="intersection")

    s = add("regularity", _cmd_regularity, help="boundary regularity at the tip")
    s.add_argument("--geometry", choices=["thorn", "cone"], required=True)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--aperture", type=float, default=45.0)
    s.add_argument("--tol", type=float, default=None)

    s = add("polar", _cmd_polar, help="vanishing-capacity flag across refinements")
    s.add_argument("--shape", choices=["segment", "ball", "thorn", "cone", "empty"],
                   required=True)
    s.add_argument("--levels", default="16,32,64")
    s.add_argument("--vanish-ratio", type=float, default=None, dest="vanish_ratio")

    s = add("witness", _cmd_witness, help="divergence witness for a vanishing family")
    s.add_argument("--shape", choices=["segment", "ball", "thorn", "cone", "empty"],
                   required=True)
    s.add_argument("--levels", default="16,32,64")
    s.add_argument("--point", default="0,0,0.125", help="on-set checkpoint x,y,z")
    s.add_argument("--check", default="0.4,0.4,-0.4", help="off-set checkpoint x,y,z")
    s.add_argument("--vanish-ratio", type=float, default=None, dest="vanish_ratio")

    s = add("mc", _cmd_mc, help="trajectory estimates")
    s.add_argument("--space", required=True)
    s.add_argument("--target", choices=["hitting", "green"], default="hitting")
    s.add_argument("--x", required=True)
    s.add_argument("--y")
    s.add_argument("--samples", type=int, default=100000)
    s.add_argument("--seed", type=int, default=0)

    s = add("verify", _cmd_verify, help="run the invariant suite")
    s.add_argument("--quick", action="store_true")

    return p


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "vanish_ratio", "absent") is None:
        from .polar import VANISH_RATIO

        args.vanish_ratio = VANISH_RATIO
    try:
        return args.fn(args, argv)
    except GraphPotError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    except (AssertionError, ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
