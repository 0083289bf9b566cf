"""Command-line interface: deterministic file-based reports over schemes.

Every run is a pure function of its inputs; identical inputs give
byte-identical outputs.  Exit codes: 0 success, 2 validation failure,
3 internal invariant violation.
"""

from __future__ import annotations

import argparse
import json
import sys

from gmpy2 import mpq

from . import hull as hull_mod
from .arrangement import cone_type_str, parse_cone_type
from .cps import generate_pattern, load_config, validate_almost_canonical
from .ellis import EllisSystem
from .errors import (
    InvariantViolationError,
    ModelSetsError,
    StabilizationError,
    ValidationError,
)
from .presets import load_preset, preset_config, preset_names
from .qfield import QF, format_qf, parse_qf
from .render import pattern_svg, save_pattern_figure


def _load(args) -> EllisSystem:
    if args.preset:
        scheme, window, shift = load_preset(args.preset)
    elif args.config:
        scheme, window, shift = load_config(args.config)
    else:
        raise ValidationError("pass --preset NAME or --config PATH")
    return EllisSystem(scheme, window, shift)


def _parse_vec(text: str, n: int, D: int):
    parts = text.split(",")
    if len(parts) != n:
        raise ValidationError(f"expected {n} comma-separated scalars, got {text!r}")
    return tuple(parse_qf(p, D) for p in parts)


def _parse_torus(system: EllisSystem, text: str):
    if ";" in text:
        wtxt, stxt = text.split(";", 1)
        w = _parse_vec(wtxt, system.n, system.D)
        s = _parse_vec(stxt, system.d, system.D)
    else:
        w = _parse_vec(text, system.n, system.D)
        s = tuple(QF(0, 0, system.D) for _ in range(system.d))
    return system.torus_from_parts(w, s)


def _emit(text: str, out: str | None):
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_validate(args) -> int:
    system = _load(args)
    rep = validate_almost_canonical(system.scheme, system.window)
    lines = [
        f"scheme: d={system.d} n={system.n} D={system.D} generators={system.scheme.r}",
        "lattice: OK",
        "physical injectivity: OK",
        f"window: {len(system.window.vertices)} vertices, "
        f"{len(system.window.faces)} faces",
        f"hyperplane family size: {len(system.face_data)}",
        f"internal star image dense: {'yes' if rep['gamma_star_dense'] else 'no'}",
    ]
    for h in rep["hyperplanes"]:
        nrm = ",".join(format_qf(x) for x in h["normal"])
        verdict = "dense" if h["stabilizer_star_dense"] else "not dense"
        lines.append(f"stabilizer star image on ({nrm}): {verdict}")
    lines.append(
        "almost canonical (sufficient condition on stabilizer star images): "
        + rep["status"]
    )
    _emit("\n".join(lines) + "\n", args.output)
    return 0


def cmd_pattern(args) -> int:
    system = _load(args)
    D = system.D
    w = (
        _parse_vec(args.w, system.n, D) if args.w else system.shift
    )
    center = (
        _parse_vec(args.center, system.d, D)
        if args.center
        else tuple(QF(0, 0, D) for _ in range(system.d))
    )
    radius = QF(mpq(args.radius), 0, D)
    pat = generate_pattern(
        system.scheme, system.window, w, center, radius, args.boundary
    )
    if args.format == "csv":
        _emit(pat.to_csv(system.scheme.r, system.d), args.output)
    else:
        _emit(
            pattern_svg([p for _, p in pat.points], center, radius, system.d),
            args.output,
        )
    if args.plot:
        save_pattern_figure([p for _, p in pat.points], args.plot)
    return 0


def cmd_cones(args) -> int:
    system = _load(args)
    lines = [f"hyperplanes ({len(system.face_data)}):"]
    for h in system.face_data.hyperplanes:
        lines.append("  normal " + ",".join(format_qf(x) for x in h.normal))
    lines.append(f"cones ({len(system.semigroup)}):")
    lines.append("type dim nontrivial plain_dim")
    for t in system.semigroup.cones:
        nt = system.geometry.nontrivial(t)
        pd = len(system.geometry.plain_cone(t).V_basis) if nt else "-"
        lines.append(
            f"{cone_type_str(t)} {system.semigroup.dims[t]} "
            f"{'yes' if nt else 'no'} {pd}"
        )
    _emit("\n".join(lines) + "\n", args.output)
    return 0


def cmd_semigroup(args) -> int:
    system = _load(args)
    sg = system.semigroup
    lines = [f"elements ({len(sg)}): " + " ".join(cone_type_str(t) for t in sg.cones)]
    lines.append("product table:")
    for t in sg.cones:
        row = " ".join(cone_type_str(sg.product(t, u)) for u in sg.cones)
        lines.append(f"  {cone_type_str(t)}: {row}")
    lines.append("order (t <= u, t != u):")
    for t in sg.cones:
        ups = [cone_type_str(u) for u in sg.cones if u != t and sg.leq(t, u)]
        if ups:
            lines.append(f"  {cone_type_str(t)} <= {' '.join(ups)}")
    mi = sg.minimal_ideal(restrict=system.geometry.nontrivial_cones())
    lines.append(
        f"minimal ideal ({len(mi)} chamber types): "
        + " ".join(cone_type_str(t) for t in mi)
    )
    _emit("\n".join(lines) + "\n", args.output)
    return 0


def cmd_ellis(args) -> int:
    system = _load(args)
    summary = system.structure_summary()
    lines = ["semigroup components (dense span, cone types):"]
    for g in summary:
        lines.append(
            f"  {g['component']}: span dim {g['dim']}, "
            f"{len(g['cone_types'])} cone type(s): {' '.join(sorted(g['cone_types']))}"
        )
    idems = system.idempotents_over_zero()
    lines.append(f"idempotents over the zero torus point: {len(idems)}")
    mi = system.minimal_ideal_types()
    lines.append(
        f"minimal ideal cone types ({len(mi)}): "
        + " ".join(cone_type_str(t) for t in mi)
    )
    _emit("\n".join(lines) + "\n", args.output)
    return 0


def cmd_fiber(args) -> int:
    system = _load(args)
    z = _parse_torus(system, args.z)
    points = hull_mod.fiber(system, z)
    lines = [f"cut type: {{{','.join('H' + str(i + 1) for i in hull_mod.cut_type(system, z.w_part()))}}}"]
    lines.append(f"fiber size: {len(points)}")
    for p in points:
        lines.append(f"  z={p.z}  c={hull_mod.extended_type_str(p.c)}")
    _emit("\n".join(lines) + "\n", args.output)
    if args.patterns:
        import os

        os.makedirs(args.patterns, exist_ok=True)
        radius = QF(mpq(args.radius), 0, system.D)
        center = tuple(QF(0, 0, system.D) for _ in range(system.d))
        for i, p in enumerate(points):
            pat = hull_mod.selector(p, center, radius)
            path = os.path.join(args.patterns, f"fiber_{i}.csv")
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(pat.to_csv(system.scheme.r, system.d))
            if args.plot:
                save_pattern_figure(
                    [pos for _, pos in pat.points],
                    os.path.join(args.patterns, f"fiber_{i}.png"),
                    title=hull_mod.extended_type_str(p.c),
                )
    return 0


def cmd_act(args) -> int:
    system = _load(args)
    z = _parse_torus(system, args.z)
    t = parse_cone_type(args.cone_type)
    if len(t) != len(system.face_data):
        raise ValidationError("cone type length differs from the hyperplane family")
    target_z = _parse_torus(system, args.target_z) if args.target_z else z
    gz = target_z.add(z.neg())
    g = system.element(gz, t)
    radius = QF(mpq(args.radius), 0, system.D)
    center = tuple(QF(0, 0, system.D) for _ in range(system.d))
    points = hull_mod.fiber(system, z)
    lines = [f"element: {g}", f"fiber size over z: {len(points)}"]
    ok = True
    for i, p in enumerate(points):
        q = hull_mod.act(p, g)
        patch = hull_mod.net_limit_oracle(p, g, radius)
        target = hull_mod.selector(q, center, radius)
        same = patch.positions() == target.positions()
        ok = ok and same
        lines.append(
            f"  point {i}: c={hull_mod.extended_type_str(p.c)} -> "
            f"c'={hull_mod.extended_type_str(q.c)}  "
            f"limit patch {'==' if same else '!='} action pattern "
            f"({len(patch)} points)"
        )
    lines.append("net-limit oracle agrees with the action: " + ("yes" if ok else "NO"))
    _emit("\n".join(lines) + "\n", args.output)
    if not ok:
        raise InvariantViolationError("net-limit oracle disagrees with the action")
    return 0


def cmd_preset(args) -> int:
    if args.action == "export":
        cfg = preset_config(args.name)
        _emit(json.dumps(cfg, ensure_ascii=False, indent=2) + "\n", args.output)
        return 0
    if args.action == "list":
        _emit("\n".join(preset_names()) + "\n", args.output)
        return 0
    raise ValidationError(f"unknown preset action {args.action!r}")


def _add_source(p):
    p.add_argument("--preset", help="bundled scheme name")
    p.add_argument("--config", help="scheme config JSON path")
    p.add_argument("-o", "--output", help="output file (default stdout)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="modelsets",
        description="Exact cut-and-project patterns and their translation-limit structure",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="scheme/window checks and density report")
    _add_source(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("pattern", help="generate a point pattern")
    _add_source(p)
    p.add_argument("--w", help="internal shift, comma-separated scalars")
    p.add_argument("--center", help="physical ball center")
    p.add_argument("--radius", default="10", help="physical ball radius (rational)")
    p.add_argument("--boundary", choices=["open", "closed"], default="closed")
    p.add_argument("--format", choices=["csv", "svg"], default="csv")
    p.add_argument("--plot", help="also render a matplotlib figure to this path")
    p.set_defaults(func=cmd_pattern)

    p = sub.add_parser("cones", help="stratification listing")
    _add_source(p)
    p.set_defaults(func=cmd_cones)

    p = sub.add_parser("semigroup", help="product table, order, minimal ideal")
    _add_source(p)
    p.set_defaults(func=cmd_semigroup)

    p = sub.add_parser("ellis", help="semigroup component summary")
    _add_source(p)
    p.set_defaults(func=cmd_ellis)

    p = sub.add_parser("fiber", help="hull points over a torus point")
    _add_source(p)
    p.add_argument("--z", required=True, help='torus point "w1,..;s1,.." (s optional)')
    p.add_argument("--patterns", help="directory for per-point pattern CSVs")
    p.add_argument("--radius", default="10")
    p.add_argument("--plot", action="store_true", help="also render figures")
    p.set_defaults(func=cmd_fiber)

    p = sub.add_parser("act", help="semigroup action vs its net-limit definition")
    _add_source(p)
    p.add_argument("--z", required=True)
    p.add_argument("--cone-type", required=True, help='sign string, e.g. "+0-+"')
    p.add_argument("--target-z", help="torus part of the acting element plus z")
    p.add_argument("--radius", default="10")
    p.set_defaults(func=cmd_act)

    p = sub.add_parser("preset", help="bundled scheme utilities")
    p.add_argument("action", choices=["export", "list"])
    p.add_argument("name", nargs="?", default="octagon")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_preset)

    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: validation: {exc}", file=sys.stderr)
        return 2
    except (InvariantViolationError, StabilizationError) as exc:
        print(f"error: invariant: {exc}", file=sys.stderr)
        return 3
    except ModelSetsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
