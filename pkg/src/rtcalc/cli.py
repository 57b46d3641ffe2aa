"""rtcalc: compute with decorated trees and edge-vertex maps from the shell.

Every subcommand reads map descriptions from JSON files (see
:mod:`rtcalc.mapfiles`) and tree expressions from files in the textual
grammar of :mod:`rtcalc.parsing`.  Output is canonical and
byte-deterministic: combinations print in term order with reduced
rationals, and ``--format structured`` swaps the text for JSON carrying
the same data.  Exit status: 0 on success (all residuals zero), 1 when
a computation surfaces a refutation or a nonzero residual, 2 on usage,
parse, or validation errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from typing import Callable, List, Optional, Sequence, Tuple

from .decorations import DecorationBasis, render_label
from .hopf import cut_coproduct, delta_pairing, deshuffle, pair_forests, star_product
from .lincomb import LinComb
from .mapfiles import MapFileError, load_blockmatrix, load_phi, load_postlie, load_psi
from .parsing import ParseError, parse_ext_elem, parse_forest_comb, parse_label, parse_tree_comb
from .phimaps import (
    AlreadyJD,
    IncompatiblePhi,
    NeedsAlgebraicExtension,
    NonNilpotentError,
    NotCompatible,
    Refuted,
    check_compat,
    classify_m2,
)
from .postlie import postlie_axiom_defects, psi_compat_defects
from .prelie import graft_free, graft_phi, theta
from .spde import SpdeConfig, noise_extend, phi_lambda, spde_psi, xi_admissible


class UsageError(Exception):
    pass


def _read(path: str) -> str:
    with open(path) as fh:
        return fh.read()


def _emit(args, text: str, data) -> None:
    if args.format == "structured":
        print(json.dumps(data, indent=2))
    else:
        print(text)


def _comb_terms(comb: LinComb, show: Callable) -> list:
    return [[str(c), *show(t)] for t, c in comb.items()]


def _span(basis: DecorationBasis, bound: Optional[int], what: str) -> Sequence:
    if basis.is_finite:
        return basis.labels()
    if bound is None:
        raise UsageError(f"the {what} basis is infinite; pass an explicit --bound")
    return basis.labels_up_to(bound)


def _render_pair(t: Tuple) -> str:
    return f"{render_label(t[0])} (x) {render_label(t[1])}"


def _render_tensor(t: Tuple) -> str:
    return f"{t[0].render()} (x) {t[1].render()}"


def _matrix_text(m) -> str:
    return "[" + "; ".join(" ".join(str(x) for x in row) for row in m) + "]"


def _matrix_data(m) -> list:
    return [[str(x) for x in row] for row in m]


# -- subcommand handlers


def _cmd_apply_phi(args) -> int:
    phi = load_phi(args.phi)
    a = parse_label(args.a, phi.edge_basis, "edge")
    b = parse_label(args.b, phi.vertex_basis, "vertex")
    img = phi(a, b)
    _emit(
        args,
        img.render(_render_pair),
        {"terms": _comb_terms(img, lambda t: [render_label(t[0]), render_label(t[1])])},
    )
    return 0


def _cmd_check_compat(args) -> int:
    phi = load_phi(args.phi)
    finite = phi.edge_basis.is_finite and phi.vertex_basis.is_finite
    if not finite and args.bound is None:
        raise UsageError("the bases are infinite; pass an explicit --bound")
    verdict = check_compat(phi, bound=args.bound)
    data = {"verdict": type(verdict).__name__}
    if isinstance(verdict, Refuted):
        data["witness"] = [render_label(l) for l in verdict.witness]
    elif hasattr(verdict, "bound"):
        data["bound"] = verdict.bound
    _emit(args, str(verdict), data)
    return 1 if isinstance(verdict, Refuted) else 0


def _comb_out(args, out: LinComb) -> int:
    _emit(args, out.render(lambda t: t.render()), {"terms": _comb_terms(out, lambda t: [t.render()])})
    return 0


def _cmd_graft(args) -> int:
    phi = load_phi(args.phi)
    a = parse_label(args.a, phi.edge_basis, "edge")
    x = parse_tree_comb(_read(args.x), phi.edge_basis, phi.vertex_basis)
    y = parse_tree_comb(_read(args.y), phi.edge_basis, phi.vertex_basis)
    return _comb_out(args, graft_phi(phi, x, a, y))


def _cmd_graft_free(args) -> int:
    phi = load_phi(args.phi)
    a = parse_label(args.a, phi.edge_basis, "edge")
    x = parse_tree_comb(_read(args.x), phi.edge_basis, phi.vertex_basis)
    y = parse_tree_comb(_read(args.y), phi.edge_basis, phi.vertex_basis)
    return _comb_out(args, graft_free(x, a, y))


def _cmd_theta(args) -> int:
    phi = load_phi(args.phi)
    x = parse_tree_comb(_read(args.x), phi.edge_basis, phi.vertex_basis)
    return _comb_out(args, theta(phi, x))


def _cmd_star(args) -> int:
    phi = load_phi(args.phi)
    x = parse_forest_comb(_read(args.x), phi.edge_basis, phi.vertex_basis)
    y = parse_forest_comb(_read(args.y), phi.edge_basis, phi.vertex_basis)
    return _comb_out(args, star_product(phi, x, y))


def _cmd_coprod(args) -> int:
    phi = load_phi(args.phi)
    x = parse_forest_comb(_read(args.x), phi.edge_basis, phi.vertex_basis)
    out = cut_coproduct(phi, x)
    _emit(
        args,
        out.render(_render_tensor),
        {"terms": _comb_terms(out, lambda t: [t[0].render(), t[1].render()])},
    )
    return 0


def _cmd_deshuffle(args) -> int:
    phi = load_phi(args.phi)
    x = parse_forest_comb(_read(args.x), phi.edge_basis, phi.vertex_basis)
    out = deshuffle(x)
    _emit(
        args,
        out.render(_render_tensor),
        {"terms": _comb_terms(out, lambda t: [t[0].render(), t[1].render()])},
    )
    return 0


def _cmd_pair(args) -> int:
    phi = load_phi(args.phi)
    phi2 = load_phi(args.phi2) if args.phi2 else phi
    xprime = parse_forest_comb(_read(args.xprime), phi2.edge_basis, phi2.vertex_basis)
    y = parse_forest_comb(_read(args.y), phi.edge_basis, phi.vertex_basis)
    value = pair_forests(delta_pairing(), xprime, y)
    _emit(args, str(value), {"value": str(value)})
    return 0


def _cmd_postlie_check(args) -> int:
    phi = load_phi(args.phi)
    bundle = load_psi(args.psi)
    base = load_postlie(args.postlie) if args.postlie else bundle.base
    elems = [
        parse_ext_elem(_read(path), phi.edge_basis, phi.vertex_basis, base.names)
        for path in (args.u, args.v, args.w)
    ]
    defects = postlie_axiom_defects(phi, base, bundle.psi, *elems)
    rows = [
        ("jacobi", defects.jacobi),
        ("derivation", defects.derivation),
        ("associator", defects.associator),
    ]
    text = "\n".join(f"{name}: {d.render()}" for name, d in rows)
    data = {name: d.render() for name, d in rows}
    data["all_zero"] = defects.all_zero
    _emit(args, text, data)
    return 0 if defects.all_zero else 1


def _cmd_psi_check(args) -> int:
    phi = load_phi(args.phi)
    bundle = load_psi(args.psi)
    base = load_postlie(args.postlie) if args.postlie else bundle.base
    edge_labels = _span(phi.edge_basis, args.bound, "edge")
    vertex_labels = _span(phi.vertex_basis, args.bound, "vertex")
    defects = psi_compat_defects(phi, base, bundle.psi, edge_labels, vertex_labels)
    if not defects:
        text = f"no defects on {len(edge_labels)} edge label(s) x {len(vertex_labels)} vertex label(s)"
    else:
        text = "\n".join(
            f"{d.condition} at gens=({', '.join(d.gens)}) label={_render_defect_term(d.label)}: "
            + d.residual.render(_render_defect_term)
            for d in defects
        )
    _emit(
        args,
        text,
        {
            "defects": [
                {
                    "condition": d.condition,
                    "gens": list(d.gens),
                    "label": _render_defect_term(d.label),
                    "residual": d.residual.render(_render_defect_term),
                }
                for d in defects
            ]
        },
    )
    return 0 if not defects else 1


def _render_defect_term(t) -> str:
    """Defect slots hold either one label or an (edge, vertex) pair."""
    if isinstance(t, tuple):
        return _render_pair(t)
    return render_label(t)


def _parse_lambda(args, d: int) -> Tuple[Fraction, ...]:
    if args.lam is None:
        return tuple(Fraction(1) for _ in range(d + 1))
    try:
        parts = tuple(Fraction(part.strip()) for part in args.lam.split(","))
    except (ValueError, ZeroDivisionError) as e:
        raise UsageError(f"bad --lambda: {e}")
    if len(parts) != d + 1:
        raise UsageError(f"--lambda needs {d + 1} coefficients, got {len(parts)}")
    return parts


def _cmd_spde_demo(args) -> int:
    from .decorations import STAR, XI, mi_unit, mi_zero
    from .trees import PlantedTree, leaf, node

    d = args.d
    lam = _parse_lambda(args, d)
    try:
        cfg = SpdeConfig(d, lam, noise=args.noise)
    except ValueError as e:
        raise UsageError(str(e))
    lines: List[str] = []
    lam_text = ",".join(str(c) for c in cfg.lam)
    lines.append(f"config: d={d} lambda=({lam_text}) noise={'on' if args.noise else 'off'}")

    zero = mi_zero(d)
    e0 = mi_unit(0, d)
    a = e0.add(e0)
    b = a.add(e0 if d == 0 else mi_unit(d, d))
    phi = phi_lambda(SpdeConfig(d, lam))
    lines.append(
        f"phi({render_label(a)} (x) {render_label(b)}) = " + phi(a, b).render(_render_pair)
    )
    back = LinComb()
    for (na, nb), c in phi(a, b).items():
        back = back + phi_lambda(SpdeConfig(d, cfg.negated().lam))(na, nb).scale(c)
    lines.append(
        "inverse check: phi^(-lambda) applied to that image = " + back.render(_render_pair)
    )

    x = LinComb.of(leaf(a))
    y = LinComb.of(node(b, [(e0, leaf(zero))]))
    g = graft_phi(phi, x, e0, y)
    lines.append(f"graft of {render_label(a)}-leaf onto a 2-chain along {render_label(e0)}:")
    lines.append("  " + g.render(lambda t: t.render()))

    chain = node(a, [(e0, leaf(zero))])
    lines.append(
        f"theta on {chain.render()} = " + theta(phi, LinComb.of(chain)).render(lambda t: t.render())
    )

    base, psi = spde_psi(cfg)
    lines.append(
        f"psi vertex action {base.names[0]} on {render_label(zero)} = "
        + psi.vertex(base.names[0], zero).render(render_label)
    )
    lines.append(
        f"psi edge action {base.names[0]} on {render_label(zero)} = "
        + psi.edge(base.names[0], zero).render(render_label)
    )

    if args.noise:
        ext = noise_extend(cfg)
        lines.append(f"extended phi on Xi (x) {render_label(b)} = " + ext(XI, b).render(_render_pair))
        lines.append(f"extended phi on {render_label(a)} (x) * = " + ext(a, STAR).render(_render_pair))
        noisy = node(b, [(e0, leaf(zero)), (XI, leaf(STAR))])
        g2 = graft_phi(ext, x, e0, LinComb.of(noisy))
        lines.append("graft onto a tree with a noise branch (no term lands on *):")
        lines.append("  " + g2.render(lambda t: t.render()))
        good = PlantedTree(XI, leaf(STAR))
        bad = PlantedTree(XI, leaf(zero))
        lines.append(f"admissible {good.render()}: {xi_admissible(good, cfg)}")
        lines.append(f"admissible {bad.render()}: {xi_admissible(bad, cfg)}")

    text = "\n".join(lines)
    _emit(args, text, {"lines": lines})
    return 0


def _cmd_classify_m2(args) -> int:
    M = load_blockmatrix(args.phi)
    result = classify_m2(M)
    if isinstance(result, AlreadyJD):
        text = "\n".join(
            [
                f"AlreadyJD(form={result.form})",
                f"a = {_matrix_text(result.a)}",
                f"b = {_matrix_text(result.b)}",
                f"basis change = {_matrix_text(result.basis_change)}",
            ]
        )
        data = {
            "result": "AlreadyJD",
            "form": result.form,
            "a": _matrix_data(result.a),
            "b": _matrix_data(result.b),
            "basis_change": _matrix_data(result.basis_change),
        }
        _emit(args, text, data)
        return 0
    if isinstance(result, NotCompatible):
        (i, j), (k, l) = result.witness
        text = f"NotCompatible: blocks ({i},{j}) and ({k},{l}) do not commute"
        _emit(args, text, {"result": "NotCompatible", "witness": [[i, j], [k, l]]})
        return 1
    assert isinstance(result, NeedsAlgebraicExtension)
    i, j = result.block
    text = f"NeedsAlgebraicExtension: block ({i},{j}) has no rational eigenvalue"
    _emit(args, text, {"result": "NeedsAlgebraicExtension", "block": [i, j]})
    return 0


def _cmd_verify_suite(args) -> int:
    from .verify import battery

    results = battery(args.level)
    width = max(len(r.name) for r in results)
    lines = [
        f"{'ok  ' if r.ok else 'FAIL'} {r.name.ljust(width)}  {r.detail}" for r in results
    ]
    ok = all(r.ok for r in results)
    lines.append(f"{sum(r.ok for r in results)}/{len(results)} checks passed at level {args.level}")
    _emit(
        args,
        "\n".join(lines),
        {"level": args.level, "ok": ok, "checks": [{"name": r.name, "ok": r.ok, "detail": r.detail} for r in results]},
    )
    return 0 if ok else 1


# -- parser assembly


def _add_common(sp, *, phi=False, phi2=False, psi=False, postlie=False, a=False, b=False, bound=False):
    if phi:
        sp.add_argument("--phi", required=True, metavar="FILE", help="map description (JSON)")
    if phi2:
        sp.add_argument("--phi2", metavar="FILE", help="map for the primed side (default: --phi)")
    if psi:
        sp.add_argument("--psi", required=True, metavar="FILE", help="generator-action description (JSON)")
    if postlie:
        sp.add_argument("--postlie", metavar="FILE", help="generator algebra (default: the one in --psi)")
    if a:
        sp.add_argument("--a", required=True, metavar="LABEL", help="edge label")
    if b:
        sp.add_argument("--b", required=True, metavar="LABEL", help="vertex label")
    if bound:
        sp.add_argument("--bound", type=int, metavar="N", help="entry bound for infinite bases")
    sp.add_argument("--format", choices=("text", "structured"), default="text")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rtcalc",
        description="exact computations with decorated rooted trees and edge-vertex maps",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("apply-phi", help="apply a map to one (edge, vertex) pair")
    _add_common(sp, phi=True, a=True, b=True)
    sp.set_defaults(func=_cmd_apply_phi)

    sp = sub.add_parser("check-compat", help="tree-compatibility verdict for a map")
    _add_common(sp, phi=True, bound=True)
    sp.set_defaults(func=_cmd_check_compat)

    sp = sub.add_parser("graft", help="deformed grafting of two tree expressions")
    _add_common(sp, phi=True, a=True)
    sp.add_argument("x", metavar="X_FILE")
    sp.add_argument("y", metavar="Y_FILE")
    sp.set_defaults(func=_cmd_graft)

    sp = sub.add_parser("graft-free", help="plain grafting (the map supplies bases only)")
    _add_common(sp, phi=True, a=True)
    sp.add_argument("x", metavar="X_FILE")
    sp.add_argument("y", metavar="Y_FILE")
    sp.set_defaults(func=_cmd_graft_free)

    sp = sub.add_parser("theta", help="edge-product operator on a tree expression")
    _add_common(sp, phi=True)
    sp.add_argument("x", metavar="X_FILE")
    sp.set_defaults(func=_cmd_theta)

    sp = sub.add_parser("star", help="deformed Grossman-Larson product of forests")
    _add_common(sp, phi=True)
    sp.add_argument("x", metavar="X_FILE")
    sp.add_argument("y", metavar="Y_FILE")
    sp.set_defaults(func=_cmd_star)

    sp = sub.add_parser("coprod", help="deformed cut coproduct of a forest expression")
    _add_common(sp, phi=True)
    sp.add_argument("x", metavar="X_FILE")
    sp.set_defaults(func=_cmd_coprod)

    sp = sub.add_parser("deshuffle", help="deshuffle coproduct (the map supplies bases only)")
    _add_common(sp, phi=True)
    sp.add_argument("x", metavar="X_FILE")
    sp.set_defaults(func=_cmd_deshuffle)

    sp = sub.add_parser("pair", help="dual pairing of a primed and an unprimed forest")
    _add_common(sp, phi=True, phi2=True)
    sp.add_argument("xprime", metavar="XPRIME_FILE")
    sp.add_argument("y", metavar="Y_FILE")
    sp.set_defaults(func=_cmd_pair)

    sp = sub.add_parser("postlie-check", help="axiom residuals on the extension, for three elements")
    _add_common(sp, phi=True, psi=True, postlie=True)
    sp.add_argument("u", metavar="U_FILE")
    sp.add_argument("v", metavar="V_FILE")
    sp.add_argument("w", metavar="W_FILE")
    sp.set_defaults(func=_cmd_postlie_check)

    sp = sub.add_parser("psi-check", help="compatibility residuals of generator actions against a map")
    _add_common(sp, phi=True, psi=True, postlie=True, bound=True)
    sp.set_defaults(func=_cmd_psi_check)

    sp = sub.add_parser("spde-demo", help="worked multi-index examples for a chosen dimension")
    sp.add_argument("--d", type=int, required=True, metavar="N")
    sp.add_argument("--lambda", dest="lam", metavar="CSV", help="d+1 rationals (default: all 1)")
    sp.add_argument("--noise", action="store_true")
    sp.add_argument("--format", choices=("text", "structured"), default="text")
    sp.set_defaults(func=_cmd_spde_demo)

    sp = sub.add_parser("classify-m2", help="joint normal form of a 'blocks' map with 2-dim vertex side")
    _add_common(sp, phi=True)
    sp.set_defaults(func=_cmd_classify_m2)

    sp = sub.add_parser("verify-suite", help="run the property battery")
    sp.add_argument("--level", choices=("small", "full"), default="small")
    sp.add_argument("--format", choices=("text", "structured"), default="text")
    sp.set_defaults(func=_cmd_verify_suite)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as e:
        print(f"rtcalc: error: {e}", file=sys.stderr)
        return 2
    except (ParseError, MapFileError, NonNilpotentError, OSError) as e:
        print(f"rtcalc: error: {e}", file=sys.stderr)
        return 2
    except IncompatiblePhi as e:
        print(f"rtcalc: incompatible map: {e}", file=sys.stderr)
        return 1
    except ValueError as e:
        print(f"rtcalc: error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
