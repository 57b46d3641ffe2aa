"""JSON descriptions of edge-vertex maps, generator actions, and block grids.

A map file is one JSON object selected by its ``builder`` field.  Bases
are denoted by objects like ``{"kind": "symbols", "id": "a", "names":
["a1", "a2"]}`` or ``{"kind": "multiindex", "d": 1}``; the noise label
of ``multiindex_noise`` and ``noise_only`` bases is chosen by the slot
they appear in (edge slots get Xi, vertex slots get *).  Rationals are
JSON integers or strings like ``"1/2"``; labels are strings in the same
syntax the expression parser accepts.  Builders that take another map
(``compose``, ``exp``, ...) nest the description inline.

Any map object may set ``"assert_compatible": true`` to record a
compatibility argument made outside the checker.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Dict, Optional, Tuple

from .decorations import (
    STAR,
    XI,
    DecorationBasis,
    MultiIndexBasis,
    MultiIndexNoiseBasis,
    NoiseOnlyBasis,
    SymbolBasis,
)
from .lincomb import LinComb, as_scalar
from .parsing import ParseError, parse_label
from .phimaps import (
    BlockMatrix,
    PhiMap,
    block_matrix,
    build_JD,
    compose,
    direct_sum,
    exp_series,
    from_blocks,
    from_table,
    identity_map,
    mark_compatible,
    polynomial,
    tensor_map,
    transpose_map,
    zero_map,
)
from .postlie import PostLieBase, PsiPair, postlie_base, psi_from_tables, trivial_postlie
from .ratmat import mat
from .spde import SpdeConfig, noise_extend, partial_lambda, phi_lambda, phi_lambda_via_exp, spde_psi


class MapFileError(ValueError):
    pass


def _req(obj: dict, key: str, where: str):
    if key not in obj:
        raise MapFileError(f"{where}: missing {key!r}")
    return obj[key]


def _rat(x, where: str) -> Fraction:
    try:
        return as_scalar(x)
    except (TypeError, ValueError, ZeroDivisionError) as e:
        raise MapFileError(f"{where}: bad rational {x!r} ({e})")


def _basis(obj, side: str, where: str) -> DecorationBasis:
    noise = XI if side == "edge" else STAR
    if not isinstance(obj, dict):
        raise MapFileError(f"{where}: expected a basis object")
    kind = _req(obj, "kind", where)
    if kind == "symbols":
        return SymbolBasis(str(_req(obj, "id", where)), tuple(_req(obj, "names", where)))
    if kind == "multiindex":
        return MultiIndexBasis(int(_req(obj, "d", where)))
    if kind == "multiindex_noise":
        return MultiIndexNoiseBasis(int(_req(obj, "d", where)), noise)
    if kind == "noise_only":
        return NoiseOnlyBasis(noise)
    raise MapFileError(f"{where}: unknown basis kind {kind!r}")


def _label(src, basis: DecorationBasis, side: str, where: str):
    try:
        return parse_label(str(src), basis, side)
    except ParseError as e:
        raise MapFileError(f"{where}: {e}")


def _matrix(rows, where: str):
    try:
        return mat([[_rat(x, where) for x in row] for row in rows])
    except (TypeError, ValueError) as e:
        raise MapFileError(f"{where}: bad matrix ({e})")


def _spde_config(obj: dict, where: str, noise: bool) -> SpdeConfig:
    d = int(_req(obj, "d", where))
    lam = obj.get("lambda")
    if lam is None:
        lam = [1] * (d + 1)
    try:
        return SpdeConfig(d, tuple(_rat(c, where) for c in lam), noise=noise)
    except ValueError as e:
        raise MapFileError(f"{where}: {e}")


def _block_grid(obj: dict, where: str) -> BlockMatrix:
    if "jd" in obj:
        jd = obj["jd"]
        A = _matrix(_req(jd, "A", where), where)
        B = _matrix(_req(jd, "B", where), where)
        form = _req(jd, "form", where)
        try:
            return build_JD(A, B, form)
        except ValueError as e:
            raise MapFileError(f"{where}: {e}")
    rows = _req(obj, "blocks", where)
    try:
        return block_matrix([[_matrix(blk, where) for blk in row] for row in rows])
    except ValueError as e:
        raise MapFileError(f"{where}: {e}")


def _symbol_basis_opt(obj: dict, key: str, side: str, where: str) -> Optional[SymbolBasis]:
    if key not in obj:
        return None
    basis = _basis(obj[key], side, where)
    if not isinstance(basis, SymbolBasis):
        raise MapFileError(f"{where}: {key} must be a symbols basis")
    return basis


def build_phi(obj: dict, where: str = "map") -> PhiMap:
    if not isinstance(obj, dict):
        raise MapFileError(f"{where}: expected a map object")
    builder = _req(obj, "builder", where)
    phi = _dispatch_phi(obj, builder, where)
    if "name" in obj:
        phi = replace(phi, name=str(obj["name"]))
    if obj.get("assert_compatible"):
        phi = mark_compatible(phi)
    return phi


def _dispatch_phi(obj: dict, builder: str, where: str) -> PhiMap:
    if builder in ("identity", "zero"):
        E = _basis(_req(obj, "edge_basis", where), "edge", where)
        V = _basis(_req(obj, "vertex_basis", where), "vertex", where)
        return identity_map(E, V) if builder == "identity" else zero_map(E, V)

    if builder == "table":
        E = _basis(_req(obj, "edge_basis", where), "edge", where)
        V = _basis(_req(obj, "vertex_basis", where), "vertex", where)
        table: Dict[Tuple, list] = {}
        for k, entry in enumerate(_req(obj, "entries", where)):
            spot = f"{where}: entries[{k}]"
            on = _req(entry, "on", spot)
            if len(on) != 2:
                raise MapFileError(f"{spot}: 'on' wants [edge, vertex]")
            key = (_label(on[0], E, "edge", spot), _label(on[1], V, "vertex", spot))
            terms = [
                (_rat(c, spot), _label(a, E, "edge", spot), _label(b, V, "vertex", spot))
                for c, a, b in _req(entry, "terms", spot)
            ]
            table.setdefault(key, []).extend(terms)
        return from_table(E, V, table)

    if builder in ("phi_lambda", "partial_lambda", "phi_lambda_exp"):
        cfg = _spde_config(obj, where, noise=False)
        if builder == "phi_lambda":
            return phi_lambda(cfg)
        if builder == "partial_lambda":
            return partial_lambda(cfg)
        return phi_lambda_via_exp(cfg, max_iter=int(obj.get("max_iter", 64)))

    if builder == "noise_extend":
        return noise_extend(_spde_config(obj, where, noise=True))

    if builder == "blocks":
        M = _block_grid(obj, where)
        try:
            return from_blocks(
                M,
                _symbol_basis_opt(obj, "edge_basis", "edge", where),
                _symbol_basis_opt(obj, "vertex_basis", "vertex", where),
            )
        except ValueError as e:
            raise MapFileError(f"{where}: {e}")

    if builder == "tensor":
        E = _basis(_req(obj, "edge_basis", where), "edge", where)
        V = _basis(_req(obj, "vertex_basis", where), "vertex", where)
        if not (E.is_finite and V.is_finite):
            raise MapFileError(f"{where}: tensor wants finite bases")
        f = _matrix(_req(obj, "f", where), where)
        g = _matrix(_req(obj, "g", where), where)
        return tensor_map(E, V, _matrix_action(f, E.labels(), where), _matrix_action(g, V.labels(), where))

    if builder == "direct_sum":
        first = build_phi(_req(obj, "first", where), f"{where}.first")
        second = build_phi(_req(obj, "second", where), f"{where}.second")
        lam = _rat(obj.get("lam", 0), where)
        mu = _rat(obj.get("mu", 0), where)
        try:
            return direct_sum(first, second, lam, mu)
        except ValueError as e:
            raise MapFileError(f"{where}: {e}")

    if builder == "compose":
        outer = build_phi(_req(obj, "outer", where), f"{where}.outer")
        inner = build_phi(_req(obj, "inner", where), f"{where}.inner")
        try:
            return compose(outer, inner)
        except ValueError as e:
            raise MapFileError(f"{where}: {e}")

    if builder == "exp":
        inner = build_phi(_req(obj, "of", where), f"{where}.of")
        return exp_series(inner, max_iter=int(obj.get("max_iter", 64)))

    if builder == "polynomial":
        inner = build_phi(_req(obj, "of", where), f"{where}.of")
        return polynomial(inner, [_rat(c, where) for c in _req(obj, "coeffs", where)])

    if builder == "transpose":
        inner = build_phi(_req(obj, "of", where), f"{where}.of")
        try:
            return transpose_map(inner)
        except ValueError as e:
            raise MapFileError(f"{where}: {e}")

    raise MapFileError(f"{where}: unknown builder {builder!r}")


def _matrix_action(m, labels, where: str):
    if any(len(row) != len(labels) for row in m) or len(m) != len(labels):
        raise MapFileError(f"{where}: matrix size does not match the basis")
    index = {lab: j for j, lab in enumerate(labels)}

    def act(lab):
        j = index[lab]
        return LinComb([(labels[i], m[i][j]) for i in range(len(labels)) if m[i][j]])

    return act


@dataclass(frozen=True)
class PsiBundle:
    """Generator actions plus the bases their labels live in."""

    base: PostLieBase
    psi: PsiPair
    edge_basis: DecorationBasis
    vertex_basis: DecorationBasis


def build_psi(obj: dict, where: str = "psi") -> PsiBundle:
    if not isinstance(obj, dict):
        raise MapFileError(f"{where}: expected an action object")
    builder = _req(obj, "builder", where)

    if builder == "spde_psi":
        noise = bool(obj.get("noise", False))
        cfg = _spde_config(obj, where, noise=noise)
        base, psi = spde_psi(cfg)
        if noise:
            E: DecorationBasis = MultiIndexNoiseBasis(cfg.d, XI)
            V: DecorationBasis = MultiIndexNoiseBasis(cfg.d, STAR)
        else:
            E = MultiIndexBasis(cfg.d)
            V = MultiIndexBasis(cfg.d)
        return PsiBundle(base, psi, E, V)

    if builder == "psi_tables":
        names = tuple(str(n) for n in _req(obj, "generators", where))
        E = _basis(_req(obj, "edge_basis", where), "edge", where)
        V = _basis(_req(obj, "vertex_basis", where), "vertex", where)

        def side(key: str, basis: DecorationBasis, kind: str):
            out = {}
            for k, entry in enumerate(obj.get(key, [])):
                spot = f"{where}: {key}[{k}]"
                gen, lab = _req(entry, "on", spot)
                if gen not in names:
                    raise MapFileError(f"{spot}: unknown generator {gen!r}")
                terms = [
                    (_rat(c, spot), _label(l, basis, kind, spot))
                    for c, l in _req(entry, "terms", spot)
                ]
                out[(str(gen), _label(lab, basis, kind, spot))] = terms
            return out

        psi = psi_from_tables(side("edge", E, "edge"), side("vertex", V, "vertex"))
        base = build_postlie(obj, where) if ("bracket" in obj or "triangle" in obj) else trivial_postlie(names)
        return PsiBundle(base, psi, E, V)

    raise MapFileError(f"{where}: unknown builder {builder!r}")


def build_postlie(obj: dict, where: str = "postlie") -> PostLieBase:
    if not isinstance(obj, dict):
        raise MapFileError(f"{where}: expected a generator-algebra object")
    names = tuple(str(n) for n in _req(obj, "generators", where))

    def consts(key: str):
        out = {}
        for k, entry in enumerate(obj.get(key, [])):
            spot = f"{where}: {key}[{k}]"
            p, q = _req(entry, "on", spot)
            out[(str(p), str(q))] = [(_rat(c, spot), str(r)) for c, r in _req(entry, "terms", spot)]
        return out

    try:
        return postlie_base(names, consts("bracket"), consts("triangle"))
    except ValueError as e:
        raise MapFileError(f"{where}: {e}")


def load_blockgrid(obj: dict, where: str = "map") -> BlockMatrix:
    if _req(obj, "builder", where) != "blocks":
        raise MapFileError(f"{where}: expected a 'blocks' map")
    return _block_grid(obj, where)


def _load(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as e:
        raise MapFileError(f"{path}: {e}")
    except json.JSONDecodeError as e:
        raise MapFileError(f"{path}: not valid JSON ({e})")


def load_phi(path: str) -> PhiMap:
    return build_phi(_load(path), path)


def load_psi(path: str) -> PsiBundle:
    return build_psi(_load(path), path)


def load_postlie(path: str) -> PostLieBase:
    return build_postlie(_load(path), path)


def load_blockmatrix(path: str) -> BlockMatrix:
    return load_blockgrid(_load(path), path)
