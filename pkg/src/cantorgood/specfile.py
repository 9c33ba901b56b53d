"""JSON measure-spec files: a tagged union mirroring the MeasureSpec
variants, with rationals as {"num": ..., "den": ...} decimal strings.
Loading validates through the ordinary constructors; dumping is canonical
(sorted keys), so load -> dump -> load is the identity and dumps are
byte-stable."""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Any, Optional

from .exactnum import DomainError
from .space import (
    CF,
    Bernoulli,
    CellId,
    CompactOpen,
    DisjointUnion,
    DistinguishedClass,
    FullDiagram,
    GeometricTail,
    MeasureSpec,
    PAdicHaar,
    ProductCounting,
    Restricted,
    Scaled,
    StationaryBratteli,
    ZWeights,
)

SCHEMA_VERSION = 1


class SpecFormatError(ValueError):
    """A measure-spec document is malformed or fails validation."""


def rational_to_json(x: Fraction) -> dict[str, str]:
    return {"num": str(x.numerator), "den": str(x.denominator)}


def rational_from_json(obj: Any) -> Fraction:
    if (
        not isinstance(obj, dict)
        or set(obj) != {"num", "den"}
        or not all(isinstance(v, str) for v in obj.values())
    ):
        raise SpecFormatError(f"not a rational: {obj!r}")
    try:
        return Fraction(int(obj["num"]), int(obj["den"]))
    except (ValueError, ZeroDivisionError) as err:
        raise SpecFormatError(str(err)) from err


def _cell_to_json(cid: CellId) -> dict:
    return {"piece": cid.piece, "path": list(cid.path)}


def _cell_from_json(obj: Any) -> CellId:
    try:
        return CellId(int(obj["piece"]), tuple(int(i) for i in obj["path"]))
    except (KeyError, TypeError, ValueError, DomainError) as err:
        raise SpecFormatError(f"bad cell id {obj!r}: {err}") from err


def spec_to_json(spec: MeasureSpec) -> dict:
    if isinstance(spec, Bernoulli):
        return {
            "type": "bernoulli",
            "weights": [rational_to_json(w) for w in spec.weights],
        }
    if isinstance(spec, PAdicHaar):
        return {"type": "padic_haar", "p": spec.p}
    if isinstance(spec, StationaryBratteli):
        if isinstance(spec.mode, FullDiagram):
            mode = {"kind": "full"}
        else:
            mode = {"kind": "class", "vertices": sorted(spec.mode.vertices)}
        return {
            "type": "stationary_bratteli",
            "matrix": [list(row) for row in spec.matrix],
            "lam": spec.lam,
            "x": [
                None if xv is None else rational_to_json(xv) for xv in spec.x
            ],
            "mode": mode,
        }
    if isinstance(spec, CF):
        return {
            "type": "cf",
            "f_sizes": list(spec.f_sizes),
            "c_sizes": list(spec.c_sizes),
        }
    if isinstance(spec, Scaled):
        return {
            "type": "scaled",
            "factor": rational_to_json(spec.factor),
            "inner": spec_to_json(spec.inner),
        }
    if isinstance(spec, Restricted):
        return {
            "type": "restricted",
            "inner": spec_to_json(spec.inner),
            "within": [_cell_to_json(c) for c in spec.within.cells],
        }
    if isinstance(spec, DisjointUnion):
        tail = None
        if spec.tail is not None:
            tail = {
                "base": spec_to_json(spec.tail.base),
                "factors": [rational_to_json(f) for f in spec.tail.factors],
                "ratio": rational_to_json(spec.tail.ratio),
            }
        return {
            "type": "disjoint_union",
            "members": [spec_to_json(m) for m in spec.members],
            "tail": tail,
        }
    if isinstance(spec, ProductCounting):
        return {
            "type": "product_counting",
            "inner": spec_to_json(spec.inner),
            "weights": {
                "cycle": [rational_to_json(w) for w in spec.weights.cycle],
                "overrides": [
                    [i, rational_to_json(w)] for i, w in spec.weights.overrides
                ],
            },
        }
    raise SpecFormatError(f"unserializable spec {type(spec).__name__}")


def spec_from_json(obj: Any) -> MeasureSpec:
    if not isinstance(obj, dict) or "type" not in obj:
        raise SpecFormatError("spec documents are objects with a 'type' tag")
    kind = obj["type"]
    try:
        if kind == "bernoulli":
            return Bernoulli(tuple(rational_from_json(w) for w in obj["weights"]))
        if kind == "padic_haar":
            return PAdicHaar(int(obj["p"]))
        if kind == "stationary_bratteli":
            mode_obj = obj["mode"]
            if mode_obj["kind"] == "full":
                mode = FullDiagram()
            elif mode_obj["kind"] == "class":
                mode = DistinguishedClass(
                    frozenset(int(v) for v in mode_obj["vertices"])
                )
            else:
                raise SpecFormatError(f"unknown mode {mode_obj!r}")
            return StationaryBratteli(
                tuple(tuple(int(e) for e in row) for row in obj["matrix"]),
                int(obj["lam"]),
                tuple(
                    None if xv is None else rational_from_json(xv)
                    for xv in obj["x"]
                ),
                mode,
            )
        if kind == "cf":
            return CF(
                tuple(int(v) for v in obj["f_sizes"]),
                tuple(int(v) for v in obj["c_sizes"]),
            )
        if kind == "scaled":
            return Scaled(
                rational_from_json(obj["factor"]), spec_from_json(obj["inner"])
            )
        if kind == "restricted":
            return Restricted(
                spec_from_json(obj["inner"]),
                CompactOpen(tuple(_cell_from_json(c) for c in obj["within"])),
            )
        if kind == "disjoint_union":
            tail = None
            if obj.get("tail") is not None:
                t = obj["tail"]
                tail = GeometricTail(
                    spec_from_json(t["base"]),
                    tuple(rational_from_json(f) for f in t["factors"]),
                    rational_from_json(t["ratio"]),
                )
            return DisjointUnion(
                tuple(spec_from_json(m) for m in obj["members"]), tail
            )
        if kind == "product_counting":
            w = obj["weights"]
            return ProductCounting(
                spec_from_json(obj["inner"]),
                ZWeights(
                    tuple(rational_from_json(c) for c in w["cycle"]),
                    tuple(
                        (int(i), rational_from_json(v))
                        for i, v in w.get("overrides", [])
                    ),
                ),
            )
    except SpecFormatError:
        raise
    except (KeyError, TypeError, ValueError) as err:
        raise SpecFormatError(f"malformed {kind} spec: {err}") from err
    except DomainError as err:
        raise SpecFormatError(f"invalid {kind} spec: {err}") from err
    raise SpecFormatError(f"unknown spec type {kind!r}")


def dumps(spec: MeasureSpec) -> str:
    doc = {"schema_version": SCHEMA_VERSION, "spec": spec_to_json(spec)}
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def loads(text: str) -> MeasureSpec:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as err:
        raise SpecFormatError(str(err)) from err
    if not isinstance(doc, dict):
        raise SpecFormatError("top level must be an object")
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise SpecFormatError(
            f"unsupported schema_version {doc.get('schema_version')!r}"
        )
    return spec_from_json(doc.get("spec"))


def save(spec: MeasureSpec, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(spec))


def load(path: str) -> MeasureSpec:
    with open(path, "r", encoding="utf-8") as fh:
        return loads(fh.read())
