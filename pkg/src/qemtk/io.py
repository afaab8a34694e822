"""JSON formats for channels, states, circuits and reports.

Matrix entries are written as ``[re, im]`` pairs. On input an entry may also
be a plain number or an exact rational string such as ``"-5/16"``, optionally
inside a pair (``["1/4", "-1/2"]``). Floats are written with 17 significant
digits so values survive a round trip bit for bit.
"""

from __future__ import annotations

import json
import math
from fractions import Fraction
from pathlib import Path

import numpy as np

from .circuits import CircuitLayer, LayeredCircuit
from .errors import FormatError
from .matrep import ChannelRep

# ---------------------------------------------------------------------------
# dumping
# ---------------------------------------------------------------------------


def _fmt_float(x: float) -> str:
    if math.isnan(x) or math.isinf(x):
        raise FormatError(f"cannot serialize non-finite value {x}")
    s = "%.17g" % x
    if "e" not in s and "." not in s:
        s += ".0"
    return s


def _dump(obj, indent: int | None, level: int) -> str:
    pad = "" if indent is None else "\n" + " " * (indent * (level + 1))
    end = "" if indent is None else "\n" + " " * (indent * level)
    sep = ", " if indent is None else ","
    if isinstance(obj, (bool, np.bool_)) or obj is None:
        return json.dumps(bool(obj) if obj is not None else None)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if isinstance(obj, (complex, np.complexfloating)):
        return _dump([obj.real, obj.imag], None, 0)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        return _dump(obj.tolist(), indent, level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_dump(v, indent, level + 1)}" for k, v in obj.items()]
        return "{" + sep.join(items) + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        # keep numeric rows on one line
        if all(not isinstance(x, (dict, list, tuple, np.ndarray)) for x in obj) or _is_pair_row(obj):
            return "[" + ", ".join(_dump(x, None, 0) for x in obj) + "]"
        return "[" + sep.join(f"{pad}{_dump(x, indent, level + 1)}" for x in obj) + end + "]"
    raise FormatError(f"cannot serialize object of type {type(obj).__name__}")


def _is_pair_row(obj) -> bool:
    return all(isinstance(x, (list, tuple)) and len(x) == 2 and not isinstance(x[0], (list, tuple)) for x in obj)


def dumps(obj, indent: int | None = 2) -> str:
    return _dump(obj, indent, 0) + ("\n" if indent is not None else "")


def write_json(obj, path) -> None:
    Path(path).write_text(dumps(obj))


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------


def parse_scalar(x, where: str = "") -> complex:
    if isinstance(x, bool):
        raise FormatError(f"{where}: booleans are not matrix entries")
    if isinstance(x, (int, float)):
        return complex(x)
    if isinstance(x, str):
        try:
            return complex(float(Fraction(x.strip())))
        except (ValueError, ZeroDivisionError) as exc:
            raise FormatError(f"{where}: cannot parse {x!r} as a rational number") from exc
    if isinstance(x, (list, tuple)) and len(x) == 2:
        return complex(parse_scalar(x[0], where).real, parse_scalar(x[1], where).real)
    raise FormatError(f"{where}: unsupported matrix entry {x!r}")


def parse_matrix(rows, where: str = "matrix") -> np.ndarray:
    if not isinstance(rows, list) or not rows or not all(isinstance(r, list) for r in rows):
        raise FormatError(f"{where}: expected a non-empty list of rows")
    width = len(rows[0])
    out = np.empty((len(rows), width), dtype=complex)
    for i, row in enumerate(rows):
        if len(row) != width:
            raise FormatError(f"{where}: row {i} has {len(row)} entries, expected {width}")
        for j, x in enumerate(row):
            out[i, j] = parse_scalar(x, f"{where}[{i}][{j}]")
    return out


def encode_matrix(A) -> list:
    A = np.asarray(A, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in A]


def _load(source, base: Path | None, what: str):
    """Inline object, or a path (relative to ``base``) to a JSON file."""
    if isinstance(source, dict):
        return source, base
    if isinstance(source, (str, Path)):
        p = Path(source)
        if base is not None and not p.is_absolute():
            p = base / p
        try:
            text = p.read_text()
        except OSError as exc:
            raise FormatError(f"{what}: cannot read {p}: {exc.strerror}") from exc
        try:
            return json.loads(text), p.parent
        except json.JSONDecodeError as exc:
            raise FormatError(f"{p}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    raise FormatError(f"{what}: expected an object or a file path")


def channel_to_json(ch: ChannelRep, rep: str | None = None) -> dict:
    rep = rep or ch.rep
    out = {"dim_in": ch.dim_in, "dim_out": ch.dim_out, "rep": rep}
    if rep == "kraus":
        out["data"] = [encode_matrix(K) for K in ch.kraus]
    else:
        out["data"] = encode_matrix(getattr(ch, rep))
    return out


def channel_from_json(source, base: Path | None = None) -> ChannelRep:
    obj, _ = _load(source, base, "channel")
    try:
        rep, data = obj["rep"], obj["data"]
    except KeyError as exc:
        raise FormatError(f"channel: missing field {exc.args[0]!r}") from exc
    di, do = obj.get("dim_in"), obj.get("dim_out")
    try:
        if rep == "kraus":
            ops = [parse_matrix(K, f"kraus[{i}]") for i, K in enumerate(data)]
            return ChannelRep.from_kraus(ops)
        if rep == "choi":
            return ChannelRep.from_choi(parse_matrix(data, "choi"), di, do)
        if rep == "natural":
            return ChannelRep.from_natural(parse_matrix(data, "natural"), di, do)
    except FormatError:
        raise
    except ValueError as exc:
        raise FormatError(f"channel: {exc}") from exc
    raise FormatError(f"channel: unknown rep {rep!r}")


def state_to_json(rho) -> dict:
    rho = np.asarray(rho)
    return {"dim": rho.shape[0], "data": encode_matrix(rho)}


def state_from_json(source, base: Path | None = None) -> np.ndarray:
    obj, _ = _load(source, base, "state")
    if "data" not in obj:
        raise FormatError("state: missing field 'data'")
    rho = parse_matrix(obj["data"], "state")
    if rho.shape[0] != rho.shape[1] or ("dim" in obj and obj["dim"] != rho.shape[0]):
        raise FormatError(f"state: shape {rho.shape} does not match dim {obj.get('dim')}")
    return rho


def circuit_from_json(source, base: Path | None = None) -> LayeredCircuit:
    obj, base = _load(source, base, "circuit")
    if "input" not in obj or "layers" not in obj:
        raise FormatError("circuit: needs 'input' and 'layers'")
    rho = state_from_json(obj["input"], base)
    layers = []
    for i, layer in enumerate(obj["layers"]):
        try:
            maps = [channel_from_json(layer[k], base) for k in ("ideal", "true_noise")]
            est = channel_from_json(layer.get("estimated_noise", layer["true_noise"]), base)
        except KeyError as exc:
            raise FormatError(f"circuit layer {i}: missing {exc.args[0]!r}") from exc
        try:
            layers.append(CircuitLayer(maps[0], maps[1], est))
        except ValueError as exc:
            raise FormatError(f"circuit layer {i}: {exc}") from exc
    try:
        return LayeredCircuit(tuple(layers), rho)
    except ValueError as exc:
        raise FormatError(f"circuit: {exc}") from exc


def circuit_to_json(c: LayeredCircuit) -> dict:
    return {
        "input": state_to_json(c.input),
        "layers": [
            {
                "ideal": channel_to_json(layer.ideal, "natural"),
                "true_noise": channel_to_json(layer.true_noise, "natural"),
                "estimated_noise": channel_to_json(layer.estimated_noise, "natural"),
            }
            for layer in c.layers
        ],
    }


def observables_from_json(source, base: Path | None = None) -> list[np.ndarray]:
    if isinstance(source, (str, Path)):
        obj, _ = _load(source, base, "observables")
    else:
        obj = source
    items = obj.get("observables") if isinstance(obj, dict) else obj
    if not isinstance(items, list):
        raise FormatError("observables: expected a list of matrices")
    return [parse_matrix(A, f"observables[{i}]") for i, A in enumerate(items)]
