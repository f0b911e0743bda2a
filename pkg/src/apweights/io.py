"""WGT1 text files, their JSON mirror, and JSON forms of reports and sparse families."""
from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Union

import numpy as np

from .czsparse import SparseFamily
from .errors import FormatError
from .grid import Cube, GridSpec, StepFunction

__all__ = [
    "format_wgt1", "parse_wgt1", "read_wgt1", "write_wgt1", "to_json_text", "from_json_text",
    "convert_text", "read_any", "sparse_to_json", "sparse_from_json", "dumps",
    "write_factorization",
]

PathLike = Union[str, Path]
MAGIC = "WGT1"


def dumps(obj) -> str:
    """Compact, key-sorted JSON; floats keep their shortest round-trip repr."""
    return json.dumps(_plain(obj), sort_keys=True, separators=(",", ":"), allow_nan=True)


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _check_values(vals, g: GridSpec) -> np.ndarray:
    a = np.asarray(vals, dtype=float).ravel()
    if a.size != g.size:
        raise FormatError(f"expected {g.size} values for dim={g.dim} depth={g.depth}, got {a.size}")
    bad = np.flatnonzero(~np.isfinite(a))
    if bad.size:
        raise FormatError(f"value {bad[0] + 1} is not a finite number ({a[bad[0]]!r})")
    neg = np.flatnonzero(a < 0)
    if neg.size:
        raise FormatError(f"value {neg[0] + 1} is negative ({a[neg[0]]!r})")
    return a.reshape(g.shape)


def format_wgt1(f: StepFunction) -> str:
    g = f.grid
    lines = [MAGIC, f"dim={g.dim} depth={g.depth}"]
    lines += [repr(float(v)) for v in f.values.ravel()]
    return "\n".join(lines) + "\n"


def _parse_header(line: str) -> GridSpec:
    try:
        fields = dict(tok.split("=", 1) for tok in line.split())
        g = GridSpec(int(fields["dim"]), int(fields["depth"]))
    except (ValueError, KeyError) as e:
        raise FormatError(f"bad header line {line!r}; expected 'dim=<d> depth=<L>'") from e
    if set(fields) != {"dim", "depth"}:
        raise FormatError(f"bad header line {line!r}; expected 'dim=<d> depth=<L>'")
    return g


def parse_wgt1(text: str) -> StepFunction:
    lines = text.splitlines()
    if not lines or lines[0].strip() != MAGIC:
        raise FormatError(f"missing {MAGIC} magic line")
    if len(lines) < 2:
        raise FormatError("missing 'dim=<d> depth=<L>' header line")
    g = _parse_header(lines[1])
    body = lines[2:]
    while body and not body[-1].strip():
        body.pop()
    if len(body) != g.size:
        raise FormatError(f"expected {g.size} value lines for dim={g.dim} depth={g.depth}, got {len(body)}")
    vals = []
    for n, s in enumerate(body, start=3):
        try:
            v = float(s)
        except ValueError:
            raise FormatError(f"line {n}: not a number: {s.strip()!r}") from None
        if math.isnan(v) or math.isinf(v):
            raise FormatError(f"line {n}: not a finite number: {s.strip()!r}")
        if v < 0:
            raise FormatError(f"line {n}: negative value {s.strip()}")
        vals.append(v)
    return StepFunction(np.array(vals).reshape(g.shape), g)


def read_wgt1(path: PathLike) -> StepFunction:
    return parse_wgt1(Path(path).read_text())


def write_wgt1(f: StepFunction, path: PathLike) -> None:
    Path(path).write_text(format_wgt1(f))


def to_json_text(f: StepFunction) -> str:
    g = f.grid
    return dumps({"format": MAGIC, "dim": g.dim, "depth": g.depth,
                  "values": [float(v) for v in f.values.ravel()]}) + "\n"


def from_json_text(text: str) -> StepFunction:
    try:
        d = json.loads(text)
    except json.JSONDecodeError as e:
        raise FormatError(f"invalid JSON: {e}") from None
    if not isinstance(d, dict) or d.get("format") != MAGIC:
        raise FormatError(f"JSON weight must be an object with \"format\": \"{MAGIC}\"")
    try:
        g = GridSpec(int(d["dim"]), int(d["depth"]))
        vals = d["values"]
    except (KeyError, TypeError, ValueError) as e:
        raise FormatError(f"JSON weight missing or bad field: {e}") from None
    if not isinstance(vals, list) or not all(isinstance(v, (int, float)) and not isinstance(v, bool)
                                             for v in vals):
        raise FormatError("\"values\" must be a list of numbers")
    return StepFunction(_check_values(vals, g), g)


def _looks_json(text: str) -> bool:
    return text.lstrip().startswith("{")


def read_any(path: PathLike) -> StepFunction:
    """Read a step function from WGT1 or its JSON mirror, sniffing the format."""
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise FormatError(f"cannot read {path}: {e.strerror}") from None
    return from_json_text(text) if _looks_json(text) else parse_wgt1(text)


def convert_text(text: str, direction: str = "auto") -> str:
    """WGT1 -> JSON ('to-json'), JSON -> WGT1 ('to-wgt1'), or by sniffing ('auto')."""
    if direction == "auto":
        direction = "to-wgt1" if _looks_json(text) else "to-json"
    if direction == "to-json":
        return to_json_text(parse_wgt1(text))
    if direction == "to-wgt1":
        return format_wgt1(from_json_text(text))
    raise FormatError(f"unknown direction {direction!r}")


def sparse_to_json(S: SparseFamily) -> str:
    g = S.grid
    d = {"grid": {"dim": g.dim, "depth": g.depth}, "shift": S.shift, "eta": S.eta,
         "cubes": [Q.to_dict(g) for Q in S.cubes],
         "esets": [sorted(int(i) for i in E) for E in S.esets],
         "dropped": [Q.to_dict(g) for Q in S.dropped]}
    return dumps(d) + "\n"


def sparse_from_json(text: str) -> SparseFamily:
    try:
        d = json.loads(text)
        g = GridSpec(int(d["grid"]["dim"]), int(d["grid"]["depth"]))
        cubes = [Cube.from_dict(c, g) for c in d["cubes"]]
        esets = [np.asarray(E, dtype=np.int64) for E in d["esets"]]
        dropped = [Cube.from_dict(c, g) for c in d.get("dropped", [])]
        shift = d["shift"]
        shift = tuple(shift) if isinstance(shift, list) else shift
        S = SparseFamily(g, cubes, esets, float(d["eta"]), shift, dropped)
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
        raise FormatError(f"bad sparse family JSON: {e}") from None
    if len(cubes) != len(esets):
        raise FormatError(f"{len(cubes)} cubes but {len(esets)} E-sets")
    return S


def write_factorization(fac, w: StepFunction, outdir: PathLike, h_spec: str = "default") -> dict:
    """Write w, w1, w2 as WGT1 files plus manifest.json; returns the manifest."""
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    files = {"w": "w.wgt", "w1": "w1.wgt", "w2": "w2.wgt"}
    write_wgt1(w, out / files["w"])
    write_wgt1(fac.w1, out / files["w1"])
    write_wgt1(fac.w2, out / files["w2"])
    manifest = {"p": fac.p, "h": h_spec, "files": files,
                "bounds": {"[w1]_A1": fac.bound_w1, "[w2]_A1": fac.bound_w2},
                "report": fac.to_dict()}
    (out / "manifest.json").write_text(dumps(manifest) + "\n")
    return manifest
