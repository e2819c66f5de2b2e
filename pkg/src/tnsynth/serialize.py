"""JSON and CSV output.

Floats are written with 17 significant digits so every 64-bit value round
trips exactly. Complex arrays are stored as ``{"shape": [...], "interleaved":
[re0, im0, re1, im1, ...]}`` in last-axis-fastest order. Output depends only
on the data (no timestamps, insertion-ordered keys), so identical runs give
identical bytes.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
from pathlib import Path

import numpy as np

from tnsynth.errors import ValidationError
from tnsynth.evolution import ProductOperatorSum
from tnsynth.measurement import SampleSet, Spectrum
from tnsynth.states import DenseState, MPSForm, PartLabel


def fmt_float(x: float) -> str:
    x = float(x)
    if not math.isfinite(x):
        raise ValidationError(f"cannot serialize non-finite value {x}")
    s = format(x, ".17g")
    if "." not in s and "e" not in s:
        s += ".0"
    return s


def pack_complex(a: np.ndarray) -> dict:
    a = np.asarray(a, dtype=np.complex128)
    flat = np.empty(2 * a.size)
    flat[0::2], flat[1::2] = a.real.reshape(-1), a.imag.reshape(-1)
    return {"shape": list(a.shape), "interleaved": flat}


def unpack_complex(d: dict) -> np.ndarray:
    flat = np.asarray(d["interleaved"], dtype=float)
    shape = tuple(d["shape"])
    if flat.size != 2 * int(np.prod(shape, dtype=np.int64)):
        raise ValidationError(f"interleaved array of length {flat.size} does not fit shape {shape}")
    return (flat[0::2] + 1j * flat[1::2]).reshape(shape)


def to_jsonable(obj):
    """Plain Python structure with numpy data and dataclasses unpacked."""
    if isinstance(obj, DenseState):
        return to_jsonable(state_to_dict(obj))
    if isinstance(obj, MPSForm):
        return to_jsonable(mps_to_dict(obj))
    if isinstance(obj, ProductOperatorSum):
        return to_jsonable(ops_to_dict(obj))
    if isinstance(obj, Spectrum):
        return {
            "frequencies": obj.frequencies,
            "magnitudes": obj.magnitudes,
            "phases": obj.phases,
        }
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj) if not f.name.startswith("_")}
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            return to_jsonable(pack_complex(obj))
        return obj.tolist()
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _encode(obj, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None or isinstance(obj, bool):
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return fmt_float(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_encode(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, list):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in obj):
            return "[" + ", ".join(_encode(v, indent, level) for v in obj) + "]"
        items = [pad + _encode(v, indent, level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise ValidationError(f"cannot serialize {type(obj).__name__}")


def dumps(obj, indent: int = 2) -> str:
    return _encode(to_jsonable(obj), indent, 0) + "\n"


def write_json(path: str | Path, obj) -> Path:
    path = Path(path)
    path.write_text(dumps(obj), encoding="utf-8")
    return path


def _parts_to_list(parts) -> list[dict]:
    return [{"name": p.name, "dim": p.dim} for p in parts]


def _parts_from_list(items) -> tuple[PartLabel, ...]:
    return tuple(PartLabel(d["name"], int(d["dim"])) for d in items)


def state_to_dict(state: DenseState) -> dict:
    return {
        "type": "DenseState",
        "parts": _parts_to_list(state.parts),
        "normalized": state.normalized,
        "amplitudes": pack_complex(state.amplitudes)["interleaved"],
    }


def state_from_dict(d: dict) -> DenseState:
    if d.get("type") != "DenseState":
        raise ValidationError("not a DenseState document")
    parts = _parts_from_list(d["parts"])
    amps = unpack_complex({"shape": [p.dim for p in parts], "interleaved": d["amplitudes"]})
    return DenseState(parts, amps, normalized=bool(d.get("normalized", True)))


def mps_to_dict(mps: MPSForm) -> dict:
    return {
        "type": "MPSForm",
        "parts": _parts_to_list(mps.parts),
        "sites": [pack_complex(s) for s in mps.sites],
        "bond_weights": [np.asarray(b, dtype=float) for b in mps.bond_weights],
        "truncation_error": float(mps.truncation_error),
    }


def mps_from_dict(d: dict) -> MPSForm:
    if d.get("type") != "MPSForm":
        raise ValidationError("not an MPSForm document")
    return MPSForm(
        _parts_from_list(d["parts"]),
        tuple(unpack_complex(s) for s in d["sites"]),
        tuple(np.asarray(b, dtype=float) for b in d["bond_weights"]),
        truncation_error=float(d.get("truncation_error", 0.0)),
    )


def ops_to_dict(ops: ProductOperatorSum) -> dict:
    return {
        "type": "ProductOperatorSum",
        "parts": _parts_to_list(ops.parts),
        "unitary_total": ops.unitary_total,
        "terms": [[pack_complex(f) for f in term] for term in ops.terms],
    }


def ops_from_dict(d: dict) -> ProductOperatorSum:
    if d.get("type") != "ProductOperatorSum":
        raise ValidationError("not a ProductOperatorSum document")
    terms = tuple(tuple(unpack_complex(f) for f in term) for term in d["terms"])
    return ProductOperatorSum(_parts_from_list(d["parts"]), terms, unitary_total=bool(d["unitary_total"]))


def loads(text: str):
    """Parse a document; typed documents come back as their objects."""
    d = json.loads(text)
    kind = d.get("type") if isinstance(d, dict) else None
    if kind == "DenseState":
        return state_from_dict(d)
    if kind == "MPSForm":
        return mps_from_dict(d)
    if kind == "ProductOperatorSum":
        return ops_from_dict(d)
    return d


# CSV


def _cell(v) -> str:
    if isinstance(v, (float, np.floating)):
        return fmt_float(v)
    return str(v)


def csv_text(header: list[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_cell(v) for v in row])
    return buf.getvalue()


def samples_csv(s: SampleSet) -> str:
    return csv_text(["outcome", "count"], sorted(s.counts.items()))


def spectrum_csv(s: Spectrum) -> str:
    return csv_text(
        ["frequency", "magnitude", "phase"],
        zip((int(f) for f in s.frequencies), s.magnitudes, s.phases),
    )


def distribution_csv(values, label: str = "outcome") -> str:
    return csv_text([label, "probability"], ((i, float(p)) for i, p in enumerate(values)))


def write_text(path: str | Path, text: str) -> Path:
    path = Path(path)
    path.write_text(text, encoding="utf-8")
    return path
