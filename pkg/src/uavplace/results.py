"""Result files: a JSON document with the fleet, per-UE table, constraints and trace.

Floats are written with Python's shortest round-trip repr, so a result
reloads bit-for-bit. Key order is fixed and no timestamps are stored, which
keeps files byte-identical across runs with the same inputs.
"""
from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .evaluation import ConstraintRecord, ConstraintReport
from .geometry import Point2
from .placement import Association, PlacementResult, TraceEntry, UavPlacement

FORMAT_VERSION = 1


class ResultParseError(ValueError):
    pass


def _num(x: float):
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


def _unnum(x) -> float:
    return float(x)  # float() accepts "inf"/"-inf"


def result_to_dict(result: PlacementResult, ue_positions) -> dict:
    a = result.association
    ue = np.asarray(ue_positions, dtype=float)
    if len(ue) != len(a.serving):
        raise ValueError("UE positions and association differ in length")
    return {
        "format": FORMAT_VERSION,
        "status": result.status,
        "k": result.k,
        "n_g": result.n_g,
        "sumrate": _num(result.sumrate),
        "valid": result.valid,
        "fleet": [
            {
                "x": u.location[0], "y": u.location[1], "altitude": u.altitude,
                "radius": u.radius, "backhaul_alloc": u.backhaul_alloc,
            }
            for u in result.fleet
        ],
        "ues": {
            "columns": ["x", "y", "serving", "sinr", "bandwidth", "rate", "power"],
            "rows": [
                [float(ue[i, 0]), float(ue[i, 1]), int(a.serving[i]), _num(a.sinr[i]),
                 float(a.bandwidth[i]), float(a.rate[i]), float(a.power[i])]
                for i in range(len(ue))
            ],
        },
        "constraints": [
            {"id": r.id, "satisfied": r.satisfied, "margin": _num(r.margin), "detail": r.detail}
            for r in result.constraint_report.records
        ],
        "trace": [
            {"k": t.k, "inner_iterations": t.inner_iterations, "unserved": t.unserved,
             "sumrate": _num(t.sumrate), "constraints_ok": t.constraints_ok, "note": t.note}
            for t in result.trace
        ],
    }


def dumps_result(result: PlacementResult, ue_positions) -> str:
    return json.dumps(result_to_dict(result, ue_positions), indent=1, allow_nan=False) + "\n"


def save_result(result: PlacementResult, path, ue_positions) -> None:
    Path(path).write_text(dumps_result(result, ue_positions))


def load_result(path):
    """Return ``(PlacementResult, ue_positions)`` from a result file."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as e:
        raise ResultParseError(f"{path}:{e.lineno}: {e.msg}") from None
    except OSError as e:
        raise ResultParseError(f"{path}: {e.strerror}") from None
    if not isinstance(doc, dict):
        raise ResultParseError(f"{path}: top level must be an object")
    for key in ("fleet", "ues", "constraints", "sumrate", "status"):
        if key not in doc:
            raise ResultParseError(f"{path}: missing required field {key!r}")
    try:
        fleet = tuple(
            UavPlacement(Point2(float(u["x"]), float(u["y"])), float(u["altitude"]),
                         float(u["radius"]), float(u["backhaul_alloc"]))
            for u in doc["fleet"]
        )
        rows = doc["ues"]["rows"]
        cols = doc["ues"]["columns"]
        table = {c: [r[n] for r in rows] for n, c in enumerate(cols)}
        assoc = Association(
            np.array(table["serving"], dtype=int),
            np.array([_unnum(v) for v in table["sinr"]]),
            np.array(table["bandwidth"], dtype=float),
            np.array(table["rate"], dtype=float),
            np.array(table["power"], dtype=float),
        )
        ue = np.array([table["x"], table["y"]], dtype=float).T.reshape(-1, 2)
        report = ConstraintReport(tuple(
            ConstraintRecord(c["id"], bool(c["satisfied"]), _unnum(c["margin"]), c["detail"])
            for c in doc["constraints"]
        ))
        trace = tuple(
            TraceEntry(int(t["k"]), int(t["inner_iterations"]), int(t["unserved"]),
                       _unnum(t["sumrate"]), bool(t["constraints_ok"]), t.get("note", ""))
            for t in doc.get("trace", [])
        )
    except KeyError as e:
        raise ResultParseError(f"{path}: missing field {e.args[0]!r}") from None
    except (TypeError, ValueError, IndexError) as e:
        raise ResultParseError(f"{path}: malformed value ({e})") from None
    result = PlacementResult(fleet, assoc, _unnum(doc["sumrate"]), report, trace,
                             int(doc.get("n_g", 0)), str(doc["status"]))
    return result, ue
