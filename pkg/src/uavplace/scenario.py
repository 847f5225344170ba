"""Scenario model, flash-crowd generation and file formats.

Files:

* UE dataset: CSV with header ``id,x,y``, one UE per line.
* Scenario config: JSON object with keys ``ues`` (dataset path, relative to
  the config file), ``area`` ``{"width", "height"}``, and optional ``gbs``
  ``{"x", "y"}``, ``seed``, ``radio`` and ``env`` sections. Radio keys ending
  in ``_db``/``_dbm`` are logarithmic; everything else is SI.
* Result: JSON written by :func:`save_result`.
"""
from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Optional, Sequence, Tuple

import numpy as np

from .channel import EnvironmentParams, RadioConfig
from .geometry import Point2

# Hot-spot centres of the dense flash-crowd evaluation scenario (m).
FLASH_CROWD_HOTSPOTS = ((0.0, 400.0), (500.0, 500.0), (500.0, 100.0), (820.0, 200.0))
DEFAULT_AREA = (1200.0, 1200.0)


class ScenarioParseError(ValueError):
    pass


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


@dataclass(frozen=True, eq=False)
class Scenario:
    ue_positions: np.ndarray
    gbs_position: Point2
    radio: RadioConfig = field(default_factory=RadioConfig)
    env: EnvironmentParams = field(default_factory=EnvironmentParams)
    area: Tuple[float, float] = DEFAULT_AREA
    seed: int = 0

    def __post_init__(self):
        pts = np.array(self.ue_positions, dtype=float).reshape(-1, 2)
        if len(pts) == 0:
            raise ValueError("a scenario needs at least one UE")
        if not np.all(np.isfinite(pts)):
            raise ValueError("UE coordinates must be finite")
        w, h = self.area
        if np.any(pts < 0) or np.any(pts[:, 0] > w) or np.any(pts[:, 1] > h):
            raise ValueError("UE positions must lie inside the area")
        pts.setflags(write=False)
        object.__setattr__(self, "ue_positions", pts)
        object.__setattr__(self, "gbs_position", Point2(*map(float, self.gbs_position)))
        object.__setattr__(self, "area", (float(w), float(h)))

    @property
    def n(self) -> int:
        return len(self.ue_positions)

    def replace(self, **changes) -> "Scenario":
        return dataclasses.replace(self, **changes)

    def __eq__(self, other):
        if not isinstance(other, Scenario):
            return NotImplemented
        return (
            np.array_equal(self.ue_positions, other.ue_positions)
            and self.gbs_position == other.gbs_position
            and self.radio == other.radio
            and self.env == other.env
            and self.area == other.area
            and self.seed == other.seed
        )


def make_scenario(ue_positions, *, area=DEFAULT_AREA, gbs_position=None, seed=0,
                  radio: Optional[RadioConfig] = None, env: Optional[EnvironmentParams] = None) -> Scenario:
    if gbs_position is None:
        gbs_position = (area[0] / 2.0, area[1] / 2.0)
    return Scenario(
        ue_positions, Point2(*gbs_position), radio or RadioConfig(), env or EnvironmentParams(),
        tuple(area), seed,
    )


# --------------------------------------------------------------------------
# crowd generation

@dataclass(frozen=True)
class Hotspot:
    center: Point2
    std_dev: float
    count: int


@dataclass(frozen=True)
class CrowdSpec:
    hotspots: Tuple[Hotspot, ...] = ()
    background_count: int = 0

    def __post_init__(self):
        if self.background_count < 0 or any(h.count < 0 for h in self.hotspots):
            raise ValueError("UE counts must be non-negative")
        if any(h.std_dev < 0 for h in self.hotspots):
            raise ValueError("hot-spot spread must be non-negative")
        if self.total == 0:
            raise ValueError("crowd spec generates no UEs")

    @property
    def total(self) -> int:
        return self.background_count + sum(h.count for h in self.hotspots)


def flash_crowd(n: int, *, hotspot_share: float = 0.8, std_dev: float = 60.0) -> CrowdSpec:
    """``n`` UEs: ``hotspot_share`` split across the four flash-crowd centres, rest uniform."""
    per = int(round(n * hotspot_share / len(FLASH_CROWD_HOTSPOTS)))
    spots = tuple(Hotspot(Point2(*c), std_dev, per) for c in FLASH_CROWD_HOTSPOTS)
    return CrowdSpec(spots, n - per * len(spots))


def generate(spec: CrowdSpec, area=DEFAULT_AREA, seed: int = 0) -> np.ndarray:
    """Draw UE positions: truncated Gaussians per hot spot plus uniform background."""
    w, h = map(float, area)
    rng = np.random.default_rng(seed)
    chunks = []
    for spot in spec.hotspots:
        cx, cy = spot.center
        if not (0 <= cx <= w and 0 <= cy <= h):
            raise ValueError(f"hot-spot centre {spot.center} outside the area")
        got = np.empty((0, 2))
        while len(got) < spot.count:
            need = spot.count - len(got)
            draw = rng.normal((cx, cy), spot.std_dev, size=(2 * need + 8, 2))
            inside = (draw[:, 0] >= 0) & (draw[:, 0] <= w) & (draw[:, 1] >= 0) & (draw[:, 1] <= h)
            got = np.vstack([got, draw[inside][:need]])
        chunks.append(got)
    chunks.append(rng.uniform((0.0, 0.0), (w, h), size=(spec.background_count, 2)))
    return np.vstack(chunks)


def crowd_spec_from_dict(d: Mapping[str, Any]) -> Tuple[CrowdSpec, Tuple[float, float]]:
    try:
        spots = tuple(
            Hotspot(Point2(*map(float, s["center"])), float(s["std_dev"]), int(s["count"]))
            for s in d.get("hotspots", [])
        )
        area = _area_from(d.get("area", {"width": DEFAULT_AREA[0], "height": DEFAULT_AREA[1]}))
        return CrowdSpec(spots, int(d.get("background_count", 0))), area
    except KeyError as e:
        raise ScenarioParseError(f"crowd spec: missing field {e.args[0]!r}") from None
    except (TypeError, ValueError) as e:
        raise ScenarioParseError(f"crowd spec: {e}") from None


# --------------------------------------------------------------------------
# UE dataset

def write_ues(points, path) -> None:
    buf = io.StringIO()
    buf.write("id,x,y\n")
    for i, (x, y) in enumerate(np.asarray(points, dtype=float)):
        buf.write(f"{i},{_fmt(x)},{_fmt(y)}\n")
    Path(path).write_text(buf.getvalue())


def read_ues(path) -> np.ndarray:
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["id", "x", "y"]:
            raise ScenarioParseError(f"{path}:1: expected header 'id,x,y', got {header!r}")
        pts = []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 3:
                raise ScenarioParseError(f"{path}:{lineno}: expected 3 fields, got {len(row)}")
            try:
                x, y = float(row[1]), float(row[2])
            except ValueError:
                raise ScenarioParseError(f"{path}:{lineno}: non-numeric coordinate in {row!r}") from None
            if not (math.isfinite(x) and math.isfinite(y)):
                raise ScenarioParseError(f"{path}:{lineno}: non-finite coordinate")
            pts.append((x, y))
    if not pts:
        raise ScenarioParseError(f"{path}: no UEs")
    return np.array(pts)


# --------------------------------------------------------------------------
# scenario config

_RADIO_FIELDS = {f.name: f for f in dataclasses.fields(RadioConfig)}
_ENV_FIELDS = {f.name for f in dataclasses.fields(EnvironmentParams)}


def radio_from_dict(d: Mapping[str, Any], base: Optional[RadioConfig] = None) -> RadioConfig:
    unknown = set(d) - set(_RADIO_FIELDS)
    if unknown:
        raise ScenarioParseError(f"radio: unknown field(s) {sorted(unknown)}")
    vals = {}
    for key, raw in d.items():
        try:
            if key == "k_max":
                vals[key] = int(raw)
            elif key == "enforce_mmwave_threshold":
                vals[key] = raw if isinstance(raw, bool) else str(raw).lower() in ("1", "true", "yes")
            elif key == "gbs_capacity":
                vals[key] = None if raw is None else float(raw)
            else:
                vals[key] = float(raw)
        except (TypeError, ValueError):
            raise ScenarioParseError(f"radio.{key}: invalid value {raw!r}") from None
    try:
        return dataclasses.replace(base or RadioConfig(), **vals)
    except ValueError as e:
        raise ScenarioParseError(f"radio: {e}") from None


def env_from_dict(d: Mapping[str, Any], base: Optional[EnvironmentParams] = None) -> EnvironmentParams:
    unknown = set(d) - _ENV_FIELDS
    if unknown:
        raise ScenarioParseError(f"env: unknown field(s) {sorted(unknown)}")
    try:
        return dataclasses.replace(base or EnvironmentParams(), **{k: float(v) for k, v in d.items()})
    except (TypeError, ValueError) as e:
        raise ScenarioParseError(f"env: {e}") from None


def _area_from(d) -> Tuple[float, float]:
    try:
        return float(d["width"]), float(d["height"])
    except KeyError as e:
        raise ScenarioParseError(f"area: missing field {e.args[0]!r}") from None
    except (TypeError, ValueError):
        raise ScenarioParseError(f"area: invalid value {d!r}") from None


def scenario_to_dict(s: Scenario, ues_ref: str) -> dict:
    return {
        "ues": ues_ref,
        "area": {"width": s.area[0], "height": s.area[1]},
        "gbs": {"x": s.gbs_position.x, "y": s.gbs_position.y},
        "seed": s.seed,
        "radio": dataclasses.asdict(s.radio),
        "env": dataclasses.asdict(s.env),
    }


def save_scenario(s: Scenario, path, ues_path=None) -> None:
    """Write the config to ``path`` and the UE dataset beside it."""
    path = Path(path)
    ues_path = Path(ues_path) if ues_path else path.with_suffix(".ues.csv")
    write_ues(s.ue_positions, ues_path)
    try:
        ref = str(ues_path.relative_to(path.parent))
    except ValueError:
        ref = str(ues_path.resolve())
    path.write_text(json.dumps(scenario_to_dict(s, ref), indent=2) + "\n")


def load_scenario(path) -> Scenario:
    """Load a scenario config, or a bare UE dataset (``.csv``) with default settings."""
    path = Path(path)
    if path.suffix.lower() == ".csv":
        return make_scenario(read_ues(path))
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as e:
        raise ScenarioParseError(f"{path}:{e.lineno}: {e.msg}") from None
    if not isinstance(doc, dict):
        raise ScenarioParseError(f"{path}: top level must be an object")
    allowed = {"ues", "area", "gbs", "seed", "radio", "env"}
    unknown = set(doc) - allowed
    if unknown:
        raise ScenarioParseError(f"{path}: unknown field(s) {sorted(unknown)}")
    for key in ("ues", "area"):
        if key not in doc:
            raise ScenarioParseError(f"{path}: missing required field {key!r}")
    ues_path = Path(doc["ues"])
    if not ues_path.is_absolute():
        ues_path = path.parent / ues_path
    pts = read_ues(ues_path)
    area = _area_from(doc["area"])
    gbs = doc.get("gbs")
    if gbs is not None:
        try:
            gbs = (float(gbs["x"]), float(gbs["y"]))
        except KeyError as e:
            raise ScenarioParseError(f"{path}: gbs: missing field {e.args[0]!r}") from None
    try:
        seed = int(doc.get("seed", 0))
    except (TypeError, ValueError):
        raise ScenarioParseError(f"{path}: seed must be an integer") from None
    radio = radio_from_dict(doc.get("radio", {}))
    env = env_from_dict(doc.get("env", {}))
    try:
        return make_scenario(pts, area=area, gbs_position=gbs, seed=seed, radio=radio, env=env)
    except ValueError as e:
        raise ScenarioParseError(f"{path}: {e}") from None


def apply_overrides(s: Scenario, overrides: Sequence[str]) -> Scenario:
    """Apply ``section.key=value`` overrides (sections: radio, env, gbs, seed)."""
    radio_vals, env_vals = {}, {}
    gbs = list(s.gbs_position)
    seed = s.seed
    for item in overrides:
        if "=" not in item:
            raise ScenarioParseError(f"override {item!r}: expected key=value")
        key, value = (t.strip() for t in item.split("=", 1))
        section, _, name = key.partition(".")
        if section == "radio" and name:
            radio_vals[name] = value
        elif section == "env" and name:
            env_vals[name] = value
        elif section == "gbs" and name in ("x", "y"):
            gbs["xy".index(name)] = float(value)
        elif key == "seed":
            seed = int(value)
        elif not name and section in _RADIO_FIELDS:
            radio_vals[section] = value
        else:
            raise ScenarioParseError(f"override {item!r}: unknown key")
    if radio_vals.get("gbs_capacity", "").lower() in ("none", "null"):
        radio_vals["gbs_capacity"] = None
    return s.replace(
        radio=radio_from_dict(radio_vals, s.radio),
        env=env_from_dict(env_vals, s.env),
        gbs_position=Point2(*gbs),
        seed=seed,
    )
