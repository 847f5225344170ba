"""Command-line front end: ``generate``, ``place``, ``sweep``, ``export``.

Exit codes: 0 success, 2 input error, 3 no valid placement (best attempt
still written).
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import List, Optional, Sequence

from .placement import FleetExhaustedError, gbs_only, place
from .results import ResultParseError, load_result, save_result
from .scenario import (
    ScenarioParseError,
    apply_overrides,
    crowd_spec_from_dict,
    generate,
    load_scenario,
    write_ues,
)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_INFEASIBLE = 3

DELIMITERS = {"csv": ",", "tsv": "\t"}

log = logging.getLogger("uavplace")


def _fail(msg: str) -> int:
    print(f"error: {msg}", file=sys.stderr)
    return EXIT_INPUT


def _load(path, overrides, seed):
    s = load_scenario(path)
    if overrides:
        s = apply_overrides(s, overrides)
    if seed is not None:
        s = s.replace(seed=seed)
    return s


# --------------------------------------------------------------------------
# generate

def cmd_generate(spec_file, out, seed: int = 0) -> int:
    try:
        doc = json.loads(Path(spec_file).read_text())
        if not isinstance(doc, dict):
            raise ScenarioParseError("crowd spec must be an object")
        spec, area = crowd_spec_from_dict(doc)
        pts = generate(spec, area, seed)
    except OSError as e:
        return _fail(f"{spec_file}: {e.strerror}")
    except json.JSONDecodeError as e:
        return _fail(f"{spec_file}:{e.lineno}: {e.msg}")
    except ValueError as e:
        return _fail(str(e))
    write_ues(pts, out)
    return EXIT_OK


# --------------------------------------------------------------------------
# place

def cmd_place(scenario_file, out, seed: Optional[int] = None, overrides: Sequence[str] = ()) -> int:
    try:
        scenario = _load(scenario_file, overrides, seed)
    except OSError as e:
        return _fail(f"{scenario_file}: {e.strerror}")
    except ValueError as e:
        return _fail(str(e))
    t0 = time.perf_counter()
    code = EXIT_OK
    try:
        result = place(scenario)
    except FleetExhaustedError as e:
        result = e.result
        code = EXIT_INFEASIBLE
        print(f"warning: {e}", file=sys.stderr)
    wall = time.perf_counter() - t0
    save_result(result, out, scenario.ue_positions)
    print(f"{result.k}\t{result.sumrate:.6g}\t{result.association.n_unserved}\t{wall:.3f}")
    return code


# --------------------------------------------------------------------------
# sweep

SWEEP_COLUMNS = ("scenario", "N", "sumrate_with_uav", "sumrate_without_uav", "k", "status", "error")


def _scenario_files(directory: Path) -> List[Path]:
    configs = sorted(directory.glob("*.json"))
    datasets = sorted(p for p in directory.glob("*.csv") if not p.name.endswith(".ues.csv"))
    return sorted(configs + datasets)


def _sweep_one(path: Path, result_dir: Path, seed, overrides) -> dict:
    row = dict.fromkeys(SWEEP_COLUMNS, "")
    row["scenario"] = path.name
    try:
        scenario = _load(path, overrides, seed)
    except (OSError, ValueError) as e:
        row["status"] = "error"
        row["error"] = str(e).replace("\t", " ").replace("\n", " ")
        return row
    try:
        result = place(scenario)
        row["status"] = "ok"
    except FleetExhaustedError as e:
        result = e.result
        row["status"] = "fleet-exhausted"
    save_result(result, result_dir / f"{path.stem}.result.json", scenario.ue_positions)
    row.update(N=scenario.n, sumrate_with_uav=f"{result.sumrate:.17g}",
               sumrate_without_uav=f"{gbs_only(scenario).sumrate:.17g}", k=result.k)
    return row


def cmd_sweep(scenario_dir, out, seed: Optional[int] = None, overrides: Sequence[str] = (),
              jobs: int = 1) -> int:
    directory = Path(scenario_dir)
    if not directory.is_dir():
        return _fail(f"{directory}: not a directory")
    files = _scenario_files(directory)
    if not files:
        return _fail(f"{directory}: no scenario files")
    out = Path(out)
    result_dir = out.parent / f"{out.stem}_results"
    result_dir.mkdir(parents=True, exist_ok=True)
    args = [(p, result_dir, seed, tuple(overrides)) for p in files]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_sweep_one, *zip(*args)))
    else:
        rows = [_sweep_one(*a) for a in args]
    with out.open("w", newline="") as fh:
        w = csv.DictWriter(fh, SWEEP_COLUMNS, delimiter="\t", lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    for r in rows:
        if r["status"] == "error":
            print(f"warning: {r['scenario']}: {r['error']}", file=sys.stderr)
    return EXIT_OK if any(r["status"] != "error" for r in rows) else EXIT_INPUT


# --------------------------------------------------------------------------
# export

def circle_polyline(x: float, y: float, radius: float, resolution: int):
    """``resolution`` points evenly spaced on the circle, starting at angle 0."""
    return [
        (x + radius * math.cos(2 * math.pi * t / resolution),
         y + radius * math.sin(2 * math.pi * t / resolution))
        for t in range(resolution)
    ]


def cmd_export(result_file, fmt: str, out, resolution: int = 64) -> int:
    if fmt not in DELIMITERS:
        return _fail(f"unknown format {fmt!r}; choose from {sorted(DELIMITERS)}")
    if resolution < 3:
        return _fail("circle resolution must be at least 3")
    try:
        result, ue = load_result(result_file)
    except ResultParseError as e:
        return _fail(str(e))
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    delim = DELIMITERS[fmt]
    ext = fmt

    def write(name, header, rows):
        with (out / f"{name}.{ext}").open("w", newline="") as fh:
            w = csv.writer(fh, delimiter=delim, lineterminator="\n")
            w.writerow(header)
            w.writerows(rows)

    a = result.association
    write("ues", ("ue", "x", "y", "serving", "rate"),
          ((i, repr(float(ue[i, 0])), repr(float(ue[i, 1])), int(a.serving[i]), repr(float(a.rate[i])))
           for i in range(len(ue))))
    write("uavs", ("uav", "label", "x", "y", "altitude", "radius"),
          ((j, j + 1, repr(u.location[0]), repr(u.location[1]), repr(u.altitude), repr(u.radius))
           for j, u in enumerate(result.fleet)))
    write("circles", ("uav", "vertex", "x", "y"),
          ((j, t, repr(px), repr(py))
           for j, u in enumerate(result.fleet)
           for t, (px, py) in enumerate(circle_polyline(u.location[0], u.location[1], u.radius, resolution))))
    return EXIT_OK


# --------------------------------------------------------------------------
# entry point

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="uavplace", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true", help="debug logging to stderr")
    sub = p.add_subparsers(dest="verb", required=True)

    g = sub.add_parser("generate", help="draw a UE dataset from a crowd spec")
    g.add_argument("spec", help="crowd spec (JSON)")
    g.add_argument("--out", required=True, help="UE dataset to write (id,x,y)")
    g.add_argument("--seed", type=int, default=0)

    pl = sub.add_parser("place", help="place a UAV fleet for one scenario")
    pl.add_argument("scenario", help="scenario config (JSON) or bare UE dataset (.csv)")
    pl.add_argument("--out", required=True, help="result file to write")
    pl.add_argument("--seed", type=int, default=None, help="overrides the scenario seed")
    pl.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                    help="override a setting, e.g. radio.c_min=2e6 (repeatable)")

    sw = sub.add_parser("sweep", help="place and compare with the GBS-only baseline per scenario")
    sw.add_argument("directory", help="directory of scenario files")
    sw.add_argument("--out", required=True, help="summary table (TSV)")
    sw.add_argument("--seed", type=int, default=None)
    sw.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE")
    sw.add_argument("--jobs", type=int, default=1, help="parallel worker processes")

    ex = sub.add_parser("export", help="plot-ready tables from a result file")
    ex.add_argument("result", help="result file from 'place'")
    ex.add_argument("--format", default="csv", help="csv or tsv")
    ex.add_argument("--out", required=True, help="output directory")
    ex.add_argument("--resolution", type=int, default=64, help="vertices per coverage circle")
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.verb == "generate":
        return cmd_generate(args.spec, args.out, args.seed)
    if args.verb == "place":
        return cmd_place(args.scenario, args.out, args.seed, args.overrides)
    if args.verb == "sweep":
        return cmd_sweep(args.directory, args.out, args.seed, args.overrides, args.jobs)
    return cmd_export(args.result, args.format, args.out, args.resolution)


if __name__ == "__main__":
    sys.exit(main())
