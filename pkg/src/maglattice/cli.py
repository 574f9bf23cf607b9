"""Command-line interface.

Exit codes: 0 ok, 1 a pass/fail report failed, 2 usage or config error,
3 computation error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .analytic import AnalyticDomainError, model_for_spec
from .config import ConfigError, LatticeSpec, load_spec, spec_hash
from .magnetostatics import PrismModel, build_prisms, field_grid
from .sweep import compare_models, load_plan, run_sweep, table3_report
from .traps import classify_bands, extract_sites, write_sites_csv

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_COMPUTE = 0, 1, 2, 3


@dataclass
class RunManifest:
    command: str
    spec_hash: str = ""
    tool_version: str = f"maglattice {__version__}"
    wall_clock_s: float = 0.0
    outputs: list[str] = field(default_factory=list)
    tolerances: dict = field(default_factory=dict)
    exit_code: int = 0

    def write(self, out: Path) -> Path:
        path = out / "manifest.json"
        path.write_text(json.dumps(self.__dict__, indent=2, sort_keys=True) + "\n")
        return path


def _spec(args) -> LatticeSpec:
    if not args.spec:
        raise ConfigError("--spec is required for this command")
    return load_spec(args.spec)


def _models(choice: str) -> tuple[str, ...]:
    return ("prism", "analytic") if choice == "both" else (choice,)


def _field_model(spec: LatticeSpec, name: str):
    return model_for_spec(spec) if name == "analytic" else PrismModel(build_prisms(spec))


def _plane_axes(spec: LatticeSpec, plane: str, offset: float, res: tuple[int, int], extent: float | None):
    half = extent / 2.0 if extent else spec.blocks_m * spec.block_width / 2.0

    def axis(lo, hi, k):
        return np.array([0.5 * (lo + hi)]) if k == 1 else np.linspace(lo, hi, k)

    top = spec.film_top
    if plane == "xy":
        return axis(-half, half, res[0]), axis(-half, half, res[1]), np.array([top + offset])
    zs = axis(top + 0.05 * spec.pitch, top + 2.5 * spec.pitch, res[1])
    if plane == "xz":
        return axis(-half, half, res[0]), np.array([offset]), zs
    return np.array([offset]), axis(-half, half, res[0]), zs


def cmd_fieldmap(args, man: RunManifest, out: Path) -> int:
    spec = _spec(args)
    man.spec_hash = spec_hash(spec)
    res = tuple(int(v) for v in args.resolution.lower().split("x")) if "x" in args.resolution.lower() \
        else (int(args.resolution),) * 2
    if len(res) != 2 or min(res) < 1:
        raise ConfigError(f"bad resolution {args.resolution!r}")
    if not np.isfinite(args.offset) or abs(args.offset) > 1e4:
        raise ConfigError("plane offset out of range")
    axes = _plane_axes(spec, args.plane, args.offset, res, args.extent)
    for name in _models(args.model):
        grid = field_grid(_field_model(spec, name), axes, workers=args.threads)
        grid.metadata.update(spec_hash=man.spec_hash, plane=args.plane, offset_um=args.offset)
        stem = f"fieldmap_{name}" if args.model == "both" else "fieldmap"
        man.outputs += [str(grid.write_csv(out / f"{stem}.csv")), str(grid.write_metadata(out / f"{stem}.json"))]
    return EXIT_OK


def cmd_sites(args, man: RunManifest, out: Path) -> int:
    spec = _spec(args)
    man.spec_hash = spec_hash(spec)
    pset = build_prisms(spec)
    for name in _models(args.model):
        fieldfn = model_for_spec(spec) if name == "analytic" else None
        sites = extract_sites(pset, spec, field=fieldfn, workers=args.threads)
        classify_bands(sites, args.tol_field_G)
        stem = f"sites_{name}" if args.model == "both" else "sites"
        man.outputs.append(str(write_sites_csv(sites, out / f"{stem}.csv")))
    return EXIT_OK


def cmd_sweep(args, man: RunManifest, out: Path) -> int:
    if not args.plan:
        raise ConfigError("--plan is required")
    plan = load_plan(args.plan)
    man.spec_hash = spec_hash(plan.base)
    table = run_sweep(plan, workers=args.threads)
    man.outputs += [str(table.write_csv(out / "sweep.csv")), str(table.write_metadata(out / "sweep.json"))]
    return EXIT_OK


def cmd_compare(args, man: RunManifest, out: Path) -> int:
    spec = _spec(args)
    man.spec_hash = spec_hash(spec)
    try:
        rep = compare_models(spec)
    except AnalyticDomainError as exc:
        raise ConfigError(str(exc)) from None
    path = out / "compare.json"
    path.write_text(json.dumps(rep.to_dict(), indent=2, sort_keys=True) + "\n")
    man.outputs.append(str(path))
    print(f"relative |B| discrepancy: max {rep.max:.4g}, mean {rep.mean:.4g}, p95 {rep.p95:.4g}")
    return EXIT_OK


def cmd_bands(args, man: RunManifest, out: Path) -> int:
    spec = _spec(args)
    man.spec_hash = spec_hash(spec)
    pset = build_prisms(spec)
    sites = extract_sites(pset, spec, metrics=False, workers=args.threads)
    part = classify_bands(sites, args.tol_field_G)
    man.outputs.append(str(part.write_csv(out / "bands.csv")))
    print(f"{len(part.bands)} band(s); aligned with rings: {part.rings_aligned}")
    return EXIT_OK


def cmd_table3(args, man: RunManifest, out: Path) -> int:
    rep = table3_report(args.tol_field_rel, args.tol_pos_um)
    txt, js = out / "table3.txt", out / "table3.json"
    txt.write_text(rep.text())
    js.write_text(json.dumps(rep.to_dict(), indent=2, sort_keys=True) + "\n")
    man.outputs += [str(txt), str(js)]
    sys.stdout.write(rep.text())
    return EXIT_OK if rep.passed else EXIT_FAIL


COMMANDS = {
    "fieldmap": cmd_fieldmap, "sites": cmd_sites, "sweep": cmd_sweep,
    "compare": cmd_compare, "bands": cmd_bands, "table3": cmd_table3,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--spec", help="lattice spec file (key = value)")
    common.add_argument("--model", choices=("analytic", "prism", "both"), default="prism")
    common.add_argument("--out", default=".", help="output directory")
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--tol-field-G", dest="tol_field_G", type=float, default=0.01,
                        help="field tolerance in G (band grouping)")
    common.add_argument("--tol-pos-um", dest="tol_pos_um", type=float, default=0.1,
                        help="position tolerance in um (scenario checks)")

    p = argparse.ArgumentParser(prog="maglattice", description="Magnetic lattice field and trap analysis.")
    p.add_argument("--version", action="version", version=f"maglattice {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    fm = sub.add_parser("fieldmap", parents=[common], help="field on a plane")
    fm.add_argument("--plane", choices=("xy", "xz", "yz"), default="xy")
    fm.add_argument("--offset", type=float, default=0.7,
                    help="xy: height above film top; xz: y; yz: x (um)")
    fm.add_argument("--resolution", default="101", help="N or NxM samples")
    fm.add_argument("--extent", type=float, default=None, help="in-plane width (um)")
    sub.add_parser("sites", parents=[common], help="trap site table")
    sw = sub.add_parser("sweep", parents=[common], help="parameter sweep from a JSON plan")
    sw.add_argument("--plan")
    sub.add_parser("compare", parents=[common], help="analytic vs prism discrepancy")
    sub.add_parser("bands", parents=[common], help="group sites by b_min")
    t3 = sub.add_parser("table3", parents=[common], help="built-in periodicity scenarios")
    t3.add_argument("--tol-field-rel", dest="tol_field_rel", type=float, default=0.2)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    out = Path(args.out)
    man = RunManifest(command=" ".join(["maglattice"] + list(sys.argv[1:] if argv is None else argv)),
                      tolerances={"field_G": args.tol_field_G, "pos_um": args.tol_pos_um})
    t0 = time.perf_counter()
    try:
        if args.threads < 1:
            raise ConfigError("--threads must be >= 1")
        out.mkdir(parents=True, exist_ok=True)
        code = COMMANDS[args.command](args, man, out)
    except (ConfigError, FileNotFoundError, IsADirectoryError, PermissionError) as exc:
        print(f"maglattice: config error: {exc}", file=sys.stderr)
        code = EXIT_CONFIG
    except Exception as exc:
        print(f"maglattice: computation error: {exc}", file=sys.stderr)
        code = EXIT_COMPUTE
    man.wall_clock_s = round(time.perf_counter() - t0, 3)
    man.exit_code = code
    if out.is_dir():
        man.write(out)
    return code


if __name__ == "__main__":
    sys.exit(main())
