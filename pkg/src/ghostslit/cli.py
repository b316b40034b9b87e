"""Command-line driver: reference arithmetic, scan simulation, scan analysis.

``reproduce-paper`` recomputes the classical diffraction and kinematics
chain for the default apparatus and exits nonzero unless every value agrees
with the frozen reference digits, which makes the arithmetic a CI gate.
``simulate`` runs a deterministic detector scan to CSV plus a manifest that
reproduces the run bit for bit. ``analyze`` extracts profile features from
such a CSV and reruns the kinematics chain at the measured minimum.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (
    FeatureNotFoundError,
    InsufficientCountsError,
    SCENARIOS,
    goodness_of_fit,
    kinematics_report,
    profile_width,
    extract_first_minimum,
)
from .apparatus import (
    ApparatusConfig,
    ConfigParseError,
    ConfigValidationError,
    config_as_dict,
    config_from_dict,
    parse_config,
)
from .diffraction import DiffractionGeometry, first_minimum, path_length, relative_intensity
from .engine import ScanHistogram, run_scan
from .kinematics import (
    CODATA_1973,
    SI_2019,
    PhysicalConstants,
    dynamic_mass_of,
    energy_of,
    flight_time,
    momentum_of,
)

CSV_HEADER = "y_mm,coincidence,singles,trials"


class CsvFormatError(ValueError):
    """Scan CSV malformed; message carries the offending line number."""


def printed_tolerance(printed: str) -> float:
    """Absolute tolerance of five units in the last digit of ``printed``."""
    mantissa, _, exponent = printed.lower().partition("e")
    decimals = len(mantissa.partition(".")[2])
    return 5.0 * 10.0 ** (int(exponent or 0) - decimals)


def matches_printed(value: float, printed: str) -> bool:
    """True when ``value`` agrees with every digit of ``printed``."""
    return abs(value - float(printed)) <= printed_tolerance(printed)


# Frozen regression targets for the default apparatus: (label, reference,
# scale of the displayed value). Computed values must match every digit.
def reference_rows(constants: PhysicalConstants, cfg: ApparatusConfig) -> list[tuple[str, float, str]]:
    lam = cfg.photon_wavelength
    geom = DiffractionGeometry(cfg.slit_b_width, lam, cfg.dist_slit_b_d2)
    rows = [
        ("photon energy E [J]", energy_of(lam, constants), "2.82893e-19"),
        ("photon momentum P [kg m/s]", momentum_of(lam, constants), "9.43631e-28"),
        ("dynamic mass M [kg]", dynamic_mass_of(momentum_of(lam, constants), constants), "3.14761e-36"),
        ("first diffraction minimum [mm]", first_minimum(geom) * 1e3, "2.194375"),
        ("slit-B diagonal path D' [mm]", path_length(cfg.dist_slit_b_d2, 2.2e-3) * 1e3, "500.00484"),
    ]
    expected = {
        "slit-b-present": ("1.6678e-9", "1.3191e6", "4.1520e-30", "6.643e-34", "1.00"),
        "ghost-slit": ("1.6678e-9", "5.3963e5", "1.6985e-30", "2.718e-34", "0.41"),
        "source-diffraction": ("4.15287e-9", "2.1672e5", "6.82142e-31", "1.09142e-34", "0.1647"),
    }
    for scenario in SCENARIOS:
        rep = kinematics_report(scenario, cfg, constants=constants)
        t_ref, v_ref, p_ref, prod_ref, ratio_ref = expected[scenario]
        rows += [
            (f"{scenario}: transit time [s]", rep.transit_time, t_ref),
            (f"{scenario}: v_y [m/s]", rep.v_y, v_ref),
            (f"{scenario}: P_y [kg m/s]", rep.p_y, p_ref),
            (f"{scenario}: dy*dP_y [J s]", rep.product, prod_ref),
            (f"{scenario}: ratio to h", rep.ratio_to_h, ratio_ref),
        ]
    return rows


def cmd_reproduce_paper(args) -> int:
    constants = SI_2019 if args.h_modern else CODATA_1973
    cfg = ApparatusConfig()
    rows = reference_rows(constants, cfg)
    print(f"reference arithmetic (h = {constants.h!r} J s, c = {constants.c!r} m/s)")
    print()
    print(f"  {'quantity':<38} {'computed':>14} {'reference':>12}  ok")
    failures = []
    for label, value, printed in rows:
        ok = matches_printed(value, printed)
        if not ok:
            failures.append(label)
        print(f"  {label:<38} {value:>14.6e} {printed:>12}  {'yes' if ok else 'NO'}")
    print()
    if failures:
        print(f"{len(failures)} value(s) off the reference digits:")
        for label in failures:
            print(f"  - {label}")
        return 1
    print(f"all {len(rows)} values match the reference digits")
    return 0


def _scan_positions_mm(lo: float, hi: float, step: float) -> np.ndarray:
    if step <= 0:
        raise ValueError("--scan-step must be positive")
    if hi < lo:
        raise ValueError("--scan-max must be >= --scan-min")
    n = int(round((hi - lo) / step)) + 1
    return np.round(lo + step * np.arange(n), 9)


def _resolve_config(args) -> ApparatusConfig:
    if args.config is not None:
        cfg = parse_config(Path(args.config).read_text(encoding="utf-8"))
    else:
        cfg = ApparatusConfig()
    overrides = {}
    if args.slit_b is not None:
        overrides["slit_b_present"] = args.slit_b == "present"
    if args.lens is not None:
        overrides["lens_enabled"] = args.lens == "on"
    if overrides:
        cfg = ApparatusConfig(**{**cfg.__dict__, **overrides})
    return cfg


def _manifest_json(manifest: dict) -> str:
    return json.dumps(manifest, sort_keys=True, separators=(",", ":"))


def cmd_simulate(args) -> int:
    cfg = _resolve_config(args)
    positions_mm = _scan_positions_mm(args.scan_min, args.scan_max, args.scan_step)
    out_path = Path(args.out)

    manifest = {
        "tool": "ghostslit",
        "version": __version__,
        "master_seed": args.seed,
        "trials_per_position": args.trials,
        "scan_mm": {"min": args.scan_min, "max": args.scan_max, "step": args.scan_step},
        "config": config_as_dict(cfg),
        "output": str(out_path),
    }
    manifest_line = _manifest_json(manifest)
    digest = hashlib.sha256(manifest_line.encode("utf-8")).hexdigest()

    hist = run_scan(cfg, positions_mm * 1e-3, args.trials, args.seed, workers=args.workers)

    lines = [
        "# ghostslit scan v1",
        f"# manifest-digest: sha256:{digest}",
        f"# manifest: {manifest_line}",
        CSV_HEADER,
    ]
    for y_mm, n_coinc, n_single in zip(positions_mm, hist.coincidence, hist.singles):
        lines.append(f"{y_mm:.6g},{n_coinc},{n_single},{args.trials}")
    out_path.write_text("\n".join(lines) + "\n", encoding="utf-8")

    manifest_path = out_path.with_name(out_path.name + ".manifest.json")
    manifest_path.write_text(json.dumps(manifest, sort_keys=True, indent=2) + "\n", encoding="utf-8")

    print(f"wrote {out_path} ({positions_mm.size} positions x {args.trials} trials)")
    print(f"wrote {manifest_path}")
    return 0


def read_scan_csv(path) -> tuple[ScanHistogram, dict | None]:
    """Parse a scan CSV back into a histogram plus its embedded manifest."""
    manifest = None
    header_seen = False
    y_mm, coincidence, singles, trials = [], [], [], []
    text = Path(path).read_text(encoding="utf-8")
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line.lstrip("#").strip()
            if body.startswith("manifest:"):
                try:
                    manifest = json.loads(body.partition(":")[2])
                except json.JSONDecodeError as exc:
                    raise CsvFormatError(f"line {lineno}: bad manifest JSON: {exc}") from exc
            continue
        if not header_seen:
            if line != CSV_HEADER:
                raise CsvFormatError(f"line {lineno}: expected header {CSV_HEADER!r}, got {line!r}")
            header_seen = True
            continue
        parts = line.split(",")
        if len(parts) != 4:
            raise CsvFormatError(f"line {lineno}: expected 4 fields, got {len(parts)}")
        try:
            y_mm.append(float(parts[0]))
            coincidence.append(int(parts[1]))
            singles.append(int(parts[2]))
            trials.append(int(parts[3]))
        except ValueError as exc:
            raise CsvFormatError(f"line {lineno}: {exc}") from exc
    if not header_seen:
        raise CsvFormatError("line 1: no data: missing CSV header")
    if not y_mm:
        raise CsvFormatError("line 1: no data rows")
    if len(set(trials)) != 1:
        raise CsvFormatError("trials column must be constant across rows")
    seed = manifest.get("master_seed") if manifest else None
    hist = ScanHistogram(
        positions=np.asarray(y_mm) * 1e-3,
        coincidence=np.asarray(coincidence, dtype=np.int64),
        singles=np.asarray(singles, dtype=np.int64),
        trials_per_position=trials[0],
        seed=seed,
    )
    return hist, manifest


def cmd_analyze(args) -> int:
    try:
        hist, manifest = read_scan_csv(args.csv)
    except (CsvFormatError, ValueError) as exc:
        print(f"error: {args.csv}: {exc}", file=sys.stderr)
        return 2

    if manifest and "config" in manifest:
        cfg = config_from_dict(manifest["config"])
        cfg_origin = "embedded manifest"
    else:
        cfg = ApparatusConfig()
        cfg_origin = "defaults (no manifest found)"
    geom = DiffractionGeometry(cfg.slit_b_width, cfg.photon_wavelength, cfg.dist_slit_b_d2)

    print(f"scan: {len(hist.positions)} positions, {hist.trials_per_position} trials each, "
          f"seed {hist.seed}")
    print(f"config: {cfg_origin}; slit B {'present' if cfg.slit_b_present else 'absent'}, "
          f"lens {'on' if cfg.lens_enabled else 'off'}")
    print(f"model first minimum: {first_minimum(geom) * 1e3:.4f} mm")

    measured_min = None
    try:
        measured_min = extract_first_minimum(hist, geom)
        print(f"measured first minimum (coincidence): {measured_min * 1e3:.3f} mm")
    except FeatureNotFoundError as exc:
        print(f"measured first minimum (coincidence): not found ({exc})")

    for which in ("coincidence", "singles"):
        try:
            width = profile_width(hist, which)
            print(f"FWHM {which}: {width * 1e3:.3f} mm")
        except FeatureNotFoundError as exc:
            print(f"FWHM {which}: not found ({exc})")

    try:
        fit = goodness_of_fit(hist, lambda y: relative_intensity(geom, y))
        print(f"chi-square vs single-slit model (coincidence): "
              f"chi2 = {fit.statistic:.1f}, dof = {fit.dof}, p = {fit.pvalue:.3g}")
    except InsufficientCountsError as exc:
        print(f"chi-square vs single-slit model: unavailable ({exc})")

    if measured_min is not None:
        rep = kinematics_report("slit-b-present", cfg, y=measured_min)
        print("kinematics at the measured minimum:")
        print(f"  path = {rep.path * 1e3:.5f} mm, transit time = {rep.transit_time:.5e} s")
        print(f"  v_y = {rep.v_y:.5e} m/s, P_y = {rep.p_y:.5e} kg m/s")
        print(f"  dy*dP_y = {rep.product:.5e} J s (ratio to h: {rep.ratio_to_h:.4f})")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ghostslit",
        description="Deterministic Monte Carlo for an entangled-pair two-slit coincidence scan.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    rep = sub.add_parser("reproduce-paper", help="Recompute and check the reference arithmetic.")
    rep.add_argument("--h-modern", action="store_true",
                     help="Use modern exact constants instead of the historical set.")
    rep.set_defaults(func=cmd_reproduce_paper)

    sim = sub.add_parser("simulate", help="Run a detector scan and write CSV + manifest.")
    sim.add_argument("--config", type=str, default=None, help="Apparatus config file.")
    sim.add_argument("--slit-b", choices=("present", "absent"), default=None)
    sim.add_argument("--lens", choices=("on", "off"), default=None)
    sim.add_argument("--trials", type=int, default=1_000_000,
                     help="Trials per scan position (default 1e6).")
    sim.add_argument("--seed", type=int, default=1, help="Master seed (64-bit).")
    sim.add_argument("--scan-min", type=float, default=-0.5, help="Scan start [mm].")
    sim.add_argument("--scan-max", type=float, default=3.5, help="Scan end [mm].")
    sim.add_argument("--scan-step", type=float, default=0.05, help="Scan step [mm].")
    sim.add_argument("--workers", type=int, default=1, help="Worker threads.")
    sim.add_argument("--out", type=str, default="scan.csv", help="Output CSV path.")
    sim.set_defaults(func=cmd_simulate)

    ana = sub.add_parser("analyze", help="Summarize a scan CSV.")
    ana.add_argument("csv", type=str, help="Scan CSV written by `simulate`.")
    ana.set_defaults(func=cmd_analyze)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigParseError, ConfigValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
