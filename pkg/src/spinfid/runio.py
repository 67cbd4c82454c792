"""Serialization for the CLI runner: sweep CSV, result JSON, run manifests.

Floats are written with 17 significant digits so parse(emit(x)) == x holds
bit-for-bit for every finite double, and reruns with identical parameters
produce byte-identical files.
"""

from __future__ import annotations

import csv
import json
import sys
from dataclasses import asdict
from pathlib import Path

from . import __version__
from .fidelity import PointMeta, SweepRow
from .kernels import BACKEND
from .scaling import PeakRecord, ScalingResult

SWEEP_COLUMNS = ["L", "lambda", "energy", "gap", "F_plus_h",
                 "chi2", "chi3", "chi3_abs", "fit_residual", "flag"]


def fmt(x: float) -> str:
    return f"{x:.17g}"


def write_sweep_csv(path, rows: list[SweepRow]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SWEEP_COLUMNS)
        for r in rows:
            w.writerow([str(r.L), fmt(r.lam), fmt(r.energy), fmt(r.gap),
                        fmt(r.F_plus_h), fmt(r.chi2), fmt(r.chi3),
                        fmt(r.chi3_abs), fmt(r.fit_residual), r.flag])


def read_sweep_csv(path) -> list[SweepRow]:
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != SWEEP_COLUMNS:
            raise ValueError(f"{path}: line 1: expected header {','.join(SWEEP_COLUMNS)}")
        for lineno, rec in enumerate(reader, start=2):
            if len(rec) != len(SWEEP_COLUMNS):
                raise ValueError(
                    f"{path}: line {lineno}: expected {len(SWEEP_COLUMNS)} fields, "
                    f"got {len(rec)}")
            try:
                rows.append(SweepRow(
                    L=int(rec[0]), lam=float(rec[1]), energy=float(rec[2]),
                    gap=float(rec[3]), F_plus_h=float(rec[4]), chi2=float(rec[5]),
                    chi3=float(rec[6]), chi3_abs=float(rec[7]),
                    fit_residual=float(rec[8]), flag=rec[9]))
            except ValueError as e:
                raise ValueError(f"{path}: line {lineno}: {e}") from None
    return rows


def sweep_column(rows: list[SweepRow], L: int, quantity: str,
                 include_flagged: bool = False):
    """(lams, values) of one quantity for one size, flagged rows dropped."""
    if quantity not in SWEEP_COLUMNS[1:-1]:
        raise ValueError(f"unknown quantity {quantity!r}; "
                         f"choose from {SWEEP_COLUMNS[1:-1]}")
    picked = [r for r in rows
              if r.L == L and (include_flagged or not r.flag)]
    lams = [r.lam for r in picked]
    vals = [getattr(r, "lam" if quantity == "lambda" else quantity) for r in picked]
    return lams, vals


def peaks_to_json(peaks: list[PeakRecord], quantity: str, prominence: float) -> dict:
    return {
        "quantity": quantity,
        "prominence_fraction": prominence,
        "peaks": [asdict(p) for p in peaks],
    }


def peaks_from_json(payload: dict) -> list[PeakRecord]:
    try:
        return [PeakRecord(L=int(p["L"]), lambda_peak=float(p["lambda_peak"]),
                           peak_value=float(p["peak_value"]),
                           grid_index=int(p["grid_index"]),
                           refinement_offset=float(p["refinement_offset"]))
                for p in payload["peaks"]]
    except (KeyError, TypeError) as e:
        raise ValueError(f"malformed peaks JSON: {e}") from None


def scaling_to_json(fits: dict[str, ScalingResult], primary: str) -> dict:
    out = {"primary": primary, "fits": {}}
    for name, fit in fits.items():
        out["fits"][name] = {
            "variable": fit.variable,
            "slope": fit.slope,
            "lambda_c": fit.lambda_c,
            "intercept_std_error": fit.intercept_std_error,
            "r_squared": fit.r_squared,
            "points": [asdict(p) for p in fit.points],
        }
    return out


def write_json(path, payload: dict) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_json(path) -> dict:
    with open(path) as fh:
        return json.load(fh)


def write_manifest(out_path, command: str, params: dict,
                   points: list[PointMeta] | None = None,
                   extra: dict | None = None) -> Path:
    """Run manifest beside ``out_path`` (same name + .manifest.json)."""
    manifest = {
        "tool": "spinfid",
        "version": __version__,
        "command": command,
        "python": sys.version.split()[0],
        "backend": BACKEND,
        "params": params,
    }
    if points is not None:
        manifest["points"] = [
            {"L": m.L, "lambda": m.lam, "seconds": round(m.seconds, 6),
             "iterations": m.iterations, "flag": m.flag, "h_used": m.h_used,
             "method": m.method,
             **({"chi2_alt": m.chi2_alt, "chi3_alt": m.chi3_alt}
                if m.chi2_alt is not None else {})}
            for m in points
        ]
    if extra:
        manifest.update(extra)
    path = Path(f"{out_path}.manifest.json")
    write_json(path, manifest)
    return path
