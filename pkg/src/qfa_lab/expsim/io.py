"""File formats: histogram CSV with JSON sidecar, tomography JSON."""
from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from ..errors import ConfigError, InversionError
from .model import ExperimentConfig, TimeHistogram
from .tomography import LABELS, qst_direct_inversion


def sidecar_path(csv_path) -> Path:
    return Path(csv_path).with_suffix(".json")


def write_histogram(hist: TimeHistogram, csv_path, cfg: ExperimentConfig | None = None) -> Path:
    """Write ``bin_index,count`` rows and a sidecar holding the bin geometry,
    metadata and (if given) the generating configuration."""
    csv_path = Path(csv_path)
    with open(csv_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["bin_index", "count"])
        w.writerows(enumerate(hist.counts.tolist()))
    side = {
        "bin_width_s": hist.bin_width,
        "t0_bin": hist.t0_bin,
        "peak_spacing_bins": hist.peak_spacing_bins,
        "window_bins": hist.window_bins,
        "lead_bins": hist.lead_bins,
        "meta": hist.meta,
        "config": cfg.to_dict() if cfg is not None else None,
    }
    sidecar_path(csv_path).write_text(json.dumps(side, indent=2))
    return csv_path


def read_histogram(csv_path) -> TimeHistogram:
    csv_path = Path(csv_path)
    side_file = sidecar_path(csv_path)
    if not side_file.exists():
        raise ConfigError(f"missing sidecar {side_file}")
    side = json.loads(side_file.read_text())
    with open(csv_path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    idx = np.array([int(r["bin_index"]) for r in rows])
    if not np.array_equal(idx, np.arange(len(rows))):
        raise ConfigError(f"{csv_path}: bin indices must run 0..N-1")
    counts = np.array([int(r["count"]) for r in rows], dtype=np.int64)
    try:
        return TimeHistogram(counts, float(side["bin_width_s"]), int(side["t0_bin"]),
                             int(side["peak_spacing_bins"]), int(side["window_bins"]),
                             int(side["lead_bins"]), dict(side.get("meta") or {}))
    except KeyError as exc:
        raise ConfigError(f"{side_file}: missing key {exc}") from exc


def read_histogram_dir(directory) -> list:
    files = sorted(Path(directory).glob("*.csv"))
    if not files:
        raise ConfigError(f"no histogram CSV files in {directory}")
    return [read_histogram(f) for f in files]


def tomography_from_json(path) -> list:
    """Read ``{"rows": [{"label": ..., "counts": {"z+": ...}}]}`` and return
    the rows with a ``"bloch"`` entry added."""
    doc = json.loads(Path(path).read_text())
    rows = doc.get("rows") if isinstance(doc, dict) else None
    if not isinstance(rows, list):
        raise ConfigError(f"{path}: expected an object with a 'rows' list")
    out = []
    for row in rows:
        counts = row.get("counts")
        if not isinstance(counts, dict) or set(counts) != set(LABELS):
            raise InversionError(f"row {row.get('label')!r}: counts must have keys {LABELS}")
        r = qst_direct_inversion(counts)
        out.append({**row, "bloch": [r.x, r.y, r.z], "bloch_sigma": list(r.sigma),
                    "unphysical": r.unphysical})
    return out


def tomography_to_json(rows, path) -> None:
    Path(path).write_text(json.dumps({"rows": rows}, indent=2))
