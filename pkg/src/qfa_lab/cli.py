"""Command-line front end: ``qfa-lab <command> [options]``.

Exit codes: 0 success, 2 usage or configuration error, 3 numerical failure.
Every command that writes files also writes a ``*.manifest.json`` next to its
output recording the command, a digest of its configuration, the seed, the
tool version, the output paths and the wall time.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import __version__
from .automata import QfaSpec, is_prime, qfa2_build, qfa2d_build, qfa_run
from .config import digest, load_config
from .errors import ConfigError, InvalidParameter, NumericalError, QfaLabError
from .expsim import accept_probabilities, calibration_fit, simulate_repeats
from .expsim.io import read_histogram_dir, tomography_from_json, tomography_to_json, write_histogram
from .expsim.tomography import PETAL_PLUS, BlochVector, accept_prob_from_bloch
from .kset import exhaustive_best_kset, randomized_best_kset
from .photonic import (
    DoveConfig,
    LoopConfig,
    accept_prob_closed_form,
    dove_angle_for_p,
    photonic_from_dict,
    photonic_to_dict,
)

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 2, 3


@dataclass
class RunManifest:
    command: str
    config_digest: str
    seed: int | None
    tool_version: str
    outputs: list = field(default_factory=list)
    wall_time_s: float = 0.0

    def write(self, path: Path) -> None:
        path.write_text(json.dumps(asdict(self), indent=2))


def _int_list(text: str) -> list:
    try:
        return [int(x) for x in text.replace(" ", "").split(",") if x]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def _args_digest(args) -> str:
    doc = {k: v for k, v in vars(args).items() if k not in ("func", "out")}
    return digest(json.dumps(doc, sort_keys=True, default=str))


def _manifest_path(out: Path) -> Path:
    return out / "manifest.json" if out.is_dir() else out.with_name(out.name + ".manifest.json")


def _finish(args, outputs, t_start, cfg_digest=None, seed=None):
    out = Path(args.out)
    m = RunManifest(args.command, cfg_digest or _args_digest(args), seed, __version__,
                    [str(o) for o in outputs], round(time.perf_counter() - t_start, 6))
    m.write(_manifest_path(out))


def _phi_from(args, ells, p=None):
    if getattr(args, "phi_deg", None) is not None:
        return math.radians(args.phi_deg)
    if p is None:
        raise InvalidParameter("give --phi-deg or --p to fix the Dove angle")
    return dove_angle_for_p(p, ells)


# --------------------------------------------------------------------------- commands


def cmd_build(args) -> int:
    t0 = time.perf_counter()
    if not is_prime(args.p):
        raise InvalidParameter(f"p={args.p} is not prime")
    if args.photonic:
        phi = _phi_from(args, args.k, args.p)
        loop = LoopConfig.from_ratio(args.bs, dove=DoveConfig(phi))
        doc = photonic_to_dict(args.k, phi, loop)
    elif len(args.k) == 1:
        doc = qfa2_build(args.p, args.k[0]).to_dict()
    else:
        doc = qfa2d_build(args.p, args.k).to_dict()
    text = json.dumps(doc, indent=1)
    if args.out is None:
        print(text)
        return EXIT_OK
    out = Path(args.out)
    out.write_text(text)
    _finish(args, [out], t0)
    return EXIT_OK


def cmd_sweep(args) -> int:
    t0 = time.perf_counter()
    if args.spec:
        doc = json.loads(Path(args.spec).read_text())
        if "photonic" in doc:
            _, ells, phi, _ = photonic_from_dict(doc)
            rows = [(n, accept_prob_closed_form(ells, phi, n)) for n in range(args.n_max + 1)]
        else:
            spec = QfaSpec.from_dict(doc)
            rows = [(n, qfa_run(spec, n).accept_prob) for n in range(args.n_max + 1)]
    else:
        if not args.k:
            raise InvalidParameter("give --spec or --k (OAM values)")
        phi = _phi_from(args, args.k, args.p)
        rows = [(n, accept_prob_closed_form(args.k, phi, n)) for n in range(args.n_max + 1)]
    lines = ["n,P_n"] + [f"{n},{p!r}" for n, p in rows]
    if args.out is None:
        print("\n".join(lines))
        return EXIT_OK
    out = Path(args.out)
    out.write_text("\n".join(lines) + "\n")
    _finish(args, [out], t0)
    return EXIT_OK


def _experiment_from_args(args):
    cfg, text = load_config(args.config)
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.budget is not None:
        changes["budget"] = args.budget
    if args.repeats is not None:
        changes["repeats"] = args.repeats
    if args.n_max is not None:
        changes["n_max"] = args.n_max
    if args.bs is not None:
        changes["loop"] = LoopConfig.from_ratio(args.bs, eta_loop=cfg.loop.eta_loop,
                                                delta_t=cfg.loop.delta_t, dove=cfg.loop.dove)
    try:
        cfg = cfg.replace(**changes)
    except QfaLabError as exc:
        raise ConfigError(str(exc)) from exc
    return cfg, text


def cmd_simulate(args) -> int:
    t0 = time.perf_counter()
    cfg, text = _experiment_from_args(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    outputs = []
    runs = [("gauss", cfg.reference())]
    if not cfg.is_reference:
        runs.insert(0, ("qfa", cfg))
    for name, c in runs:
        d = out / name
        d.mkdir(exist_ok=True)
        for old in d.glob("*.csv"):
            old.unlink()
            old.with_suffix(".json").unlink(missing_ok=True)
        for r, hist in enumerate(simulate_repeats(c)):
            outputs.append(write_histogram(hist, d / f"{name}_r{r:03d}.csv", c))
    (out / "config.json").write_text(json.dumps(cfg.to_dict(), indent=2))
    _finish(args, outputs, t0, cfg_digest=digest(text), seed=cfg.seed)
    return EXIT_OK


def cmd_analyze(args) -> int:
    t0 = time.perf_counter()
    base = Path(args.input) if args.input else None
    qdir = Path(args.qfa) if args.qfa else (base / "qfa" if base else None)
    gdir = Path(args.gauss) if args.gauss else (base / "gauss" if base else None)
    if qdir is None or gdir is None:
        raise InvalidParameter("give --input DIR or both --qfa and --gauss")
    qs, gs = read_histogram_dir(qdir), read_histogram_dir(gdir)
    n_max = args.n_max
    if n_max is None:
        n_max = (qs[0].span - qs[0].t0_bin) // qs[0].peak_spacing_bins - 1
    probs = accept_probabilities(qs, gs, n_max)
    out = Path(args.out)
    probs.to_csv(out)
    _finish(args, [out], t0)
    return EXIT_OK


def cmd_tomography(args) -> int:
    t0 = time.perf_counter()
    rows = tomography_from_json(args.input)
    for row in rows:
        r = BlochVector(*row["bloch"])
        row["accept_prob"] = accept_prob_from_bloch(r, PETAL_PLUS)
    out = Path(args.out)
    tomography_to_json(rows, out)
    _finish(args, [out], t0)
    return EXIT_OK


def cmd_calibrate(args) -> int:
    t0 = time.perf_counter()
    with open(args.input, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r]
    try:
        start = 0 if _is_number(rows[0][0]) else 1
        samples = [(float(a), float(b)) for a, b, *_ in rows[start:]]
    except (ValueError, IndexError) as exc:
        raise ConfigError(f"{args.input}: expected angle_deg,power rows") from exc
    fit = calibration_fit(samples, args.ell)
    doc = {**asdict(fit), "prism_error_deg": fit.prism_error_deg, "period_deg": fit.period_deg}
    out = Path(args.out)
    out.write_text(json.dumps(doc, indent=2))
    _finish(args, [out], t0)
    return EXIT_OK


def _is_number(s):
    try:
        float(s)
    except ValueError:
        return False
    return True


def cmd_search(args) -> int:
    t0 = time.perf_counter()
    records = []
    for d in args.d:
        if args.trials:
            res = randomized_best_kset(args.p, d, args.trials, args.seed or 0,
                                       dedup=not args.no_dedup)
        else:
            res = exhaustive_best_kset(args.p, d, dedup=not args.no_dedup)
        rec = res.to_dict()
        if args.epsilon is not None:
            rec["epsilon_target"] = args.epsilon
            rec["meets_epsilon"] = res.worst_prob <= args.epsilon
        records.append(rec)
    if args.out is None:
        print(json.dumps(records, indent=2))
        return EXIT_OK
    prefix = Path(args.out)
    jpath = prefix.with_suffix(".json")
    cpath = prefix.with_suffix(".csv")
    jpath.write_text(json.dumps(records, indent=2))
    with open(cpath, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["p", "d", "K", "worst_n", "worst_prob"])
        for r in records:
            w.writerow([r["p"], r["d"], " ".join(map(str, r["K"])), r["worst_n"], repr(r["worst_prob"])])
    args.out = str(jpath)
    _finish(args, [jpath, cpath], t0, seed=args.seed)
    return EXIT_OK


# --------------------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qfa-lab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="write a QFA spec as JSON")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--k", type=_int_list, required=True,
                   help="rotation indices (or OAM values with --photonic)")
    p.add_argument("--photonic", action="store_true", help="treat --k as OAM values")
    p.add_argument("--phi-deg", type=float)
    p.add_argument("--bs", default="50:50", help="beamsplitter R:T")
    p.add_argument("--out")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("sweep", help="theory acceptance curve as CSV")
    p.add_argument("--spec")
    p.add_argument("--k", type=_int_list, help="OAM values")
    p.add_argument("--p", type=int)
    p.add_argument("--phi-deg", type=float)
    p.add_argument("--n-max", type=int, default=10)
    p.add_argument("--out")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("simulate", help="simulate coincidence histograms")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--budget", type=int)
    p.add_argument("--repeats", type=int)
    p.add_argument("--n-max", type=int)
    p.add_argument("--bs")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("analyze", help="acceptance probabilities from histograms")
    p.add_argument("--input", help="directory written by simulate")
    p.add_argument("--qfa")
    p.add_argument("--gauss")
    p.add_argument("--n-max", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("tomography", help="Bloch vectors by direct inversion")
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_tomography)

    p = sub.add_parser("calibrate", help="fit a Dove-angle calibration scan")
    p.add_argument("--input", required=True, help="CSV of angle_deg,power")
    p.add_argument("--ell", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("search", help="best rotation set K for MOD_p")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--d", type=_int_list, required=True, help="set size(s)")
    p.add_argument("--trials", type=int, help="random search with this many samples")
    p.add_argument("--seed", type=int)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--no-dedup", action="store_true")
    p.add_argument("--out", help="output prefix for .json and .csv")
    p.set_defaults(func=cmd_search)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except NumericalError as exc:
        print(f"qfa-lab {args.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (QfaLabError, OSError, json.JSONDecodeError) as exc:
        print(f"qfa-lab {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
