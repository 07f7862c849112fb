"""INI-style experiment configuration files.

Example::

    [mode]
    ells = 1,3
    phi_deg = 18

    [loop]
    bs = 70:30

    [source]
    budget = 1000000
    repeats = 40

    [analysis]
    n_max = 10

    [run]
    seed = 7

Angles carry an explicit ``_deg`` or ``_rad`` suffix. Unknown sections or keys
and bad values are reported with their line number.
"""
from __future__ import annotations

import configparser
import hashlib
import math
import re

from .errors import ConfigError, QfaLabError
from .expsim.model import ExperimentConfig
from .photonic import DoveConfig, LoopConfig, dove_angle_for_p


def _ints(text):
    return tuple(int(x) for x in re.split(r"[,\s]+", text.strip()) if x)


def _int(text):
    """Integer that may be written as ``1e6``."""
    v = float(text)
    if not v.is_integer():
        raise ValueError(f"not an integer: {text!r}")
    return int(v)


def _bool(text):
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


# section -> key -> parser
SCHEMA = {
    "mode": {"ells": _ints, "phi_deg": float, "phi_rad": float, "p": int, "reference_only": _bool},
    "loop": {"bs": str, "eta_loop": float, "delta_t_s": float},
    "source": {"budget": _int, "repeats": int, "r1_hz": float, "r2_hz": float,
               "measurement_time_s": float},
    "analysis": {"n_max": int, "window_bins": int, "peak_spacing_bins": int,
                 "bin_width_s": float, "pre_record_s": float,
                 "accidental_lead_time_s": float, "jitter_sigma_bins": float,
                 "span_bins": int},
    "imperfections": {"encoding_efficiency": float, "depolarization": float},
    "run": {"seed": int, "label": str},
}

_FIELD = {
    ("source", "budget"): "budget", ("source", "repeats"): "repeats",
    ("source", "r1_hz"): "r1", ("source", "r2_hz"): "r2",
    ("source", "measurement_time_s"): "measurement_time",
    ("analysis", "n_max"): "n_max", ("analysis", "window_bins"): "window_bins",
    ("analysis", "peak_spacing_bins"): "peak_spacing_bins",
    ("analysis", "bin_width_s"): "bin_width", ("analysis", "pre_record_s"): "pre_record",
    ("analysis", "accidental_lead_time_s"): "accidental_lead_time",
    ("analysis", "jitter_sigma_bins"): "jitter_sigma_bins",
    ("analysis", "span_bins"): "span_bins",
    ("imperfections", "encoding_efficiency"): "encoding_efficiency",
    ("imperfections", "depolarization"): "depolarization",
    ("run", "seed"): "seed", ("run", "label"): "label",
}


def _line_index(text: str) -> dict:
    """Map ``(section, key)`` and ``(section, None)`` to 1-based line numbers."""
    where, section = {}, None
    for i, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line[0] in "#;":
            continue
        m = re.fullmatch(r"\[([^\]]+)\]", line)
        if m:
            section = m.group(1).strip().lower()
            where.setdefault((section, None), i)
            continue
        key = re.split(r"[=:]", line, maxsplit=1)[0].strip().lower()
        where.setdefault((section, key), i)
    return where


def normalized_text(text: str) -> str:
    lines = text.replace("\r\n", "\n").replace("\r", "\n").split("\n")
    return "\n".join(l.rstrip() for l in lines).strip() + "\n"


def digest(text: str) -> str:
    """SHA-256 of the newline-normalized text (platform independent)."""
    return hashlib.sha256(normalized_text(text).encode("utf-8")).hexdigest()


def parse_config(text: str, source: str = "<config>") -> tuple:
    """Parse and validate; return ``(ExperimentConfig, values_by_section)``."""
    where = _line_index(text)
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=(";", "#"))
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from exc

    def fail(section, key, msg):
        line = where.get((section, key)) or where.get((section, None))
        loc = f"{source}:{line}" if line else source
        raise ConfigError(f"{loc}: {msg}")

    values = {}
    for section in cp.sections():
        sec = section.lower()
        if sec not in SCHEMA:
            fail(sec, None, f"unknown section [{section}]")
        for key, raw in cp.items(section):
            if key not in SCHEMA[sec]:
                fail(sec, key, f"unknown key {key!r} in [{section}]")
            try:
                values[(sec, key)] = SCHEMA[sec][key](raw)
            except ValueError as exc:
                fail(sec, key, f"bad value for {key}: {exc}")

    kwargs = {_FIELD[k]: v for k, v in values.items() if k in _FIELD}
    ells = values.get(("mode", "ells"))
    if values.get(("mode", "reference_only")):
        ells = None
    if ("mode", "phi_deg") in values and ("mode", "phi_rad") in values:
        fail("mode", "phi_rad", "give phi_deg or phi_rad, not both")
    if ("mode", "phi_deg") in values:
        phi = math.radians(values[("mode", "phi_deg")])
    elif ("mode", "phi_rad") in values:
        phi = values[("mode", "phi_rad")]
    elif ("mode", "p") in values and ells:
        phi = dove_angle_for_p(values[("mode", "p")], ells)
    elif ells:
        fail("mode", None, "need phi_deg, phi_rad or p for a structured mode")
    else:
        phi = 0.0
    if "n_max" not in kwargs:
        fail("analysis", None, "n_max is required")
    try:
        loop = LoopConfig.from_ratio(
            values.get(("loop", "bs"), "50:50"),
            eta_loop=values.get(("loop", "eta_loop"), 1.0),
            delta_t=values.get(("loop", "delta_t_s"), 2.26e-9),
            dove=DoveConfig(phi),
        )
    except QfaLabError as exc:
        fail("loop", "bs" if ("loop", "bs") in values else None, str(exc))
    try:
        cfg = ExperimentConfig(loop=loop, ells=ells, phi=phi, **kwargs)
    except QfaLabError as exc:
        raise ConfigError(f"{source}: {exc}") from exc
    return cfg, values


def load_config(path) -> tuple:
    """Return ``(ExperimentConfig, raw_text)`` for the file at ``path``."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    cfg, _ = parse_config(text, source=str(path))
    return cfg, text
