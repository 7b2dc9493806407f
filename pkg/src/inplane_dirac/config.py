"""Run configuration: INI-style ``[run]`` and ``[parameters]`` sections.

Example::

    [run]
    scenario = ring-sweep
    format = csv
    output = sweep.csv

    [parameters]
    rho = 1.0
    theta = 1.0
    b_pl = 0.25
    start = 0.1
    stop = 5.0
    points = 50
"""

from __future__ import annotations

import configparser
import math
import os
import re
from dataclasses import dataclass, field
from typing import Any, Callable

from .errors import ConfigError, DomainError
from .table import FORMATS

SCENARIOS = ("ac-theorem", "gauge-removal", "quantization", "ring-sweep", "filter-design")
SEED_ENV = "INPLANE_DIRAC_SEED"
DEFAULT_SEED = 42

REQUIRED = object()


def _float(s: str) -> float:
    v = float(s)
    if not math.isfinite(v):
        raise ValueError("not finite")
    return v


def _int(s: str) -> int:
    return int(s)


def _floats(s: str) -> list[float]:
    out = [_float(p) for p in s.replace(",", " ").split()]
    if not out:
        raise ValueError("empty list")
    return out


def _ints(s: str) -> list[int]:
    out = [int(p) for p in s.replace(",", " ").split()]
    if not out:
        raise ValueError("empty list")
    return out


def _choice(*opts: str) -> Callable[[str], str]:
    def conv(s: str) -> str:
        if s not in opts:
            raise ValueError(f"expected one of {', '.join(opts)}")
        return s

    return conv


_RING = {
    "rho": (_float, REQUIRED),
    "theta": (_float, REQUIRED),
    "b_pl": (_float, 0.0),
    "m_eff": (_float, 1.0),
    "charge": (_float, 1.0),
    "hbar": (_float, 1.0),
}

# key -> (converter, default)
SCHEMAS: dict[str, dict[str, tuple]] = {
    "ac-theorem": {
        "fluxes": (_floats, REQUIRED),
        "L": (_int, 64),
        "h": (_float, 1.0),
        "charge": (_float, 1.0),
        "threshold": (_float, 1e3),
        "ambiguous_below": (_float, 10.0),
        "compare_L": (_int, 0),
    },
    "gauge-removal": {
        "flux": (_float, 1.0),
        "l0": (_float, 1.0),
        "omega": (_float, 0.0),
        "charge": (_float, 1.0),
        "x_perp_min": (_float, 1.0),
        "x_perp_max": (_float, 3.0),
        "x_b_min": (_float, -1.0),
        "x_b_max": (_float, 1.0),
        "intervals": (_ints, [50, 100, 200]),
    },
    "quantization": {
        "flux": (_float, 1.0),
        "l0": (_float, 1.0),
        "charge": (_float, 1.0),
        "hbar": (_float, 1.0),
        "c_light": (_float, 1.0),
        "n_max": (_int, REQUIRED),
    },
    "ring-sweep": {
        **_RING,
        "vary": (_choice("E", "B_pl", "theta"), "E"),
        "start": (_float, REQUIRED),
        "stop": (_float, REQUIRED),
        "points": (_int, REQUIRED),
        "energy": (_float, 1.0),
        "spot_checks": (_int, 10),
    },
    "filter-design": {
        "rho": (_float, REQUIRED),
        "n_max": (_int, REQUIRED),
        "theta": (_float, math.nan),
        "charge": (_float, 1.0),
        "energy": (_float, 1.0),
    },
}

RUN_KEYS = {"scenario", "format", "output", "seed"}


@dataclass
class RunConfig:
    scenario: str
    parameters: dict[str, Any]
    output_path: str | None = None
    format: str = "csv"
    seed: int = DEFAULT_SEED
    source_lines: dict[str, int] = field(default_factory=dict, repr=False)


def _line_index(text: str) -> dict[tuple[str, str], int]:
    """Line number of every ``key = value`` entry, keyed by (section, key)."""
    out = {}
    section = ""
    for n, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        m = re.match(r"^\[([^\]]+)\]$", line)
        if m:
            section = m.group(1).strip()
            continue
        m = re.match(r"^([^=:#;\s][^=:]*?)\s*[=:]", line)
        if m:
            out.setdefault((section, m.group(1).strip().lower()), n)
    return out


def _ctx(lines, section, key) -> str:
    n = lines.get((section, key.lower()))
    return f"line {n}, [{section}] {key}" if n else f"[{section}] {key}"


def parse_config(text: str, env: dict | None = None) -> RunConfig:
    """Strict parse; unknown keys, missing keys and bad values raise ``ConfigError``."""
    env = os.environ if env is None else env
    cp = configparser.ConfigParser(interpolation=None, delimiters=("=",), comment_prefixes=("#", ";"))
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from exc
    lines = _line_index(text)

    extra = set(cp.sections()) - {"run", "parameters"}
    if extra:
        raise ConfigError(f"unknown section(s) {sorted(extra)}; expected [run] and [parameters]")
    if not cp.has_section("run"):
        raise ConfigError("missing [run] section")
    run = dict(cp.items("run"))
    for k in run:
        if k not in RUN_KEYS:
            raise ConfigError(f"{_ctx(lines, 'run', k)}: unknown key; allowed: {', '.join(sorted(RUN_KEYS))}")
    scenario = run.get("scenario")
    if scenario is None:
        raise ConfigError("[run] scenario: missing required key")
    if scenario not in SCENARIOS:
        raise ConfigError(
            f"{_ctx(lines, 'run', 'scenario')}: unknown scenario {scenario!r}; valid: {', '.join(SCENARIOS)}"
        )
    fmt = run.get("format", "csv")
    if fmt not in FORMATS:
        raise ConfigError(f"{_ctx(lines, 'run', 'format')}: unknown format {fmt!r}; valid: {', '.join(FORMATS)}")
    try:
        seed = int(run.get("seed", DEFAULT_SEED))
    except ValueError:
        raise ConfigError(f"{_ctx(lines, 'run', 'seed')}: seed must be an integer") from None
    if env.get(SEED_ENV):
        try:
            seed = int(env[SEED_ENV])
        except ValueError:
            raise ConfigError(f"{SEED_ENV} must be an integer, got {env[SEED_ENV]!r}") from None

    schema = SCHEMAS[scenario]
    raw = dict(cp.items("parameters")) if cp.has_section("parameters") else {}
    params: dict[str, Any] = {}
    for k, v in raw.items():
        if k not in schema:
            raise ConfigError(
                f"{_ctx(lines, 'parameters', k)}: unknown key for {scenario}; allowed: {', '.join(sorted(schema))}"
            )
        conv = schema[k][0]
        try:
            params[k] = conv(v.strip())
        except ValueError as exc:
            raise ConfigError(f"{_ctx(lines, 'parameters', k)}: bad value {v.strip()!r} ({exc})") from None
    for k, (_, default) in schema.items():
        if k not in params:
            if default is REQUIRED:
                raise ConfigError(f"[parameters] {k}: missing required key for {scenario}")
            params[k] = list(default) if isinstance(default, list) else default

    cfg = RunConfig(scenario, params, run.get("output") or None, fmt, seed, {k: n for (s, k), n in lines.items()})
    try:
        validate(cfg)
    except DomainError as exc:
        raise ConfigError(f"{scenario}: {exc}") from None
    return cfg


def validate(cfg: RunConfig) -> None:
    """Build the module objects a scenario needs so their invariants are checked."""
    from .gauge import FieldConfig
    from .ring import RingParams

    p = cfg.parameters
    if cfg.scenario in ("ring-sweep",):
        RingParams(**{k: p[k] for k in _RING})
        if p["points"] < 1:
            raise DomainError("points must be >= 1")
        if p["vary"] == "E" and min(p["start"], p["stop"]) <= 0:
            raise DomainError("energies must be > 0")
    elif cfg.scenario == "filter-design":
        RingParams(rho=p["rho"], theta=0.0 if math.isnan(p["theta"]) else p["theta"], charge=p["charge"])
        if p["n_max"] < 0:
            raise DomainError("n_max must be >= 0")
    elif cfg.scenario == "quantization":
        FieldConfig(flux=p["flux"], l0=p["l0"], charge=p["charge"], hbar=p["hbar"], c_light=p["c_light"])
        if p["n_max"] < 0:
            raise DomainError("n_max must be >= 0")
    elif cfg.scenario == "gauge-removal":
        FieldConfig(flux=p["flux"], l0=p["l0"], omega=p["omega"], charge=p["charge"])
        if p["x_perp_min"] <= 0 or p["x_perp_max"] <= p["x_perp_min"] or p["x_b_max"] <= p["x_b_min"]:
            raise DomainError("need 0 < x_perp_min < x_perp_max and x_b_min < x_b_max")
        if min(p["intervals"]) < 2:
            raise DomainError("intervals must be >= 2")
    elif cfg.scenario == "ac-theorem":
        if p["L"] < 8 or (p["compare_L"] and p["compare_L"] < 8):
            raise DomainError("lattice size must be >= 8")
        if p["h"] <= 0:
            raise DomainError("h must be > 0")
