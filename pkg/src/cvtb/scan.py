"""
Parameter scans over channel grids, with CSV output.

A scan is described by a :class:`ScanConfig`, usually parsed from a flat
``key=value`` file and command-line flags.  Grid axes accept a single value,
``start:stop:steps`` (inclusive ``numpy.linspace``), or a comma-separated
list of either.  The GSP axes also accept ``unop`` for the unoperated input.
"""

from __future__ import annotations

import itertools
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .channels import FAMILIES, SINGLE_MODE_FAMILIES, ChannelSpec, GspParams, build_channel
from .charfunc import charfn_numeric, coherent_input, squeezed_input
from .errors import ConfigError, CvtbError, OutputPathError
from .entanglement import entanglement_capacity
from .teleport import (
    CLASSICAL_FIDELITY,
    NO_CLONING_FIDELITY,
    QuadratureGrid,
    bk_fidelity,
    channel_epr_variance,
    channel_fidelity,
)

__all__ = [
    "ScanConfig",
    "ScanResult",
    "parse_grid",
    "load_config_file",
    "list_presets",
    "preset_text",
    "config_from_mapping",
    "run_ec_scan",
    "run_fidelity_scan",
    "run_epr_scan",
    "run_scan",
    "write_csv",
    "format_value",
]

COMMANDS = ("ec", "fidelity", "epr")
UNOP_TOKENS = ("unop", "none", "unoperated")
GRID_KEYS = ("alpha", "beta", "nbar", "lambda", "rprime", "s", "s2")
CONFIG_KEYS = GRID_KEYS + ("command", "channel", "mode", "quad_points", "quad_halfwidth", "out")

VALUE_COLUMN = {"ec": "ec", "fidelity": "fidelity", "epr": "epr_variance"}
PARAM_COLUMNS = ("index", "family", "mode", "alpha", "beta", "nbar", "lambda", "rprime", "s", "s2")


def parse_grid(text: str, allow_unop: bool = False) -> list:
    """Expand a grid expression into a list of floats (``None`` for ``unop``)."""
    text = str(text).strip()
    if not text:
        raise ConfigError("empty grid expression")
    out = []
    for token in text.split(","):
        token = token.strip()
        if not token:
            raise ConfigError(f"empty entry in grid {text!r}")
        if token.lower() in UNOP_TOKENS:
            if not allow_unop:
                raise ConfigError(f"'unop' is only valid for s and s2, got {text!r}")
            out.append(None)
            continue
        if ":" in token:
            parts = token.split(":")
            if len(parts) != 3:
                raise ConfigError(f"range must be start:stop:steps, got {token!r}")
            try:
                start, stop, steps = float(parts[0]), float(parts[1]), int(parts[2])
            except ValueError as exc:
                raise ConfigError(f"bad range {token!r}: {exc}") from None
            if steps < 1:
                raise ConfigError(f"range {token!r} has no points (steps must be >= 1)")
            out.extend(float(v) for v in np.linspace(start, stop, steps))
            continue
        try:
            out.append(float(token))
        except ValueError:
            raise ConfigError(f"cannot parse grid value {token!r}") from None
    return out


@dataclass
class ScanConfig:
    """Fully parsed scan description.

    ``beta``, ``s2`` and ``rprime`` may be ``None``: ``beta`` then follows
    ``alpha``, ``s2`` follows ``s``, and the teleported state is coherent.
    """

    command: str
    channel: str
    alpha: list = field(default_factory=lambda: [0.0])
    beta: list | None = None
    nbar: list = field(default_factory=lambda: [0.0])
    lam: list = field(default_factory=lambda: [0.0])
    rprime: list | None = None
    s: list = field(default_factory=lambda: [None])
    s2: list | None = None
    mode: str = "converged"
    quad_points: int = 96
    quad_halfwidth: float = 7.0
    out: str | None = None
    echo: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}; expected one of {COMMANDS}")
        if self.channel not in FAMILIES:
            raise ConfigError(f"unknown channel {self.channel!r}; expected one of {FAMILIES}")
        if self.mode not in ("paper", "converged"):
            raise ConfigError(f"mode must be 'paper' or 'converged', got {self.mode!r}")
        for name in ("alpha", "nbar", "lam", "s"):
            if not getattr(self, name):
                raise ConfigError(f"grid {name!r} is empty")
        if any(v < 0 for v in self.nbar):
            raise ConfigError("nbar must be >= 0")
        if any(not (0 <= v < 1) for v in self.lam):
            raise ConfigError("lambda must lie in [0, 1)")
        for name in ("s", "s2"):
            vals = getattr(self, name) or []
            if any(v is not None and not (0 <= v <= 1) for v in vals):
                raise ConfigError(f"{name} must lie in [0, 1]")
        if self.rprime is not None and self.command != "fidelity":
            raise ConfigError("rprime only applies to the fidelity command")
        if self.quad_points < 16:
            raise ConfigError("quad_points must be >= 16")
        if not self.quad_halfwidth > 0:
            raise ConfigError("quad_halfwidth must be positive")

    def field_axis(self) -> list[dict]:
        """Field-parameter combinations for the configured family."""
        f = self.channel
        if f in ("coh1",):
            return [{"alpha": a} for a in self.alpha]
        if f == "coh2":
            if self.beta is None:
                return [{"alpha": a, "beta": a} for a in self.alpha]
            return [{"alpha": a, "beta": b} for a in self.alpha for b in self.beta]
        if f in ("thm1", "thm2"):
            return [{"nbar": n} for n in self.nbar]
        return [{"lambda": v} for v in self.lam]

    def gsp_axis(self) -> list[tuple]:
        if self.channel in SINGLE_MODE_FAMILIES or self.s2 is None:
            return [(s, s) for s in self.s]
        return list(itertools.product(self.s, self.s2))

    def points(self) -> list[dict]:
        rps = self.rprime if self.rprime is not None else [None]
        pts = []
        for fld, (s, s2), rp in itertools.product(self.field_axis(), self.gsp_axis(), rps):
            p = {"alpha": None, "beta": None, "nbar": None, "lambda": None}
            p.update(fld)
            p.update({"rprime": rp, "s": s, "s2": s2 if self.channel not in SINGLE_MODE_FAMILIES else None})
            pts.append(p)
        if not pts:
            raise ConfigError("scan grid is empty")
        return pts


@dataclass
class ScanResult:
    config: ScanConfig
    columns: list
    rows: list

    @property
    def values(self) -> list:
        col = VALUE_COLUMN[self.config.command]
        return [r[col] for r in self.rows]


def _spec_for(cfg_channel: str, mode: str, p: dict) -> ChannelSpec:
    s, s2 = p["s"], p["s2"]
    if s is None and (s2 is None or cfg_channel in SINGLE_MODE_FAMILIES):
        gsp = None
    else:
        # half-operated two-mode inputs are not part of any figure
        if s is None or (s2 is None and cfg_channel not in SINGLE_MODE_FAMILIES):
            raise ConfigError("s and s2 must both be 'unop' or both numeric")
        gsp = GspParams(s, s2 if cfg_channel not in SINGLE_MODE_FAMILIES else None)
    kw = {"family": cfg_channel, "gsp": gsp, "mode": mode}
    if p["alpha"] is not None:
        kw["alpha"] = p["alpha"]
    if p["beta"] is not None:
        kw["beta"] = p["beta"]
    if p["nbar"] is not None:
        kw["nbar"] = p["nbar"]
    if p["lambda"] is not None:
        kw["lam"] = p["lambda"]
    return ChannelSpec(**kw)


def _evaluate(task):
    command, channel, mode, point, quad = task
    try:
        spec = _spec_for(channel, mode, point)
        if command == "ec":
            return entanglement_capacity(spec), True, ""
        if command == "epr":
            return channel_epr_variance(spec).total_variance, True, ""
        inp = coherent_input() if point["rprime"] is None else squeezed_input(point["rprime"])
        grid = QuadratureGrid(quad[1], quad[0])
        if mode == "paper" and spec.family in ("thm1", "thm2"):
            res = bk_fidelity(inp, charfn_numeric(build_channel(spec)), grid)
        else:
            res = channel_fidelity(spec, inp, grid)
        return res.F, res.converged, ""
    except CvtbError as exc:
        return None, False, type(exc).__name__


def default_jobs() -> int:
    try:
        return max(1, len(os.sched_getaffinity(0)))
    except AttributeError:  # pragma: no cover - non-Linux
        return max(1, os.cpu_count() or 1)


def run_scan(cfg: ScanConfig, jobs: int | None = None) -> ScanResult:
    """Evaluate every grid point; rows come back in grid order."""
    pts = cfg.points()
    quad = (cfg.quad_points, cfg.quad_halfwidth)
    tasks = [(cfg.command, cfg.channel, cfg.mode, p, quad) for p in pts]
    jobs = default_jobs() if jobs is None else max(1, int(jobs))
    if jobs == 1 or len(tasks) == 1:
        results = [_evaluate(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=min(jobs, len(tasks))) as pool:
            results = list(pool.map(_evaluate, tasks))
    vcol = VALUE_COLUMN[cfg.command]
    extra = {
        "ec": {},
        "fidelity": {"f_classical": CLASSICAL_FIDELITY, "f_clone": NO_CLONING_FIDELITY},
        "epr": {"classical_bound": 2.0},
    }[cfg.command]
    columns = list(PARAM_COLUMNS) + [vcol] + list(extra) + ["converged", "error_kind"]
    rows = []
    for i, (p, (val, conv, err)) in enumerate(zip(pts, results)):
        row = {"index": i, "family": cfg.channel, "mode": cfg.mode}
        row.update({k: p[k] for k in ("alpha", "beta", "nbar", "lambda", "rprime")})
        row["s"] = "unop" if p["s"] is None else p["s"]
        if cfg.channel in SINGLE_MODE_FAMILIES:
            row["s2"] = None
        else:
            row["s2"] = "unop" if p["s2"] is None else p["s2"]
        row[vcol] = val
        row.update(extra)
        row["converged"] = "true" if conv else "false"
        row["error_kind"] = err
        rows.append(row)
    return ScanResult(cfg, columns, rows)


def run_ec_scan(cfg: ScanConfig, jobs: int | None = None) -> ScanResult:
    if cfg.command != "ec":
        raise ConfigError(f"expected an ec config, got {cfg.command!r}")
    return run_scan(cfg, jobs)


def run_fidelity_scan(cfg: ScanConfig, jobs: int | None = None) -> ScanResult:
    if cfg.command != "fidelity":
        raise ConfigError(f"expected a fidelity config, got {cfg.command!r}")
    return run_scan(cfg, jobs)


def run_epr_scan(cfg: ScanConfig, jobs: int | None = None) -> ScanResult:
    if cfg.command != "epr":
        raise ConfigError(f"expected an epr config, got {cfg.command!r}")
    return run_scan(cfg, jobs)


# ---------------------------------------------------------------------------
# config files


def _parse_kv(text: str, origin: str) -> dict:
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{origin}:{lineno}: expected key=value, got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in CONFIG_KEYS:
            raise ConfigError(f"{origin}:{lineno}: unknown key {key!r}")
        out[key] = value
    return out


def load_config_file(path) -> dict:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    return _parse_kv(path.read_text(), str(path))


def list_presets() -> list[str]:
    root = resources.files("cvtb") / "presets"
    return sorted(p.name[:-4] for p in root.iterdir() if p.name.endswith(".cfg"))


def preset_text(name: str) -> str:
    res = resources.files("cvtb") / "presets" / f"{name}.cfg"
    if not res.is_file():
        raise ConfigError(f"unknown preset {name!r}; available: {', '.join(list_presets())}")
    return res.read_text()


def load_preset(name: str) -> dict:
    return _parse_kv(preset_text(name), f"preset {name}")


def config_from_mapping(values: dict) -> ScanConfig:
    """Build a :class:`ScanConfig` from raw ``key -> string`` pairs."""
    v = dict(values)
    for req in ("command", "channel"):
        if not v.get(req):
            raise ConfigError(f"missing required setting {req!r}")
    kw = {"command": v["command"], "channel": v["channel"], "echo": dict(sorted(v.items()))}
    for key, attr in (("alpha", "alpha"), ("beta", "beta"), ("nbar", "nbar"), ("lambda", "lam"),
                      ("rprime", "rprime")):
        if key in v:
            kw[attr] = parse_grid(v[key])
    for key in ("s", "s2"):
        if key in v:
            kw[key] = parse_grid(v[key], allow_unop=True)
    if "mode" in v:
        kw["mode"] = v["mode"]
    try:
        if "quad_points" in v:
            kw["quad_points"] = int(v["quad_points"])
        if "quad_halfwidth" in v:
            kw["quad_halfwidth"] = float(v["quad_halfwidth"])
    except ValueError as exc:
        raise ConfigError(f"bad quadrature setting: {exc}") from None
    if "out" in v:
        kw["out"] = v["out"]
    return ScanConfig(**kw)


# ---------------------------------------------------------------------------
# CSV


def format_value(v) -> str:
    """12 significant digits for numbers, empty for missing values."""
    if v is None:
        return ""
    if isinstance(v, str):
        return v
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    if v == 0.0:
        return "0"
    return format(v, ".12g")


def render_csv(result: ScanResult) -> str:
    cfg = result.config
    lines = [f"# cvtb {__version__}", f"# command={cfg.command}"]
    lines += [f"# {k}={val}" for k, val in cfg.echo.items() if k not in ("command", "out")]
    lines.append(",".join(result.columns))
    for row in result.rows:
        lines.append(",".join(format_value(row[c]) for c in result.columns))
    return "\n".join(lines) + "\n"


def write_csv(result: ScanResult, path) -> Path:
    """Write ``result`` to ``path``; the parent directory must already exist."""
    path = Path(path)
    parent = path.parent if str(path.parent) else Path(".")
    if not parent.is_dir():
        raise OutputPathError(f"output directory does not exist: {parent}")
    with open(path, "w", newline="\n") as fh:
        fh.write(render_csv(result))
    return path
