"""Configuration-driven parameter sweeps, figure presets, CSV output and plots.

A sweep config is a JSON object::

    {
      "scenario": "qfi_ratio_vs_lambda",
      "fixed": {"omega_a": 1, "omega_b": 1, "d": 0},
      "grids": [{"name": "lam", "start": 0, "stop": 0.499, "num": 200}],
      "gauge": "coulomb",
      "photon_counting": true,
      "output": "fig2_left.csv"
    }

Grid axes are combined as a cartesian product with the first axis varying
slowest; row order always follows grid order. Axis names are model
parameters (``omega_a``, ``omega_b``, ``lam``, ``d``), the reduced
coordinates ``lam_over_lcrit`` and ``d_over_dcrit``, or ``eta`` for the loss
scenario. ``d`` may also be the string ``"trk"`` (D = lam^2/omega_b).
"""

import csv
import itertools
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import CONVENTION, __version__
from .discrimination import discrimination_report
from .errors import ConfigError
from .estimation import estimation_report, lossy_single_mode, qfi_two_mode
from .model import ModelParams, d_crit, d_trk, dipole_gauge_map, lambda_crit

SCENARIOS = ("qfi_ratio_vs_lambda", "trk_ratio_maps", "discrimination_vs_lambda", "loss_vs_eta", "custom")
GAUGES = ("coulomb", "dipole")
AXES = ("omega_a", "omega_b", "lam", "d", "lam_over_lcrit", "d_over_dcrit", "eta")
PRESETS = ("fig2_left", "fig2_right", "fig3", "fig4", "fig5")

NEAR_CRITICAL = 1e-6

ESTIMATION_COLUMNS = [
    "h_two_mode",
    "h_single_mode",
    "f_homodyne",
    "f_photon_counting",
    "ratio_hd",
    "ratio_hd_single",
    "ratio_pc",
    "ratio_pc_single",
    "pc_cutoff",
]
DISCRIMINATION_COLUMNS = ["p_e", "p_e_a", "p_e_hd", "p_e_pc", "n_t", "cutoff"]
LOSS_COLUMNS = ["h_single_mode", "f_homodyne", "ratio_hd_single"]
PARAM_COLUMNS = ["omega_a", "omega_b", "lam", "d", "eta"]
META_COLUMNS = ["gauge", "tag", "status", "error", "version", "convention"]


@dataclass
class SweepConfig:
    scenario: str
    grids: list
    fixed: dict = field(default_factory=dict)
    gauge: str = "coulomb"
    photon_counting: bool = True
    output: str = "sweep.csv"
    plot: bool = False
    jobs: int = 1
    cutoff: int = None
    threshold_rule: str = "std"

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"unknown scenario {self.scenario!r}; expected one of {SCENARIOS}")
        if self.gauge not in GAUGES:
            raise ConfigError(f"unknown gauge {self.gauge!r}; expected one of {GAUGES}")
        if not self.grids:
            raise ConfigError("at least one grid axis is required")
        for axis in self.grids:
            if axis.get("name") not in AXES:
                raise ConfigError(f"unknown grid axis {axis.get('name')!r}; expected one of {AXES}")
            if len(grid_values(axis)) == 0:
                raise ConfigError(f"grid axis {axis['name']!r} is empty")
        for key in self.fixed:
            if key not in AXES:
                raise ConfigError(f"unknown fixed parameter {key!r}")

    @classmethod
    def from_dict(cls, data):
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def from_file(cls, path):
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        return cls.from_dict(data)

    def to_dict(self):
        return {name: getattr(self, name) for name in self.__dataclass_fields__}


def grid_values(axis):
    """Values of one grid axis: explicit ``values`` or ``start/stop/num`` with linear or log spacing."""
    if "values" in axis:
        return [float(v) for v in axis["values"]]
    try:
        start, stop, num = float(axis["start"]), float(axis["stop"]), int(axis["num"])
    except KeyError as exc:
        raise ConfigError(f"grid axis {axis.get('name')!r} needs 'values' or start/stop/num") from exc
    spacing = axis.get("spacing", "linear")
    if spacing == "linear":
        return np.linspace(start, stop, num).tolist()
    if spacing == "log":
        if start <= 0 or stop <= 0:
            raise ConfigError("log grids need positive bounds")
        return np.geomspace(start, stop, num).tolist()
    raise ConfigError(f"unknown spacing {spacing!r}")


def grid_points(cfg):
    names = [axis["name"] for axis in cfg.grids]
    for combo in itertools.product(*(grid_values(axis) for axis in cfg.grids)):
        point = dict(cfg.fixed)
        point.update(zip(names, combo))
        yield point


def resolve_params(point):
    """Turn a grid point into :class:`ModelParams` (before any gauge map)."""
    wa = float(point.get("omega_a", 1.0))
    wb = float(point.get("omega_b", 1.0))
    probe = ModelParams(wa, wb, 0.0, 0.0)
    if "lam_over_lcrit" in point:
        lam = float(point["lam_over_lcrit"]) * lambda_crit(probe)
    else:
        lam = float(point.get("lam", 0.0))
    probe = ModelParams(wa, wb, lam, 0.0)
    if "d_over_dcrit" in point:
        d = float(point["d_over_dcrit"]) * d_crit(probe)
    else:
        d = point.get("d", 0.0)
        d = d_trk(probe) if d == "trk" else float(d)
    return ModelParams(wa, wb, lam, d)


def _evaluate(task):
    """Evaluate one grid point; never raises, failures become rows."""
    cfg, point = task
    row = {"gauge": cfg["gauge"], "version": __version__, "convention": CONVENTION, "tag": "", "error": ""}
    try:
        p = resolve_params(point)
        row.update(omega_a=p.omega_a, omega_b=p.omega_b, lam=p.lam, d=p.d)
        if cfg["gauge"] == "dipole":
            p = dipole_gauge_map(p)
        if p.margin < NEAR_CRITICAL * p.omega_a:
            row["tag"] = "near-critical"
        scenario = cfg["scenario"]
        if scenario == "discrimination_vs_lambda":
            rep = discrimination_report(p.omega_a, p.omega_b, p.lam, cfg["cutoff"], cfg["threshold_rule"])
            row.update({k: getattr(rep, k) for k in DISCRIMINATION_COLUMNS})
        elif scenario == "loss_vs_eta":
            eta = float(point.get("eta", 0.0))
            h_a, f_hd = lossy_single_mode(p, eta)
            row.update(eta=eta, h_single_mode=h_a, f_homodyne=f_hd, ratio_hd_single=f_hd / h_a if h_a > 0 else math.nan)
        else:
            rep = estimation_report(p, photon_counting=cfg["photon_counting"] and row["tag"] != "near-critical")
            values = rep.as_dict()
            row.update({k: values.get(k) for k in ESTIMATION_COLUMNS if k in values})
            row["pc_cutoff"] = rep.diagnostics.get("pc_cutoff")
        row["status"] = "ok"
    except Exception as exc:  # recorded per point, never dropped
        row["status"] = "failed"
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


def columns_for(scenario):
    if scenario == "discrimination_vs_lambda":
        body = DISCRIMINATION_COLUMNS
    elif scenario == "loss_vs_eta":
        body = LOSS_COLUMNS
    else:
        body = ESTIMATION_COLUMNS
    return PARAM_COLUMNS + body + META_COLUMNS


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def write_csv(rows, path, scenario):
    cols = columns_for(scenario)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(cols)
        for row in rows:
            writer.writerow([_fmt(row.get(c)) for c in cols])


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def validate_rows(rows, scenario, slack=1e-6):
    """Indices of rows violating the information or error-probability ordering."""
    bad = []
    for i, row in enumerate(rows):
        if row.get("status") != "ok":
            continue
        if scenario == "discrimination_vs_lambda":
            pe, pa = row["p_e"], row["p_e_a"]
            if not (pe <= pa + 1e-9 and pa <= min(row["p_e_hd"], row["p_e_pc"]) + 1e-9):
                bad.append(i)
        elif scenario == "loss_vs_eta":
            if row["f_homodyne"] > row["h_single_mode"] * (1 + slack):
                bad.append(i)
        else:
            h, ha = row["h_two_mode"], row["h_single_mode"]
            fs = [row["f_homodyne"]] + ([row["f_photon_counting"]] if row.get("f_photon_counting") is not None else [])
            if ha > h * (1 + slack) or any(f > ha * (1 + slack) or f < -slack for f in fs):
                bad.append(i)
    return bad


@dataclass
class SweepResult:
    rows: list
    csv_path: Path
    failed: int
    invariant_violations: list
    plots: list = field(default_factory=list)

    @property
    def exit_code(self):
        return 0 if self.failed == 0 and not self.invariant_violations else 2


def run_sweep(cfg, out_dir=None, jobs=None):
    """Evaluate every grid point of ``cfg`` and write the CSV (plus plots if requested)."""
    out_dir = Path(out_dir or ".")
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / cfg.output
    if not os.access(out_dir, os.W_OK):
        raise OSError(f"output directory {out_dir} is not writable")
    jobs = jobs or cfg.jobs
    payload = cfg.to_dict()
    tasks = [(payload, point) for point in grid_points(cfg)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_evaluate, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    else:
        rows = [_evaluate(t) for t in tasks]
    failed = sum(row["status"] != "ok" for row in rows)
    if failed == len(rows):
        raise RuntimeError(f"all {failed} grid points failed; first error: {rows[0]['error']}")
    write_csv(rows, csv_path, cfg.scenario)
    result = SweepResult(rows, csv_path, failed, validate_rows(rows, cfg.scenario))
    if cfg.plot:
        result.plots = emit_plots(csv_path, cfg.scenario, out_dir)
    return result


# ---------------------------------------------------------------------------
# presets

_PRESET_N = 200


def figure_preset(name):
    """Sweep configuration reproducing the data behind one figure."""
    if name == "fig2_left":
        return SweepConfig(
            scenario="qfi_ratio_vs_lambda",
            fixed={"omega_a": 1.0, "omega_b": 1.0, "d": 0.0},
            grids=[{"name": "lam", "start": 0.0, "stop": 0.499, "num": _PRESET_N}],
            output="fig2_left.csv",
        )
    if name == "fig2_right":
        return SweepConfig(
            scenario="custom",
            fixed={"omega_a": 1.0, "omega_b": 1.0, "lam": 1.0},
            grids=[{"name": "d_over_dcrit", "start": 1.001, "stop": 100.0, "num": _PRESET_N, "spacing": "log"}],
            output="fig2_right.csv",
        )
    if name == "fig3":
        return SweepConfig(
            scenario="trk_ratio_maps",
            fixed={"omega_b": 1.0, "d": "trk"},
            grids=[
                {"name": "lam", "start": 0.01, "stop": 1.5, "num": 40},
                {"name": "omega_a", "start": 0.1, "stop": 3.0, "num": 40},
            ],
            output="fig3.csv",
        )
    if name == "fig4":
        return SweepConfig(
            scenario="loss_vs_eta",
            fixed={"omega_a": 1.0, "omega_b": 1.0, "lam": 0.2, "d": "trk"},
            grids=[{"name": "eta", "start": 0.0, "stop": 0.99, "num": _PRESET_N}],
            output="fig4.csv",
        )
    if name == "fig5":
        main = np.linspace(0.01, 0.99, _PRESET_N - 8)
        inset = 1 - np.geomspace(10**-2.25, 10**-4.5, 8)
        return SweepConfig(
            scenario="discrimination_vs_lambda",
            fixed={"omega_a": 1.0, "omega_b": 1.0},
            grids=[{"name": "lam_over_lcrit", "values": sorted(set(main.tolist()) | set(inset.tolist()))}],
            output="fig5.csv",
        )
    raise ConfigError(f"unknown figure preset {name!r}; expected one of {PRESETS}")


# ---------------------------------------------------------------------------
# plots


def _floats(rows, key):
    out = []
    for row in rows:
        try:
            out.append(float(row[key]))
        except (KeyError, TypeError, ValueError):
            out.append(math.nan)
    return np.array(out)


def emit_plots(csv_path, scenario, out_dir=None):
    """Render the figure for ``scenario`` from a sweep CSV; returns written paths."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    rows = [r for r in read_csv(csv_path) if r.get("status") == "ok"]
    if not rows:
        raise ValueError(f"{csv_path} has no successful rows")
    missing = [c for c in columns_for(scenario) if c not in rows[0]]
    if missing:
        raise ValueError(f"{csv_path} does not match the {scenario} schema (missing {missing})")
    out_dir = Path(out_dir or Path(csv_path).parent)
    stem = Path(csv_path).stem
    written = []

    if scenario == "discrimination_vs_lambda":
        lam = _floats(rows, "lam")
        lc = np.sqrt(_floats(rows, "omega_a") * _floats(rows, "omega_b")) / 2
        x = lam / lc
        fig, ax = plt.subplots(figsize=(6, 4))
        styles = {"p_e": "-", "p_e_a": "-.", "p_e_hd": "--", "p_e_pc": ":"}
        for key, ls in styles.items():
            ax.plot(x, _floats(rows, key), ls, label=key)
        ax.set_xlabel("lambda / lambda_crit")
        ax.set_ylabel("error probability")
        ax.legend(loc="lower left")
        inset = ax.inset_axes([0.55, 0.55, 0.4, 0.4])
        for key, ls in styles.items():
            inset.loglog(1 - x, _floats(rows, key), ls)
        inset.set_xlabel("1 - lambda/lambda_crit", fontsize=7)
        inset.tick_params(labelsize=6)
    elif scenario == "loss_vs_eta":
        eta = _floats(rows, "eta")
        fig, ax = plt.subplots(figsize=(6, 4))
        ax.plot(eta, _floats(rows, "h_single_mode"), "-", label="H_a")
        ax.plot(eta, _floats(rows, "f_homodyne"), "--", label="F_hd")
        ax.set_xlabel("eta")
        ax.set_ylabel("information (1/omega^2)")
        twin = ax.twinx()
        twin.plot(eta, _floats(rows, "ratio_hd_single"), ":", color="green", label="F_hd/H_a")
        twin.axhline(1.0, color="black", ls=":")
        twin.set_ylabel("ratio")
        ax.legend(loc="upper right")
    elif scenario == "trk_ratio_maps":
        lam, wa = _floats(rows, "lam"), _floats(rows, "omega_a")
        fig, axes = plt.subplots(1, 2, figsize=(10, 4))
        for ax, key in zip(axes, ["ratio_hd", "ratio_pc"]):
            tc = ax.tricontourf(lam, wa, _floats(rows, key), levels=20)
            fig.colorbar(tc, ax=ax)
            ax.set_xlabel("lambda")
            ax.set_ylabel("omega_a")
            ax.set_title(key)
    else:
        d_over = _floats(rows, "d") / np.array([d_crit(ModelParams(float(r["omega_a"]), float(r["omega_b"]), float(r["lam"]), 0.0)) for r in rows])
        use_d = scenario == "custom" and np.all(np.isfinite(d_over)) and len(set(_floats(rows, "lam"))) == 1
        x = d_over if use_d else _floats(rows, "lam")
        fig, ax = plt.subplots(figsize=(6, 4))
        for key, ls in [("ratio_hd", "-"), ("ratio_hd_single", "--"), ("ratio_pc", "-"), ("ratio_pc_single", "--")]:
            ax.plot(x, _floats(rows, key), ls, label=key)
        if use_d:
            ax.set_xscale("log")
        ax.set_xlabel("D / D_crit" if use_d else "lambda")
        ax.set_ylabel("F / H")
        ax.legend()

    fig.tight_layout()
    path = out_dir / f"{stem}.png"
    fig.savefig(path, dpi=120)
    plt.close(fig)
    written.append(path)
    return written


def point_report(omega_a, omega_b, lam, d, gauge="coulomb", photon_counting=True):
    """Single-point estimation report as a JSON-ready dict."""
    p = ModelParams(omega_a, omega_b, lam, d)
    evaluated = dipole_gauge_map(p) if gauge == "dipole" else p
    rep = estimation_report(evaluated, photon_counting=photon_counting)
    out = {
        "params": {"omega_a": omega_a, "omega_b": omega_b, "lambda": lam, "d": d, "gauge": gauge},
        "d_crit": d_crit(evaluated),
        "d_trk": d_trk(evaluated),
        "convention": CONVENTION,
        "version": __version__,
    }
    out.update({k: (float(v) if isinstance(v, (np.floating, float)) else v) for k, v in rep.as_dict().items()})
    return out


__all__ = [
    "SweepConfig",
    "SweepResult",
    "emit_plots",
    "figure_preset",
    "point_report",
    "qfi_two_mode",
    "run_sweep",
]
