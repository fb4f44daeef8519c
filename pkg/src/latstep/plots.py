"""SVG plot generation from trace and sweep CSVs.

Rendering is deterministic: fixed hash salt, no embedded dates, Agg backend.
"""

from __future__ import annotations

import csv
import os

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "latstep"
matplotlib.rcParams["svg.fonttype"] = "path"

import matplotlib.pyplot as plt  # noqa: E402

from .errors import ConfigError, LatstepError  # noqa: E402

_SAVEFIG = {"format": "svg", "metadata": {"Date": None}}


def _read_csv(path: str) -> dict[str, list]:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise ConfigError(f"{path!r} has no header row")
        cols: dict[str, list] = {name: [] for name in reader.fieldnames}
        for row in reader:
            for name in reader.fieldnames:
                cols[name].append(row[name])
    if not next(iter(cols.values()), []):
        raise ConfigError(f"{path!r} has a header but no data rows")
    return cols


def _floats(cols: dict, name: str) -> list[float]:
    if name not in cols:
        raise ConfigError(f"missing column {name!r}")
    return [float(v) for v in cols[name]]


def detect_kind(path: str) -> str:
    """'trace' or 'sweep', from the CSV header."""
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
    if "t_s" in header:
        return "trace"
    if "magnitude_n" in header:
        return "sweep"
    raise ConfigError(f"{path!r} is neither a trace nor a sweep CSV")


def plot_trace(csv_path: str, out_dir: str, threshold: float = 2500.0) -> list[str]:
    """Accel/CoG-ZMP/roll time-series figures from a trace CSV."""
    cols = _read_csv(csv_path)
    t = _floats(cols, "t_s")
    os.makedirs(out_dir, exist_ok=True)
    written = []

    fig, ax = plt.subplots(figsize=(8, 4))
    ax.plot(t, _floats(cols, "accel_raw_mmps2"), lw=0.6, color="0.7", label="raw")
    ax.plot(t, _floats(cols, "accel_filt_mmps2"), lw=1.2, color="C0", label="filtered")
    for sign in (1.0, -1.0):
        ax.axhline(sign * threshold, color="C3", ls="--", lw=0.8)
    ax.set_xlabel("time [s]")
    ax.set_ylabel("lateral accel [mm/s^2]")
    ax.legend(loc="upper right")
    path = os.path.join(out_dir, "accel.svg")
    fig.savefig(path, **_SAVEFIG)
    plt.close(fig)
    written.append(path)

    fig, ax = plt.subplots(figsize=(8, 4))
    ax.plot(t, _floats(cols, "x_m"), lw=1.2, color="C0", label="CoG")
    ax.plot(t, _floats(cols, "x_zmp_m"), lw=0.8, color="C1", label="ZMP")
    ax.plot(t, _floats(cols, "support_x_m"), lw=0.8, color="C2",
            drawstyle="steps-post", label="support")
    ax.set_xlabel("time [s]")
    ax.set_ylabel("lateral position [m]")
    ax.legend(loc="upper right")
    path = os.path.join(out_dir, "cog_zmp.svg")
    fig.savefig(path, **_SAVEFIG)
    plt.close(fig)
    written.append(path)

    fig, ax = plt.subplots(figsize=(8, 4))
    ax.plot(t, _floats(cols, "roll_proxy_deg"), lw=1.2, color="C0")
    ax.set_xlabel("time [s]")
    ax.set_ylabel("roll proxy [deg]")
    path = os.path.join(out_dir, "roll.svg")
    fig.savefig(path, **_SAVEFIG)
    plt.close(fig)
    written.append(path)
    return written


def plot_sweep(csv_path: str, out_dir: str) -> list[str]:
    """Outcome overview across impact magnitudes, one line per arm."""
    cols = _read_csv(csv_path)
    mags = _floats(cols, "magnitude_n")
    arm = [v == "1" for v in cols.get("reflex_enabled", [])]
    recovered = [v == "1" for v in cols.get("recovered", [])]
    roll = _floats(cols, "max_roll_deg")
    os.makedirs(out_dir, exist_ok=True)

    fig, ax = plt.subplots(figsize=(8, 4))
    for enabled, color, label in ((True, "C0", "reflex on"), (False, "C3", "reflex off")):
        xs = [m for m, a in zip(mags, arm) if a == enabled]
        ys = [r for r, a in zip(roll, arm) if a == enabled]
        ok = [rec for rec, a in zip(recovered, arm) if a == enabled]
        if not xs:
            continue
        ax.plot(xs, ys, marker="o", ms=4, lw=1.0, color=color, label=label)
        fell = [(x, y) for x, y, r in zip(xs, ys, ok) if not r]
        if fell:
            ax.scatter(*zip(*fell), marker="x", s=48, color=color, zorder=3)
    ax.set_xlabel("impact magnitude [N]")
    ax.set_ylabel("max roll proxy [deg]   (x = fell)")
    ax.legend(loc="upper left")
    path = os.path.join(out_dir, "sweep_roll.svg")
    fig.savefig(path, **_SAVEFIG)
    plt.close(fig)
    return [path]


def plot_csv(csv_path: str, out_dir: str) -> list[str]:
    kind = detect_kind(csv_path)
    if kind == "trace":
        return plot_trace(csv_path, out_dir)
    if kind == "sweep":
        return plot_sweep(csv_path, out_dir)
    raise LatstepError(f"unsupported CSV kind {kind!r}")
