"""Experiment manifests, atomic report persistence, and figure rendering.

Every CLI run writes a manifest (command, fully resolved configuration,
seeds, input/output hashes, tool version, wall time) next to its reports.
Reports themselves never contain wall-clock data, so re-running a command
from its manifest reproduces them byte for byte.  Figures are rendered with
the Agg backend and stripped of date metadata for the same reason.
"""

from __future__ import annotations

import hashlib
import json
import os
import time

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

SCHEMA_VERSION = 1
TOOL_VERSION = "0.1.0"


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def sha256_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def atomic_write_bytes(path, data: bytes):
    tmp = f"{path}.tmp-{os.getpid()}"
    with open(tmp, "wb") as fh:
        fh.write(data)
    os.replace(tmp, path)


def _canonical(obj):
    """JSON-ready copy with numpy scalars/arrays unwrapped."""
    import numpy as np

    if isinstance(obj, dict):
        return {str(k): _canonical(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_canonical(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_canonical(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, float) and obj != obj:  # NaN
        return None
    return obj


def write_json(path, payload: dict):
    body = dict(payload)
    body.setdefault("schema_version", SCHEMA_VERSION)
    data = json.dumps(_canonical(body), sort_keys=True, indent=2).encode()
    atomic_write_bytes(path, data + b"\n")


def write_csv(path, header, rows):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(repr(float(v)) if isinstance(v, float) else str(v)
                              for v in row))
    atomic_write_bytes(path, ("\n".join(lines) + "\n").encode())


def save_figure(fig, path):
    tmp = f"{path}.tmp-{os.getpid()}"
    fig.savefig(tmp, dpi=120, format="png", metadata={"Date": None})
    plt.close(fig)
    os.replace(tmp, path)


def line_figure(xs, series: dict, xlabel: str, ylabel: str, title: str,
                loglog: bool = False):
    fig, ax = plt.subplots(figsize=(5.0, 3.4))
    for label, ys in series.items():
        if loglog:
            ax.loglog(xs, ys, "o-", label=label, markersize=3)
        else:
            ax.plot(xs, ys, "o-", label=label, markersize=3)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.set_title(title, fontsize=10)
    if len(series) > 1:
        ax.legend(fontsize=8)
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    return fig


class Manifest:
    def __init__(self, command: str, config: dict, seeds=None):
        self.command = command
        self.config = dict(config)
        self.seeds = list(seeds or [])
        self.inputs = {}
        self.outputs = {}
        self._t0 = time.time()

    def record_input(self, name, path):
        self.inputs[str(name)] = sha256_file(path)

    def record_output(self, name, path):
        self.outputs[str(name)] = sha256_file(path)

    def save(self, path):
        payload = {
            "command": self.command,
            "config": _canonical(self.config),
            "seeds": self.seeds,
            "input_hashes": self.inputs,
            "output_hashes": self.outputs,
            "tool_version": TOOL_VERSION,
            "schema_version": SCHEMA_VERSION,
            "wall_time_s": round(time.time() - self._t0, 3),
        }
        atomic_write_bytes(path, json.dumps(payload, sort_keys=True,
                                            indent=2).encode() + b"\n")
