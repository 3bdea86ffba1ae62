"""CSV and JSON-manifest serialization shared by the experiment drivers."""

from __future__ import annotations

import json
import math
import os
import tempfile
from pathlib import Path

import numpy as np

from .core import NEG_INF_DB

PHASE_HEADER = ("delta", "rho_prime", "n", "m", "k", "trials", "successes",
                "success_rate", "mean_nmse_db", "status")
CURVE_HEADER = ("delta", "rho_prime_critical")
CHANNEL_HEADER = ("preset", "n", "k", "m", "algorithm", "snr_db", "trials", "mse_db")


def format_value(value) -> str:
    """Render a CSV cell: integers verbatim, floats with 12 significant digits.

    ``-inf`` becomes the ``-300.0`` sentinel; ``+inf`` is written as ``inf``.
    """
    if isinstance(value, bool) or value is None:
        return "" if value is None else str(value).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else format_value(NEG_INF_DB)
        text = f"{value:.12g}"
        if not any(c in text for c in ".en"):
            text += ".0"
        return text
    return str(value)


def csv_text(header, rows) -> str:
    lines = [",".join(header)]
    lines.extend(",".join(format_value(v) for v in row) for row in rows)
    return "\n".join(lines) + "\n"


def atomic_write(path, text: str) -> None:
    """Write through a temporary file in the same directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(path, header, rows) -> None:
    atomic_write(path, csv_text(header, rows))


def manifest_path(out_path) -> Path:
    out_path = Path(out_path)
    return out_path.with_name(out_path.stem + ".manifest.json")


def manifest_dict(command: str, config: dict, outputs) -> dict:
    from . import __version__

    return {
        "command": command,
        "code_version": __version__,
        "master_seed": config.get("seed"),
        "config": config,
        "outputs": [str(p) for p in outputs],
    }


def write_manifest(path, command: str, config: dict, outputs) -> None:
    text = json.dumps(manifest_dict(command, config, outputs), indent=2, sort_keys=True)
    atomic_write(path, text + "\n")
