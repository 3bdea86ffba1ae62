"""Command-line front end.

``thzamp {recover,phase,curve,channel} --out PATH [--config FILE] [flags]``

Settings resolve as built-in defaults, then the JSON config file, then
flags. A config file may also be a manifest written by an earlier run, in
which case its resolved configuration is reused. Every run writes
``<out stem>.manifest.json`` next to its output.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .amp import amp_config
from .core import geometry, nmse_db
from .experiments import (BenchmarkSpec, PhaseGridSpec, channel_benchmark, derive_seed,
                          dmm_l1_curve, dynamic_n_table, phase_transition, single_recovery)
from .records import (CHANNEL_HEADER, CURVE_HEADER, PHASE_HEADER, atomic_write, csv_text,
                      manifest_dict, manifest_path)
from .sensing import SensingMatrix, gaussian_matrix, toeplitz_bpsk_matrix
from .signals import SparseSignal, add_noise, get_preset, strictly_sparse, thz_like_channel


class ConfigError(ValueError):
    pass


def _frange(start, stop, step):
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + i * step, 10) for i in range(count)]


_AMP_KEYS = {
    "max_iters": (int, 200),
    "stop_tol": (float, 1e-8),
    "divergence_factor": (float, 10.0),
    "onsager": (bool, True),
    "tau_grid": ("floats?", None),
}

SCHEMAS = {
    "recover": {
        "seed": (int, 0),
        "algo": (str, "s-amp"),
        "n": (int, 200),
        "m": (int, 100),
        "k": (int, 5),
        "matrix": (str, "gaussian"),
        "signal": (str, "sparse"),
        "preset": ("str?", None),
        "snr_db": ("float?", None),
        "tau": ("float?", None),
        "matrix_csv": ("str?", None),
        "y_csv": ("str?", None),
        "truth_csv": ("str?", None),
        **_AMP_KEYS,
    },
    "phase": {
        "seed": (int, 0),
        "algo": (str, "s-amp"),
        "delta_values": ("floats", _frange(0.05, 0.95, 0.05)),
        "rho_values": ("floats", _frange(0.05, 0.95, 0.05)),
        "rho_axis": (str, "rho_prime"),
        "n_policy": (str, "fixed"),
        "n": (int, 500),
        "n_at_min": (int, 20000),
        "n_at_max": (int, 2000),
        "trials": (int, 10),
        "success_threshold_db": (float, -20.0),
        "curve": (bool, False),
        **_AMP_KEYS,
    },
    "curve": {
        "seed": (int, 0),
        "delta_values": ("floats", _frange(0.05, 1.0, 0.05)),
    },
    "channel": {
        "seed": (int, 0),
        "preset": (str, "32-band-first"),
        "m_values": ("ints", [100, 200, 400, 800, 1600, 3000]),
        "algorithms": ("strs", ["s-amp", "h-amp", "cosamp", "ls", "opt-ls"]),
        "realizations": (int, 20),
        "snr_db": (float, 20.0),
        "decay_rate": (float, 0.7),
        "tail_fraction": (float, 0.01),
        "soft_tau_grid": ("floats?", None),
        "hard_tau_grid": ("floats?", None),
        **{k: v for k, v in _AMP_KEYS.items() if k != "tau_grid"},
    },
}


def _coerce(key, kind, value):
    optional = isinstance(kind, str) and kind.endswith("?")
    if optional:
        if value is None:
            return None
        kind = kind[:-1]
    try:
        if kind is bool:
            if not isinstance(value, bool):
                raise TypeError
            return value
        if kind is int:
            if isinstance(value, bool) or int(value) != float(value):
                raise TypeError
            return int(value)
        if kind in (float, "float"):
            if isinstance(value, bool):
                raise TypeError
            return float(value)
        if kind in (str, "str"):
            if not isinstance(value, str):
                raise TypeError
            return value
        if kind in ("floats", "ints", "strs"):
            if not isinstance(value, list) or not value:
                raise TypeError
            inner = {"floats": float, "ints": int, "strs": str}[kind]
            return [_coerce(key, inner, v) for v in value]
    except (TypeError, ValueError):
        raise ConfigError(f"bad value for {key!r}: {value!r}") from None
    raise AssertionError(kind)


def load_config_file(path, command: str) -> dict:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    if "config" in data and "command" in data:
        if data["command"] != command:
            raise ConfigError(f"manifest is for command {data['command']!r}, not {command!r}")
        data = data["config"]
        if not isinstance(data, dict):
            raise ConfigError("manifest config must be a JSON object")
    return data


def resolve_config(command: str, file_values: dict, flag_values: dict) -> dict:
    schema = SCHEMAS[command]
    unknown = set(file_values) - set(schema)
    if unknown:
        raise ConfigError(f"unknown config keys for {command}: {sorted(unknown)}")
    resolved = {}
    for key, (kind, default) in schema.items():
        value = default
        if key in file_values:
            value = file_values[key]
        if flag_values.get(key) is not None:
            value = flag_values[key]
        resolved[key] = _coerce(key, kind, value)
    if resolved["seed"] < 0:
        raise ConfigError("seed must be nonnegative")
    return resolved


def _amp_from(cfg: dict):
    try:
        return amp_config("soft", max_iters=cfg["max_iters"], stop_tol=cfg["stop_tol"],
                          divergence_factor=cfg["divergence_factor"], onsager=cfg["onsager"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _write_outputs(out: Path, command: str, cfg: dict, files: dict) -> None:
    for path, text in files.items():
        atomic_write(path, text)
    manifest = manifest_dict(command, cfg, list(files))
    atomic_write(manifest_path(out), json.dumps(manifest, indent=2, sort_keys=True) + "\n")


# --------------------------------------------------------------------------
# commands


def cmd_recover(cfg: dict, out: Path, workers: int) -> int:
    algo = cfg["algo"]
    if algo not in ("s-amp", "h-amp", "cosamp", "ls", "opt-ls"):
        raise ConfigError(f"unknown algorithm {algo!r}")
    seed = cfg["seed"]
    truth = None
    if cfg["matrix_csv"] or cfg["y_csv"]:
        if not (cfg["matrix_csv"] and cfg["y_csv"]):
            raise ConfigError("matrix_csv and y_csv must be given together")
        A = SensingMatrix.from_csv(cfg["matrix_csv"])
        y = np.loadtxt(cfg["y_csv"], delimiter=",", ndmin=1)
        if cfg["truth_csv"]:
            truth = SparseSignal.from_csv(cfg["truth_csv"]).values
        k = cfg["k"]
    else:
        if cfg["preset"] is not None:
            preset = get_preset(cfg["preset"])
            n, k = preset.n, preset.k
        else:
            n, k = cfg["n"], cfg["k"]
        m = cfg["m"]
        try:
            geometry(n, m, k)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        build = {"gaussian": gaussian_matrix, "toeplitz-bpsk": toeplitz_bpsk_matrix}.get(cfg["matrix"])
        if build is None:
            raise ConfigError(f"unknown matrix kind {cfg['matrix']!r}")
        A = build(m, n, derive_seed(seed, 0, 0, 0))
        if cfg["signal"] == "sparse":
            truth = strictly_sparse(n, k, derive_seed(seed, 0, 0, 1)).values
        elif cfg["signal"] == "thz":
            if cfg["preset"] is None:
                raise ConfigError("signal 'thz' needs a preset")
            truth = thz_like_channel(preset, seed=derive_seed(seed, 0, 0, 3)).values
        else:
            raise ConfigError(f"unknown signal kind {cfg['signal']!r}")
        snr = math.inf if cfg["snr_db"] is None else cfg["snr_db"]
        y, _ = add_noise(A.forward(truth), snr, derive_seed(seed, 0, 0, 2))
    if y.shape != (A.m,):
        raise ConfigError(f"y has {y.size} entries but the matrix has {A.m} rows")
    if cfg["tau"] is None and algo in ("s-amp", "h-amp") and truth is None:
        raise ConfigError("AMP without truth needs an explicit tau")

    estimate, result, tau = single_recovery(algo, A, y, k=k, h_true=truth, tau=cfg["tau"],
                                            config=_amp_from(cfg), tau_grid=cfg["tau_grid"])
    summary = {
        "algorithm": algo,
        "n": A.n,
        "m": A.m,
        "k": k,
        "tau": tau,
        "iterations": None if result is None else result.iterations_run,
        "status": "converged" if result is None else result.status,
    }
    if truth is not None and np.any(truth):
        summary["nmse_db"] = nmse_db(estimate, truth)
    lines = ["index,value"] + [f"{i},{v!r}" for i, v in enumerate(map(float, estimate))]
    summary_path = out.with_name(out.stem + ".summary.json")
    _write_outputs(out, "recover", cfg, {
        out: "\n".join(lines) + "\n",
        summary_path: json.dumps(summary, indent=2, sort_keys=True) + "\n",
    })
    return 0


def cmd_phase(cfg: dict, out: Path, workers: int) -> int:
    try:
        n_table = None
        if cfg["n_policy"] == "dynamic":
            n_table = dynamic_n_table(cfg["delta_values"], cfg["n_at_min"], cfg["n_at_max"])
        elif cfg["n_policy"] != "fixed":
            raise ConfigError(f"unknown n_policy {cfg['n_policy']!r}")
        spec = PhaseGridSpec(
            delta_values=tuple(cfg["delta_values"]), rho_values=tuple(cfg["rho_values"]),
            rho_axis=cfg["rho_axis"], n=cfg["n"], n_table=n_table, trials=cfg["trials"],
            algo=cfg["algo"], config=_amp_from(cfg),
            tau_grid=None if cfg["tau_grid"] is None else tuple(cfg["tau_grid"]),
            success_threshold_db=cfg["success_threshold_db"], master_seed=cfg["seed"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    results = phase_transition(spec, workers)
    header = PHASE_HEADER + (("rho_prime_critical",) if cfg["curve"] else ())
    rows = []
    for r in results:
        row = [r.delta, r.rho_prime, r.n, r.m, r.k, r.trials, r.successes, r.success_rate,
               "" if r.status == "skipped" else r.mean_nmse_db, r.status]
        if cfg["curve"]:
            row.append(dmm_l1_curve(r.delta) if 0 < r.delta <= 1 else "")
        rows.append(row)
    _write_outputs(out, "phase", cfg, {out: csv_text(header, rows)})
    return 0


def cmd_curve(cfg: dict, out: Path, workers: int) -> int:
    rows, failed = [], False
    for d in cfg["delta_values"]:
        try:
            rows.append([d, dmm_l1_curve(d)])
        except ValueError:
            rows.append([d, "error"])
            failed = True
    _write_outputs(out, "curve", cfg, {out: csv_text(CURVE_HEADER, rows)})
    if failed:
        print("error: some delta values lie outside (0, 1]; see rows marked 'error'", file=sys.stderr)
    return 1 if failed else 0


def cmd_channel(cfg: dict, out: Path, workers: int) -> int:
    try:
        spec = BenchmarkSpec(
            preset=get_preset(cfg["preset"]), m_values=tuple(cfg["m_values"]),
            algorithms=tuple(cfg["algorithms"]), realizations=cfg["realizations"],
            snr_db=cfg["snr_db"], master_seed=cfg["seed"], decay_rate=cfg["decay_rate"],
            tail_fraction=cfg["tail_fraction"], config=_amp_from(cfg),
            soft_tau_grid=None if cfg["soft_tau_grid"] is None else tuple(cfg["soft_tau_grid"]),
            hard_tau_grid=None if cfg["hard_tau_grid"] is None else tuple(cfg["hard_tau_grid"]))
        spec.channel()
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    rows = [[r.preset, r.n, r.k, r.m, r.algorithm, r.snr_db, r.trials,
             "skipped" if r.status == "skipped" else r.mse_db]
            for r in channel_benchmark(spec, workers)]
    _write_outputs(out, "channel", cfg, {out: csv_text(CHANNEL_HEADER, rows)})
    return 0


COMMANDS = {"recover": cmd_recover, "phase": cmd_phase, "curve": cmd_curve, "channel": cmd_channel}


def _floats(text):
    return [float(v) for v in text.split(",")]


def _ints(text):
    return [int(v) for v in text.split(",")]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="thzamp", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", type=Path, help="JSON config or manifest file")
        p.add_argument("--seed", type=int, help="master seed")
        p.add_argument("--workers", type=int, default=1, help="worker processes (default 1)")
        p.add_argument("--out", type=Path, required=True, help="output file")
        p.add_argument("--preset", help="channel preset name")

    p = sub.add_parser("recover", help="run one recovery")
    common(p)
    p.add_argument("--algo")
    p.add_argument("--n", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--matrix")
    p.add_argument("--snr-db", dest="snr_db", type=float)
    p.add_argument("--tau", type=float)
    p.add_argument("--max-iters", dest="max_iters", type=int)

    p = sub.add_parser("phase", help="empirical phase-transition grid")
    common(p)
    p.add_argument("--algo")
    p.add_argument("--delta", dest="delta_values", type=_floats, help="comma-separated")
    p.add_argument("--rho", dest="rho_values", type=_floats, help="comma-separated")
    p.add_argument("--n", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--max-iters", dest="max_iters", type=int)
    p.add_argument("--curve", action="store_const", const=True, default=None,
                   help="append the analytical l1 boundary column")

    p = sub.add_parser("curve", help="analytical l1 phase-transition curve")
    common(p)
    p.add_argument("--delta", dest="delta_values", type=_floats, help="comma-separated")

    p = sub.add_parser("channel", help="channel-estimation benchmark")
    common(p)
    p.add_argument("--m-values", dest="m_values", type=_ints, help="comma-separated")
    p.add_argument("--realizations", type=int)
    p.add_argument("--snr-db", dest="snr_db", type=float)
    p.add_argument("--max-iters", dest="max_iters", type=int)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    flags = {k: v for k, v in vars(args).items()
             if k not in ("command", "config", "workers", "out") and v is not None}
    try:
        if args.workers < 1:
            raise ConfigError("workers must be at least 1")
        if "preset" in flags and "preset" not in SCHEMAS[args.command]:
            raise ConfigError(f"--preset does not apply to {args.command}")
        file_values = load_config_file(args.config, args.command) if args.config else {}
        cfg = resolve_config(args.command, file_values, flags)
        return COMMANDS[args.command](cfg, args.out, args.workers)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # report, never leave a half-written result
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
