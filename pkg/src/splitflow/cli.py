"""Batch experiment runner.

Commands map one-to-one onto the verification entry points:

* ``maslov``       cross-validate the two Maslov algorithms on seeded paths
* ``reduce``       Maslov index before/after the weighted reduction
* ``aps-compare``  projector-difference decay table over a truncation sweep
* ``split``        splitting identity for one operator family
* ``aps-split``    spectral-boundary splitting with index corrections
* ``asymmetry``    asymmetry index with symmetry guards
* ``sweep``        N seeded instances of one of the above, summarized as CSV

Configuration comes from ``--config`` (JSON) with command-line overrides;
unknown keys are rejected and nothing is written unless the configuration
validates.  Reports are JSON, tables are CSV; both are deterministic for a
fixed seed (timings go to stdout only).  Exit status is 0 exactly when
every asserted integer identity held.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import conventions as conv
from .errors import ConfigError, DiagnosticError, RejectedInstance, SplitflowError
from .families import builtin_family, family_from_config
from .formulas import asymmetry_report, verify_aps_splitting, verify_splitting
from .modes import (
    TraceSpace,
    aps_projector,
    block_rotation_path,
    circle_spectrum,
    mode_cauchy_lagrangian,
    projection_difference_report,
    reduction_setup,
    spectrum_from_json,
    split_and_reduce,
    stabilization_table,
    swapped_plane_projector,
)
from .symplectic import maslov_crossing, maslov_unitary, random_lagrangian, random_path, standard_space

_COMMANDS = ("maslov", "reduce", "aps-compare", "split", "aps-split", "asymmetry", "sweep")
_RANDOMIZED = ("maslov", "reduce", "split", "aps-split", "asymmetry", "sweep")

_ALLOWED_KEYS = {
    "maslov": {"command", "seed", "out", "convention", "dim", "count", "loops"},
    "reduce": {"command", "seed", "out", "convention", "truncation", "count"},
    "aps-compare": {"command", "seed", "out", "convention", "spectrum", "sweep", "rank_modes"},
    "split": {"command", "seed", "out", "convention", "family"},
    "aps-split": {"command", "seed", "out", "convention", "family"},
    "asymmetry": {"command", "seed", "out", "convention", "family"},
    "sweep": {"command", "seed", "out", "convention", "task", "count", "dim", "truncation", "family"},
}

_DEFAULTS = {
    "out": "splitflow-out",
    "convention": conv.DEFAULT_CONVENTION,
    "dim": 4,
    "count": 5,
    "loops": 2,
    "truncation": 64,
    "sweep": [16, 32, 64, 128],
    "rank_modes": [1, 2],
    "spectrum": "circle:128",
    "family": "random-pwc",
    "task": "split",
}


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config file must hold a JSON object")
    return cfg


def _resolve(args: argparse.Namespace) -> dict:
    cfg = _load_config(args.config)
    cli_cmd = args.command
    if "command" in cfg and cli_cmd is not None and cfg["command"] != cli_cmd:
        raise ConfigError(
            f"config names command {cfg['command']!r} but {cli_cmd!r} was requested"
        )
    command = cli_cmd or cfg.get("command")
    if command not in _COMMANDS:
        raise ConfigError(f"no command given; expected one of {_COMMANDS}")
    cfg["command"] = command
    for key in ("seed", "out", "convention", "dim", "count", "loops", "truncation",
                "family", "task", "spectrum"):
        val = getattr(args, key.replace("-", "_"), None)
        if val is not None:
            cfg[key] = val
    if args.sweep is not None:
        cfg["sweep"] = [int(x) for x in args.sweep.split(",")]
    unknown = set(cfg) - _ALLOWED_KEYS[command]
    if unknown:
        raise ConfigError(f"unknown config keys for {command}: {sorted(unknown)}")
    merged = dict(_DEFAULTS)
    merged.update(cfg)
    conv.check_convention(merged["convention"])
    if command in _RANDOMIZED and "seed" not in cfg:
        raise ConfigError(f"command {command!r} is randomized: a seed is mandatory")
    merged.setdefault("seed", 0)
    merged["seed"] = int(merged["seed"])
    return merged


def _family_of(cfg: dict, seed: int):
    spec = cfg["family"]
    if isinstance(spec, str):
        return builtin_family(spec, seed)
    if isinstance(spec, dict):
        if "builtin" in spec and "seed" not in spec:
            spec = dict(spec)
            spec["seed"] = seed
        return family_from_config(spec)
    raise ConfigError("family must be a builtin name or a config object")


def _spectrum_of(token) -> "TangentialSpectrum":
    if isinstance(token, dict):
        token = token.get("path")
    if isinstance(token, str) and token.startswith("circle:"):
        return circle_spectrum(int(token.split(":", 1)[1]))
    try:
        text = Path(token).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read spectrum file {token}: {exc}") from exc
    return spectrum_from_json(text)


# ---------------------------------------------------------------------------
# command implementations; each returns (status_ok, report_dict, tables)
# where tables maps filename -> list of rows (first row is the header)


def _run_maslov(cfg: dict):
    rows = [["instance", "seed", "dim", "loop", "crossing", "unitary", "agree"]]
    instances = []
    ok = True
    total = cfg["count"] + cfg["loops"]
    for i in range(total):
        seed = cfg["seed"] + i
        loop = i >= cfg["count"]
        rng = np.random.default_rng(np.random.PCG64([seed, 17]))
        space = standard_space(cfg["dim"])
        path = random_path(space, rng, loop=loop)
        ref = random_lagrangian(space, rng)
        a = maslov_crossing(path, ref, cfg["convention"])
        b = maslov_unitary(path, ref, cfg["convention"])
        agree = a.value == b.value
        ok &= agree
        rows.append([i, seed, cfg["dim"], int(loop), a.value, b.value, int(agree)])
        instances.append({
            "instance": i, "seed": seed, "loop": loop,
            "crossing": a.to_dict(), "unitary": b.to_dict(), "agree": agree,
        })
    return ok, {"command": "maslov", "instances": instances}, {"maslov.csv": rows}


def _run_reduce(cfg: dict):
    spec = circle_spectrum(cfg["truncation"])
    setup = reduction_setup(spec)
    rows = [["instance", "seed", "before", "after", "agree"]]
    instances = []
    ok = True
    for i in range(cfg["count"]):
        seed = cfg["seed"] + i
        rng = np.random.default_rng(np.random.PCG64([seed, 23]))
        path = block_rotation_path(spec, rng, n_active=3, max_turns=1, max_mode=6)
        before, after = split_and_reduce(setup, path, cfg["convention"])
        agree = before.value == after.value
        ok &= agree
        rows.append([i, seed, before.value, after.value, int(agree)])
        instances.append({"instance": i, "seed": seed, "before": before.value,
                          "after": after.value, "agree": agree})
    return ok, {"command": "reduce", "truncation": cfg["truncation"],
                "instances": instances}, {"reduce.csv": rows}


def _run_aps_compare(cfg: dict):
    base = _spectrum_of(cfg["spectrum"])
    sweep = tuple(int(k) for k in cfg["sweep"])
    if max(sweep) > base.K:
        raise ConfigError("sweep exceeds the truncation of the given spectrum")

    def pair_at(K):
        spec = base.truncated(K)
        P = aps_projector(TraceSpace(spec, "minus"))
        Q = mode_cauchy_lagrangian(spec).projector()
        return P, Q

    report = projection_difference_report(pair_at, sweep)
    stab = stabilization_table(report)
    rank_modes = tuple(int(k) for k in cfg["rank_modes"])
    rank_rows = []
    rank_ok = True
    for K in sweep:
        spec = base.truncated(K)
        setup = reduction_setup(spec)
        setup = type(setup)(setup.big, setup.small, setup.diag, rank_modes)
        P = aps_projector(TraceSpace(spec, "minus"))
        Q = swapped_plane_projector(setup, role="plus")
        s = np.linalg.svd(P - Q, compute_uv=False)
        rank = int(np.sum(s > 1e-10))
        rank_ok &= rank <= 2 * len(rank_modes)
        rank_rows.append({"K": K, "rank": rank, "bound": 2 * len(rank_modes)})
    ok = stab["max_relative_change"] < 0.05 and stab["counts_constant"] and rank_ok
    table = [["K", "j", "singular_value"]]
    for row in report["rows"]:
        for j, sv in enumerate(row["singular_values"], start=1):
            table.append([row["K"], j, repr(float(sv))])
    rep = {
        "command": "aps-compare",
        "sweep": list(sweep),
        "difference": report,
        "stabilization": stab,
        "finite_rank_pair": {"modes": list(rank_modes), "rows": rank_rows},
    }
    return ok, rep, {"decay.csv": table}


def _run_split(cfg: dict, aps: bool):
    fam = _family_of(cfg, cfg["seed"])
    verify = verify_aps_splitting if aps else verify_splitting
    rep = verify(fam, cfg["convention"])
    ok = rep.residual == 0
    return ok, {"command": "aps-split" if aps else "split", "report": rep.to_dict()}, {}


def _run_asymmetry(cfg: dict):
    fam = _family_of(cfg, cfg["seed"])
    rep = asymmetry_report(fam)
    symmetric = rep["symmetry_defect"] < 5e-8
    ok = (rep["value"] == 0) if symmetric else True
    rep = dict(rep)
    rep["symmetric"] = symmetric
    return ok, {"command": "asymmetry", "report": rep}, {}


def _run_sweep(cfg: dict):
    task = cfg["task"]
    if task not in ("split", "aps-split", "maslov", "reduce", "asymmetry"):
        raise ConfigError(f"unknown sweep task {task!r}")
    count = cfg["count"]
    rows = []
    instances = []
    ok = True
    rejected_total = 0
    if task in ("split", "aps-split"):
        verify = verify_aps_splitting if task == "aps-split" else verify_splitting
        rows.append(["instance", "seed", "sf_total", "sf_minus", "sf_plus",
                     "hormander_minus", "hormander_plus", "residual", "rejected_draws"])
        for i in range(count):
            rejected = 0
            rep = None
            for attempt in range(12):
                seed = int(np.random.default_rng(
                    np.random.PCG64([cfg["seed"], i, attempt])).integers(0, 2**31))
                fam = _family_of(cfg, seed)
                try:
                    rep = verify(fam, cfg["convention"], guard=True)
                    break
                except RejectedInstance:
                    rejected += 1
            if rep is None:
                raise DiagnosticError(f"instance {i}: all redraws rejected")
            rejected_total += rejected
            ok &= rep.residual == 0
            rows.append([i, seed, rep.sf_total, rep.sf_minus, rep.sf_plus,
                         rep.hormander_minus, rep.hormander_plus, rep.residual, rejected])
            instances.append(rep.to_dict())
    elif task == "maslov":
        sub = dict(cfg)
        sub["loops"] = max(1, count // 4)
        sub["count"] = count - sub["loops"]
        ok, rep, tables = _run_maslov(sub)
        return ok, {"command": "sweep", "task": task, "detail": rep}, {
            "summary.csv": tables["maslov.csv"]}
    elif task == "reduce":
        ok, rep, tables = _run_reduce(cfg)
        return ok, {"command": "sweep", "task": task, "detail": rep}, {
            "summary.csv": tables["reduce.csv"]}
    else:  # asymmetry
        rows.append(["instance", "seed", "value", "symmetric", "rejected_draws"])
        for i in range(count):
            seed = cfg["seed"] + i
            fam = _family_of(dict(cfg, family=cfg.get("family", "mirror")), seed)
            rep = asymmetry_report(fam)
            symmetric = rep["symmetry_defect"] < 5e-8
            if symmetric:
                ok &= rep["value"] == 0
            rows.append([i, seed, rep["value"], int(symmetric), 0])
            instances.append(rep)
    summary = {
        "command": "sweep",
        "task": task,
        "count": count,
        "rejected_draws": rejected_total,
        "instances": instances,
    }
    return ok, summary, {"summary.csv": rows}


def run_config(cfg: dict) -> tuple[int, dict]:
    """Execute a resolved configuration; returns (exit status, report)."""
    t0 = time.perf_counter()
    command = cfg["command"]
    if command == "maslov":
        ok, report, tables = _run_maslov(cfg)
    elif command == "reduce":
        ok, report, tables = _run_reduce(cfg)
    elif command == "aps-compare":
        ok, report, tables = _run_aps_compare(cfg)
    elif command == "split":
        ok, report, tables = _run_split(cfg, aps=False)
    elif command == "aps-split":
        ok, report, tables = _run_split(cfg, aps=True)
    elif command == "asymmetry":
        ok, report, tables = _run_asymmetry(cfg)
    elif command == "sweep":
        ok, report, tables = _run_sweep(cfg)
    else:  # pragma: no cover - guarded by _resolve
        raise ConfigError(f"unknown command {command!r}")
    elapsed = time.perf_counter() - t0

    report["status"] = "ok" if ok else "failed"
    report["seed"] = cfg["seed"]
    report["convention"] = cfg["convention"]
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(
        json.dumps(report, indent=2, sort_keys=True, default=_json_default) + "\n"
    )
    for name, rows in tables.items():
        with open(out / name, "w", newline="") as fh:
            csv.writer(fh).writerows(rows)
    print(f"{command}: {report['status']} ({elapsed:.2f}s); artifacts in {out}/")
    return (0 if ok else 1), report


def _json_default(obj):
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj)}")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="splitflow",
        description="spectral-flow splitting laboratory",
    )
    ap.add_argument("command", nargs="?", choices=_COMMANDS)
    ap.add_argument("--config", help="JSON configuration file")
    ap.add_argument("--seed", type=int, help="base seed (mandatory for randomized commands)")
    ap.add_argument("--out", help="output directory")
    ap.add_argument("--convention", choices=conv.CONVENTIONS,
                    help="endpoint crossing convention")
    ap.add_argument("--dim", type=int, help="symplectic dimension (maslov)")
    ap.add_argument("--count", type=int, help="number of instances")
    ap.add_argument("--loops", type=int, help="number of loop paths (maslov)")
    ap.add_argument("--truncation", type=int, help="mode truncation (reduce)")
    ap.add_argument("--family", help="builtin family name (split/aps-split/asymmetry)")
    ap.add_argument("--task", help="sweep task")
    ap.add_argument("--spectrum", help="spectrum file or circle:K (aps-compare)")
    ap.add_argument("--sweep", help="comma-separated truncation sweep (aps-compare)")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _resolve(args)
    except ConfigError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    try:
        status, _report = run_config(cfg)
    except ConfigError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except SplitflowError as exc:
        out = Path(cfg["out"])
        out.mkdir(parents=True, exist_ok=True)
        failure = {
            "status": "error",
            "command": cfg["command"],
            "seed": cfg["seed"],
            "error": type(exc).__name__,
            "message": str(exc),
        }
        (out / "report.json").write_text(json.dumps(failure, indent=2, sort_keys=True) + "\n")
        print(f"diagnostic failure: {exc}", file=sys.stderr)
        return 1
    return status


if __name__ == "__main__":
    raise SystemExit(main())
