"""Command-line entry point for the three experiment families.

Subcommands: ``sum-game``, ``hypergraph``, ``subspace``, ``verify``,
``audit``.  Options may come from a flat key-value JSON config file
(``--config``); explicit flags override file values.  Exit codes: 0 when
all configured thresholds pass, 1 on a threshold failure, 2 on invalid
configuration.  Reports are JSON with sorted keys and no timestamps, so
the same config and seed reproduce identical bytes.
"""

from __future__ import annotations

import csv
import io
import json
import sys
from pathlib import Path

import click
import numpy as np

from .experiments import (
    run_hypergraph_experiment,
    run_hypergraph_trial,
    run_subspace_experiment,
    run_subspace_trial,
    run_sum_game_experiment,
    sum_game_transcripts_csv,
)
from .game import STRATEGIES
from .hypergraph.io import parse_edge_stream
from .seeding import derive_seed


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise click.UsageError(f"cannot read config file {path}: {exc}")
    if not isinstance(data, dict):
        raise click.UsageError(f"config file {path} must hold a flat JSON object")
    return data


def _merge(flags: dict, file_cfg: dict, defaults: dict, required: tuple = ()) -> dict:
    unknown = set(file_cfg) - set(defaults)
    if unknown:
        raise click.UsageError(f"unknown config keys: {sorted(unknown)}")
    merged = {}
    for key, default in defaults.items():
        value = flags.get(key)
        if value is None:
            value = file_cfg.get(key, default)
        merged[key] = value
    missing = [k for k in required if merged[k] is None]
    if missing:
        raise click.UsageError(f"missing required options: {missing}")
    return merged


def _emit(text: str, out: str | None) -> None:
    if out is None or out == "-":
        click.echo(text, nl=False)
    else:
        Path(out).write_text(text)


def _emit_json(data: dict, out: str | None) -> None:
    _emit(json.dumps(data, indent=2, sort_keys=True) + "\n", out)


def _read_edges(stream: str) -> list[tuple[int, ...]]:
    if stream == "-":
        return list(parse_edge_stream(sys.stdin))
    try:
        return list(parse_edge_stream(Path(stream).read_text().splitlines()))
    except OSError as exc:
        raise click.UsageError(f"cannot read edge stream {stream}: {exc}")


def _read_rows(stream: str) -> np.ndarray:
    try:
        lines = (
            sys.stdin.read().splitlines()
            if stream == "-"
            else Path(stream).read_text().splitlines()
        )
    except OSError as exc:
        raise click.UsageError(f"cannot read row stream {stream}: {exc}")
    rows = []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            rows.append([int(tok) for tok in line.split()])
        except ValueError:
            raise click.UsageError(f"row stream line {lineno}: expected integers")
    if not rows:
        raise click.UsageError("row stream is empty")
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise click.UsageError(f"row stream has inconsistent widths: {sorted(widths)}")
    return np.asarray(rows, dtype=np.float64)


def _positive(name: str, value, strict: bool = True) -> None:
    if value is None:
        return
    if strict and not value > 0:
        raise click.UsageError(f"{name} must be positive, got {value}")
    if not strict and not value >= 0:
        raise click.UsageError(f"{name} must be non-negative, got {value}")


@click.group()
@click.version_option()
def main() -> None:
    """Robust online sampling experiments: sum game, hypergraph, subspace."""


# ---------------------------------------------------------------------------
# sum-game
# ---------------------------------------------------------------------------

_SUM_DEFAULTS = {
    "strategy": "ones",
    "epsilon": 0.2,
    "delta": 0.1,
    "delta_cap": 1e6,
    "amp": None,
    "const_c": 3.0,
    "rounds": 2000,
    "trials": 400,
    "seed": 0,
    "jobs": 1,
    "min_win_rate": None,
}


@main.command("sum-game")
@click.option("--strategy", type=click.Choice(STRATEGIES), default=None)
@click.option("--eps", "epsilon", type=float, default=None, help="Relative accuracy.")
@click.option("--delta", type=float, default=None, help="Failure probability.")
@click.option("--delta-cap", type=float, default=None, help="Bound on sum / first item.")
@click.option("--amp", type=float, default=None, help="Override the amplification factor.")
@click.option("--const-c", type=float, default=None, help="Leading constant in the amp formula.")
@click.option("--rounds", "-T", type=int, default=None, help="Rounds per game.")
@click.option("--trials", type=int, default=None)
@click.option("--seed", type=int, default=None, help="Master seed.")
@click.option("--jobs", type=int, default=None, help="Parallel trial workers.")
@click.option("--min-win-rate", type=float, default=None, help="Pass threshold (default 1 - delta - 0.025).")
@click.option("--out", type=str, default=None, help="Output path ('-' for stdout).")
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json")
@click.option("--config", "config_path", type=str, default=None, help="Flat JSON config file.")
def sum_game(config_path, out, fmt, **flags) -> None:
    """Play one adversary strategy against the sampler over many trials."""
    cfg = _merge(flags, _load_config(config_path), _SUM_DEFAULTS)
    if cfg["trials"] < 1:
        raise click.UsageError(f"trials must be >= 1, got {cfg['trials']}")
    if cfg["rounds"] < 1:
        raise click.UsageError(f"rounds must be >= 1, got {cfg['rounds']}")
    for key in ("epsilon", "delta", "delta_cap", "const_c"):
        _positive(key, cfg[key])
    if fmt == "csv":
        text = sum_game_transcripts_csv(
            cfg["strategy"],
            cfg["epsilon"],
            cfg["delta"],
            cfg["delta_cap"],
            cfg["rounds"],
            cfg["trials"],
            master_seed=cfg["seed"],
            amp=cfg["amp"],
            const_c=cfg["const_c"],
        )
        _emit(text, out)
        return
    result = run_sum_game_experiment(
        cfg["strategy"],
        cfg["epsilon"],
        cfg["delta"],
        cfg["delta_cap"],
        cfg["rounds"],
        cfg["trials"],
        master_seed=cfg["seed"],
        amp=cfg["amp"],
        const_c=cfg["const_c"],
        jobs=cfg["jobs"],
        min_win_rate=cfg["min_win_rate"],
    )
    _emit_json(result, out)
    if not result["passed"]:
        raise SystemExit(1)


# ---------------------------------------------------------------------------
# hypergraph
# ---------------------------------------------------------------------------

_HYPER_DEFAULTS = {
    "n": None,
    "stream": None,
    "m_random": 200,
    "max_edge_size": 4,
    "epsilon": 0.25,
    "k1": 8.0,
    "trials": 1,
    "seed": 0,
    "adversary": "none",
    "cuts": "all",
    "c_size": 4.0,
    "violation_target": 0.05,
    "n_max_exact": 12,
    "jobs": 1,
}


def _hypergraph_options(fn):
    for deco in reversed(
        [
            click.option("--n", type=int, default=None, help="Vertex count."),
            click.option("--stream", type=str, default=None, help="Edge file ('-' for stdin)."),
            click.option("--m-random", type=int, default=None, help="Random edges per trial when no stream file."),
            click.option("--max-edge-size", type=int, default=None),
            click.option("--eps", "epsilon", type=float, default=None),
            click.option("--k1", type=float, default=None),
            click.option("--trials", type=int, default=None),
            click.option("--seed", type=int, default=None),
            click.option("--adversary", type=click.Choice(["none", "reinsert"]), default=None),
            click.option("--verify", "cuts", type=click.Choice(["none", "two", "all"]), default=None, help="Cut family to check exhaustively."),
            click.option("--c-size", type=float, default=None),
            click.option("--violation-target", type=float, default=None),
            click.option("--n-max-exact", type=int, default=None),
            click.option("--jobs", type=int, default=None, help="Parallel trial workers."),
            click.option("--out", type=str, default=None),
            click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json"),
            click.option("--config", "config_path", type=str, default=None),
        ]
    ):
        fn = deco(fn)
    return fn


def _hypergraph_cfg(config_path, flags) -> dict:
    cfg = _merge(flags, _load_config(config_path), _HYPER_DEFAULTS, required=("n",))
    if cfg["n"] < 2:
        raise click.UsageError(f"n must be >= 2, got {cfg['n']}")
    if cfg["trials"] < 1:
        raise click.UsageError(f"trials must be >= 1, got {cfg['trials']}")
    _positive("epsilon", cfg["epsilon"])
    _positive("k1", cfg["k1"])
    return cfg


def _history_csv(history) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["index", "vertices", "strength", "p", "coin"])
    for rec in history:
        writer.writerow(
            [rec.index, " ".join(map(str, rec.vertices)), repr(rec.strength), repr(rec.probability), int(rec.coin)]
        )
    return buf.getvalue()


@main.command("hypergraph")
@_hypergraph_options
def hypergraph_cmd(config_path, out, fmt, **flags) -> None:
    """Stream edges through the sparsifier; verify cuts and audit size."""
    cfg = _hypergraph_cfg(config_path, flags)
    edges = _read_edges(cfg["stream"]) if cfg["stream"] else None
    if fmt == "csv":
        _, sparsifier, _ = run_hypergraph_trial(
            cfg["n"], cfg["epsilon"], cfg["k1"], derive_seed(cfg["seed"], 0),
            edges=edges, m_random=cfg["m_random"], max_edge_size=cfg["max_edge_size"],
            adversary=cfg["adversary"], cuts="none", c_size=cfg["c_size"],
            n_max_exact=cfg["n_max_exact"],
        )
        _emit(_history_csv(sparsifier.history_), out)
        return
    result = run_hypergraph_experiment(
        cfg["n"],
        epsilon=cfg["epsilon"],
        k1=cfg["k1"],
        trials=cfg["trials"],
        master_seed=cfg["seed"],
        edges=edges,
        m_random=cfg["m_random"],
        max_edge_size=cfg["max_edge_size"],
        adversary=cfg["adversary"],
        cuts=cfg["cuts"],
        c_size=cfg["c_size"],
        violation_target=cfg["violation_target"],
        n_max_exact=cfg["n_max_exact"],
        jobs=cfg["jobs"],
    )
    _emit_json(result, out)
    if not result["passed"]:
        raise SystemExit(1)


# ---------------------------------------------------------------------------
# subspace
# ---------------------------------------------------------------------------

_SUBSPACE_DEFAULTS = {
    "stream": None,
    "d": None,
    "n_random": 400,
    "entry_bound": 100,
    "p": 2.0,
    "epsilon": 0.25,
    "kappa_ol": 10.0,
    "k1": 1.0,
    "n_upper": None,
    "trials": 1,
    "seed": 0,
    "adversary": "none",
    "verify": True,
    "c_audit": 4.0,
    "min_pass_rate": 0.9,
    "jobs": 1,
}


def _subspace_options(fn):
    for deco in reversed(
        [
            click.option("--stream", type=str, default=None, help="Row file ('-' for stdin), one row of d integers per line."),
            click.option("--d", type=int, default=None, help="Row dimension (for random streams)."),
            click.option("--n-random", type=int, default=None, help="Random rows per trial when no stream file."),
            click.option("--entry-bound", type=int, default=None),
            click.option("--p", type=float, default=None, help="Norm exponent."),
            click.option("--eps", "epsilon", type=float, default=None),
            click.option("--kappa-ol", "kappa_ol", type=float, default=None, help="Assumed online condition number bound."),
            click.option("--k1", type=float, default=None),
            click.option("--n-upper", type=int, default=None),
            click.option("--trials", type=int, default=None),
            click.option("--seed", type=int, default=None),
            click.option("--adversary", type=click.Choice(["none", "resubmit"]), default=None),
            click.option("--verify/--no-verify", "verify", default=None),
            click.option("--c-audit", type=float, default=None),
            click.option("--min-pass-rate", type=float, default=None),
            click.option("--jobs", type=int, default=None, help="Parallel trial workers."),
            click.option("--out", type=str, default=None),
            click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json"),
            click.option("--config", "config_path", type=str, default=None),
        ]
    ):
        fn = deco(fn)
    return fn


def _subspace_cfg(config_path, flags) -> tuple[dict, np.ndarray | None]:
    cfg = _merge(flags, _load_config(config_path), _SUBSPACE_DEFAULTS)
    rows = _read_rows(cfg["stream"]) if cfg["stream"] else None
    if rows is not None:
        cfg["d"] = rows.shape[1]
    if cfg["d"] is None:
        raise click.UsageError("either --stream or --d is required")
    if cfg["trials"] < 1:
        raise click.UsageError(f"trials must be >= 1, got {cfg['trials']}")
    _positive("epsilon", cfg["epsilon"])
    _positive("p", cfg["p"])
    _positive("k1", cfg["k1"])
    if cfg["kappa_ol"] < 1.0:
        raise click.UsageError(f"kappa-ol must be >= 1, got {cfg['kappa_ol']}")
    return cfg, rows


def _row_history_csv(history) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["index", "sensitivity", "p", "coin"])
    for rec in history:
        writer.writerow([rec.index, repr(rec.sensitivity), repr(rec.probability), int(rec.coin)])
    return buf.getvalue()


@main.command("subspace")
@_subspace_options
def subspace_cmd(config_path, out, fmt, **flags) -> None:
    """Stream rows through the sampler; verify the embedding and audit."""
    cfg, rows = _subspace_cfg(config_path, flags)
    if fmt == "csv":
        _, sampler, _ = run_subspace_trial(
            cfg["d"], cfg["epsilon"], cfg["kappa_ol"], derive_seed(cfg["seed"], 0),
            rows=rows, n_random=cfg["n_random"], entry_bound=cfg["entry_bound"],
            p=cfg["p"], k1=cfg["k1"], adversary=cfg["adversary"], verify=False,
            c_audit=cfg["c_audit"], n_upper=cfg["n_upper"],
        )
        _emit(_row_history_csv(sampler.history_), out)
        return
    result = run_subspace_experiment(
        cfg["d"],
        epsilon=cfg["epsilon"],
        kappa_ol_bound=cfg["kappa_ol"],
        trials=cfg["trials"],
        master_seed=cfg["seed"],
        rows=rows,
        n_random=cfg["n_random"],
        entry_bound=cfg["entry_bound"],
        p=cfg["p"],
        k1=cfg["k1"],
        adversary=cfg["adversary"],
        verify=cfg["verify"],
        c_audit=cfg["c_audit"],
        min_pass_rate=cfg["min_pass_rate"],
        n_upper=cfg["n_upper"],
        jobs=cfg["jobs"],
    )
    _emit_json(result, out)
    if not result["passed"]:
        raise SystemExit(1)


# ---------------------------------------------------------------------------
# verify / audit (single-seed deep checks)
# ---------------------------------------------------------------------------


@main.group()
def verify() -> None:
    """Run one seeded trial and exit by its verification outcome."""


@verify.command("hypergraph")
@_hypergraph_options
def verify_hypergraph(config_path, out, fmt, **flags) -> None:
    """Exhaustively verify one sparsifier run (all requested cuts)."""
    del fmt
    cfg = _hypergraph_cfg(config_path, flags)
    edges = _read_edges(cfg["stream"]) if cfg["stream"] else None
    cuts = cfg["cuts"] if cfg["cuts"] != "none" else "all"
    trial, _, _ = run_hypergraph_trial(
        cfg["n"], cfg["epsilon"], cfg["k1"], derive_seed(cfg["seed"], 0),
        edges=edges, m_random=cfg["m_random"], max_edge_size=cfg["max_edge_size"],
        adversary=cfg["adversary"], cuts=cuts, c_size=cfg["c_size"],
        n_max_exact=cfg["n_max_exact"],
    )
    _emit_json(trial, out)
    if not trial["verification"]["passed"]:
        raise SystemExit(1)


@verify.command("subspace")
@_subspace_options
def verify_subspace(config_path, out, fmt, **flags) -> None:
    """Verify the embedding of one sampler run."""
    del fmt
    cfg, rows = _subspace_cfg(config_path, flags)
    trial, _, _ = run_subspace_trial(
        cfg["d"], cfg["epsilon"], cfg["kappa_ol"], derive_seed(cfg["seed"], 0),
        rows=rows, n_random=cfg["n_random"], entry_bound=cfg["entry_bound"],
        p=cfg["p"], k1=cfg["k1"], adversary=cfg["adversary"], verify=True,
        c_audit=cfg["c_audit"], n_upper=cfg["n_upper"],
    )
    _emit_json(trial, out)
    if not trial["verification"]["passed"]:
        raise SystemExit(1)


@main.group()
def audit() -> None:
    """Run one seeded trial and exit by its size/sensitivity audits."""


@audit.command("hypergraph")
@_hypergraph_options
def audit_hypergraph(config_path, out, fmt, **flags) -> None:
    """Size audits for one sparsifier run."""
    del fmt
    cfg = _hypergraph_cfg(config_path, flags)
    edges = _read_edges(cfg["stream"]) if cfg["stream"] else None
    trial, _, _ = run_hypergraph_trial(
        cfg["n"], cfg["epsilon"], cfg["k1"], derive_seed(cfg["seed"], 0),
        edges=edges, m_random=cfg["m_random"], max_edge_size=cfg["max_edge_size"],
        adversary=cfg["adversary"], cuts="none", c_size=cfg["c_size"],
        n_max_exact=cfg["n_max_exact"],
    )
    _emit_json(trial, out)
    if not trial["audit"]["passed"]:
        raise SystemExit(1)


@audit.command("subspace")
@_subspace_options
def audit_subspace(config_path, out, fmt, **flags) -> None:
    """Sensitivity-sum audit for one sampler run."""
    del fmt
    cfg, rows = _subspace_cfg(config_path, flags)
    trial, _, _ = run_subspace_trial(
        cfg["d"], cfg["epsilon"], cfg["kappa_ol"], derive_seed(cfg["seed"], 0),
        rows=rows, n_random=cfg["n_random"], entry_bound=cfg["entry_bound"],
        p=cfg["p"], k1=cfg["k1"], adversary=cfg["adversary"], verify=False,
        c_audit=cfg["c_audit"], n_upper=cfg["n_upper"],
    )
    _emit_json(trial, out)
    if not trial["audit"]["passed"]:
        raise SystemExit(1)


if __name__ == "__main__":
    main()
