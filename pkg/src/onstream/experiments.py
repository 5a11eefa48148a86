"""Seeded experiment families producing machine-readable reports.

Three families: the sum-estimation game (strategy vs. sampler over many
trials), streaming hypergraph sparsification with exhaustive cut
verification and size audits, and online lp row sampling with embedding
verification and sensitivity audits.  Every trial derives its seed from
the master seed and trial index, so reports are byte-reproducible.
"""

from __future__ import annotations

from collections import deque
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, Sequence

import numpy as np

from .game import make_strategy, play_game, run_trials, transcript_to_csv
from .hypergraph import (
    Hypergraph,
    HypergraphCutSparsifier,
    size_audit,
    verify_sparsifier,
)
from .embedding import (
    OnlineRowSampler,
    sensitivity_sum_audit,
    verify_embedding,
)
from .sampling import SamplerConfig
from .seeding import derive_seed

DEFAULT_WIN_RATE_SLACK = 0.025


# ---------------------------------------------------------------------------
# Sum-estimation game
# ---------------------------------------------------------------------------


def run_sum_game_experiment(
    strategy: str,
    epsilon: float,
    delta: float,
    delta_cap: float,
    horizon: int,
    trials: int,
    master_seed: int = 0,
    amp: float | None = None,
    const_c: float = 3.0,
    jobs: int = 1,
    min_win_rate: float | None = None,
    audit: bool = True,
) -> dict:
    """Monte-Carlo win-rate experiment for one strategy.

    ``min_win_rate`` defaults to ``1 - delta - 0.025`` (binomial slack for
    a few hundred trials); ``passed`` additionally requires a clean
    per-round audit of every transcript.
    """
    config = SamplerConfig.create(epsilon, delta, delta_cap, const_c=const_c, amp=amp)
    stats = run_trials(
        strategy, config, horizon, trials, master_seed=master_seed, jobs=jobs, audit=audit
    )
    threshold = min_win_rate if min_win_rate is not None else 1.0 - delta - DEFAULT_WIN_RATE_SLACK
    result = stats.to_dict()
    result["threshold"] = threshold
    result["passed"] = stats.win_rate >= threshold and stats.audit_failures == 0
    return result


def sum_game_transcripts_csv(
    strategy: str,
    epsilon: float,
    delta: float,
    delta_cap: float,
    horizon: int,
    trials: int,
    master_seed: int = 0,
    amp: float | None = None,
    const_c: float = 3.0,
) -> str:
    """Replay the trials sequentially and render all transcripts as CSV."""
    config = SamplerConfig.create(epsilon, delta, delta_cap, const_c=const_c, amp=amp)
    chunks = []
    for i in range(trials):
        transcript = play_game(
            make_strategy(strategy, config),
            config,
            horizon,
            rng=np.random.default_rng(derive_seed(master_seed, i)),
        )
        csv_text = transcript_to_csv(transcript, trial_id=i)
        if i > 0:  # drop the repeated header
            csv_text = csv_text.split("\n", 1)[1]
        chunks.append(csv_text)
    return "".join(chunks)


# ---------------------------------------------------------------------------
# Hypergraph sparsification
# ---------------------------------------------------------------------------


def random_edge(n: int, rng: np.random.Generator, min_size: int = 2, max_size: int = 4) -> tuple[int, ...]:
    size = int(rng.integers(min_size, min(max_size, n) + 1))
    return tuple(sorted(int(v) for v in rng.choice(n, size=size, replace=False)))


def random_edge_stream(
    n: int, m: int, rng: np.random.Generator, min_size: int = 2, max_size: int = 4
) -> list[tuple[int, ...]]:
    return [random_edge(n, rng, min_size, max_size) for _ in range(m)]


def _stream_edges(
    sparsifier: HypergraphCutSparsifier,
    base: Iterable[tuple[int, ...]],
    adversary: str,
    max_rounds: int,
    fresh: Callable[[], tuple[int, ...]] | None = None,
) -> list[tuple[int, ...]]:
    """Drive the sparsifier; returns the edges actually submitted, in order.

    ``adversary="reinsert"`` re-submits rejected edges before taking new
    ones (a strategy that reacts to the coins), up to ``max_rounds`` total.
    """
    submitted: list[tuple[int, ...]] = []
    it = iter(base)
    pending: deque[tuple[int, ...]] = deque()
    while len(submitted) < max_rounds:
        if adversary == "reinsert" and pending:
            edge = pending.popleft()
        else:
            edge = next(it, None)
            if edge is None:
                if adversary == "reinsert" and fresh is not None:
                    edge = fresh()
                elif pending:
                    edge = pending.popleft()
                else:
                    break
        coin = sparsifier.add_edge(edge)
        submitted.append(edge)
        if adversary == "reinsert" and not coin:
            pending.append(edge)
    return submitted


def run_hypergraph_trial(
    n: int,
    epsilon: float,
    k1: float,
    seed: int,
    edges: Sequence[tuple[int, ...]] | None = None,
    m_random: int = 200,
    max_edge_size: int = 4,
    adversary: str = "none",
    cuts: str = "all",
    c_size: float = 4.0,
    n_max_exact: int = 12,
) -> tuple[dict, HypergraphCutSparsifier, list[tuple[int, ...]]]:
    """One seeded streaming run, with verification and size audits."""
    if adversary not in ("none", "reinsert"):
        raise ValueError(f"adversary must be 'none' or 'reinsert', got {adversary!r}")
    rng = np.random.default_rng(seed)
    sparsifier = HypergraphCutSparsifier(
        n_vertices=n,
        epsilon=epsilon,
        k1=k1,
        n_max_exact=n_max_exact,
        random_state=np.random.default_rng(rng.integers(2**63)),
    )
    if edges is not None:
        base = list(edges)
        max_rounds = len(base) if adversary == "none" else 2 * len(base)
        fresh = None
    else:
        base = [] if adversary == "reinsert" else random_edge_stream(n, m_random, rng, 2, max_edge_size)
        max_rounds = m_random
        fresh = (lambda: random_edge(n, rng, 2, max_edge_size)) if adversary == "reinsert" else None
    submitted = _stream_edges(sparsifier, base, adversary, max_rounds, fresh)

    original = Hypergraph.build(n, submitted)
    sparse = sparsifier.to_hypergraph()
    trial: dict = {
        "seed": seed,
        "n_edges": len(submitted),
        "n_kept": len(sparsifier.kept_),
        "rho": sparsifier.rho_,
        "adversary": adversary,
    }
    if cuts in ("all", "two"):
        report = verify_sparsifier(original, sparse, epsilon, cuts=cuts, n_max_exact=n_max_exact)
        trial["verification"] = report.to_dict()
    audit = size_audit(sparsifier.kept_, n, len(submitted), epsilon, sparsifier.rho_, c_size)
    trial["audit"] = audit.to_dict()
    return trial, sparsifier, submitted


def _hypergraph_trial_report(kwargs: dict) -> dict:
    trial, _, _ = run_hypergraph_trial(**kwargs)
    return trial


def run_hypergraph_experiment(
    n: int,
    epsilon: float = 0.25,
    k1: float = 8.0,
    trials: int = 1,
    master_seed: int = 0,
    edges: Sequence[tuple[int, ...]] | None = None,
    m_random: int = 200,
    max_edge_size: int = 4,
    adversary: str = "none",
    cuts: str = "all",
    c_size: float = 4.0,
    violation_target: float = 0.05,
    n_max_exact: int = 12,
    jobs: int = 1,
) -> dict:
    """Seeded batch of streaming runs with aggregate violation statistics.

    Trials are independent; ``jobs > 1`` fans them out over processes with
    results ordered by trial index either way.
    """
    tasks = [
        dict(
            n=n,
            epsilon=epsilon,
            k1=k1,
            seed=derive_seed(master_seed, i),
            edges=edges,
            m_random=m_random,
            max_edge_size=max_edge_size,
            adversary=adversary,
            cuts=cuts,
            c_size=c_size,
            n_max_exact=n_max_exact,
        )
        for i in range(trials)
    ]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            trial_reports = list(pool.map(_hypergraph_trial_report, tasks))
    else:
        trial_reports = [_hypergraph_trial_report(t) for t in tasks]
    verified = [t for t in trial_reports if "verification" in t]
    violations = sum(1 for t in verified if not t["verification"]["passed"])
    audits_passed = all(t["audit"]["passed"] for t in trial_reports)
    result = {
        "family": "hypergraph",
        "n": n,
        "epsilon": epsilon,
        "k1": k1,
        "trials": trials,
        "master_seed": master_seed,
        "adversary": adversary,
        "cuts": cuts,
        "violation_fraction": (violations / len(verified)) if verified else 0.0,
        "violation_target": violation_target,
        "audits_passed": audits_passed,
        "trial_reports": trial_reports,
    }
    result["passed"] = audits_passed and (
        not verified or result["violation_fraction"] <= violation_target
    )
    return result


# ---------------------------------------------------------------------------
# Subspace embedding
# ---------------------------------------------------------------------------


def random_row_stream(
    d: int, n: int, entry_bound: int, rng: np.random.Generator
) -> np.ndarray:
    return rng.integers(-entry_bound, entry_bound + 1, size=(n, d)).astype(np.float64)


def run_subspace_trial(
    d: int,
    epsilon: float,
    kappa_ol_bound: float,
    seed: int,
    rows: np.ndarray | None = None,
    n_random: int = 400,
    entry_bound: int = 100,
    p: float = 2.0,
    k1: float = 1.0,
    adversary: str = "none",
    verify: bool = True,
    c_audit: float = 4.0,
    n_upper: int | None = None,
) -> tuple[dict, OnlineRowSampler, np.ndarray]:
    """One seeded streaming run, with embedding verification and audit."""
    if adversary not in ("none", "resubmit"):
        raise ValueError(f"adversary must be 'none' or 'resubmit', got {adversary!r}")
    rng = np.random.default_rng(seed)
    base = rows if rows is not None else random_row_stream(d, n_random, entry_bound, rng)
    base = np.atleast_2d(np.asarray(base, dtype=np.float64))
    horizon = base.shape[0]
    sampler = OnlineRowSampler(
        dim=d,
        p=p,
        epsilon=epsilon,
        kappa_ol_bound=kappa_ol_bound,
        k1=k1,
        n_upper=n_upper if n_upper is not None else horizon,
        entry_bound=entry_bound,
        random_state=np.random.default_rng(rng.integers(2**63)),
    )

    submitted: list[np.ndarray] = []
    pending: deque[np.ndarray] = deque()
    idx = 0
    while len(submitted) < horizon:
        if adversary == "resubmit" and pending:
            row = pending.popleft()
        elif idx < horizon:
            row = base[idx]
            idx += 1
        elif pending:
            row = pending.popleft()
        else:
            break
        coin = sampler.add_row(row)
        submitted.append(row)
        if adversary == "resubmit" and not coin:
            pending.append(row)

    stream = np.vstack(submitted)
    trial: dict = {
        "seed": seed,
        "n_rows": stream.shape[0],
        "n_kept": len(sampler.kept_),
        "rho": sampler.rho_,
        "ridge": sampler.ridge_,
        "adversary": adversary,
    }
    if verify:
        report = verify_embedding(stream, sampler.kept_, epsilon)
        trial["verification"] = report.to_dict()
    audit = sensitivity_sum_audit(stream, sampler.history_, sampler.rho_, p, c_audit)
    trial["audit"] = audit.to_dict()
    return trial, sampler, stream


def _subspace_trial_report(kwargs: dict) -> dict:
    trial, _, _ = run_subspace_trial(**kwargs)
    return trial


def run_subspace_experiment(
    d: int,
    epsilon: float = 0.25,
    kappa_ol_bound: float = 10.0,
    trials: int = 1,
    master_seed: int = 0,
    rows: np.ndarray | None = None,
    n_random: int = 400,
    entry_bound: int = 100,
    p: float = 2.0,
    k1: float = 1.0,
    adversary: str = "none",
    verify: bool = True,
    c_audit: float = 4.0,
    min_pass_rate: float = 0.9,
    n_upper: int | None = None,
    jobs: int = 1,
) -> dict:
    """Seeded batch of streaming runs with aggregate pass statistics."""
    tasks = [
        dict(
            d=d,
            epsilon=epsilon,
            kappa_ol_bound=kappa_ol_bound,
            seed=derive_seed(master_seed, i),
            rows=rows,
            n_random=n_random,
            entry_bound=entry_bound,
            p=p,
            k1=k1,
            adversary=adversary,
            verify=verify,
            c_audit=c_audit,
            n_upper=n_upper,
        )
        for i in range(trials)
    ]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            trial_reports = list(pool.map(_subspace_trial_report, tasks))
    else:
        trial_reports = [_subspace_trial_report(t) for t in tasks]
    verified = [t for t in trial_reports if "verification" in t]
    pass_rate = (
        sum(1 for t in verified if t["verification"]["passed"]) / len(verified)
        if verified
        else 1.0
    )
    audits_passed = all(t["audit"]["passed"] for t in trial_reports)
    result = {
        "family": "subspace",
        "d": d,
        "p": p,
        "epsilon": epsilon,
        "kappa_ol_bound": kappa_ol_bound,
        "k1": k1,
        "trials": trials,
        "master_seed": master_seed,
        "adversary": adversary,
        "pass_rate": pass_rate,
        "min_pass_rate": min_pass_rate,
        "audits_passed": audits_passed,
        "trial_reports": trial_reports,
    }
    result["passed"] = audits_passed and pass_rate >= min_pass_rate
    return result
