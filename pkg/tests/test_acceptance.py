"""Acceptance suite.

One test per criterion, each asserting at its stated tolerance and printing
a PASS line (visible with ``pytest -s`` or on failure).  The Monte-Carlo
criteria share module-scoped result fixtures so the audit criteria run on
the same transcripts.

Criteria:
  1.  adversarial win rate per built-in strategy (400 trials each)
  2.  doubling stream stores everything with zero error, deterministically
  3.  mean kept count on all-ones streams tracks the analytic oracle
  4.  per-step unbiasedness and variance bound on suites 1-3
  5.  hypergraph sparsifier verifies over all k-cuts at n=8 (200 seeds)
  6.  hypergraph size audits pass on every suite-5 seed
  7.  strength oracle equals an independent enumerator exactly (100 graphs)
  8.  p=2 subspace embedding pencil check (100 seeds, adaptive included)
  9.  sensitivity-sum audit on every suite-8 seed
  10. ridge-leverage closed form vs numerical maximizer (1000 instances)
  11. byte-identical reports and transcripts on reruns
"""

import json
import math

import numpy as np
import pytest

from onstream import OnlineSumSampler, SamplerConfig, audit_transcript, make_strategy, play_game
from onstream.embedding import ridge_leverage_closed_form, sensitivity_by_ascent
from onstream.experiments import (
    run_hypergraph_experiment,
    run_subspace_experiment,
    run_sum_game_experiment,
    sum_game_transcripts_csv,
)
from onstream.hypergraph import (
    Hypergraph,
    exists_strong_component,
    min_normalized_cut,
    min_normalized_cut_reference,
    strength,
    strength_reference,
)

GAME_EPS, GAME_DELTA, GAME_CAP = 0.2, 0.1, 1e6
GAME_T, GAME_TRIALS = 2000, 400
GAME_SLACK = 0.025  # binomial slack at 400 trials
STRATEGIES_UNDER_TEST = ("ones", "geometric", "max-greedy", "ratio-greedy", "error-chaser")


@pytest.fixture(scope="module")
def suite1_results():
    return {
        name: run_sum_game_experiment(
            name, GAME_EPS, GAME_DELTA, GAME_CAP, GAME_T, GAME_TRIALS, master_seed=101
        )
        for name in STRATEGIES_UNDER_TEST
    }


@pytest.fixture(scope="module")
def suite5_results():
    oblivious = run_hypergraph_experiment(
        n=8, epsilon=0.25, k1=8.0, trials=190, master_seed=505,
        m_random=200, max_edge_size=4, adversary="none", cuts="all",
    )
    adaptive = run_hypergraph_experiment(
        n=8, epsilon=0.25, k1=8.0, trials=10, master_seed=606,
        m_random=200, max_edge_size=4, adversary="reinsert", cuts="all",
    )
    return oblivious["trial_reports"] + adaptive["trial_reports"]


@pytest.fixture(scope="module")
def suite8_results():
    oblivious = run_subspace_experiment(
        d=6, epsilon=0.25, kappa_ol_bound=1e4, trials=80, master_seed=808,
        n_random=400, entry_bound=100, p=2.0, k1=1.0, adversary="none", c_audit=4.0,
    )
    adaptive = run_subspace_experiment(
        d=6, epsilon=0.25, kappa_ol_bound=1e4, trials=20, master_seed=909,
        n_random=400, entry_bound=100, p=2.0, k1=1.0, adversary="resubmit", c_audit=4.0,
    )
    return oblivious["trial_reports"] + adaptive["trial_reports"]


def test_criterion_01_game_win_rates(suite1_results):
    threshold = 1.0 - GAME_DELTA - GAME_SLACK
    for name, result in suite1_results.items():
        assert result["win_rate"] >= threshold, (
            f"{name}: win rate {result['win_rate']} < {threshold}"
        )
    print(
        "PASS criterion 1: win rates "
        + ", ".join(f"{n}={r['win_rate']:.3f}" for n, r in suite1_results.items())
        + f" all >= {threshold}"
    )


def test_criterion_02_geometric_stream_deterministic():
    config = SamplerConfig.create(GAME_EPS, GAME_DELTA, 2.0**42, amp=2.0)
    for seed in range(25):
        sampler = OnlineSumSampler(config, rng=seed)
        for k in range(41):
            record = sampler.step(float(2**k))
            assert record.p == 1.0 and record.coin
        assert sampler.state.sample_count == 41
        assert sampler.estimate == sampler.state.true_sum == float(2**41 - 1)
    print("PASS criterion 2: doubling stream stores all 41 items with zero error on every seed")


def _audited_ones_stream(config, horizon, seed):
    """Run an all-ones stream, asserting the per-step identities inline."""
    sampler = OnlineSumSampler(config, rng=seed)
    for _ in range(horizon):
        before = sampler.estimate
        record = sampler.step(1.0)
        assert abs(record.p * (record.x / record.p) - record.x) <= 1e-12 * record.x
        variance = record.x**2 / record.p - record.x**2
        bound = (record.x / config.amp) * (record.x + before)
        assert variance <= bound * (1.0 + 1e-12)
    return sampler.state.sample_count


@pytest.fixture(scope="module")
def suite3_results():
    config = SamplerConfig.create(GAME_EPS, GAME_DELTA, GAME_CAP, amp=8.0)
    results = {}
    for horizon in (10**3, 10**4):
        counts = [_audited_ones_stream(config, horizon, seed) for seed in range(200)]
        results[horizon] = (config.amp, float(np.mean(counts)))
    return results


def test_criterion_03_sample_count_scaling(suite3_results):
    for horizon, (amp, mean_count) in suite3_results.items():
        anchor = amp * (1.0 + math.log(horizon))
        assert anchor / 2.0 <= mean_count <= 2.0 * anchor, (
            f"T={horizon}: mean {mean_count} outside factor 2 of {anchor}"
        )
        oracle = sum(min(1.0, amp / k) for k in range(1, horizon + 1))
        assert abs(mean_count - oracle) <= 0.25 * oracle
    print(
        "PASS criterion 3: mean kept counts "
        + ", ".join(f"T={h}: {m:.1f}" for h, (_, m) in suite3_results.items())
        + " within factor 2 of amp*(1+ln T)"
    )


def test_criterion_04_per_step_identities(suite1_results, suite3_results):
    # Suite 1: the trial harness audited every transcript already.
    for name, result in suite1_results.items():
        assert result["audit_failures"] == 0, f"{name} had per-step audit failures"
    # Suite 3 asserted the identities inline while streaming; re-run a few
    # representative games here and audit their full transcripts explicitly.
    config = SamplerConfig.create(GAME_EPS, GAME_DELTA, GAME_CAP)
    for name in STRATEGIES_UNDER_TEST:
        transcript = play_game(make_strategy(name, config), config, 500, rng=31337)
        assert audit_transcript(transcript, rtol=1e-12) == []
    print("PASS criterion 4: unbiasedness and variance bounds hold on every audited round")


def test_criterion_05_hypergraph_cut_preservation(suite5_results):
    assert len(suite5_results) == 200
    rho_floor = 8.0 * 0.25**-2 * 8 * math.log(8)
    violating = 0
    for trial in suite5_results:
        assert trial["rho"] >= rho_floor * (1.0 - 1e-12)
        assert trial["verification"]["n_partitions"] == 4139  # Bell(8) - 1
        violating += not trial["verification"]["passed"]
    fraction = violating / len(suite5_results)
    assert fraction <= 0.05, f"violation fraction {fraction}"
    print(
        f"PASS criterion 5: {violating}/200 seeds with any k-cut violation "
        f"(fraction {fraction:.3f} <= 0.05)"
    )


def test_criterion_06_hypergraph_size_audits(suite5_results):
    for trial in suite5_results:
        audit = trial["audit"]
        assert audit["weight_ok"], audit
        assert audit["layers_ok"], audit
        assert audit["count_ok"], audit
    print("PASS criterion 6: weight, strength-layer, and count audits pass on all 200 seeds")


def test_criterion_07_strength_oracle_soundness():
    rng = np.random.default_rng(7007)
    checked_graphs = 0
    while checked_graphs < 100:
        n = int(rng.integers(4, 8))
        m = int(rng.integers(1, 9))
        edges = [
            tuple(sorted(rng.choice(n, size=int(rng.integers(2, min(4, n) + 1)), replace=False).tolist()))
            for _ in range(m)
        ]
        h = Hypergraph.build(n, edges)
        lam, _ = min_normalized_cut(h)
        assert lam == min_normalized_cut_reference(h)  # zero tolerance
        for e in set(h.edges):
            assert strength(e, h) == strength_reference(e, h)
        # weight >= alpha * (n - 1) forces an alpha-strong vertex set
        alpha = h.total_weight() / (h.n - 1)
        assert exists_strong_component(h, alpha)
        checked_graphs += 1
    print("PASS criterion 7: exact agreement with the independent enumerator on 100 graphs")


def test_criterion_08_subspace_embedding(suite8_results):
    assert len(suite8_results) == 100
    passing = sum(1 for t in suite8_results if t["verification"]["passed"])
    for trial in suite8_results:
        v = trial["verification"]
        if v["passed"]:
            assert 0.75 - 1e-9 <= v["worst_low"] and v["worst_high"] <= 1.25 + 1e-9
    rate = passing / len(suite8_results)
    assert rate >= 0.90, f"pencil pass rate {rate}"
    print(f"PASS criterion 8: pencil eigenvalue check passes on {passing}/100 seeds")


def test_criterion_09_sensitivity_audits(suite8_results):
    for trial in suite8_results:
        audit = trial["audit"]
        assert audit["sum_ok"], audit  # S <= 4 d ln(n kappa_ol)
        assert audit["kept_ok"], audit  # kept <= 2 rho S
    print("PASS criterion 9: sensitivity-sum and kept-count audits pass on all 100 seeds")


def test_criterion_10_closed_form_vs_maximizer():
    rng = np.random.default_rng(1010)
    worst = 0.0
    checked = 0
    while checked < 1000:
        d = int(rng.integers(1, 6))
        k = int(rng.integers(1, 9))
        rows = rng.integers(-5, 6, size=(k, d)).astype(float)
        if not rows.any():
            continue
        a = rng.standard_normal(k) @ rows
        if not a.any():
            continue
        inv_probs = np.exp(rng.uniform(0.0, 2.0, size=k))
        ridge = float(rng.uniform(0.05, 2.0))
        gram = (rows.T * inv_probs) @ rows
        closed = ridge_leverage_closed_form(a, gram, ridge)
        numerical = sensitivity_by_ascent(
            a, rows, inv_probs, ridge, 2.0, restarts=4, iters=30, seed=checked
        )
        rel = abs(closed - numerical) / closed
        worst = max(worst, rel)
        assert rel <= 1e-6, f"instance {checked}: relative gap {rel}"
        checked += 1
    print(f"PASS criterion 10: worst relative gap {worst:.2e} <= 1e-6 over 1000 instances")


def test_criterion_11_determinism():
    game_kwargs = dict(epsilon=GAME_EPS, delta=GAME_DELTA, delta_cap=GAME_CAP,
                       horizon=300, trials=20, master_seed=42)
    a = run_sum_game_experiment("error-chaser", **game_kwargs)
    b = run_sum_game_experiment("error-chaser", **game_kwargs)
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)

    csv_a = sum_game_transcripts_csv("ones", GAME_EPS, GAME_DELTA, GAME_CAP, 100, 5, master_seed=42)
    csv_b = sum_game_transcripts_csv("ones", GAME_EPS, GAME_DELTA, GAME_CAP, 100, 5, master_seed=42)
    assert csv_a == csv_b

    hyper_kwargs = dict(n=6, epsilon=0.4, k1=0.05, trials=3, master_seed=7, m_random=60)
    ha = run_hypergraph_experiment(**hyper_kwargs)
    hb = run_hypergraph_experiment(**hyper_kwargs)
    assert json.dumps(ha, sort_keys=True) == json.dumps(hb, sort_keys=True)

    sub_kwargs = dict(d=4, epsilon=0.3, kappa_ol_bound=1e3, trials=3, master_seed=7,
                      n_random=120, entry_bound=50, k1=0.05)
    sa = run_subspace_experiment(**sub_kwargs)
    sb = run_subspace_experiment(**sub_kwargs)
    assert json.dumps(sa, sort_keys=True) == json.dumps(sb, sort_keys=True)
    print("PASS criterion 11: reports and transcripts are byte-identical across reruns")
