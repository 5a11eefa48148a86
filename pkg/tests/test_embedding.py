"""Row sampling: span tests, sensitivities, verification, audits."""

import math

import numpy as np
import pytest

from onstream import SizeLimitError
from onstream.embedding import (
    IntegerRowBasis,
    OnlineRowSampler,
    WeightedRowSet,
    online_condition_number,
    online_sensitivity,
    ridge_leverage_closed_form,
    ridge_parameter,
    sampling_rate,
    sensitivity_by_ascent,
    sensitivity_sum_audit,
    verify_embedding,
)


# ---------------------------------------------------------------------------
# exact span membership
# ---------------------------------------------------------------------------


def test_integer_basis_exact_membership():
    basis = IntegerRowBasis(3)
    assert basis.add([1, 2, 3])
    assert basis.add([0, 1, 1])
    assert basis.rank == 2
    assert basis.contains([1, 3, 4])  # sum of the two
    assert basis.contains([2, 4, 6])  # scalar multiple
    assert not basis.contains([0, 0, 1])
    assert not basis.add([1, 3, 4])
    assert basis.add([0, 0, 7])
    assert basis.rank == 3
    assert basis.contains([123, -456, 789])


def test_integer_basis_handles_near_dependence_exactly():
    # A float residual test at any fixed tolerance would waver here; the
    # integer test cannot.
    basis = IntegerRowBasis(2)
    basis.add([1000000, 999999])
    assert not basis.contains([1000000, 1000000])
    assert basis.contains([2000000, 1999998])


# ---------------------------------------------------------------------------
# sensitivities
# ---------------------------------------------------------------------------


def kept_set(rows, probs=None, p=2.0, ridge=1e-12):
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    ws = WeightedRowSet(dim=rows.shape[1], p=p, rho=10.0, ridge=ridge)
    probs = probs if probs is not None else [1.0] * rows.shape[0]
    for r, q in zip(rows, probs):
        ws.append(r, q, 1.0)
    return ws


def test_sensitivity_empty_kept_is_one():
    ws = WeightedRowSet(dim=3, p=2.0, rho=10.0, ridge=0.5)
    assert online_sensitivity(np.array([5.0, 0.0, 0.0]), ws) == 1.0


def test_sensitivity_one_dim_closed_form():
    # kept = {e1 at p=1}, a = e1, ridge 0.5: 1 / (1 + 0.5)
    ws = kept_set([[1.0, 0.0]], ridge=0.5)
    got = online_sensitivity(np.array([1.0, 0.0]), ws)
    assert got == pytest.approx(1.0 / 1.5, rel=1e-12)


def test_sensitivity_span_escape_is_one():
    ws = kept_set([[1.0, 0.0]], ridge=0.5)
    assert online_sensitivity(np.array([0.0, 1.0]), ws) == 1.0
    assert online_sensitivity(np.array([3.0, 1.0]), ws) == 1.0


def test_sensitivity_clipped_to_one():
    # A huge in-span row would exceed 1; the sampling rule treats it as 1.
    ws = kept_set([[1.0, 0.0]], ridge=1e-6)
    assert online_sensitivity(np.array([50.0, 0.0]), ws) == 1.0


def test_closed_form_matches_ascent_small_batch():
    # The acceptance suite runs the 1000-instance version; keep a quick one.
    rng = np.random.default_rng(404)
    for trial in range(60):
        d = int(rng.integers(1, 6))
        k = int(rng.integers(1, 9))
        rows = rng.integers(-5, 6, size=(k, d)).astype(float)
        if not rows.any():
            continue
        a = rng.standard_normal(k) @ rows
        if not a.any():
            continue
        inv_p = np.exp(rng.uniform(0.0, 2.0, size=k))
        lam = float(rng.uniform(0.05, 2.0))
        gram = (rows.T * inv_p) @ rows
        cf = ridge_leverage_closed_form(a, gram, lam)
        opt = sensitivity_by_ascent(a, rows, inv_p, lam, 2.0, restarts=4, seed=trial)
        assert opt == pytest.approx(cf, rel=1e-6)


def test_ascent_handles_general_p():
    rows = np.array([[2.0, 0.0], [0.0, 3.0], [1.0, 1.0]])
    a = np.array([1.0, 2.0])
    for p in (1.0, 1.5, 3.0):
        val = sensitivity_by_ascent(a, rows, np.ones(3), 0.25, p, restarts=8, seed=0)
        # sanity: the ratio at a handful of directions never beats the max
        rng = np.random.default_rng(1)
        for _ in range(200):
            x = rng.standard_normal(2)
            num = abs(a @ x) ** p
            den = np.sum(np.abs(rows @ x) ** p) + 0.25 * np.sum(np.abs(x) ** p)
            assert num / den <= val * (1.0 + 1e-9)


def test_sensitivity_monotone_in_kept_rows():
    # Adding a kept row can only shrink a future row's p = 2 sensitivity.
    rng = np.random.default_rng(3)
    for _ in range(30):
        d = 4
        rows = rng.integers(-9, 10, size=(6, d)).astype(float)
        a = rows[0] + rows[1]
        lam = 0.3
        small = kept_set(rows[:3], ridge=lam)
        big = kept_set(rows, ridge=lam)
        s_small = ridge_leverage_closed_form(a, small.gram(), lam)
        s_big = ridge_leverage_closed_form(a, big.gram(), lam)
        assert s_big <= s_small * (1.0 + 1e-9)


# ---------------------------------------------------------------------------
# parameters
# ---------------------------------------------------------------------------


def test_ridge_parameter_formula():
    got = ridge_parameter(2.0, 6, 400, 100)
    assert got == pytest.approx((400.0 * 100.0) ** -(3 * 6 + 2), rel=1e-9)
    assert ridge_parameter(4.0, 50, 10**6, 10**6) >= 1e-300  # floored, not zero


def test_sampling_rate_formula():
    got = sampling_rate(0.25, 6, 400, 1000.0, 1.0)
    expect = 0.25**-2 * (6 * math.log(1000.0 / 0.25) + math.log(math.log(400)))
    assert got == pytest.approx(expect, rel=1e-12)


# ---------------------------------------------------------------------------
# streaming sampler
# ---------------------------------------------------------------------------


def test_basis_rows_all_kept():
    rows = np.eye(4) * 3
    sp = OnlineRowSampler(dim=4, kappa_ol_bound=10.0, random_state=0)
    sp.fit(rows)
    assert len(sp.kept_) == 4
    assert all(r.probability == 1.0 and r.sensitivity == 1.0 for r in sp.history_)


def test_one_dim_harmonic_sensitivities():
    # All-ones 1-d stream with a vanishing ridge: the k-th sensitivity is
    # 1 / (k - 1 + ridge), so their sum tracks the harmonic series.
    n = 200
    sp = OnlineRowSampler(dim=1, kappa_ol_bound=1.0, k1=50.0, n_upper=n, entry_bound=1, random_state=0)
    for _ in range(n):
        sp.add_row([1])
    sens = [r.sensitivity for r in sp.history_]
    assert sens[0] == 1.0
    lam = sp.ridge_
    for k in range(1, n):
        assert sens[k] == pytest.approx(1.0 / (k + lam), rel=1e-9)
    total = sum(sens)
    harmonic = 1.0 + sum(1.0 / k for k in range(1, n))
    assert total == pytest.approx(harmonic, rel=1e-6)


def test_row_validation():
    sp = OnlineRowSampler(dim=2, n_upper=10, random_state=0)
    with pytest.raises(ValueError):
        sp.add_row([0.5, 1.0])  # not integers
    with pytest.raises(ValueError):
        sp.add_row([1000, 0])  # out of bound
    with pytest.raises(ValueError):
        sp.add_row([1, 2, 3])  # wrong shape


def test_streaming_determinism_and_partial_fit():
    rng = np.random.default_rng(5)
    rows = rng.integers(-50, 51, size=(40, 3)).astype(float)
    a = OnlineRowSampler(dim=3, kappa_ol_bound=100.0, k1=0.05, n_upper=40, random_state=9)
    a.fit(rows)
    b = OnlineRowSampler(dim=3, kappa_ol_bound=100.0, k1=0.05, n_upper=40, random_state=9)
    b.partial_fit(rows[:11]).partial_fit(rows[11:])
    assert [r.coin for r in a.history_] == [r.coin for r in b.history_]
    assert [r.sensitivity for r in a.history_] == [r.sensitivity for r in b.history_]


def test_weighted_rows_realize_estimator():
    rng = np.random.default_rng(6)
    rows = rng.integers(-20, 21, size=(30, 3)).astype(float)
    sp = OnlineRowSampler(dim=3, kappa_ol_bound=100.0, k1=0.05, n_upper=30, random_state=2)
    sp.fit(rows)
    weighted = sp.weighted_rows()
    for _ in range(20):
        x = rng.standard_normal(3)
        direct = sp.kept_.norm_p_power(x)
        via_matrix = float(np.sum(np.abs(weighted @ x) ** 2))
        assert via_matrix == pytest.approx(direct, rel=1e-9)


def test_get_params_roundtrip():
    sp = OnlineRowSampler(dim=5, p=1.5, epsilon=0.3, kappa_ol_bound=7.0)
    clone = OnlineRowSampler(**sp.get_params())
    assert clone.get_params() == sp.get_params()


# ---------------------------------------------------------------------------
# verification
# ---------------------------------------------------------------------------


def test_pencil_identity_is_exact():
    rng = np.random.default_rng(11)
    rows = rng.integers(-30, 31, size=(50, 4)).astype(float)
    report = verify_embedding(rows, kept_set(rows), epsilon=0.1)
    assert report.mode == "pencil"
    assert report.worst_low == pytest.approx(1.0, abs=1e-9)
    assert report.worst_high == pytest.approx(1.0, abs=1e-9)
    assert report.passed


def test_pencil_detects_scaling():
    eps = 0.25
    rng = np.random.default_rng(12)
    rows = rng.integers(-10, 11, size=(30, 3)).astype(float)
    scaled = kept_set(rows * math.sqrt(1 + 2 * eps))
    report = verify_embedding(rows, scaled, epsilon=eps)
    assert not report.passed
    assert report.worst_high == pytest.approx(1 + 2 * eps, rel=1e-9)


def test_net_mode_identity_and_violation():
    base = np.array(
        [[4, 0, 0], [0, 4, 0], [0, 0, 4], [3, 1, 0], [1, 3, 1], [0, 1, 3], [2, 2, 2]],
        dtype=float,
    )
    eps, p = 0.25, 1.5
    good = verify_embedding(base, kept_set(base, p=p, ridge=1e-30), epsilon=eps)
    assert good.mode == "net" and good.passed
    assert good.worst_low == pytest.approx(1.0, abs=1e-9)
    scaled = kept_set(base * (1 + 2 * eps) ** (1 / p), p=p, ridge=1e-30)
    bad = verify_embedding(base, scaled, epsilon=eps)
    assert not bad.passed
    assert bad.worst_high == pytest.approx(1 + 2 * eps, rel=1e-6)


def test_net_mode_size_limit():
    rng = np.random.default_rng(13)
    rows = rng.integers(-100, 101, size=(60, 6)).astype(float)
    with pytest.raises(SizeLimitError):
        verify_embedding(rows, kept_set(rows, p=1.5), epsilon=0.05)


def test_online_condition_number_simple():
    rows = np.array([[2.0, 0.0], [0.0, 1.0], [0.0, 100.0]])
    kappa, sigma_max, sigma_min = online_condition_number(rows)
    # first prefix has sigma_min 2; second prefix 1; final sigma_max ~100
    assert sigma_min == pytest.approx(1.0, rel=1e-9)
    assert sigma_max == pytest.approx(math.sqrt(100.0**2 + 1.0), rel=1e-6)
    assert kappa == pytest.approx(sigma_max / 1.0, rel=1e-9)


def test_ridge_band_implies_plain_band():
    # If the ridge-augmented energies agree within (1 +- eps) and the ridge
    # term is dominated by the true energy, the plain energies agree within
    # (1 +- 2 eps).
    rng = np.random.default_rng(14)
    eps = 0.2
    for _ in range(200):
        true_e = float(rng.uniform(0.5, 10.0))
        lam_x = float(rng.uniform(0.0, 1.0)) * true_e  # ridge term <= true energy
        lo, hi = (1 - eps) * (true_e + lam_x), (1 + eps) * (true_e + lam_x)
        approx_aug = float(rng.uniform(lo, hi))
        approx_e = approx_aug - lam_x
        assert (1 - 2 * eps) * true_e - 1e-12 <= approx_e <= (1 + 2 * eps) * true_e + 1e-12


# ---------------------------------------------------------------------------
# sensitivity-sum audit
# ---------------------------------------------------------------------------


def test_audit_basis_stream_exact():
    rows = np.eye(3) * 2
    sp = OnlineRowSampler(dim=3, kappa_ol_bound=10.0, random_state=0)
    sp.fit(rows)
    report = sensitivity_sum_audit(rows, sp.history_, sp.rho_, p=2.0)
    assert report.sensitivity_sum == 3.0
    assert report.n_kept == 3
    assert report.passed


def test_audit_harmonic_stream():
    n = 300
    rows = np.ones((n, 1))
    sp = OnlineRowSampler(dim=1, kappa_ol_bound=1.0, k1=50.0, n_upper=n, entry_bound=1, random_state=0)
    sp.fit(rows)
    report = sensitivity_sum_audit(rows, sp.history_, sp.rho_, p=2.0)
    harmonic = 1.0 + sum(1.0 / k for k in range(1, n))
    assert report.sensitivity_sum == pytest.approx(harmonic, rel=1e-6)
    assert report.kappa_ol == pytest.approx(math.sqrt(n), rel=1e-9)
    assert report.passed


def test_audit_random_streams_pass():
    rng = np.random.default_rng(15)
    for seed in range(10):
        rows = rng.integers(-100, 101, size=(150, 5)).astype(float)
        sp = OnlineRowSampler(
            dim=5, kappa_ol_bound=1e4, k1=0.05, n_upper=150, random_state=seed
        )
        sp.fit(rows)
        report = sensitivity_sum_audit(rows, sp.history_, sp.rho_, p=2.0)
        assert report.passed, report.to_dict()
