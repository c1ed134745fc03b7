import math

import numpy as np
import pytest

from extsource.config import ExperimentConfig
from extsource.errors import ConfigError, RegimeError
from extsource.experiments import (
    EXPERIMENTS,
    bulk_regions,
    default_intervals,
    loglog_slope,
    relative_error,
    run_experiment,
)
from extsource.freeconv import semicircle_stieltjes
from extsource.pastur import support_edges

from oracles import semicircle


def run(name, **values):
    return run_experiment(name, ExperimentConfig(**values))


def test_registry():
    assert set(EXPERIMENTS) == {"density", "edges", "sample", "locallaw", "crude", "variance",
                                "concentration", "bias", "perturb"}
    with pytest.raises(ConfigError):
        run("spectra")


def test_loglog_slope_and_relative_error():
    assert loglog_slope([1, 2, 4], [1, 0.5, 0.25]) == pytest.approx(-1.0)
    assert math.isnan(loglog_slope([1, 2], [1, 0]))
    err = relative_error([1.0, 0.0], [1.001, 1e-6], 4)
    assert err[0] == pytest.approx(1e-3)
    assert err[1] == pytest.approx(1e-6 / 5e-5)


def test_bulk_regions_and_default_intervals():
    e = support_edges(2.0)
    regions = bulk_regions(2.0, 0.05)
    assert regions[1] == pytest.approx((e.z2 + 0.05, e.z1 - 0.05))
    assert regions[0] == pytest.approx((-e.z1 + 0.05, -e.z2 - 0.05))
    ivs = default_intervals(2.0, 10, 0.05, 0.05)
    assert len(ivs) == 10
    assert all(hi - lo == pytest.approx(0.05) for lo, hi in ivs)
    assert all(any(r0 <= lo and hi <= r1 for r0, r1 in regions) for lo, hi in ivs)
    assert sorted((-hi, -lo) for lo, hi in ivs) == pytest.approx(ivs)
    with pytest.raises(RegimeError):
        bulk_regions(0.8, 0.05)


def test_density_semicircle_golden():
    rep = run("density", a=0.0, grid_lo=-2.5, grid_hi=2.5, grid_points=101)
    xs = np.array(rep.column("x"))
    np.testing.assert_allclose(rep.column("rho"), semicircle(xs), atol=1e-10)


def test_density_three_points():
    rep = run("density", grid_points=3)
    assert rep.header == ["x", "rho"]
    assert len(rep.rows) == 3


def test_edges_report():
    rep = run("edges", a=3.0)
    e = support_edges(3.0)
    assert rep.rows == [(3.0, e.z2, e.z1)]
    assert rep.summary["mass_right_band"] == pytest.approx(0.5, abs=1e-6)


def test_sample_identities():
    rep = run("sample", n=40, seed=3)
    s = rep.summary
    assert len(rep.rows) == 40
    assert s["eigenvalue_sum"] == pytest.approx(s["trace"], abs=1e-9)
    assert s["eigenvalue_sq_sum"] == pytest.approx(s["frobenius_sq"], rel=1e-12)


def test_locallaw_zero_trials_header_only():
    rep = run("locallaw", trials=0)
    assert rep.rows == []
    assert rep.header == ["trial", "interval_lo", "interval_hi", "count", "expected", "deviation_ratio"]


def test_locallaw_rejects_gap_interval():
    with pytest.raises(ConfigError, match="support_edges"):
        run("locallaw", intervals=((0.0, 0.5),), trials=1)
    with pytest.raises(ConfigError, match="support_edges"):
        run("locallaw", intervals=((3.4, 3.6),), trials=1)


def test_locallaw_zero_hook_flags_case():
    rep = run("locallaw", n=20, atoms="zero", trials=2, intervals=((1.9, 2.1),))
    assert rep.column("count") == [10, 10]
    assert all(math.isnan(v) for v in rep.column("expected"))
    assert "hook" in rep.summary


def test_locallaw_semicircle_pass_fraction():
    rep = run("locallaw", a=0.0, n=1000, trials=50, intervals=((-0.5, 0.5),), delta=0.1, seed=2)
    assert len(rep.rows) == 50
    assert rep.summary["pair_pass_fraction"] >= 0.95


def test_locallaw_rows_sorted_by_trial_then_interval():
    rep = run("locallaw", n=40, trials=3, n_intervals=4, width=0.2)
    keys = [(r[0], r[1]) for r in rep.rows]
    assert keys == sorted(keys)


def test_crude_zero_hook_ratio():
    rep = run("crude", n_list=(20,), atoms="zero", trials=1, intervals=((1.8, 2.3),))
    (row,) = rep.rows
    assert row[4] == 10
    assert row[5] == pytest.approx(0.5 / 0.5)


def test_crude_smoke_row_count():
    rep = run("crude", n_list=(60,), trials=1, n_intervals=7)
    assert len(rep.rows) == 7
    width = 4 * math.log(60) ** 2 / 60
    assert all(r[3] - r[2] == pytest.approx(width) for r in rep.rows)


def test_variance_identical_trials_is_zero():
    rep = run("variance", atoms="zero", n_list=(8, 16), trials=5, eta_list=(0.1, 0.5))
    assert rep.column("var") == [0.0] * 4


def test_variance_eta_floor():
    with pytest.raises(ConfigError):
        run("variance", eta_list=(0.005,), trials=3, n_list=(8,))
    with pytest.raises(ConfigError):
        run("variance", trials=1, n_list=(8,))


def test_concentration_tails():
    rep = run("concentration", n_list=(16, 32), trials=30, eps_list=(0.0, 0.01, 100.0))
    tails = dict(((r[0], r[3]), r[4]) for r in rep.rows)
    assert tails[16, 0.0] == 1.0 and tails[32, 0.0] == 1.0
    assert tails[16, 100.0] == 0.0
    assert rep.summary["non_increasing_in_eps"] is True
    with pytest.raises(ConfigError):
        run("concentration", eps_list=(0.0, 0.1), trials=3)


def test_bias_semicircle_reference():
    rep = run("bias", a=0.0, x=0.0, eta=2.0, n_list=(16, 32), trials=20)
    s = semicircle_stieltjes(2j)
    assert rep.summary["s_tilde_im[n=16]"] == s.imag
    assert rep.summary["s_tilde_im[n=32]"] == s.imag
    assert s == pytest.approx(1j * (math.sqrt(2) - 1))
    assert rep.header == ["n", "re_bias", "im_bias", "abs_bias", "stderr"]


def test_bias_reference_constant_across_n():
    rep = run("bias", n_list=(8, 16, 32), trials=4)
    assert len({rep.summary[f"s_tilde_re[n={n}]"] for n in (8, 16, 32)}) == 1
    assert isinstance(rep.summary["fit_valid"], bool)


def test_perturb_small():
    rep = run("perturb", n=4, trials=2)
    assert len(rep.rows) == 2 * 4 * (4 + 2 * 6)
    assert rep.summary["max_rel_err"] <= 1e-4


def test_config_hash_tracks_settings():
    a = run("edges", a=2.0)
    b = run("edges", a=2.0)
    c = run("edges", a=3.0)
    assert a.config_hash == b.config_hash != c.config_hash
