import numpy as np
import pytest

from slicediv import experiments as ex


def test_fit_exact_power_law():
    ns = np.array([10, 30, 100, 300, 1000.0])
    fit = ex.fit_loglog(ns, 3.0 * ns**-0.5)
    assert fit.slope == pytest.approx(-0.5, abs=1e-12)
    assert fit.intercept == pytest.approx(np.log(3.0), abs=1e-12)
    assert fit.r_squared == pytest.approx(1.0)
    assert len(fit.points) == 5


def test_fit_constant():
    fit = ex.fit_loglog([1, 2, 4], [5, 5, 5])
    assert fit.slope == pytest.approx(0.0, abs=1e-12) and 0 <= fit.r_squared <= 1


def test_fit_noisy_recovery():
    rng = np.random.default_rng(0)
    xs = np.geomspace(10, 10_000, 8)
    for _ in range(20):
        ys = 2.0 * xs**-0.25 * (1 + 0.01 * rng.standard_normal(8))
        assert ex.fit_loglog(xs, ys).slope == pytest.approx(-0.25, abs=0.02)


@pytest.mark.parametrize("xs,ys", [([1, 2], [1, 2]), ([1, 2, 0], [1, 2, 3]), ([1, 2, 3], [1, -2, 3])])
def test_fit_rejects(xs, ys):
    with pytest.raises(ValueError):
        ex.fit_loglog(xs, ys)


def test_verdict_line_format():
    v = ex.at_most("rule_x", 0.25, 0.5)
    assert v.passed and v.line() == "rule_id=rule_x pass=true measured=0.25 threshold=0.5"
    assert not ex.at_least("r", 1.0, 2.0).passed


def test_summarize_band():
    s = ex.summarize([1.0, 2.0, 3.0, 10.0])
    assert s["p10"] <= s["mean"] <= s["p90"] and s["replications"] == 4


def test_run_jobs_order():
    assert ex.run_jobs(lambda j: j * j, range(20), workers=4) == [j * j for j in range(20)]


def test_bound_check_single_cell():
    rep = ex.run_bound_check(d=3, n=40, sigma_grid=(4.0,), L=10, replications=2, seed=1)
    assert rep.passed
    assert rep.verdict("argmin_sliced_wasserstein").measured == 4.0
    assert {r["divergence"] for r in rep.rows} >= {"wasserstein", "sliced_mmd"}
    assert all(r["replications"] == 2 and r["seed"] == 1 for r in rep.rows)


def test_projection_complexity_reference_and_bands():
    rep = ex.run_projection_complexity(dims=(3,), n=50, L_grid=(5, 20, 100), L_star=1000, replications=4)
    assert any(v.rule_id.startswith("proj_slope") for v in rep.verdicts)
    for row in rep.rows:
        assert row["p10"] <= row["mean"] <= row["p90"]
    with pytest.raises(ValueError):
        ex.run_projection_complexity(dims=(2,), L_grid=(10, 200), L_star=1000)


def test_projection_error_zero_at_reference():
    rep = ex.run_projection_complexity(dims=(2,), n=30, L_grid=(2, 5, 10), L_star=100, replications=2)
    again = ex.run_projection_complexity(dims=(2,), n=30, L_grid=(2, 5, 10), L_star=100, replications=2, workers=3)
    assert rep.rows == again.rows
    from slicediv import measures, slicing

    X = measures.make_uniform_empirical(np.random.default_rng(1).normal(size=(20, 3)))
    Y = measures.make_uniform_empirical(np.random.default_rng(2).normal(size=(20, 3)))
    base = slicing.BaseDivergenceSpec("wasserstein", 2.0)
    ref = slicing.sliced_divergence(X, Y, base, L=300, seed=4)
    assert np.mean(ref.per_projection[:300]) ** 0.5 == ref.value


def test_sample_complexity_small():
    rep = ex.run_sample_complexity(("sw2", "w2"), dims=(2, 4), ns=(20, 40, 80), replications=3, L=10)
    assert {"sw2_d2", "sw2_d4", "w2_d2", "w2_d4"} <= set(rep.fits)
    assert {v.rule_id for v in rep.verdicts} == {"sw_slope_spread", "sw_slope_max", "w_slope_gap_high_vs_low_d"}
    ss = ex.run_sample_complexity(("ssinkhorn",), dims=(2,), ns=(10, 20, 40), replications=2, L=3,
                                  eps_grid=(5.0,))
    assert {"ssinkhorn_d2_eps1", "ssinkhorn_d2_eps5"} == set(ss.fits)


def test_sinkhorn_iters_same_problem_in_one_dimension():
    rep = ex.run_sinkhorn_iters(dims=(1,), n=30, epsilon=0.1, L=4, replications=2)
    full = next(r for r in rep.rows if r["solver"] == "full")
    sliced = next(r for r in rep.rows if r["solver"] == "sliced")
    assert full["mean"] == pytest.approx(sliced["mean"], rel=0.02)


def test_two_sample_overlap_is_zero():
    data = np.random.default_rng(0).normal(size=(80, 5))
    rep = ex.run_two_sample(data, ns=(10, 20, 40), L=4, replications=2, overlap=True)
    for row in rep.rows:
        if row["divergence"] in ("w2", "sw2", "sinkhorn", "ssinkhorn"):
            assert row["mean"] == 0.0
    assert any("skipped" in n for n in rep.notes)
    with pytest.raises(ValueError):
        ex.run_two_sample(data, ns=(50,), L=2, replications=1)


def test_report_files(tmp_path):
    rep = ex.run_two_sample(None, ns=(10, 20, 40), L=3, replications=2)
    paths = {p.name for p in rep.write(tmp_path, plots=True)}
    assert {"two-sample.csv", "two-sample_verdicts.txt", "two-sample_timing.txt", "two-sample.svg"} <= paths
    for line in (tmp_path / "two-sample_verdicts.txt").read_text().splitlines():
        assert [k.split("=")[0] for k in line.split()] == ["rule_id", "pass", "measured", "threshold"]
    assert "time" not in (tmp_path / "two-sample.csv").read_text()
