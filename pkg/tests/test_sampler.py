import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from exitlab import _core
from exitlab.errors import InvalidParameter, MaxStepsExceeded, PointOutsideDomain
from exitlab.geometry import STAR_TESTS, Disk, HalfPlane, SlitPlane, Wedge, contains
from exitlab.oracles import halfplane_exit_cdf, slit_survival
from exitlab.rng import StreamId
from exitlab.sampler import (CENSORED, EXITED, StepConfig, batch, disk_bias_budget,
                             halfplane_exit_exact_batch, read_samples,
                             sample_halfplane_exit_exact, simulate_exit, tau_from_normal)

ERFC1 = 0.157299207050285130658779364917  # erfc(1), mpmath


def test_config_validation():
    for bad in (dict(h0=0), dict(lam=0), dict(lam=1.5), dict(h0=1e-3, h_min=1e-2),
                dict(max_steps=0), dict(t_max=0), dict(kappa=0)):
        with pytest.raises(InvalidParameter):
            StepConfig(**bad)


def test_simulate_is_deterministic():
    cfg = StepConfig(h0=4e-3)
    a = simulate_exit(Disk(1.0), 0j, cfg, StreamId(7, 3))
    b = simulate_exit(Disk(1.0), 0j, cfg, StreamId(7, 3))
    assert a == b
    assert simulate_exit(Disk(1.0), 0j, cfg, StreamId(7, 4)) != a


def test_batch_of_one_equals_single_path():
    cfg = StepConfig(h0=4e-3)
    b = batch(Disk(1.0), 0j, cfg, 11, 1)
    assert b[0] == simulate_exit(Disk(1.0), 0j, cfg, StreamId(11, 0))


@pytest.mark.parametrize("domain", [Disk(1.0), SlitPlane(0.5), STAR_TESTS["trefoil"]],
                         ids=repr)
def test_batch_independent_of_workers(domain):
    cfg = StepConfig(h0=4e-3, t_max=5.0)
    ref = batch(domain, 0j, cfg, 5, 5000, workers=1)
    for w in (4, 16):
        b = batch(domain, 0j, cfg, 5, 5000, workers=w)
        for name in ("exit_time", "exit_x", "exit_y", "steps", "flags", "status"):
            assert np.array_equal(getattr(b, name), getattr(ref, name), equal_nan=True)


def test_start_outside_raises():
    with pytest.raises(PointOutsideDomain):
        simulate_exit(Disk(1.0), 2 + 0j, StepConfig(), StreamId(1, 0))
    with pytest.raises(PointOutsideDomain):
        batch(SlitPlane(0.5), -1 + 0j, StepConfig(), 1, 10)


def test_max_steps_diagnostic():
    with pytest.raises(MaxStepsExceeded) as err:
        simulate_exit(Disk(1.0), 0j, StepConfig(h0=1e-4, max_steps=10), StreamId(1, 0))
    assert err.value.steps == 10
    b = batch(Disk(1.0), 0j, StepConfig(h0=1e-4, max_steps=10), 1, 20)
    assert b.n_maxsteps == 20 and b.times().size == 0


def test_exit_points_on_boundary():
    for domain in (Disk(1.0), HalfPlane(1.0), SlitPlane(0.5), Wedge(math.pi / 4, math.pi / 4),
                   STAR_TESTS["limacon"]):
        start = 0.5 + 0.5j if isinstance(domain, Wedge) else 0j
        b = batch(domain, start, StepConfig(h0=4e-3, t_max=20), 3, 500)
        done = b.status == EXITED
        for x, y in zip(b.exit_x[done], b.exit_y[done]):
            z = complex(x, y)
            assert not contains(domain, z) or _near_boundary(domain, z)
        assert np.all(b.exit_time[done] > 0)


def _near_boundary(domain, z):
    from exitlab.geometry import boundary_distance
    return boundary_distance(domain, z) < 1e-6


def test_censoring():
    b = batch(HalfPlane(1.0), 0j, StepConfig(h0=4e-3, t_max=0.5), 2, 4000)
    cens = b.status == CENSORED
    assert np.all(np.isinf(b.exit_time[cens]))
    assert np.all(b.exit_time[~cens] <= 0.5)
    # the fraction censored is the survival at the horizon
    s = cens.mean()
    ref = 1 - halfplane_exit_cdf(1.0, 0.5)
    assert abs(s - ref) < 4 * math.sqrt(ref * (1 - ref) / 4000)


def test_bridge_is_exercised_on_the_disk():
    b = batch(Disk(1.0), 0j, StepConfig(h0=4e-3), 1, 5000)
    assert 0 < b.bridged.mean() < 1


def test_sample_csv_round_trip(tmp_path):
    b = batch(SlitPlane(0.5), 0j, StepConfig(h0=4e-3, t_max=1.0), 9, 300)
    path = b.to_csv(tmp_path / "s.csv")
    c = read_samples(path)
    assert np.array_equal(c.exit_time, b.exit_time)
    assert np.array_equal(c.exit_x, b.exit_x, equal_nan=True)
    assert np.array_equal(c.steps, b.steps)
    assert np.array_equal(c.status, b.status)
    assert path.read_text().splitlines()[0] == "path_id,exit_time,exit_x,exit_y,steps,bridged"


# ------------------------------------------------------------------ accuracy


def test_disk_mean_exit_time():
    n = 100_000
    h0 = 4e-3
    t = batch(Disk(1.0), 0j, StepConfig(h0=h0), 21, n).times()
    se = t.std(ddof=1) / math.sqrt(n)
    assert abs(t.mean() - 0.5) <= 3 * se + disk_bias_budget(h0)


@pytest.mark.parametrize("h0", [4e-3, 1e-3, 2.5e-4])
def test_disk_mean_within_budget(h0):
    t = batch(Disk(1.0), 0j, StepConfig(h0=h0), 22, 20_000).times()
    se = t.std(ddof=1) / math.sqrt(t.size)
    assert abs(t.mean() - 0.5) <= 3 * se + disk_bias_budget(h0)
    assert disk_bias_budget(h0 / 4) <= 0.5 * disk_bias_budget(h0)


def test_halfplane_fast_exit_probability():
    n = 100_000
    t = batch(HalfPlane(1.0), 0j, StepConfig(h0=2e-3, t_max=0.5), 4, n).times()
    p = np.mean(t <= 0.5)
    assert abs(p - ERFC1) < 3 * math.sqrt(ERFC1 * (1 - ERFC1) / n)


def test_slit_against_exact_survival():
    n = 100_000
    t = batch(SlitPlane(0.5), 0j, StepConfig(h0=1e-3, t_max=0.4), 8, n).times()
    for s in (0.1, 0.2, 0.4):
        ref = slit_survival(0.5, s)
        assert abs(np.mean(t > s) - ref) < 3 * math.sqrt(ref * (1 - ref) / n)


def test_slit_self_convergence():
    # P(T < 0.1) at h0 against a run with h0 halved twice
    n = 100_000
    a = batch(SlitPlane(0.5), 0j, StepConfig(h0=4e-3, t_max=0.1), 12, n).times()
    b = batch(SlitPlane(0.5), 0j, StepConfig(h0=1e-3, t_max=0.1), 13, n).times()
    pa, pb = np.mean(a < 0.1), np.mean(b < 0.1)
    se = math.sqrt(pa * (1 - pa) / n + pb * (1 - pb) / n)
    assert abs(pa - pb) < 3 * se


# ------------------------------------------------------------------ exact sampler


def test_tau_from_normal():
    assert tau_from_normal(1.0, 1.0) == 1.0
    assert tau_from_normal(2.0, -0.5) == 16.0


def test_exact_sampler_ks():
    t = halfplane_exit_exact_batch(1.0, 3, 100_000)
    ks = stats.kstest(t, lambda s: np.array([halfplane_exit_cdf(1.0, v) for v in np.atleast_1d(s)]))
    # 1% critical value of the one-sample KS statistic
    assert ks.statistic < 1.628 / math.sqrt(t.size)


def test_exact_sampler_cdf_at_half():
    t = halfplane_exit_exact_batch(1.0, 17, 1_000_000)
    p = np.mean(t <= 0.5)
    assert abs(p - ERFC1) < 3 * math.sqrt(ERFC1 * (1 - ERFC1) / t.size)


def test_exact_sampler_scaling():
    a = halfplane_exit_exact_batch(1.0, 1, 100_000)
    b = halfplane_exit_exact_batch(2.0, 2, 100_000)
    ks = stats.ks_2samp(4 * a, b)
    assert ks.pvalue > 1e-3


@given(seed=st.integers(0, 2**32), pid=st.integers(0, 2**32), a=st.floats(0.1, 10))
@settings(max_examples=30)
def test_exact_single_matches_batch_law(seed, pid, a):
    t = sample_halfplane_exit_exact(a, StreamId(seed, pid))
    assert t > 0 and math.isfinite(t)
    assert t == pytest.approx(a * a * sample_halfplane_exit_exact(1.0, StreamId(seed, pid)))
