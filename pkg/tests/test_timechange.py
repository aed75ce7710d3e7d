import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import stats

from exitlab.errors import InvalidParameter
from exitlab.estimators import empirical_tail, geometric_grid, moment
from exitlab.geometry import SlitPlane, contains
from exitlab.rng import StreamId
from exitlab.sampler import StepConfig, batch
from exitlab.timechange import (NU_COLUMNS, MapEntry, get_map, invariance_check, joint_z,
                                nu_batch, nu_sample, nu_values, write_nu_csv)

disk_point = st.builds(lambda r, a: r * complex(math.cos(a), math.sin(a)),
                       st.floats(0, 0.95), st.floats(-math.pi, math.pi))
phis = st.floats(-math.pi, math.pi)

FAST = StepConfig(h0=4e-3, t_max=1.0)


@pytest.fixture(scope="module")
def koebe_nu():
    return nu_values(nu_batch(get_map("koebe"), FAST, 11, 4000))


def test_catalog():
    k = get_map("koebe")
    assert k.image == SlitPlane(0.25, math.pi) and k.schlicht
    assert get_map("koebe", math.pi).image == SlitPlane(0.25, 0.0)
    assert get_map("identity").evaluate(0.3j) == 0.3j
    with pytest.raises(InvalidParameter):
        get_map("square")


@given(z=disk_point, phi=phis)
def test_koebe_derivative_matches_finite_difference(z, phi):
    f = get_map("koebe", phi)
    h = 1e-6 * (1 - abs(z))
    fd = (f.evaluate(z + h) - f.evaluate(z - h)) / (2 * h)
    assert abs(fd - f.derivative(z)) <= 1e-6 * abs(f.derivative(z))


@given(z=disk_point, phi=phis)
def test_koebe_image_contains_values(z, phi):
    f = get_map("koebe", phi)
    assert contains(f.image, f.evaluate(z))


@given(phi=phis)
def test_koebe_is_normalized(phi):
    f = get_map("koebe", phi)
    assert f.evaluate(0) == 0 and f.derivative(0) == 1


def test_identity_nu_equals_disk_time_bitwise():
    cfg = StepConfig(h0=4e-3)
    b = nu_batch(get_map("identity"), cfg, 3, 500)
    assert np.array_equal(b.nu, b.exit_time)
    direct = batch(get_map("identity").image, 0j, cfg, 3, 500)
    assert np.array_equal(b.exit_time, direct.exit_time)
    r = nu_sample(get_map("identity"), cfg, StreamId(3, 7))
    assert r.nu == r.disk_exit_time == b.nu[7]


def test_non_schlicht_map_rejected():
    bad = MapEntry("scaled", lambda z: 2 * z, lambda z: 2.0, SlitPlane(0.5), False)
    with pytest.raises(InvalidParameter):
        nu_sample(bad, FAST, StreamId(1, 0))
    with pytest.raises(InvalidParameter):
        nu_batch(bad, FAST, 1, 3)


def test_censoring_in_image_time(koebe_nu):
    # censored paths count as survivors, never as NaN
    assert not np.any(np.isnan(koebe_nu))
    assert np.all(np.isinf(koebe_nu) | (koebe_nu <= 1.0))
    assert np.any(np.isinf(koebe_nu))


def test_nu_sample_matches_batch():
    f = get_map("koebe")
    b = nu_batch(f, FAST, 5, 20)
    for i in (0, 7, 19):
        r = nu_sample(f, FAST, StreamId(5, i))
        assert r.nu == b.nu[i] and r.steps == b.steps[i]


def test_refinement_fires_for_koebe():
    b = nu_batch(get_map("koebe"), FAST, 2, 500)
    assert b.refined.any()
    assert not nu_batch(get_map("identity"), FAST, 2, 500).refined.any()


def test_rotation_invariance(koebe_nu):
    rot = nu_values(nu_batch(get_map("koebe", math.pi / 3), FAST, 12, 4000))
    a = np.minimum(koebe_nu, 2.0)
    b = np.minimum(rot, 2.0)
    assert stats.ks_2samp(a, b).pvalue > 0.001


def test_nu_csv(tmp_path):
    b = nu_batch(get_map("koebe"), FAST, 1, 10)
    lines = write_nu_csv(b, tmp_path / "nu.csv").read_text().splitlines()
    assert lines[0] == ",".join(NU_COLUMNS) and len(lines) == 11
    assert float(lines[1].split(",")[1]) == b.nu[0]


def test_invariance_identity_is_exact():
    rep = invariance_check(get_map("identity"), StepConfig(h0=4e-3), 4, 500,
                           geometric_grid(0.05, 1, 10))
    assert rep.max_discrepancy == 0 and rep.passed()


def test_invariance_koebe_small():
    g = geometric_grid(0.01, 1.0, 10)
    rep = invariance_check(get_map("koebe"), FAST, 6, 4000, g)
    assert rep.passed()


def test_joint_z():
    a = empirical_tail([1.0, 2.0], [0.5, 1.5])
    assert np.all(joint_z(a, a) == 0)


def test_mcconnell_moment_order(koebe_nu):
    # uncensored identity times are cheap; the Koebe sample is censored at 1, which
    # only lowers its moment, so the inequality still has to hold
    ident = nu_values(nu_batch(get_map("identity"), StepConfig(h0=4e-3), 11, 4000))
    k = moment(np.minimum(koebe_nu, 1.0), 0.2)
    i = moment(ident, 0.2)
    assert i.value <= k.value + 3 * math.hypot(i.stderr, k.stderr)


def test_refinement_is_stable():
    f = get_map("koebe")
    a = nu_values(nu_batch(f, StepConfig(h0=8e-3, t_max=1.0), 21, 3000))
    b = nu_values(nu_batch(f, StepConfig(h0=4e-3, t_max=1.0), 22, 3000))
    cap = float(np.quantile(np.minimum(b, 1.0), 0.99))
    ma = moment(np.minimum(a, cap), 1.0)
    mb = moment(np.minimum(b, cap), 1.0)
    assert abs(ma.value - mb.value) < 3 * math.hypot(ma.stderr, mb.stderr)


def test_fast_exit_reversal(koebe_nu):
    # the slit image exits faster than the disk for small t
    ident = nu_values(nu_batch(get_map("identity"), FAST, 11, 4000))
    g = geometric_grid(0.02, 0.2, 8)
    sk = empirical_tail(koebe_nu, g).survival
    si = empirical_tail(ident, g).survival
    assert si[0] > sk[0]
