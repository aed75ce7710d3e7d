import math

import numpy as np
import pytest
from hypothesis import HealthCheck, assume, given, settings, strategies as st

from exitlab.errors import InvalidParameter, PointOutsideDomain, UnsupportedVariant
from exitlab.geometry import (GEOM_TOL, STAR_TESTS, Disk, HalfPlane, MappedDisk, SlitPlane,
                              StarLikeTest, Wedge, arc_measure, boundary_distance, contains,
                              d_origin, default_start, encode, hardy_number, nearest_boundary,
                              resolve)

coord = st.floats(-3, 3, allow_nan=False)
# thin wedges reject most of the square
inside = settings(suppress_health_check=[HealthCheck.filter_too_much])


def dense_boundary(domain, m=400_000):
    """Boundary points sampled densely, independent of the kernel geometry."""
    d = resolve(domain)
    if isinstance(d, Disk):
        th = np.linspace(0, 2 * math.pi, m, endpoint=False)
        return d.r * np.exp(1j * th)
    if isinstance(d, HalfPlane):
        s = np.linspace(-50, 50, m)
        n = complex(math.cos(d.phi), math.sin(d.phi))
        return d.alpha * n + 1j * n * s
    if isinstance(d, SlitPlane):
        s = d.alpha + np.concatenate([[0.0], np.geomspace(1e-9, 100, m)])
        return s * complex(math.cos(d.psi), math.sin(d.psi))
    if isinstance(d, Wedge):
        s = np.concatenate([[0.0], np.geomspace(1e-9, 100, m // 2)])
        e1 = complex(math.cos(d.axis + d.theta), math.sin(d.axis + d.theta))
        e2 = complex(math.cos(d.axis - d.theta), math.sin(d.axis - d.theta))
        return np.concatenate([s * e1, s * e2])
    th = np.linspace(0, 2 * math.pi, m, endpoint=False)
    return d.rho(th) * np.exp(1j * th)


DOMAINS = [Disk(1.0), Disk(2.5), HalfPlane(1.0), HalfPlane(0.7, 2.0), SlitPlane(0.5),
           SlitPlane(0.3, 1.0), Wedge(math.pi / 4), Wedge(math.pi / 8, 0.5),
           Wedge(2.5, 0.0), *STAR_TESTS.values()]


# ------------------------------------------------------------------ examples


def test_membership_examples():
    assert contains(Disk(1.0), 0j)
    assert not contains(SlitPlane(0.5), -0.6 + 0j)
    assert contains(Wedge(math.pi / 4), 1 + 0j)
    assert not contains(Disk(1.0), 1 + 0j)
    assert not contains(Disk(1.0), complex(math.nan, 0))


def test_distance_examples():
    assert boundary_distance(Disk(1.0), 0j) == 1.0
    assert boundary_distance(SlitPlane(0.5), 0j) == pytest.approx(0.5, abs=1e-15)
    # the tip, not the slit interior, is nearest to -0.4+0.3i (dense sampling: sqrt(0.1))
    assert boundary_distance(SlitPlane(0.5), -0.4 + 0.3j) == pytest.approx(0.31622776601683794,
                                                                           abs=1e-12)
    assert boundary_distance(SlitPlane(0.5), -0.6 + 0.3j) == pytest.approx(0.3, abs=1e-12)


def test_d_origin_examples():
    assert d_origin(SlitPlane(0.5)) == pytest.approx(0.5)
    assert d_origin(HalfPlane(0.9)) == pytest.approx(0.9)
    assert d_origin(MappedDisk("koebe")) == pytest.approx(0.25)
    for s in STAR_TESTS.values():
        assert d_origin(s) == pytest.approx(0.5, abs=1e-9)


def test_arc_measure_examples():
    assert arc_measure(SlitPlane(0.5), 1.0) == pytest.approx(2 * math.pi)
    assert arc_measure(Wedge(math.pi / 4), 2.0) == pytest.approx(math.pi / 2)
    assert arc_measure(SlitPlane(0.5), 0.3) == pytest.approx(2 * math.pi)
    assert arc_measure(Disk(1.0), 2.0) == 0.0
    # half-plane at distance 1, circle of radius 2: all but the arc of half-angle pi/3
    assert arc_measure(HalfPlane(1.0), 2.0) == pytest.approx(2 * math.pi - 2 * math.pi / 3)


def test_hardy_number_examples():
    assert hardy_number(Wedge(math.pi / 4)) == pytest.approx(1.0)
    assert hardy_number(Wedge(math.pi / 8)) == pytest.approx(2.0)
    assert hardy_number(HalfPlane(0.3)) == 0.5
    assert hardy_number(SlitPlane(0.5)) == 0.25
    assert hardy_number(MappedDisk("koebe")) == 0.25
    assert hardy_number(Disk(1.0)) == math.inf
    assert hardy_number(STAR_TESTS["limacon"]) == math.inf


def test_nearest_boundary_examples():
    b = nearest_boundary(Disk(1.0), 0.5 + 0j)
    assert b.foot == pytest.approx(1 + 0j)
    assert b.normal_angle == pytest.approx(math.pi)
    b = nearest_boundary(HalfPlane(1.0), 0j)
    assert b.foot == pytest.approx(1 + 0j)
    assert abs(b.normal_angle) == pytest.approx(math.pi)
    b = nearest_boundary(SlitPlane(0.5), -0.6 + 0.3j)
    assert b.foot == pytest.approx(-0.6 + 0j, abs=1e-12)
    assert b.normal_angle == pytest.approx(math.pi / 2)


def test_koebe_image_is_the_quarter_slit():
    assert resolve(MappedDisk("koebe")) == SlitPlane(0.25, math.pi)


def test_default_start():
    assert default_start(Disk(1.0)) == 0j
    assert default_start(Wedge(math.pi / 4, math.pi / 4)) == pytest.approx(
        complex(math.cos(math.pi / 4), math.sin(math.pi / 4)))


def test_validation():
    with pytest.raises(InvalidParameter):
        Disk(0.0)
    with pytest.raises(InvalidParameter):
        Wedge(math.pi)
    with pytest.raises(InvalidParameter):
        StarLikeTest((0.5, 1.0))  # radial function crosses zero
    with pytest.raises(PointOutsideDomain):
        boundary_distance(Disk(1.0), 2 + 0j)
    with pytest.raises(UnsupportedVariant):
        encode("disk")


# ------------------------------------------------------------------ properties


@pytest.mark.parametrize("domain", DOMAINS, ids=repr)
@inside
@given(x=coord, y=coord)
def test_distance_matches_dense_boundary(domain, x, y):
    z = complex(x, y)
    assume(contains(domain, z))
    pts = _dense[domain]
    ref = float(np.min(np.abs(pts - z)))
    # dense sampling overestimates by at most half the sample spacing
    assert boundary_distance(domain, z) == pytest.approx(ref, abs=2e-4)
    assert boundary_distance(domain, z) <= ref + 1e-12


_dense = {d: dense_boundary(d) for d in DOMAINS}


@pytest.mark.parametrize("domain", DOMAINS, ids=repr)
@inside
@given(x=coord, y=coord)
def test_foot_is_on_boundary_and_normal_points_inward(domain, x, y):
    z = complex(x, y)
    assume(contains(domain, z))
    b = nearest_boundary(domain, z)
    d = boundary_distance(domain, z)
    assert abs(b.foot - z) == pytest.approx(d, abs=1e-9)
    assert b.signed_distance(z) == pytest.approx(d, rel=1e-9, abs=1e-9)
    step = b.foot + 1e-6 * min(d, 1.0) * b.normal
    assert contains(domain, step) or d < 1e-5


@pytest.mark.parametrize("domain", DOMAINS, ids=repr)
@inside
@given(x=coord, y=coord)
def test_distance_ball_stays_inside(domain, x, y):
    z = complex(x, y)
    assume(contains(domain, z))
    d = boundary_distance(domain, z)
    # contains() excludes a GEOM_TOL band along the boundary
    assume(d > 10 * GEOM_TOL)
    for k in range(8):
        u = complex(math.cos(k * math.pi / 4), math.sin(k * math.pi / 4))
        w = z + 0.999 * (d - GEOM_TOL) * u
        assert contains(domain, w)


@given(alpha=st.floats(0.05, 2.0), psi=st.floats(-math.pi, math.pi),
       s=st.floats(0.0, 10.0))
def test_slit_points_are_outside(alpha, psi, s):
    ray = (alpha + s) * complex(math.cos(psi), math.sin(psi))
    assert not contains(SlitPlane(alpha, psi), ray)


@given(theta=st.floats(0.05, 3.0), phi=st.floats(-1.0, 1.0), r=st.floats(0.01, 10.0))
def test_wedge_membership_by_angle(theta, phi, r):
    z = r * complex(math.cos(phi * theta), math.sin(phi * theta))
    w = Wedge(theta)
    if abs(phi) < 0.999:
        assert contains(w, z)
    if abs(phi) > 1.001:
        assert not contains(w, z)
