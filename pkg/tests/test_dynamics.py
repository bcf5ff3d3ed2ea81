import math

import numpy as np
import pytest

import _oracles as orc
from neckflow.dynamics import (
    GeodesicState,
    integrate,
    neck_transit,
    reverse,
    vector_field,
)
from neckflow.errors import AccuracyError, AsymptoticEntryError, NeckDomainError
from neckflow.surface import TrajectoryClass


def test_vector_field_worked_value(prof4):
    """Entry at the boundary with psi = pi/3: c = 1 exactly in reals.

    s' = sin(pi/3)/sqrt(1+16), theta' = cos(pi/3)/2, psi' = -4*cos(pi/3)/
    (2*sqrt(17)).
    """
    st = GeodesicState(s=-1.0, theta=0.0, psi=math.pi / 3.0)
    sd, td, pd = vector_field(prof4, st)
    assert sd == pytest.approx(math.sin(math.pi / 3.0) / math.sqrt(17.0), rel=1e-14)
    assert td == pytest.approx(0.25, rel=1e-14)
    assert pd == pytest.approx(-1.0 / math.sqrt(17.0), rel=1e-14)


def test_vector_field_ridge_orbit(prof4):
    # on the ridge, moving along the parallel: everything is flat
    sd, td, pd = vector_field(prof4, GeodesicState(0.0, 0.3, 0.0))
    assert (sd, pd) == (0.0, 0.0)
    assert td == 1.0


def test_reverse_is_involution():
    st = GeodesicState(-0.3, 1.2, 0.7)
    rr = reverse(reverse(st))
    assert rr.s == st.s and rr.theta == st.theta
    assert rr.psi == pytest.approx(st.psi, abs=1e-15)
    # reversal flips the meridian component
    assert math.sin(reverse(st).psi) == pytest.approx(-math.sin(st.psi), rel=1e-15)


def test_clairaut_drift_small(prof4):
    path = integrate(prof4, GeodesicState(-1.0, 0.0, 0.9), (0.0, 8.0))
    assert path.drift <= 1e-8 * abs(path.c0)
    # drift reported by sample() agrees with the stored bound
    rows = path.sample(np.linspace(0.0, path.t_end, 100))
    assert np.max(np.abs(rows[:, 4])) <= path.drift * 1.0000001


def test_integrate_unreachable_drift_tolerance(prof4):
    with pytest.raises(AccuracyError):
        integrate(prof4, GeodesicState(-1.0, 0.0, 0.9), (0.0, 8.0), drift_tol=1e-17)


def test_bouncing_transit(prof4):
    tr = neck_transit(prof4, GeodesicState(-1.0, 0.0, 1.03))
    assert tr.klass is TrajectoryClass.BOUNCING
    assert tr.exit.s == -1.0            # bounces back out the entry side
    assert math.sin(tr.exit.psi) < 0.0  # ... moving outward
    assert len(tr.turning_times) == 1
    assert len(tr.equator_times) == 0   # never reaches the ridge
    assert tr.exit.psi == pytest.approx(-1.03, abs=1e-8)
    # against the independent quadrature oracle (frozen at 2e6 panels)
    assert abs(tr.dtheta) == pytest.approx(3.581422821989772, abs=1e-7)
    assert tr.transit_time == pytest.approx(5.172602041810003, abs=1e-7)


def test_crossing_transit(prof4):
    tr = neck_transit(prof4, GeodesicState(-1.0, 0.0, 1.06))
    assert tr.klass is TrajectoryClass.CROSSING
    assert tr.exit.s == 1.0             # goes through
    assert math.sin(tr.exit.psi) > 0.0
    assert len(tr.turning_times) == 0
    assert len(tr.equator_times) == 1
    assert tr.exit.psi == pytest.approx(1.06, abs=1e-8)
    assert abs(tr.dtheta) == pytest.approx(5.678058582472286, abs=1e-7)
    assert tr.transit_time == pytest.approx(7.363148799914143, abs=1e-7)


def test_transit_oracle_random_entries(prof4):
    """ODE transits match the brute-force Clairaut reduction."""
    rng = np.random.default_rng(11)
    psi0 = prof4.asymptotic_angle()
    for _ in range(6):
        # entry angles straddling psi0, but not too deep for the oracle
        psi = psi0 + rng.choice([-1.0, 1.0]) * (0.002 + 0.03 * rng.random())
        tr = neck_transit(prof4, GeodesicState(-1.0, 0.0, psi))
        z_ref, t_ref = orc.transit_reference(4.0, 1.0, psi, panels=300_000)
        assert abs(tr.dtheta) == pytest.approx(z_ref, rel=1e-7)
        assert tr.transit_time == pytest.approx(t_ref, rel=1e-7)


def test_transit_entry_validation(prof4):
    with pytest.raises(NeckDomainError):
        neck_transit(prof4, GeodesicState(-0.5, 0.0, 1.0))
    with pytest.raises(ValueError):
        neck_transit(prof4, GeodesicState(-1.0, 0.0, -0.4))  # points outward


def test_asymptotic_entry_rejected(prof_narrow):
    """An entry whose Clairaut constant is exactly 1.0 must be refused.

    Engineered in floats: scan a few ulps of psi around arccos(1/a)
    until a*cos(psi) rounds to exactly 1.0 (a = 1.0625 is dyadic, so such
    psi exist nearby).
    """
    a = prof_narrow.boundary_radius
    psi = math.acos(1.0 / a)
    hit = None
    for _ in range(400):
        if a * math.cos(psi) == 1.0:
            hit = psi
            break
        psi = math.nextafter(psi, 0.0)
    assert hit is not None, "no exactly-asymptotic double nearby (unexpected)"
    with pytest.raises(AsymptoticEntryError):
        neck_transit(prof_narrow, GeodesicState(-0.5, 0.0, hit))


def test_meridian_crossing(prof4):
    # psi = pi/2 gives c = 0: straight over the neck, no theta motion
    tr = neck_transit(prof4, GeodesicState(-1.0, 0.0, 0.5 * math.pi))
    assert tr.klass is TrajectoryClass.CROSSING
    assert abs(tr.dtheta) < 1e-12
    z_ref, t_ref = orc.transit_reference(4.0, 1.0, 0.5 * math.pi, panels=200_000)
    assert tr.transit_time == pytest.approx(t_ref, rel=1e-8)


def test_conserved_envelope_band_independent(prof4):
    """(s')^2/(xi - c) stays in a band-independent envelope.

    Along any orbit (s')^2/(xi-c) = (xi+c)/(xi^2 (1+xi'^2)); on the default
    neck its max/min envelope tends to 136/3 ~ 45.3 as c -> 1, and never
    exceeds 50 on any band.  (It is *not* bounded by 10: the flattening of
    the profile at the boundary contributes the factor 1 + r^2 eps0^(4r-2)/
    ... = 17 at r=4.)
    """
    from neckflow.bands import band_midpoint

    s = np.linspace(0.0, 1.0, 4001)
    xi = 1.0 + s**4
    d1 = 4.0 * s**3
    ratios = []
    for n in (10, 100, 1000):
        c, _ = band_midpoint(prof4, n, "bouncing")
        g = (xi + c) / (xi**2 * (1.0 + d1**2))
        envelope = g.max() / g.min()
        exact = 68.0 * (1.0 + c) / (2.0 + c)
        assert envelope == pytest.approx(exact, rel=1e-6)
        assert envelope < 50.0
        ratios.append(envelope)
    # band independence: the envelope varies only through c - 1 = O(n^-2)
    assert max(ratios) - min(ratios) < 0.1


def test_transit_time_grows_toward_asymptotic(prof4):
    psi0 = prof4.asymptotic_angle()
    times = [
        neck_transit(prof4, GeodesicState(-1.0, 0.0, psi0 - d)).transit_time
        for d in (0.01, 0.001, 0.0001)
    ]
    assert times[0] < times[1] < times[2]
