"""Independent brute-force references for the test suite.

Everything here is deliberately low-tech: composite midpoint/Simpson rules
on fixed grids, classic RK4, and gamma-function closed forms.  None of it
shares a code path with the package (which uses adaptive quadrature and
DOP853), so agreement between the two is evidence, not tautology.
"""

import math

import numpy as np
from scipy.special import gamma


def midpoint(f, lo, hi, panels):
    """Composite midpoint rule; never evaluates f at the endpoints."""
    h = (hi - lo) / panels
    x = lo + h * (np.arange(panels) + 0.5)
    return h * f(x).sum()


def simpson(f, lo, hi, panels):
    """Composite Simpson on 2*panels+1 equally spaced nodes."""
    x = np.linspace(lo, hi, 2 * panels + 1)
    y = f(x)
    h = (hi - lo) / (2 * panels)
    return (h / 3.0) * (y[0] + y[-1] + 4.0 * y[1:-1:2].sum() + 2.0 * y[2:-2:2].sum())


def _profile_terms(r, s):
    xi = 1.0 + np.abs(s) ** r
    d1 = r * np.sign(s) * np.abs(s) ** (r - 1.0)
    return xi, np.sqrt(1.0 + d1 * d1)


def transit_reference(r, eps0, psi, panels=400_000):
    """(|dtheta|, transit_time) for an entry at s=-eps0 with angle psi.

    Works from the Clairaut reduction alone: with c = xi(-eps0)*cos(psi),
      dtheta/ds = c*sqrt(1+xi'^2) / (xi*sqrt(xi^2-c^2)),
      dt/ds     = xi*sqrt(1+xi'^2) / sqrt(xi^2-c^2).
    Bouncing excursions (|c|>1) substitute s = s* + w^2 to flatten the
    turning-point singularity; crossing ones integrate s directly.  The
    midpoint rule keeps the turning point itself off the grid.
    """
    a = 1.0 + eps0**r
    c = a * math.cos(psi)
    if abs(c) >= 1.0:
        if abs(c) == 1.0:
            raise ValueError("asymptotic entry has no finite reference")
        # xi(s)^2 - c^2 vanishes at the turning point, and the rounding of
        # s_star**r is amplified without bound as w -> 0; 80-bit arithmetic
        # pushes that noise floor below the midpoint rule's own error
        ld = np.longdouble
        cl = ld(a) * np.cos(ld(psi))
        s_star_ld = (np.abs(cl) - ld(1)) ** (ld(1) / ld(r))
        s_star = float(s_star_ld)
        lo, hi = 0.0, math.sqrt(eps0 - s_star)

        def _terms_ld(w):
            s = s_star_ld + ld(w) * ld(w)
            xi = ld(1) + s ** ld(r)
            d1 = ld(r) * s ** (ld(r) - 1)
            root = np.sqrt(ld(1) + d1 * d1)
            den = np.sqrt(xi * xi - cl * cl)
            return xi, root, den

        def theta_term(w):
            xi, root, den = _terms_ld(w)
            return (2 * ld(w) * root / (xi * den)).astype(float)

        def time_term(w):
            xi, root, den = _terms_ld(w)
            return (2 * ld(w) * xi * root / den).astype(float)

    else:
        lo, hi = 0.0, eps0

        def theta_term(s):
            xi, root = _profile_terms(r, s)
            return root / (xi * np.sqrt(xi * xi - c * c))

        def time_term(s):
            xi, root = _profile_terms(r, s)
            return xi * root / np.sqrt(xi * xi - c * c)

    # both branches integrate a half-excursion
    return (
        2.0 * abs(c) * midpoint(theta_term, lo, hi, panels),
        2.0 * midpoint(time_term, lo, hi, panels),
    )


def rk4(f, y0, t0, t1, steps):
    """Classic fixed-step RK4 for y' = f(t, y) with array state."""
    y = np.asarray(y0, dtype=float)
    h = (t1 - t0) / steps
    t = t0
    for _ in range(steps):
        k1 = f(t, y)
        k2 = f(t + 0.5 * h, y + 0.5 * h * k1)
        k3 = f(t + 0.5 * h, y + 0.5 * h * k2)
        k4 = f(t + h, y + h * k3)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t += h
    return y


def jacobi_reference(curvature_of_t, j0, jp0, t1, steps=20_000):
    """(j, j') at t1 for j'' + K(t) j = 0 via fixed-step RK4."""

    def f(t, y):
        return np.array([y[1], -curvature_of_t(t) * y[0]])

    return rk4(f, [j0, jp0], 0.0, t1, steps)


def c1_closed_form(r, alpha):
    """int_0^inf (x^r+1)^(-alpha) dx = Gamma(1/r)Gamma(alpha-1/r)/(r Gamma(alpha))."""
    return gamma(1.0 / r) * gamma(alpha - 1.0 / r) / (r * gamma(alpha))


def c2_closed_form_beta0(r, alpha):
    """int_1^inf (x^r-1)^(-alpha) dx for alpha < 1, via u = x^(-r)."""
    return gamma(alpha - 1.0 / r) * gamma(1.0 - alpha) / (r * gamma(1.0 - 1.0 / r))


def entry_gap_longdouble(r, eps0, psi):
    """||c|-1| for an entry angle, evaluated in extended precision.

    The naive double-precision difference loses all digits near the
    asymptotic angle; 80-bit arithmetic keeps ~19 significant digits, which
    is enough to grade the package's cancellation-free form down to
    u ~ 1e-12.
    """
    a = np.longdouble(1) + np.longdouble(eps0) ** np.longdouble(r)
    c = a * np.cos(np.longdouble(psi))
    return float(np.abs(np.abs(c) - np.longdouble(1)))
