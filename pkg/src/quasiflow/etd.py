"""Exponential-integrator coefficient functions.

The scalar phi functions phi_j(z) = (e^z - sum_{n<j} z^n/n!)/z^j drive the
ETDRK steppers.  Away from zero the closed forms built on expm1 are stable;
below the series threshold the defining Taylor series avoids the 0/0
cancellation entirely.

The two-component stepper needs the same functions of a lower-triangular
2x2 matrix [[x, 0], [w, y]].  Any analytic f gives
f([[x,0],[w,y]]) = [[f(x), 0], [w*D, f(y)]] with D the divided difference
(f(x)-f(y))/(x-y); the exponential's divided difference has the exact form
e^mu * sinhc(nu) (mu, nu the mean and half-gap), and the phi divided
differences reduce to stable closed forms away from the origin and to joint
series near it.
"""

from __future__ import annotations

import math

import numpy as np

SERIES_THRESHOLD = 1e-2
SERIES_TERMS = 8


def _phi_series(z, j, terms=SERIES_TERMS):
    z = np.asarray(z, dtype=float)
    acc = np.zeros_like(z)
    for n in range(terms - 1, -1, -1):
        acc = acc * z + 1.0 / math.factorial(n + j)
    return acc


def phi1(z, threshold=SERIES_THRESHOLD):
    """(e^z - 1)/z, elementwise."""
    z = np.asarray(z, dtype=float)
    small = np.abs(z) < threshold
    safe = np.where(small, 1.0, z)
    closed = np.expm1(safe) / safe
    return np.where(small, _phi_series(z, 1), closed)


def phi2(z, threshold=SERIES_THRESHOLD):
    """(e^z - 1 - z)/z^2, elementwise."""
    z = np.asarray(z, dtype=float)
    small = np.abs(z) < threshold
    safe = np.where(small, 1.0, z)
    closed = (np.expm1(safe) - safe) / safe ** 2
    return np.where(small, _phi_series(z, 2), closed)


def phi3(z, threshold=SERIES_THRESHOLD):
    """(e^z - 1 - z - z^2/2)/z^3, elementwise."""
    z = np.asarray(z, dtype=float)
    small = np.abs(z) < threshold
    safe = np.where(small, 1.0, z)
    closed = (np.expm1(safe) - safe - 0.5 * safe ** 2) / safe ** 3
    return np.where(small, _phi_series(z, 3), closed)


def sinhc(z):
    """sinh(z)/z with the removable singularity filled in."""
    z = np.asarray(z, dtype=float)
    small = np.abs(z) < 1e-4
    safe = np.where(small, 1.0, z)
    series = 1.0 + z ** 2 / 6.0 + z ** 4 / 120.0
    return np.where(small, series, np.sinh(safe) / safe)


def _h_series_divided(x, y, j, terms=18):
    """Divided difference of phi_j by its joint Taylor series.

    phi_j[x, y] = sum_m h_m(x, y)/(m + j + 1)! with h_m the complete
    homogeneous symmetric polynomials, generated by the two-variable
    recurrence h_m = x*h_{m-1} + y^m.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    out = np.zeros(np.broadcast(x, y).shape)
    h = np.ones_like(out)
    ypow = np.ones_like(out)
    out += h / math.factorial(j + 1)
    for m in range(1, terms):
        ypow = ypow * y
        h = x * h + ypow
        out += h / math.factorial(m + j + 1)
    return out


def _divided_difference(fn, j, x, y):
    """phi_j[x, y], stable across the coincident and tiny-argument regimes."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    x, y = np.broadcast_arrays(x, y)
    scale = np.maximum(np.abs(x), np.abs(y))
    small = scale < 0.5
    apart = np.abs(x - y) > 0.1 * (1.0 + scale)

    out = np.empty_like(x, dtype=float)

    # near the origin: joint series, immune to every cancellation
    if np.any(small):
        out[small] = _h_series_divided(x[small], y[small], j)

    # well-separated arguments: direct quotient of stable scalar values
    m_dir = (~small) & apart
    if np.any(m_dir):
        xd, yd = x[m_dir], y[m_dir]
        out[m_dir] = (fn(xd) - fn(yd)) / (xd - yd)

    # close but large arguments: mean/half-gap closed forms
    m_mid = (~small) & (~apart)
    if np.any(m_mid):
        xm, ym = x[m_mid], y[m_mid]
        mu = 0.5 * (xm + ym)
        nu = 0.5 * (xm - ym)
        emu = np.exp(mu)
        if j == 1:
            val = (emu * (mu * sinhc(nu) - np.cosh(nu)) + 1.0) / (xm * ym)
        elif j == 2:
            val = (
                emu * ((mu ** 2 + nu ** 2) * sinhc(nu) - 2.0 * mu * np.cosh(nu))
                + 2.0 * mu
                + xm * ym
            ) / (xm * ym) ** 2
        else:
            raise ValueError("divided differences implemented for phi1, phi2")
        out[m_mid] = val
    return out


def expm_lower_tri(x, w, y):
    """Entries (e11, e21, e22) of exp([[x, 0], [w, y]]), closed form.

    The off-diagonal divided difference (e^x - e^y)/(x - y) is evaluated as
    e^mu * sinhc(nu), exact in the equal-eigenvalue limit.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    mu = 0.5 * (x + y)
    nu = 0.5 * (x - y)
    return np.exp(x), np.asarray(w) * np.exp(mu) * sinhc(nu), np.exp(y)


def phi1_lower_tri(x, w, y):
    """Entries of phi1([[x, 0], [w, y]])."""
    return phi1(x), np.asarray(w) * _divided_difference(phi1, 1, x, y), phi1(y)


def phi2_lower_tri(x, w, y):
    """Entries of phi2([[x, 0], [w, y]])."""
    return phi2(x), np.asarray(w) * _divided_difference(phi2, 2, x, y), phi2(y)
