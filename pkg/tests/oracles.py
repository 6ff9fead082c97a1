"""Independent oracles for the test suite.

Everything here avoids the library's own branch machinery: preimages come from
polynomial root finding on the numerator of b(w) - z*den(w), derivatives from
central differences, means from plain quadrature at two resolutions.
"""

import numpy as np


def preimage_roots(zeros, z):
    """All circle solutions of b(w) = z via the degree-N polynomial companion matrix.

    b(w) - z = 0  <=>  num(w) - z * den(w) = 0 with num, den built factor by
    factor; coefficients are in ascending order (numpy polynomial convention).
    """
    num = np.array([1.0 + 0.0j])
    den = np.array([1.0 + 0.0j])
    for w in zeros:
        w = complex(w)
        if w == 0:
            nf = np.array([0.0, 1.0], dtype=complex)  # w
            df = np.array([1.0], dtype=complex)
        else:
            nf = (abs(w) / w) * np.array([w, -1.0], dtype=complex)  # (|w|/w)(w - x)
            df = np.array([1.0, -np.conj(w)], dtype=complex)  # 1 - conj(w) x
        num = np.polynomial.polynomial.polymul(num, nf)
        den = np.polynomial.polynomial.polymul(den, df)
    den_full = np.zeros_like(num)
    den_full[: den.size] = den
    poly = num - z * den_full
    roots = np.polynomial.polynomial.polyroots(poly)
    assert np.all(np.abs(np.abs(roots) - 1.0) < 1e-8), "oracle roots left the circle"
    return roots


def blaschke_value(zeros, w):
    """Direct factor-by-factor evaluation (no shared code with the library path)."""
    w = np.asarray(w, dtype=complex)
    out = np.ones_like(w)
    for a in zeros:
        a = complex(a)
        if a == 0:
            out = out * w
        else:
            out = out * (abs(a) / a) * (a - w) / (1.0 - np.conj(a) * w)
    return out


def transfer_brute(zeros, func, z_points):
    """L(func) at given circle points through the polynomial preimage oracle."""
    out = np.empty(len(z_points), dtype=complex)
    for k, z in enumerate(z_points):
        roots = preimage_roots(zeros, complex(z))
        roots = roots / np.abs(roots)  # project tiny radial error back to the circle
        out[k] = np.mean(func(roots))
    return out


def central_difference(f, z, h=1e-6):
    return (f(z + h) - f(z - h)) / (2.0 * h)


def grid_mean(f, size):
    t = 2.0 * np.pi * np.arange(size) / size
    return np.mean(f(t))


def two_resolution_mean(f, size=4096):
    """Quadrature mean at two resolutions; they must agree to 1e-10."""
    m1 = grid_mean(f, size)
    m2 = grid_mean(f, 2 * size)
    assert abs(m1 - m2) < 1e-10, "quadrature resolutions disagree"
    return m2


def closed_form_outer_half(z):
    """The outer function of the boundary symbol of b = [0.5]: 0.75 / (1 - 0.5 z)^2."""
    return 0.75 / (1.0 - 0.5 * np.asarray(z, dtype=complex)) ** 2
