"""Shared fixtures and independent oracle implementations.

The oracles here deliberately avoid the library's own evaluation routes:
closed forms, brute-force series, and direct numerical integrals only.
"""

import math

import pytest
from scipy import integrate

from twdp import TwdpParams

# (K, Gamma) sets used for every figure-style check
FIGURE_SETS = [(0.0, 0.0), (8.0, 0.0), (8.0, 0.5), (14.0, 1.0)]


@pytest.fixture(scope="session")
def figure_params():
    return [TwdpParams(k=k, gamma=g) for k, g in FIGURE_SETS]


def rayleigh_bpsk(gamma0: float) -> float:
    """Average BPSK error probability over Rayleigh fading."""
    return 0.5 * (1.0 - math.sqrt(gamma0 / (1.0 + gamma0)))


def rayleigh_mpsk(m_order: int, gamma0: float) -> float:
    """Closed-form M-PSK error probability over Rayleigh fading."""
    g = gamma0 * math.sin(math.pi / m_order) ** 2
    r = math.sqrt(g / (1.0 + g))
    return (m_order - 1) / m_order - (r / math.pi) * (
        math.pi / 2 + math.atan(r / math.tan(math.pi / m_order))
    )


def rician_mgf(k: float, gamma0: float, s: float) -> float:
    """Rician SNR MGF, independent of the package's implementation."""
    den = 1.0 + k - gamma0 * s
    return (1.0 + k) / den * math.exp(gamma0 * k * s / den)


def rician_mpsk_quad(k: float, m_order: int, gamma0: float) -> float:
    """M-PSK error probability over Rician fading by direct MGF integration."""
    c = math.sin(math.pi / m_order) ** 2

    def f(theta):
        st = math.sin(theta)
        if st <= 0.0:
            return 0.0
        return rician_mgf(k, gamma0, -c / (st * st))

    v, _ = integrate.quad(f, 0.0, math.pi - math.pi / m_order,
                          epsabs=1e-14, epsrel=1e-12, limit=200)
    return v / math.pi


def gauss_2f1_series(a: float, b: float, c: float, z: float, n: int = 400) -> float:
    """Plain Gauss series for |z| < 1 (oracle use only)."""
    assert abs(z) < 1.0
    term = 1.0
    total = 1.0
    for j in range(n):
        term *= (a + j) * (b + j) * z / ((c + j) * (j + 1))
        total += term
        if abs(term) < 1e-18 * abs(total):
            break
    return total


def euler_2f1(a: float, b: float, c: float, z: float) -> float:
    """2F1 by adaptive quadrature of the Euler integral (needs c > a > 0 here,
    integrating over the first-parameter slot)."""
    coef = math.gamma(c) / (math.gamma(a) * math.gamma(c - a))

    def f(t):
        return t ** (a - 1.0) * (1.0 - t) ** (c - a - 1.0) * (1.0 - z * t) ** (-b)

    v, _ = integrate.quad(f, 0.0, 1.0, epsabs=1e-13, epsrel=1e-12, limit=200)
    return coef * v


def appell_f1_double_series(m: int, x: float, y: float) -> float:
    """F1(3/2; 1/2, 1+m; 5/2; x, y) by brute-force double series.

    The y direction goes through the Pfaff-type transform
    F1(a; b1, b2; c; x, y) = (1-y)^(-a) F1(a; b1, c-b1-b2; c;
    (x-y)/(1-y), y/(y-1)), whose second series terminates because
    c - b1 - b2 = 1 - m is a nonpositive integer.  Terms are built by
    recurrence so that no factorial-scale intermediate appears.
    """
    a, b1, c = 1.5, 0.5, 2.5
    b2p = 1.0 - m  # = c - b1 - (1 + m)
    xp = (x - y) / (1.0 - y)
    v = y / (y - 1.0)
    total = 0.0
    col = 1.0  # term at (i, j=0): updated by i-recurrence
    for i in range(2000):
        term = col
        inner = term
        for j in range(m):  # j-recurrence; terminates after j = m
            term *= (a + i + j) * (b2p + j) * v / ((c + i + j) * (j + 1))
            inner += term
        total += inner
        if i > 5 and abs(inner) < 1e-18 * abs(total):
            break
        col *= (a + i) * (b1 + i) * xp / ((c + i) * (i + 1))
    return (1.0 - y) ** (-a) * total
