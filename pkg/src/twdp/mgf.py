"""Moment generating function of the instantaneous SNR.

Two equivalent forms are exposed for s <= 0:

* series:  M(s) = (1+K)/(1+K-s g0) sum_m (1/m!) (K/(1+Gamma^2))^m
                  (g0 s/(1+K-s g0))^m 2F1(-m, -m; 1; Gamma^2)
* closed:  M(s) = (1+K)/(1+K-s g0) exp(K u) I_0(2 Gamma K |u| / (1+Gamma^2)),
           u = g0 s/(1+K-s g0) in (-1, 0]

The two are linked by sum_m a^m/m! 2F1(-m,-m;1;b) = exp(a+ab) I_0(2a sqrt(b));
I_0 is even, so the closed form takes the Bessel argument in magnitude.  The
closed form is the cheap production path; the series is the form that term-
by-term manipulations (error-probability integrals) build on, and each serves
as the other's cross-check.  u is computed as (1+K)/(1+K - g0 s) - 1, which
stays exact as s -> -inf.  The series alternates and is rerun in mpmath when
its recorded cancellation exceeds the long-double budget.
"""

from __future__ import annotations

import math

import numpy as np

from .dist import SnrContext
from .errors import InvalidParameterError, SeriesDivergenceError
from .params import TwdpParams
from .specfun import (
    SeriesControl,
    SeriesResult,
    _ARITH_LD,
    _hyp2f1_neg_mm_seq,
    _ive_ladder,
    _run_series,
    run_with_rescue,
    term_hump_guard,
)

_LD = np.longdouble
_REL_TARGET = 1e-11
_MAX_DPS = 120


def _snr_ratio(k, gamma0, s, be):
    """u = g0 s / (1+K - g0 s), computed as (1+K)/(1+K - g0 s) - 1."""
    t = be.cast(gamma0) * be.cast(s)
    den = 1 + be.cast(k) - t
    return (1 + be.cast(k)) / den - 1, den


def _mgf_series_pass(p: TwdpParams, gamma0: float, s: float, ctl: SeriesControl, be):
    g2 = be.cast(p.gamma) ** 2
    a = be.cast(p.k) / (1 + g2)
    u, den = _snr_ratio(p.k, gamma0, s, be)
    q = a * u

    def terms():
        h2_seq = _hyp2f1_neg_mm_seq(g2, be)
        cm = be.cast(1.0)
        m = 0
        while True:
            yield cm * next(h2_seq)
            m += 1
            cm = cm * q / m

    ssum, n, last, possum, ok = _run_series(
        terms(), ctl, min_terms=term_hump_guard(p.k, p.gamma)
    )
    if not ok:
        raise SeriesDivergenceError(f"mgf series did not converge in {n} terms", n)
    pref = (1 + be.cast(p.k)) / den
    sabs = abs(ssum)
    trunc = float(last / sabs) if sabs > 0 else math.inf
    ratio = float(possum / sabs) if sabs > 0 else math.inf
    return float(pref * ssum), n, trunc, float(pref * possum), ratio


def mgf_series(
    p: TwdpParams, ctx: SnrContext, s: float, ctl: SeriesControl | None = None
) -> SeriesResult:
    """SNR MGF in series form, valid for s <= 0."""
    if s > 0 or not math.isfinite(s):
        raise InvalidParameterError(f"s must be finite and <= 0, got {s}")
    ctl = ctl or SeriesControl()
    value, n, trunc, ratio = run_with_rescue(
        lambda be: _mgf_series_pass(p, ctx.gamma0, s, ctl, be),
        _REL_TARGET,
        max_dps=_MAX_DPS,
        what=f"mgf series at s={s}",
    )
    return SeriesResult(value, n, trunc, ratio)


def mgf_closed(p: TwdpParams, ctx: SnrContext, s: float) -> float:
    """SNR MGF in closed form, valid for s <= 0."""
    if s > 0 or not math.isfinite(s):
        raise InvalidParameterError(f"s must be finite and <= 0, got {s}")
    be = _ARITH_LD
    k = be.cast(p.k)
    g = be.cast(p.gamma)
    u, den = _snr_ratio(p.k, ctx.gamma0, s, be)
    pref = (1 + k) / den
    expo = k * u  # <= 0
    xarg = 2 * g * k * (-u) / (1 + g * g)  # >= 0, and xarg <= |expo|
    value = pref * np.exp(expo + xarg) * _ive_ladder(xarg, 0, be)[0]
    return float(value)
