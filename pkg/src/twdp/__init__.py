"""Exact statistics and M-PSK error rates for the TWDP fading model."""

from .errors import (
    CancellationLossError,
    InvalidParameterError,
    QuadratureError,
    RangeOverflowError,
    SeriesDivergenceError,
    TwdpError,
)
from .params import (
    PhysicalMagnitudes,
    TwdpParams,
    delta_from_gamma,
    gamma_from_delta,
    k_from_rice_delta,
    k_from_rice_gamma,
    k_rice,
)
from .specfun import (
    SeriesControl,
    SeriesResult,
    appell_f1,
    bessel_i_scaled,
    exp_i0_identity_rhs,
    hyp1f1_poly,
    hyp2f1_3half,
    hyp2f1_poly,
    marcum_q1,
)
from .dist import (
    SnrContext,
    cdf,
    cdf_grid,
    cdf_rayleigh,
    cdf_rician,
    cdf_snr,
    pdf,
    pdf_grid,
    pdf_rayleigh,
    pdf_rician,
)
from .mgf import mgf_closed, mgf_series
from .asep import ModulationSpec, asep_asymptotic, asep_exact, asep_quadrature
from .mcsim import Histogram, SerEstimate, SimConfig, histogram, sample_envelope, simulate_psk_ser

__version__ = "0.1.0"

__all__ = [
    "CancellationLossError",
    "Histogram",
    "InvalidParameterError",
    "ModulationSpec",
    "PhysicalMagnitudes",
    "QuadratureError",
    "RangeOverflowError",
    "SerEstimate",
    "SeriesControl",
    "SeriesDivergenceError",
    "SeriesResult",
    "SimConfig",
    "SnrContext",
    "TwdpError",
    "TwdpParams",
    "appell_f1",
    "asep_asymptotic",
    "asep_exact",
    "asep_quadrature",
    "bessel_i_scaled",
    "cdf",
    "cdf_grid",
    "cdf_rayleigh",
    "cdf_rician",
    "cdf_snr",
    "delta_from_gamma",
    "exp_i0_identity_rhs",
    "gamma_from_delta",
    "histogram",
    "hyp1f1_poly",
    "hyp2f1_3half",
    "hyp2f1_poly",
    "k_from_rice_delta",
    "k_from_rice_gamma",
    "k_rice",
    "marcum_q1",
    "mgf_closed",
    "mgf_series",
    "pdf",
    "pdf_grid",
    "pdf_rayleigh",
    "pdf_rician",
    "sample_envelope",
    "simulate_psk_ser",
]
