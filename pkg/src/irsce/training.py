"""Downlink training protocol: phase-shift/beamformer schedules, the
received Q x T x P measurement tensor and its CP factor matrices.

Tensor layout: y[q, t, p] is the slot-q, frame-t sample on training tone
p+1.  The delay factor matrix C is Vandermonde with first row equal to
the generators themselves (exponents run p = 1..P, not 0..P-1); channel
reconstruction uses the same exponent convention.
"""

from dataclasses import dataclass

import numpy as np

from .channel import composite_generators, steer_bs, steer_irs
from .tensor_ops import cpd_synthesize, frobenius_norm


@dataclass(frozen=True)
class TrainingMatrices:
    """IRS phase-shift schedule V (M x Q) and BS beamformers F (N x T)."""

    v: np.ndarray
    f: np.ndarray


@dataclass(frozen=True)
class FactorMatrices:
    """CP factors of the noiseless received tensor.

    a: Q x U (compressed IRS steering), b: T x U (gain-scaled compressed
    BS steering), c: P x U (Vandermonde delay signatures).
    """

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray

    @property
    def rank(self):
        return self.a.shape[1]


@dataclass(frozen=True)
class ReceivedTensor:
    """Noisy measurement tensor together with its noise realization."""

    y: np.ndarray         # (Q, T, P) signal + noise
    noise: np.ndarray     # (Q, T, P)
    snr_db: float

    @property
    def signal(self):
        return self.y - self.noise


def gen_training(cfg, rng):
    """Random unit-modulus training schedules.

    V entries are exp(j*gamma) with gamma uniform on [0, 2*pi); each
    beamformer column of F is unit-modulus analog weights scaled to unit
    norm (single RF chain, digital scalar absorbed).
    """
    v = np.exp(2j * np.pi * rng.uniform(size=(cfg.m_irs, cfg.q)))
    f = np.exp(2j * np.pi * rng.uniform(size=(cfg.n_bs, cfg.t))) / np.sqrt(cfg.n_bs)
    return TrainingMatrices(v=v, f=f)


def synthesize_rx(channels, tm):
    """Noiseless received tensor: y[q, t, p] = v_q^T H_{p+1} f_t."""
    cascade = channels.cascade  # (P, M, N)
    m, q = tm.v.shape
    n, t = tm.f.shape
    if cascade.shape[1] != m or cascade.shape[2] != n:
        raise ValueError(
            f"channel dims {cascade.shape[1:]} do not match training dims {(m, n)}")
    return np.einsum("mq,pmn,nt->qtp", tm.v, cascade, tm.f)


def build_factors(comp, tm, cfg):
    """CP factor matrices of the noiseless tensor for a composite path set.

    Column u: a_u = V^T a_irs(omega_u), b_u = beta_u * F^T a_bs(phi_u),
    c_u = (z_u, z_u^2, ..., z_u^P).
    """
    u = comp.size
    a = np.empty((cfg.q, u), dtype=complex)
    b = np.empty((cfg.t, u), dtype=complex)
    for k in range(u):
        a[:, k] = tm.v.T @ steer_irs(comp.irs_az[k], comp.irs_el[k], cfg.mx, cfg.my)
        b[:, k] = comp.gain[k] * (tm.f.T @ steer_bs(comp.bs_aod[k], cfg.n_bs))
    z = composite_generators(comp.delay, cfg)
    c = z[None, :] ** np.arange(1, cfg.p + 1)[:, None]
    return FactorMatrices(a=a, b=b, c=c)


def factors_to_tensor(factors):
    """Tensor synthesized from CP factors (dual route to synthesize_rx)."""
    return cpd_synthesize(factors.a, factors.b, factors.c)


def add_noise(y, snr_db, rng):
    """Add circular complex Gaussian noise hitting the realized SNR exactly.

    The noise realization is scaled so that
    10*log10(||signal||_F^2 / ||noise||_F^2) equals ``snr_db`` for the
    drawn sample, not just in expectation.  ``snr_db=inf`` yields zero
    noise.
    """
    y = np.asarray(y)
    sig_norm = frobenius_norm(y)
    if sig_norm == 0.0:
        raise ValueError("cannot set an SNR for a zero signal tensor")
    if np.isinf(snr_db):
        noise = np.zeros_like(y)
        return ReceivedTensor(y=y.copy(), noise=noise, snr_db=float(snr_db))
    raw = rng.standard_normal(y.shape) + 1j * rng.standard_normal(y.shape)
    scale = sig_norm / (frobenius_norm(raw) * 10.0 ** (snr_db / 20.0))
    noise = scale * raw
    return ReceivedTensor(y=y + noise, noise=noise, snr_db=float(snr_db))
