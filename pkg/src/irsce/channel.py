"""Geometric wideband channel model for the BS-IRS-user cascade link.

Steering vectors are parametrized directly by spatial frequency (phase
increment per array element).  This makes the cascade identity

    a_irs(wa + wa', we + we') == a_irs(wa, we) * a_irs(wa', we')   (elementwise)

exact, which is what lets the two-hop angle parameters add when the hops
are composed.  Conversion from a physical angle under half-wavelength
spacing is ``spatial_frequency(theta) = pi * sin(theta)``; it is provided
as a helper and is not used inside the estimation loop.

IRS element ordering: the length Mx*My steering vector indexes the planar
grid with the x coordinate varying fastest.  This convention is shared by
the estimator and the SOMP baseline.
"""

from dataclasses import dataclass

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0


@dataclass(frozen=True)
class SystemConfig:
    """Scalar system constants for one simulation setup."""

    n_bs: int = 64          # BS ULA antennas (N)
    mx: int = 16            # IRS grid width
    my: int = 16            # IRS grid height
    n_rf: int = 1           # RF chains, informational
    p0: int = 128           # total OFDM subcarriers
    p: int = 8              # training subcarriers (first p tones)
    q: int = 8              # IRS phase-shift slots per frame
    t: int = 8              # training frames
    fs: float = 0.32e9      # sample rate [Hz]
    fc: float = 28e9        # carrier frequency [Hz]
    l_bi: int = 2           # BS-IRS paths (L)
    l_iu: int = 2           # IRS-user paths (Lr)
    d1: float = 30.0        # BS-IRS distance [m]

    def __post_init__(self):
        if min(self.n_bs, self.mx, self.my, self.p0, self.p, self.q,
               self.t, self.l_bi, self.l_iu) < 1:
            raise ValueError("all dimensions must be positive")
        if self.p > self.p0:
            raise ValueError("training subcarriers exceed total subcarriers")
        if self.fs <= 0 or self.fc <= 0 or self.d1 <= 0:
            raise ValueError("fs, fc and d1 must be positive")

    @property
    def m_irs(self):
        """Total IRS elements M = Mx * My."""
        return self.mx * self.my

    @property
    def n_paths(self):
        """Composite-path count U = L * Lr (the CP rank)."""
        return self.l_bi * self.l_iu


@dataclass(frozen=True)
class PathSet:
    """Physical parameters of the two hops.

    BS-IRS hop (length L arrays): complex gains, BS departure spatial
    frequency, IRS arrival azimuth/elevation spatial frequencies, delay.
    IRS-user hop (length Lr arrays): complex gains, IRS departure
    azimuth/elevation spatial frequencies, delay.  Delays are in seconds.
    """

    bs_gain: np.ndarray
    bs_aod: np.ndarray
    irs_aoa_az: np.ndarray
    irs_aoa_el: np.ndarray
    bs_delay: np.ndarray
    iu_gain: np.ndarray
    irs_aod_az: np.ndarray
    irs_aod_el: np.ndarray
    iu_delay: np.ndarray


@dataclass(frozen=True)
class CompositePathSet:
    """Mapped composite-path parameters, u = (m-1)*L + n (1-based)."""

    gain: np.ndarray       # beta_u
    delay: np.ndarray      # iota_u [s]
    irs_az: np.ndarray     # omega_{a,u}
    irs_el: np.ndarray     # omega_{e,u}
    bs_aod: np.ndarray     # phi_u

    @property
    def size(self):
        return len(self.gain)


@dataclass(frozen=True)
class FrequencyChannels:
    """Per-subcarrier channels for the training tones p = 1..P.

    ``cascade[p]`` is the M x N cascade channel; ``bs_irs[p]`` and
    ``irs_user[p]`` are the raw per-hop quantities it factors through.
    """

    cascade: np.ndarray    # (P, M, N)
    bs_irs: np.ndarray     # (P, M, N)   G_p
    irs_user: np.ndarray   # (P, M)      r_p


def spatial_frequency(theta, spacing_ratio=0.5):
    """Spatial frequency of a physical angle for the given d/lambda ratio."""
    return 2.0 * np.pi * spacing_ratio * np.sin(theta)


def steer_bs(phi, n):
    """BS ULA steering vector: entry k is exp(j*k*phi), k = 0..n-1."""
    return np.exp(1j * phi * np.arange(n))


def steer_irs(omega_az, omega_el, mx, my):
    """IRS UPA steering vector of length mx*my, x index varying fastest.

    Entry for grid position (ix, iy) is exp(j*(ix*omega_az + iy*omega_el)).
    """
    ax = np.exp(1j * omega_az * np.arange(mx))
    ay = np.exp(1j * omega_el * np.arange(my))
    return (ay[:, None] * ax[None, :]).ravel()


def composite_generators(delays, cfg):
    """Vandermonde generators z_u = exp(-j*2*pi*fs*iota_u/P0)."""
    return np.exp(-2j * np.pi * cfg.fs * np.asarray(delays) / cfg.p0)


def draw_paths(cfg, rng, max_delay=100e-9, d2_range=(10.0, 30.0),
               min_generator_gap=1e-6, max_redraws=100):
    """Draw a random PathSet.

    Angular parameters are uniform on [0, 2*pi); delays uniform on
    [0, max_delay]; gains circularly symmetric Gaussian with free-space
    variance (c / (4*pi*D*fc))^2.  Delays are redrawn if any two composite
    Vandermonde generators come within ``min_generator_gap`` radians of
    each other.
    """
    l, lr = cfg.l_bi, cfg.l_iu

    def cgauss(std, size):
        return std * (rng.standard_normal(size) + 1j * rng.standard_normal(size)) / np.sqrt(2.0)

    std_bi = SPEED_OF_LIGHT / (4.0 * np.pi * cfg.d1 * cfg.fc)
    d2 = rng.uniform(*d2_range, size=lr)
    std_iu = SPEED_OF_LIGHT / (4.0 * np.pi * d2 * cfg.fc)

    for _ in range(max_redraws):
        tau = rng.uniform(0.0, max_delay, size=l)
        kappa = rng.uniform(0.0, max_delay, size=lr)
        iota = (kappa[:, None] + tau[None, :]).ravel()
        phase = 2.0 * np.pi * cfg.fs * iota / cfg.p0
        gaps = np.abs(phase[:, None] - phase[None, :])
        np.fill_diagonal(gaps, np.inf)
        if gaps.min() > min_generator_gap:
            break
    else:
        raise RuntimeError("could not draw delays with distinct generators")

    return PathSet(
        bs_gain=cgauss(std_bi, l),
        bs_aod=rng.uniform(0.0, 2.0 * np.pi, size=l),
        irs_aoa_az=rng.uniform(0.0, 2.0 * np.pi, size=l),
        irs_aoa_el=rng.uniform(0.0, 2.0 * np.pi, size=l),
        bs_delay=tau,
        iu_gain=cgauss(std_iu, lr),
        irs_aod_az=rng.uniform(0.0, 2.0 * np.pi, size=lr),
        irs_aod_el=rng.uniform(0.0, 2.0 * np.pi, size=lr),
        iu_delay=kappa,
    )


def compose(paths, cfg):
    """Map per-hop parameters to composite parameters, u = (m-1)*L + n."""
    l = cfg.l_bi
    m_idx, n_idx = np.divmod(np.arange(cfg.n_paths), l)
    return CompositePathSet(
        gain=paths.iu_gain[m_idx] * paths.bs_gain[n_idx],
        delay=paths.iu_delay[m_idx] + paths.bs_delay[n_idx],
        irs_az=paths.irs_aod_az[m_idx] + paths.irs_aoa_az[n_idx],
        irs_el=paths.irs_aod_el[m_idx] + paths.irs_aoa_el[n_idx],
        bs_aod=paths.bs_aod[n_idx],
    )


def reconstruct_cascade(gain, delay, irs_az, irs_el, bs_aod, cfg):
    """Cascade channels H_p, p = 1..P, from composite-path parameters."""
    u = len(gain)
    m, n = cfg.m_irs, cfg.n_bs
    a_irs = np.empty((m, u), dtype=complex)
    a_bs = np.empty((n, u), dtype=complex)
    for k in range(u):
        a_irs[:, k] = steer_irs(irs_az[k], irs_el[k], cfg.mx, cfg.my)
        a_bs[:, k] = steer_bs(bs_aod[k], n)
    p_idx = np.arange(1, cfg.p + 1)
    # (P, U) delay phase factors, exponent p = 1..P
    c = np.exp(-2j * np.pi * cfg.fs * np.outer(p_idx, delay) / cfg.p0)
    return np.einsum("pu,mu,nu->pmn", c * gain[None, :], a_irs, a_bs)


def cascade_channels(paths, cfg):
    """Frequency-domain channels for the training tones.

    The cascade is built from the composite parameters; the raw per-hop
    channels G_p and r_p are also materialized so that the identity
    H_p == diag(r_p) @ G_p stays testable.
    """
    comp = compose(paths, cfg)
    cascade = reconstruct_cascade(comp.gain, comp.delay, comp.irs_az,
                                  comp.irs_el, comp.bs_aod, cfg)

    m, n = cfg.m_irs, cfg.n_bs
    p_idx = np.arange(1, cfg.p + 1)
    g = np.zeros((cfg.p, m, n), dtype=complex)
    for l in range(cfg.l_bi):
        phase = paths.bs_gain[l] * np.exp(
            -2j * np.pi * cfg.fs * paths.bs_delay[l] * p_idx / cfg.p0)
        outer = np.outer(steer_irs(paths.irs_aoa_az[l], paths.irs_aoa_el[l],
                                   cfg.mx, cfg.my),
                         steer_bs(paths.bs_aod[l], n))
        g += phase[:, None, None] * outer[None, :, :]

    r = np.zeros((cfg.p, m), dtype=complex)
    for l in range(cfg.l_iu):
        phase = paths.iu_gain[l] * np.exp(
            -2j * np.pi * cfg.fs * paths.iu_delay[l] * p_idx / cfg.p0)
        r += phase[:, None] * steer_irs(paths.irs_aod_az[l],
                                        paths.irs_aod_el[l],
                                        cfg.mx, cfg.my)[None, :]

    return FrequencyChannels(cascade=cascade, bs_irs=g, irs_user=r)
