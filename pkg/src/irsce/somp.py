"""Compressed-sensing baseline: gridded dictionary plus simultaneous OMP.

The measurement tensor is flattened per subcarrier into a (Q*T, P)
matrix (frame index slow, slot index fast) and the subcarriers act as
multiple measurement vectors sharing a common angular support.  Each
dictionary atom is the training-compressed response of one
(irs_az, irs_el, bs_aod) grid triple; per-subcarrier complex
coefficients absorb the delay phases.  An optional delay-gridded
single-measurement-vector mode stacks subcarriers into one long vector
and adds a delay axis to the grid.
"""

from dataclasses import dataclass

import numpy as np

from .channel import reconstruct_cascade, steer_bs

DEFAULT_ATOM_BUDGET = 2_000_000


@dataclass(frozen=True)
class GridSpec:
    """Grid sizes per parameter axis; ``n_delay=0`` disables the delay axis."""

    n_irs_az: int = 16
    n_irs_el: int = 16
    n_bs: int = 32
    n_delay: int = 0

    @property
    def size(self):
        return self.n_irs_az * self.n_irs_el * self.n_bs * max(self.n_delay, 1)


@dataclass(frozen=True)
class Dictionary:
    """Column-normalized sensing dictionary with its grid descriptors."""

    atoms: np.ndarray        # (Q*T, n) or (Q*T*P, n) in delay-gridded mode
    norms: np.ndarray        # pre-normalization column norms
    irs_az: np.ndarray
    irs_el: np.ndarray
    bs_aod: np.ndarray
    delay: np.ndarray | None = None


@dataclass(frozen=True)
class SompResult:
    support: np.ndarray          # selected atom indices
    coefficients: np.ndarray     # (k, P) per-subcarrier gains, or (k, 1)
    residual_norms: np.ndarray   # per-iteration residual Frobenius norms
    cascade: np.ndarray          # (P, M, N) reconstructed channels


def measurement_matrix(y):
    """Flatten a (Q, T, P) tensor into (Q*T, P), slot index fastest."""
    q, t, p = y.shape
    return np.transpose(y, (1, 0, 2)).reshape(q * t, p)


def _angular_responses(tm, grid, cfg):
    """Compressed steering responses for every angular grid triple."""
    mx, my = cfg.mx, cfg.my
    wa = 2.0 * np.pi * np.arange(grid.n_irs_az) / grid.n_irs_az
    we = 2.0 * np.pi * np.arange(grid.n_irs_el) / grid.n_irs_el
    phis = 2.0 * np.pi * np.arange(grid.n_bs) / grid.n_bs
    ex = np.exp(1j * np.outer(np.arange(mx), wa))
    ey = np.exp(1j * np.outer(np.arange(my), we))
    steer = (ey[:, None, :, None] * ex[None, :, None, :]).reshape(
        mx * my, grid.n_irs_az * grid.n_irs_el)
    irs_resp = tm.v.T @ steer                               # (Q, Ga*Ge)
    bs_resp = tm.f.T @ np.exp(
        1j * np.outer(np.arange(cfg.n_bs), phis))           # (T, Gb)
    # grid index = bs slowest, then elevation, then azimuth fastest
    az_idx = np.tile(np.arange(grid.n_irs_az), grid.n_irs_el * grid.n_bs)
    el_idx = np.tile(np.repeat(np.arange(grid.n_irs_el), grid.n_irs_az), grid.n_bs)
    bs_idx = np.repeat(np.arange(grid.n_bs), grid.n_irs_az * grid.n_irs_el)
    return irs_resp, bs_resp, wa[az_idx], we[el_idx], phis[bs_idx]


def build_dictionary(tm, grid, cfg, atom_budget=DEFAULT_ATOM_BUDGET):
    """Sensing dictionary over the angular (and optionally delay) grid.

    The atom for one grid triple is vec over (t, q) of
    (v_q^T a_irs) * (a_bs^T f_t), matching :func:`measurement_matrix`.
    Refuses grids whose atom count exceeds ``atom_budget``.
    """
    if grid.size > atom_budget:
        raise ValueError(
            f"grid has {grid.size} atoms, above the budget of {atom_budget}; "
            "shrink the grid or raise the budget explicitly")
    irs_resp, bs_resp, az, el, phi = _angular_responses(tm, grid, cfg)
    q = irs_resp.shape[0]
    t = bs_resp.shape[0]
    n_ang = irs_resp.shape[1]
    # (T*Q, Gb*Ge*Ga): rows slot-fastest, columns bs slowest
    atoms = np.einsum("qa,tb->btqa", irs_resp, bs_resp).reshape(
        bs_resp.shape[1], t * q, n_ang).transpose(1, 0, 2).reshape(
        t * q, bs_resp.shape[1] * n_ang)

    delay = None
    if grid.n_delay > 0:
        # delay axis slowest; atoms replicated across subcarriers with the
        # per-tone delay phase applied
        p_idx = np.arange(1, cfg.p + 1)
        delays = np.arange(grid.n_delay) * (cfg.p0 / cfg.fs) / grid.n_delay
        phases = np.exp(-2j * np.pi * cfg.fs * np.outer(p_idx, delays) / cfg.p0)
        n_atoms = atoms.shape[1]
        atoms = (phases[:, None, :, None] * atoms[None, :, None, :]).reshape(
            cfg.p * t * q, grid.n_delay * n_atoms)
        az = np.tile(az, grid.n_delay)
        el = np.tile(el, grid.n_delay)
        phi = np.tile(phi, grid.n_delay)
        delay = np.repeat(delays, n_atoms)

    norms = np.linalg.norm(atoms, axis=0)
    return Dictionary(atoms=atoms / norms, norms=norms,
                      irs_az=az, irs_el=el, bs_aod=phi, delay=delay)


def somp(y_mat, dictionary, k, cfg, residual_tol=0.0):
    """Simultaneous OMP over the subcarrier measurement vectors.

    Greedily selects the atom with the largest energy summed over
    measurement columns, refits all coefficients by least squares on the
    support, and stops after ``k`` atoms or once the residual drops below
    ``residual_tol`` times the input norm.
    """
    if k < 1:
        raise ValueError("sparsity must be at least 1")
    if k > dictionary.atoms.shape[1]:
        raise ValueError("sparsity exceeds dictionary size")
    y_mat = np.atleast_2d(np.asarray(y_mat))
    residual = y_mat.copy()
    y_norm = np.linalg.norm(y_mat)
    support = []
    coeffs = np.zeros((0, y_mat.shape[1]), dtype=complex)
    res_norms = []
    for _ in range(k):
        scores = np.sum(np.abs(dictionary.atoms.conj().T @ residual) ** 2, axis=1)
        scores[support] = -np.inf
        support.append(int(np.argmax(scores)))
        sub = dictionary.atoms[:, support]
        coeffs, *_ = np.linalg.lstsq(sub, y_mat, rcond=None)
        residual = y_mat - sub @ coeffs
        res_norms.append(np.linalg.norm(residual))
        if res_norms[-1] <= residual_tol * y_norm:
            break

    support = np.asarray(support)
    # undo atom normalization so coefficients scale physical outer products
    phys = coeffs / dictionary.norms[support][:, None]
    if dictionary.delay is None:
        # per-subcarrier gains carry the delay phase implicitly
        cascade = np.zeros((cfg.p, cfg.m_irs, cfg.n_bs), dtype=complex)
        for i, idx in enumerate(support):
            outer = np.outer(
                _steer_irs_cached(dictionary.irs_az[idx], dictionary.irs_el[idx], cfg),
                steer_bs(dictionary.bs_aod[idx], cfg.n_bs))
            cascade += phys[i][:, None, None] * outer[None, :, :]
    else:
        cascade = reconstruct_cascade(
            phys[:, 0], dictionary.delay[support],
            dictionary.irs_az[support], dictionary.irs_el[support],
            dictionary.bs_aod[support], cfg)
    return SompResult(support=support, coefficients=coeffs,
                      residual_norms=np.asarray(res_norms), cascade=cascade)


def _steer_irs_cached(az, el, cfg):
    from .channel import steer_irs
    return steer_irs(az, el, cfg.mx, cfg.my)


def somp_estimate(y, tm, cfg, grid, k, atom_budget=DEFAULT_ATOM_BUDGET):
    """Convenience wrapper: build the dictionary and run SOMP on a tensor."""
    dictionary = build_dictionary(tm, grid, cfg, atom_budget=atom_budget)
    if dictionary.delay is None:
        y_mat = measurement_matrix(y)
    else:
        y_mat = measurement_matrix(y).T.reshape(-1, 1)
    return somp(y_mat, dictionary, k, cfg)
