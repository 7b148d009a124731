"""Determinant quantum Monte Carlo for the half-filled Hubbard model.

The grand partition function is Trotter-split into L = beta/dtau imaginary
time slices and the on-site interaction is decoupled by a discrete
Hubbard-Stratonovich transformation with Ising spins s(i, l) and coupling
cosh(lam) = exp(dtau * U / 2).  Each spin species then propagates with

    B_sigma(l) = exp(dtau * t * K) . diag(exp(sigma * lam * s(:, l)))

where K is the hopping adjacency of the cluster and sigma = +-1.  The
chemical potential is pinned to U/2 inside the propagator, so the
exp(dtau * (mu - U/2)) diagonal factor drops out identically and the
configuration weight det(I + B_up(L)...B_up(1)) * det(I + B_dn(...)) is
positive at half filling.

Single-spin-flip Metropolis only.  Flipping s(i, l) has acceptance

    R_sigma = 1 + (1 - G_sigma[i, i]) * (exp(-2 sigma lam s(i, l)) - 1)

with G_sigma the equal-time Green function wrapped to slice l; accepted
flips update G by a rank-one formula.  Equal-time measurement of chi_z is
exact because total S^z commutes with the Hamiltonian and with every
HS-decoupled propagator.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
import scipy.linalg

from .ed import HubbardParams
from .lattice import ClusterGeometry, hopping_adjacency
from .thermo import WITNESS_OFFSET

logger = logging.getLogger("hubwit.dqmc")

STABILITY_TOL = 1e-4
N_SAMPLE_FIELDS = 5  # sum S_i S_j, sum S_i, moment, electrons, energy


class QmcError(ValueError):
    pass


@dataclass(frozen=True)
class QmcConfig:
    geometry: ClusterGeometry
    params: HubbardParams
    beta: float
    delta_tau: float = 0.125
    warmup_sweeps: int = 500
    measure_sweeps: int = 2000
    bin_size: int = 50
    stabilization_interval: int = 8
    rng_seed: int = 0

    def __post_init__(self):
        if self.beta <= 0 or self.delta_tau <= 0:
            raise QmcError("beta and delta_tau must be positive")
        n = round(self.beta / self.delta_tau)
        if n < 2:
            raise QmcError(f"beta={self.beta} gives fewer than 2 time slices")
        if abs(n * self.delta_tau - self.beta) > 0.5 * self.delta_tau - 1e-12:
            raise QmcError(
                f"beta={self.beta} is not within half a step of a multiple of "
                f"delta_tau={self.delta_tau}"
            )
        if min(self.warmup_sweeps, self.measure_sweeps, self.bin_size) < 1:
            raise QmcError("sweep counts and bin_size must be positive")
        if self.measure_sweeps % self.bin_size:
            raise QmcError(
                f"measure_sweeps={self.measure_sweeps} must be a multiple of "
                f"bin_size={self.bin_size}"
            )
        if self.stabilization_interval < 1:
            raise QmcError("stabilization_interval must be positive")

    @property
    def n_slices(self) -> int:
        return round(self.beta / self.delta_tau)

    @property
    def beta_adjusted(self) -> float:
        return self.n_slices * self.delta_tau

    @property
    def temperature(self) -> float:
        return 1.0 / self.beta_adjusted


def hs_coupling(u: float, delta_tau: float) -> float:
    """lam with cosh(lam) = exp(dtau * u / 2); zero iff u = 0."""
    return math.acosh(math.exp(0.5 * delta_tau * u))


@dataclass
class HsField:
    """Auxiliary Ising spins, one per (site, time slice)."""

    spins: np.ndarray  # (n_sites, n_slices), values +-1
    lam: float

    @classmethod
    def random(cls, n_sites: int, n_slices: int, u: float, delta_tau: float, rng) -> "HsField":
        spins = rng.choice(np.array([-1, 1], dtype=np.int8), size=(n_sites, n_slices))
        return cls(spins=spins, lam=hs_coupling(u, delta_tau))


class QmcState:
    """Mutable Markov-chain state: field, Green functions, diagnostics."""

    def __init__(self, cfg: QmcConfig):
        self.cfg = cfg
        self.n_sites = cfg.geometry.n_sites
        self.rng = np.random.default_rng(cfg.rng_seed)
        k = hopping_adjacency(cfg.geometry)
        self.expk = scipy.linalg.expm(cfg.delta_tau * cfg.params.t * k)
        self.expk_inv = scipy.linalg.expm(-cfg.delta_tau * cfg.params.t * k)
        self.field = HsField.random(
            self.n_sites, cfg.n_slices, cfg.params.u, cfg.delta_tau, self.rng
        )
        self.g_up = self._greens_from_scratch(+1, 0)
        self.g_dn = self._greens_from_scratch(-1, 0)
        # diagnostics
        self.accepted = 0
        self.proposed = 0
        self.stability_warnings = 0
        self.max_green_deviation = 0.0
        self.min_weight_ratio = math.inf
        self.negative_weight_count = 0

    # -- propagators ------------------------------------------------------

    def bmat(self, sigma: int, l: int) -> np.ndarray:
        v = np.exp(sigma * self.field.lam * self.field.spins[:, l])
        return self.expk * v[None, :]

    def bmat_inv(self, sigma: int, l: int) -> np.ndarray:
        v = np.exp(-sigma * self.field.lam * self.field.spins[:, l])
        return self.expk_inv * v[:, None]

    def _greens_from_scratch(self, sigma: int, position: int) -> np.ndarray:
        """G = (I + B(pos-1)...B(0) B(L-1)...B(pos))^(-1), QR-stabilized."""
        n_slices = self.cfg.n_slices
        order = [(position + k) % n_slices for k in range(n_slices)]
        group = min(self.cfg.stabilization_interval, n_slices)
        q = d = t = None
        for start in range(0, n_slices, group):
            block = np.eye(self.n_sites)
            for l in order[start : start + group]:
                block = self.bmat(sigma, l) @ block
            if q is None:
                c = block
            else:
                c = (block @ q) * d[None, :]
            q, r, piv = scipy.linalg.qr(c, pivoting=True)
            d = np.diag(r).copy()
            t_new = np.zeros_like(r)
            t_new[:, piv] = r / d[:, None]
            t = t_new if t is None else t_new @ t
        # split d into large and small parts for a stable inversion of I + Q d T
        d_big = np.where(np.abs(d) > 1.0, d, 1.0)
        d_small = d / d_big
        m = q.T / d_big[:, None] + d_small[:, None] * t
        return scipy.linalg.solve(m, q.T / d_big[:, None])

    def greens_pair_from_scratch(self, position: int) -> tuple[np.ndarray, np.ndarray]:
        return self._greens_from_scratch(+1, position), self._greens_from_scratch(-1, position)

    # -- single-slice Metropolis updates -----------------------------------

    def update_slice(self, l: int) -> int:
        """Propose one flip per site at slice l; Green must be wrapped to l."""
        lam = self.field.lam
        spins = self.field.spins
        accepted = 0
        for i in range(self.n_sites):
            arg = -2.0 * lam * spins[i, l]
            alpha_up = math.expm1(arg)
            alpha_dn = math.expm1(-arg)
            r_up = 1.0 + alpha_up * (1.0 - self.g_up[i, i])
            r_dn = 1.0 + alpha_dn * (1.0 - self.g_dn[i, i])
            ratio = r_up * r_dn
            if ratio < self.min_weight_ratio:
                self.min_weight_ratio = ratio
            if ratio <= 0.0:
                self.negative_weight_count += 1
            self.proposed += 1
            if self.rng.random() < ratio:
                _rank_one_update(self.g_up, i, alpha_up, r_up)
                _rank_one_update(self.g_dn, i, alpha_dn, r_dn)
                spins[i, l] = -spins[i, l]
                accepted += 1
        self.accepted += accepted
        return accepted

    def advance(self, l: int) -> None:
        """Move the Green functions from slice l to l+1, restabilizing periodically."""
        nxt = (l + 1) % self.cfg.n_slices
        b_up, bi_up = self.bmat(+1, l), self.bmat_inv(+1, l)
        b_dn, bi_dn = self.bmat(-1, l), self.bmat_inv(-1, l)
        wrapped_up = b_up @ self.g_up @ bi_up
        wrapped_dn = b_dn @ self.g_dn @ bi_dn
        if (l + 1) % self.cfg.stabilization_interval == 0 or nxt == 0:
            fresh_up, fresh_dn = self.greens_pair_from_scratch(nxt)
            dev = max(
                float(np.abs(wrapped_up - fresh_up).max()),
                float(np.abs(wrapped_dn - fresh_dn).max()),
            )
            if dev > self.max_green_deviation:
                self.max_green_deviation = dev
            if dev > STABILITY_TOL:
                self.stability_warnings += 1
                logger.warning(
                    "wrapped Green deviates from recomputed by %.3e at slice %d", dev, nxt
                )
            self.g_up, self.g_dn = fresh_up, fresh_dn
        else:
            self.g_up, self.g_dn = wrapped_up, wrapped_dn

    @property
    def acceptance_rate(self) -> float:
        return self.accepted / self.proposed if self.proposed else 0.0


def _rank_one_update(g: np.ndarray, i: int, alpha: float, ratio: float) -> None:
    """G <- G + (alpha/ratio) (G e_i - e_i) (e_i^T G) after flipping s(i, l)."""
    u = g[:, i].copy()
    u[i] -= 1.0
    g += (alpha / ratio) * np.outer(u, g[i, :])


def init_qmc(cfg: QmcConfig) -> QmcState:
    """Seeded random field plus from-scratch Green functions."""
    return QmcState(cfg)


def measure(state: QmcState) -> np.ndarray:
    """Wick-factorized equal-time sample from the current Green functions.

    Returns the extensive raw quantities
    [sum_ij <S_i^z S_j^z>, sum_i <S_i^z>, sum_i <n_up + n_dn - 2 n_up n_dn>,
    sum_i <n_up + n_dn>, <H>] for the current configuration; same-spin pairs
    carry the connected Wick term, opposite spins multiply independently.
    """
    g_up, g_dn = state.g_up, state.g_dn
    n_up = 1.0 - np.diag(g_up)
    n_dn = 1.0 - np.diag(g_dn)
    eye = np.eye(state.n_sites)
    corr_up = np.outer(n_up, n_up) + (eye - g_up.T) * g_up
    corr_dn = np.outer(n_dn, n_dn) + (eye - g_dn.T) * g_dn
    szsz = 0.25 * (corr_up + corr_dn - np.outer(n_up, n_dn) - np.outer(n_dn, n_up))
    double_occ = n_up * n_dn
    hopping = 0.0
    for i, j in state.cfg.geometry.bonds:
        hopping += state.cfg.params.t * (g_up[i, j] + g_up[j, i] + g_dn[i, j] + g_dn[j, i])
    return np.array(
        [
            szsz.sum(),
            0.5 * (n_up - n_dn).sum(),
            (n_up + n_dn - 2.0 * double_occ).sum(),
            (n_up + n_dn).sum(),
            hopping + state.cfg.params.u * double_occ.sum(),
        ]
    )


def sweep(state: QmcState, accumulate: np.ndarray | None = None) -> int:
    """One full sweep over every (slice, site); optionally slice-averaged samples.

    When accumulate is given it receives the mean of measure() over all time
    slices of this sweep.
    """
    accepted = 0
    if accumulate is not None:
        accumulate[:] = 0.0
    for l in range(state.cfg.n_slices):
        accepted += state.update_slice(l)
        if accumulate is not None:
            accumulate += measure(state)
        state.advance(l)
    if accumulate is not None:
        accumulate /= state.cfg.n_slices
    return accepted


# ---------------------------------------------------------------------------
# Estimates
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Estimate:
    mean: float
    err: float


@dataclass(frozen=True)
class QmcEstimate:
    """Jackknife means and errors of the per-site observables of one run."""

    temperature: float
    beta: float
    chi_z: Estimate
    l0_z: Estimate
    witness_e: Estimate
    filling: Estimate
    energy: Estimate
    bin_count: int
    acceptance_rate: float
    stability_warnings: int
    max_green_deviation: float
    min_weight_ratio: float
    negative_weight_count: int


def jackknife(bin_means: np.ndarray, fn: Callable[[np.ndarray], float]) -> Estimate:
    """Delete-one jackknife of a derived observable over bin means."""
    n = bin_means.shape[0]
    total = bin_means.sum(axis=0)
    center = fn(total / n)
    if n < 2:
        return Estimate(mean=center, err=0.0)
    reduced = np.array([fn((total - bin_means[k]) / (n - 1)) for k in range(n)])
    var = (n - 1) / n * ((reduced - reduced.mean()) ** 2).sum()
    return Estimate(mean=center, err=math.sqrt(max(var, 0.0)))


def _estimators(beta: float, n_sites: float) -> dict[str, Callable[[np.ndarray], float]]:
    def chi(v):
        return beta * (v[0] - v[1] ** 2) / n_sites

    def l0(v):
        return v[2] / (4.0 * n_sites)

    return {
        "chi_z": chi,
        "l0_z": l0,
        "witness_e": lambda v: chi(v) - (l0(v) - WITNESS_OFFSET) * beta,
        "filling": lambda v: v[3] / n_sites,
        "energy": lambda v: v[4] / n_sites,
    }


def run_qmc(cfg: QmcConfig, log_path=None) -> QmcEstimate:
    """Warm up, measure, bin, and jackknife one Markov chain.

    Identical config (seed included) gives a bit-identical trajectory and
    estimate.  Runs with u > 12 and beta > 8 are allowed but warned about:
    the stabilized Green functions degrade there.
    """
    if cfg.params.u > 12 and cfg.beta_adjusted > 8:
        warnings.warn(
            f"DQMC at u={cfg.params.u}, beta={cfg.beta_adjusted} is numerically "
            "fragile (strong coupling at low temperature); check the stability "
            "diagnostics of the result",
            stacklevel=2,
        )
    state = init_qmc(cfg)
    for _ in range(cfg.warmup_sweeps):
        sweep(state)
    samples = np.empty((cfg.measure_sweeps, N_SAMPLE_FIELDS))
    for k in range(cfg.measure_sweeps):
        sweep(state, accumulate=samples[k])

    n_bins = cfg.measure_sweeps // cfg.bin_size
    bin_means = samples.reshape(n_bins, cfg.bin_size, N_SAMPLE_FIELDS).mean(axis=1)
    if log_path is not None:
        _append_bin_log(log_path, cfg, bin_means)

    beta = cfg.beta_adjusted
    estimators = _estimators(beta, cfg.geometry.n_sites)
    results = {name: jackknife(bin_means, fn) for name, fn in estimators.items()}
    return QmcEstimate(
        temperature=cfg.temperature,
        beta=beta,
        bin_count=n_bins,
        acceptance_rate=state.acceptance_rate,
        stability_warnings=state.stability_warnings,
        max_green_deviation=state.max_green_deviation,
        min_weight_ratio=state.min_weight_ratio,
        negative_weight_count=state.negative_weight_count,
        **results,
    )


BIN_LOG_COLUMNS = ("beta", "bin", "sum_szsz", "sum_sz", "moment", "electrons", "energy")


def _append_bin_log(path, cfg: QmcConfig, bin_means: np.ndarray) -> None:
    """Append one line per bin: raw extensive bin means for post-hoc reanalysis."""
    import os

    fresh = not os.path.exists(path) or os.path.getsize(path) == 0
    with open(path, "a") as fh:
        if fresh:
            fh.write("# " + " ".join(BIN_LOG_COLUMNS) + "\n")
        for k, row in enumerate(bin_means):
            values = " ".join(repr(float(x)) for x in row)
            fh.write(f"{cfg.beta_adjusted!r} {k} {values}\n")


# ---------------------------------------------------------------------------
# Oracles and analysis helpers
# ---------------------------------------------------------------------------


def configuration_weight(cfg: QmcConfig, spins: np.ndarray) -> float:
    """det(I + B_up(L)...B_up(1)) * det(I + B_dn(...)) for an explicit field."""
    k = hopping_adjacency(cfg.geometry)
    expk = scipy.linalg.expm(cfg.delta_tau * cfg.params.t * k)
    lam = hs_coupling(cfg.params.u, cfg.delta_tau)
    weight = 1.0
    for sigma in (+1, -1):
        prod = np.eye(cfg.geometry.n_sites)
        for l in range(cfg.n_slices):
            prod = (expk * np.exp(sigma * lam * spins[:, l])[None, :]) @ prod
        weight *= scipy.linalg.det(np.eye(cfg.geometry.n_sites) + prod)
    return weight


def exhaustive_config_weights(cfg: QmcConfig) -> np.ndarray:
    """Normalized weights of all 2^(N*L) field configurations (tiny systems only)."""
    n_vars = cfg.geometry.n_sites * cfg.n_slices
    if n_vars > 20:
        raise QmcError(f"exhaustive enumeration needs N*L <= 20, got {n_vars}")
    weights = np.empty(2**n_vars)
    for code in range(2**n_vars):
        spins = field_from_code(code, cfg.geometry.n_sites, cfg.n_slices)
        weights[code] = configuration_weight(cfg, spins)
    return weights / weights.sum()


def field_from_code(code: int, n_sites: int, n_slices: int) -> np.ndarray:
    """Decode bit k = (site + n_sites * slice) of code: bit set means spin +1."""
    spins = np.empty((n_sites, n_slices), dtype=np.int8)
    for l in range(n_slices):
        for i in range(n_sites):
            spins[i, l] = 1 if (code >> (i + n_sites * l)) & 1 else -1
    return spins


def field_code(spins: np.ndarray) -> int:
    n_sites, n_slices = spins.shape
    code = 0
    for l in range(n_slices):
        for i in range(n_sites):
            if spins[i, l] > 0:
                code |= 1 << (i + n_sites * l)
    return code


def trotter_extrapolate(coarse: Estimate, fine: Estimate, dtau_coarse: float, dtau_fine: float) -> Estimate:
    """Linear extrapolation in dtau^2 of two estimates of the same observable."""
    wc, wf = dtau_coarse**2, dtau_fine**2
    mean = (fine.mean * wc - coarse.mean * wf) / (wc - wf)
    err = math.hypot(wc * fine.err, wf * coarse.err) / (wc - wf)
    return Estimate(mean=mean, err=err)


def qmc_tc_bracket(
    estimates: Sequence[QmcEstimate], n_sigma: float = 2.0
) -> tuple[float, float] | None:
    """Temperature bracket of the witness sign change at n_sigma significance.

    Lower edge: the highest temperature where witness_e is below zero by at
    least n_sigma errors.  Upper edge: the lowest temperature above that
    where it exceeds zero by the same margin.  Grid points whose sign is not
    statistically resolved are skipped.
    """
    ordered = sorted(estimates, key=lambda e: e.temperature)
    negative = [
        k for k, e in enumerate(ordered)
        if e.witness_e.mean + n_sigma * e.witness_e.err < 0.0
    ]
    if not negative:
        return None
    lo = negative[-1]
    for e in ordered[lo + 1 :]:
        if e.witness_e.mean - n_sigma * e.witness_e.err > 0.0:
            return (ordered[lo].temperature, e.temperature)
    return None
