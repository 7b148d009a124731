"""Critical-temperature location, U sweeps, and thermodynamic-limit extrapolation.

The critical temperature is the highest temperature below which the
witness certifies entanglement, so when the witness changes sign more than
once only the topmost upward crossing counts.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq

from .ed import HubbardParams, solve_sectors
from .lattice import ClusterGeometry, LatticeKind, build_lattice
from .thermo import Ensemble, thermal_observables

SCAN_POINTS = 64
BISECT_XTOL = 1e-10  # comfortably below the 1e-6 contract
REFINE_UTOL = 1e-2
# witness_e is a difference of two separately computed terms; below this
# fraction of their magnitude its sign is cancellation noise and certifies
# nothing, so the scan treats such values as nonnegative
CANCELLATION_FLOOR = 1e-12

STATUS_OK = "ok"
STATUS_NONE = "none"
STATUS_UNBRACKETED = "unbracketed"


class CriticalError(RuntimeError):
    pass


def default_workers() -> int | None:
    """Thread count for grid evaluation; HUBWIT_THREADS overrides (0 = serial)."""
    raw = os.environ.get("HUBWIT_THREADS")
    if raw is None:
        return None
    n = int(raw)
    return n if n > 1 else None


@dataclass(frozen=True)
class TcPoint:
    u: float
    tc: float | None
    status: str  # ok | none | unbracketed
    bracket: tuple[float, float] | None
    ensemble: str
    geometry: str


@dataclass(frozen=True)
class TcCurve:
    points: tuple[TcPoint, ...]
    geometry: str
    ensemble: str
    u_max: float | None  # golden-section refined location of the T_c maximum
    tc_max: float | None


def observables_function(
    geom: ClusterGeometry,
    params: HubbardParams,
    ens: Ensemble,
    workers: int | None = None,
) -> Callable[[float], "object"]:
    """Solve the ensemble's sectors once and return T -> ThermalObservables."""
    spectra = solve_sectors(geom, params, ens.sectors(geom.n_sites), workers=workers)
    return lambda temperature: thermal_observables(spectra, ens, temperature)


def witness_function(
    geom: ClusterGeometry,
    params: HubbardParams,
    ens: Ensemble,
    workers: int | None = None,
) -> Callable[[float], float]:
    """Solve the ensemble's sectors once and return T -> witness_e."""
    obs = observables_function(geom, params, ens, workers=workers)
    return lambda temperature: obs(temperature).witness_e


def _certainly_negative(obs) -> bool:
    scale = abs(obs.chi_z) + abs(obs.l0_z - 1.0 / 12.0) / obs.temperature
    return obs.witness_e < -CANCELLATION_FLOOR * scale


def find_tc(
    geom: ClusterGeometry,
    params: HubbardParams,
    ens: Ensemble,
    t_min: float,
    t_max: float,
    observables: Callable[[float], "object"] | None = None,
) -> TcPoint:
    """Scan a geometric temperature grid, bisect the topmost upward sign change.

    status "none" means the witness never went below cancellation noise on
    the grid (no entanglement detected); "unbracketed" means it is still
    negative at t_max, so the crossing lies above the search window.
    """
    if not 0 < t_min < t_max:
        raise CriticalError(f"need 0 < t_min < t_max, got ({t_min}, {t_max})")
    if observables is None:
        observables = observables_function(geom, params, ens)
    temps = np.geomspace(t_min, t_max, SCAN_POINTS)
    scan = [observables(t) for t in temps]
    values = np.array([obs.witness_e for obs in scan])
    negative = np.array([_certainly_negative(obs) for obs in scan])

    common = dict(u=params.u, ensemble=ens.tag, geometry=geom.label)
    if negative[-1]:
        return TcPoint(tc=None, status=STATUS_UNBRACKETED, bracket=None, **common)
    if not negative.any():
        return TcPoint(tc=None, status=STATUS_NONE, bracket=None, **common)

    k = int(np.flatnonzero(negative)[-1])
    hi = k + 1
    while hi < len(temps) and values[hi] <= 0:  # skip noise right above the crossing
        hi += 1
    if hi == len(temps):  # witness never resolves as positive above the last negative
        return TcPoint(tc=None, status=STATUS_NONE, bracket=None, **common)
    lo, hi = float(temps[hi - 1]), float(temps[hi])
    if observables(lo).witness_e == 0.0:
        return TcPoint(tc=lo, status=STATUS_OK, bracket=(lo, hi), **common)
    witness = lambda temperature: observables(temperature).witness_e
    tc = float(brentq(witness, lo, hi, xtol=BISECT_XTOL, rtol=4 * np.finfo(float).eps))
    return TcPoint(tc=tc, status=STATUS_OK, bracket=(lo, hi), **common)


def _golden_max(f: Callable[[float], float], lo: float, hi: float, xtol: float) -> tuple[float, float]:
    """Golden-section maximization of a unimodal function on [lo, hi]."""
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > xtol:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    x = c if fc > fd else d
    return x, max(fc, fd)


def tc_vs_u_sweep(
    geom: ClusterGeometry,
    ens: Ensemble,
    u_grid: Sequence[float],
    t_window: tuple[float, float],
    t: float = 1.0,
    workers: int | None = None,
    refine: bool = True,
) -> TcCurve:
    """One find_tc per U, assembled in grid order, plus the refined T_c maximum.

    Per-point failures are recorded in the point status and never abort the
    sweep.  Grid points are independent and evaluated concurrently.
    """
    u_grid = [float(u) for u in u_grid]
    if not u_grid or any(b <= a for a, b in zip(u_grid, u_grid[1:])):
        raise CriticalError("u_grid must be nonempty and strictly increasing")
    if workers is None:
        workers = default_workers()

    def tc_at(u: float) -> TcPoint:
        return find_tc(geom, HubbardParams(t=t, u=u), ens, *t_window)

    if workers is not None and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            points = list(pool.map(tc_at, u_grid))
    else:
        points = [tc_at(u) for u in u_grid]

    u_max = tc_max = None
    found = [(p.u, p.tc) for p in points if p.tc is not None]
    if found and refine:
        k = int(np.argmax([tc for _, tc in found]))
        us = [u for u, _ in found]
        lo = us[k - 1] if k > 0 else us[k]
        hi = us[k + 1] if k + 1 < len(us) else us[k]
        if hi > lo:
            u_max, tc_max = _golden_max(
                lambda u: tc_at(u).tc or -np.inf, lo, hi, xtol=REFINE_UTOL
            )
        else:
            u_max, tc_max = found[k]
    return TcCurve(
        points=tuple(points),
        geometry=geom.label,
        ensemble=ens.tag,
        u_max=u_max,
        tc_max=tc_max,
    )


def extrapolate_thermodynamic(
    points: Sequence[tuple[int, float]], order: int = 2
) -> float:
    """Least-squares fit tc(N) = a + b/N (+ c/N^2 ...); returns the N -> inf value."""
    if len(points) < 3:
        raise CriticalError(f"need at least 3 cluster sizes, got {len(points)}")
    sizes = [n for n, _ in points]
    if len(set(sizes)) != len(sizes):
        raise CriticalError(f"cluster sizes must be distinct, got {sizes}")
    if not 1 <= order < len(points):
        raise CriticalError(f"order must be in [1, {len(points) - 1}], got {order}")
    x = 1.0 / np.array(sizes, dtype=float)
    y = np.array([tc for _, tc in points], dtype=float)
    coeffs = np.polynomial.polynomial.polyfit(x, y, deg=order)
    return float(coeffs[0])


def eta(u: float, tc: float, t: float = 1.0) -> float:
    """Heisenberg-comparison parameter tc / J with J = 4 t^2 / u."""
    if u <= 0:
        raise CriticalError(f"eta needs u > 0, got {u}")
    return tc * u / (4.0 * t**2)


# ---------------------------------------------------------------------------
# Chain-size extrapolation pipeline
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExtrapolationResult:
    """Extrapolated maximum and large-U Heisenberg comparison for one fit order."""

    order: int
    sizes: tuple[int, ...]
    u_max: float
    tc_max: float
    eta_points: tuple[tuple[float, float], ...]  # (u, eta at extrapolated tc)
    eta_infinity: float


class ChainTcTable:
    """Memoized tc(N, U) for grand-canonical (or canonical) open chains."""

    def __init__(
        self,
        sizes: Sequence[int],
        ens: Ensemble,
        t_window: tuple[float, float] = (0.02, 20.0),
        t: float = 1.0,
    ):
        self.sizes = tuple(int(n) for n in sizes)
        self.ens = ens
        self.t_window = t_window
        self.t = t
        self._geoms = {n: build_lattice(LatticeKind.CHAIN, [n]) for n in self.sizes}
        self._cache: dict[tuple[int, float], float] = {}

    def tc(self, n: int, u: float) -> float:
        key = (n, round(float(u), 12))
        if key not in self._cache:
            point = find_tc(
                self._geoms[n], HubbardParams(t=self.t, u=u), self.ens, *self.t_window
            )
            if point.tc is None:
                raise CriticalError(
                    f"no witness crossing for the {n}-site chain at U={u} "
                    f"({point.status}); extrapolation needs every size"
                )
            self._cache[key] = point.tc
        return self._cache[key]

    def extrapolated(self, u: float, order: int) -> float:
        return extrapolate_thermodynamic([(n, self.tc(n, u)) for n in self.sizes], order)


def extrapolation_analysis(
    sizes: Sequence[int] = (2, 4, 6),
    ens: Ensemble | None = None,
    order: int = 2,
    u_window: tuple[float, float] = (1.0, 12.0),
    eta_us: Sequence[float] = (16.0, 32.0, 64.0),
    t_window: tuple[float, float] = (0.02, 20.0),
) -> ExtrapolationResult:
    """Locate the thermodynamic-limit witness maximum and the large-U eta limit.

    The extrapolated tc(U) is maximized over u_window by a coarse scan plus
    golden-section refinement; eta(infinity) comes from a linear fit of
    eta(U) in 1/U over eta_us.
    """
    ens = ens or Ensemble.grand_canonical()
    table = ChainTcTable(sizes, ens, t_window)

    def tc_inf(u: float) -> float:
        return table.extrapolated(u, order)

    coarse = np.linspace(u_window[0], u_window[1], 12)
    values = [tc_inf(u) for u in coarse]
    k = int(np.argmax(values))
    lo = coarse[max(k - 1, 0)]
    hi = coarse[min(k + 1, len(coarse) - 1)]
    u_max, tc_max = _golden_max(tc_inf, lo, hi, xtol=REFINE_UTOL)

    eta_points = tuple((u, eta(u, tc_inf(u))) for u in eta_us)
    inv_u = np.array([1.0 / u for u, _ in eta_points])
    eta_vals = np.array([e for _, e in eta_points])
    eta_infinity = float(np.polynomial.polynomial.polyfit(inv_u, eta_vals, deg=1)[0])
    return ExtrapolationResult(
        order=order,
        sizes=tuple(sizes),
        u_max=float(u_max),
        tc_max=float(tc_max),
        eta_points=eta_points,
        eta_infinity=eta_infinity,
    )
