"""Exact thermodynamics and pairwise entanglement from the sector blocks.

Every quantity follows from the parity-resolved sector spectra: the partition
function is a multiplicity-weighted sum over levels, and because both the
Hamiltonian eigenstates and the thermal state are permutation invariant, the
two-spin reduced state is an X-form matrix fully determined by the collective
correlators

    alpha_mu = (<S_mu^2> - n/4) / (n (n-1)),      sz = <S_z> / n.

Concurrences then come from the closed X-form expressions
C_+ = 2(|alpha_x - alpha_y| - p_0) and C_- = 2(|alpha_x + alpha_y| -
sqrt(p_+ p_-)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.optimize import brentq
from scipy.special import logsumexp

from .errors import InvalidStateError
from .params import ModelParams
from .spin_algebra import build_block, parity_split, sector_spins

__all__ = [
    "SectorSpectrum",
    "Spectra",
    "Correlators",
    "PairDensity",
    "ConcurrenceReport",
    "diagonalize",
    "log_partition",
    "thermal_observables",
    "pair_density",
    "concurrence",
    "formation_entanglement",
    "thermal_concurrence",
    "level_concurrence",
    "LimitTemperatures",
    "limit_temperatures",
    "spectrum_low",
    "parity_transitions",
]

# Levels within this multiple of v_x of the minimum energy form the T = 0
# equal-weight ground manifold (captures the broken-symmetry parity doublet).
GROUND_DEGENERACY_RTOL = 1e-12


def _solve_tridiagonal(diag: np.ndarray, off: np.ndarray):
    if len(diag) == 1:
        return diag.astype(float).copy(), np.ones((1, 1))
    return eigh_tridiagonal(diag, off, lapack_driver="stemr")


@dataclass(frozen=True)
class SectorSpectrum:
    """Parity-labeled levels of one total-spin sector with eigenstate moments.

    Arrays run over the sector's 2S+1 levels, parity groups concatenated and
    ascending in energy within each group; ``k_index`` numbers levels inside
    their parity group.
    """

    two_s: int
    multiplicity: int
    parity: np.ndarray
    k_index: np.ndarray
    energy: np.ndarray
    m2x: np.ndarray
    m2y: np.ndarray
    m2z: np.ndarray
    m1z: np.ndarray

    @property
    def s(self) -> float:
        return self.two_s / 2.0


@dataclass(frozen=True)
class Spectra:
    """Full parity-resolved spectrum of a parameter set, with flat views."""

    params: ModelParams
    sectors: tuple[SectorSpectrum, ...]

    def _flat(self, name: str) -> np.ndarray:
        return np.concatenate([getattr(s, name) for s in self.sectors])

    @cached_property
    def energy(self) -> np.ndarray:
        return self._flat("energy")

    @cached_property
    def log_mult(self) -> np.ndarray:
        return np.concatenate([
            np.full(len(s.energy), math.log(s.multiplicity))
            for s in self.sectors
        ])

    @cached_property
    def two_s(self) -> np.ndarray:
        return np.concatenate([
            np.full(len(s.energy), s.two_s, dtype=int) for s in self.sectors
        ])

    @cached_property
    def parity(self) -> np.ndarray:
        return self._flat("parity")

    @cached_property
    def k_index(self) -> np.ndarray:
        return self._flat("k_index")

    @cached_property
    def m2x(self) -> np.ndarray:
        return self._flat("m2x")

    @cached_property
    def m2y(self) -> np.ndarray:
        return self._flat("m2y")

    @cached_property
    def m2z(self) -> np.ndarray:
        return self._flat("m2z")

    @cached_property
    def m1z(self) -> np.ndarray:
        return self._flat("m1z")

    @cached_property
    def ground_energy(self) -> float:
        return float(self.energy.min())


def _sector_spectrum(params: ModelParams, two_s: int) -> SectorSpectrum:
    block = build_block(params, two_s)
    split = parity_split(block)
    casimir = block.s * (block.s + 1.0)
    parity, k_index, energy = [], [], []
    m2x, m2y, m2z, m1z = [], [], [], []
    for sub in split.blocks:
        w, v = _solve_tridiagonal(sub.diag, sub.off)
        p = v * v
        m = sub.m_values
        mz1 = m @ p
        mz2 = (m * m) @ p
        # <S_+^2 + S_-^2> = 2 sum_j c_j v_j v_{j+1} for real eigenvectors
        pp = 2.0 * (sub.plus2 @ (v[:-1] * v[1:])) if sub.dim > 1 else np.zeros(1)
        half = 0.5 * (casimir - mz2)
        parity.append(np.full(sub.dim, sub.parity, dtype=int))
        k_index.append(np.arange(sub.dim))
        energy.append(w)
        m2x.append(half + 0.25 * pp)
        m2y.append(half - 0.25 * pp)
        m2z.append(mz2)
        m1z.append(mz1)
    return SectorSpectrum(
        two_s=two_s,
        multiplicity=split.multiplicity,
        parity=np.concatenate(parity),
        k_index=np.concatenate(k_index),
        energy=np.concatenate(energy),
        m2x=np.concatenate(m2x),
        m2y=np.concatenate(m2y),
        m2z=np.concatenate(m2z),
        m1z=np.concatenate(m1z),
    )


@lru_cache(maxsize=4)
def diagonalize(params: ModelParams) -> Spectra:
    """Diagonalize every (S, parity) sub-block and collect eigenstate moments.

    Results are cached on the (hashable, frozen) parameter set; the returned
    arrays must be treated as read-only.
    """
    sectors = tuple(_sector_spectrum(params, ts) for ts in sector_spins(params.n))
    return Spectra(params=params, sectors=sectors)


def _ground_mask(spectra: Spectra) -> np.ndarray:
    tol = GROUND_DEGENERACY_RTOL * spectra.params.v_x
    return spectra.energy <= spectra.ground_energy + tol


def _thermal_weights(spectra: Spectra, T: float) -> np.ndarray:
    if T < 0:
        raise ValueError("temperature must be nonnegative")
    if T == 0:
        mask = _ground_mask(spectra)
        a = np.where(mask, spectra.log_mult, -np.inf)
    else:
        a = spectra.log_mult - spectra.energy / T
    a = a - a.max()
    w = np.exp(a)
    return w / w.sum()


def log_partition(spectra: Spectra, T: float) -> float:
    """ln Z = ln sum_S Y(S) sum_k exp(-E/T), exact in log domain.

    At T = 0, where ln Z itself diverges, returns the ground-manifold
    regularization ln(sum of Y over states within the degeneracy tolerance of
    the minimum energy), i.e. the log ground degeneracy.
    """
    if T < 0:
        raise ValueError("temperature must be nonnegative")
    if T == 0:
        mask = _ground_mask(spectra)
        return float(logsumexp(spectra.log_mult[mask]))
    return float(logsumexp(spectra.log_mult - spectra.energy / T))


@dataclass(frozen=True)
class Correlators:
    """Intensive pair correlators: alpha_mu = <s_mu^i s_mu^j> (i != j), sz = <s_z^i>."""

    alpha_x: float
    alpha_y: float
    alpha_z: float
    sz: float


def thermal_observables(spectra: Spectra, T: float) -> Correlators:
    """Thermal alpha_mu and sz from multiplicity-weighted eigenstate moments."""
    n = spectra.params.n
    if n < 2:
        raise ValueError("pair correlators need n >= 2")
    w = _thermal_weights(spectra, T)
    denom = n * (n - 1)
    return Correlators(
        alpha_x=(float(w @ spectra.m2x) - 0.25 * n) / denom,
        alpha_y=(float(w @ spectra.m2y) - 0.25 * n) / denom,
        alpha_z=(float(w @ spectra.m2z) - 0.25 * n) / denom,
        sz=float(w @ spectra.m1z) / n,
    )


@dataclass(frozen=True)
class PairDensity:
    """Two-spin reduced density matrix of a permutation-invariant parity-definite state.

    In the standard product basis (uu, ud, du, dd) the matrix is

        [[p_+,  0,    0,    a_+],
         [0,    p_0,  a_-,  0  ],
         [0,    a_-,  p_0,  0  ],
         [a_+,  0,    0,    p_-]]

    with p_pm = 1/4 + alpha_z +- sz, p_0 = 1/4 - alpha_z, a_+ = alpha_x -
    alpha_y, a_- = alpha_x + alpha_y.
    """

    n: int
    p_plus: float
    p_minus: float
    p_zero: float
    alpha_plus: float
    alpha_minus: float
    alpha_x: float
    alpha_y: float
    alpha_z: float
    sz: float

    def matrix(self) -> np.ndarray:
        return np.array([
            [self.p_plus, 0.0, 0.0, self.alpha_plus],
            [0.0, self.p_zero, self.alpha_minus, 0.0],
            [0.0, self.alpha_minus, self.p_zero, 0.0],
            [self.alpha_plus, 0.0, 0.0, self.p_minus],
        ])

    def eigenvalues(self) -> np.ndarray:
        """Analytic X-form eigenvalues (two 2x2 blocks)."""
        mean = 0.5 * (self.p_plus + self.p_minus)
        r = math.hypot(0.5 * (self.p_plus - self.p_minus), self.alpha_plus)
        return np.sort(np.array([
            mean - r, mean + r,
            self.p_zero - self.alpha_minus, self.p_zero + self.alpha_minus,
        ]))

    def validate(self, tol: float = 1e-10) -> None:
        """Assert the physicality invariants; raises InvalidStateError."""
        if abs(self.p_plus + self.p_minus + 2 * self.p_zero - 1.0) > tol:
            raise InvalidStateError("pair probabilities do not sum to 1")
        lo = -1.0 / (4 * (self.n - 1)) - 1e-12
        for a in (self.alpha_x, self.alpha_y, self.alpha_z):
            if not lo <= a <= 0.25 + 1e-12:
                raise InvalidStateError(f"correlator {a} outside [{lo}, 0.25]")
        if self.eigenvalues()[0] < -tol:
            raise InvalidStateError("pair density not positive semidefinite")


def pair_density(corr: Correlators, n: int) -> PairDensity:
    """Assemble the X-form two-spin state from collective correlators."""
    return PairDensity(
        n=n,
        p_plus=0.25 + corr.alpha_z + corr.sz,
        p_minus=0.25 + corr.alpha_z - corr.sz,
        p_zero=0.25 - corr.alpha_z,
        alpha_plus=corr.alpha_x - corr.alpha_y,
        alpha_minus=corr.alpha_x + corr.alpha_y,
        alpha_x=corr.alpha_x,
        alpha_y=corr.alpha_y,
        alpha_z=corr.alpha_z,
        sz=corr.sz,
    )


@dataclass(frozen=True)
class ConcurrenceReport:
    c_plus: float
    c_minus: float
    c: float
    kind: str  # parallel | antiparallel | separable
    formation: float | None = None


def _signed_concurrences(pd: PairDensity) -> tuple[float, float]:
    c_plus = 2.0 * (abs(pd.alpha_plus) - pd.p_zero)
    rad = pd.p_plus * pd.p_minus
    if rad < -1e-10:
        raise InvalidStateError(
            f"p_+ p_- = {rad} < 0: sz exceeds the compatible range"
        )
    c_minus = 2.0 * (abs(pd.alpha_minus) - math.sqrt(max(rad, 0.0)))
    return c_plus, c_minus


def concurrence(pd: PairDensity, formation: bool = False) -> ConcurrenceReport:
    """Concurrence of an X-form pair state.

    C_+ = 2(|a_+| - p_0) detects parallel (uu/dd) entanglement, C_- =
    2(|a_-| - sqrt(p_+ p_-)) antiparallel; at most one can be positive and
    C = max(C_+, C_-, 0).
    """
    c_plus, c_minus = _signed_concurrences(pd)
    c = max(c_plus, c_minus, 0.0)
    if c_plus > 0.0:
        kind = "parallel"
    elif c_minus > 0.0:
        kind = "antiparallel"
    else:
        kind = "separable"
    e = formation_entanglement(c) if formation else None
    return ConcurrenceReport(c_plus=c_plus, c_minus=c_minus, c=c, kind=kind,
                             formation=e)


def formation_entanglement(c: float) -> float:
    """Entanglement of formation E(C) = h((1 + sqrt(1 - C^2))/2), h binary entropy (base 2)."""
    if not -1e-12 <= c <= 1.0 + 1e-12:
        raise ValueError(f"concurrence {c} outside [0, 1]")
    c = min(max(c, 0.0), 1.0)
    if c == 0.0:
        return 0.0
    if c == 1.0:
        return 1.0
    q = 0.5 * (1.0 + math.sqrt(1.0 - c * c))
    return -(q * math.log2(q) + (1.0 - q) * math.log2(1.0 - q))


def thermal_concurrence(params: ModelParams, T: float,
                        formation: bool = False) -> ConcurrenceReport:
    """Exact thermal pair concurrence at temperature T."""
    spectra = diagonalize(params)
    corr = thermal_observables(spectra, T)
    return concurrence(pair_density(corr, params.n), formation=formation)


def level_concurrence(spectra: Spectra, two_s: int, k: int, parity: int,
                      formation: bool = False) -> ConcurrenceReport:
    """Concurrence of the Y(S)-fold degenerate mixture of one level.

    The equal-weight mixture over the multiplicity copies of level (S, k, nu)
    is permutation invariant and parity definite, so the same X-form
    reduction applies with that eigenstate's moments.
    """
    n = spectra.params.n
    hit = np.flatnonzero((spectra.two_s == two_s) & (spectra.parity == parity)
                         & (spectra.k_index == k))
    if len(hit) != 1:
        raise ValueError(f"no level with 2S={two_s}, k={k}, parity={parity:+d}")
    i = int(hit[0])
    denom = n * (n - 1)
    corr = Correlators(
        alpha_x=(float(spectra.m2x[i]) - 0.25 * n) / denom,
        alpha_y=(float(spectra.m2y[i]) - 0.25 * n) / denom,
        alpha_z=(float(spectra.m2z[i]) - 0.25 * n) / denom,
        sz=float(spectra.m1z[i]) / n,
    )
    return concurrence(pair_density(corr, n), formation=formation)


# ---------------------------------------------------------------------------
# limit temperatures, low spectrum, parity transitions


@dataclass(frozen=True)
class LimitTemperatures:
    """Temperature intervals with positive parallel / antiparallel concurrence."""

    plus: tuple[tuple[float, float], ...]
    minus: tuple[tuple[float, float], ...]

    @property
    def t_plus(self) -> float | None:
        return max((hi for _, hi in self.plus), default=None)

    @property
    def t_minus(self) -> float | None:
        return max((hi for _, hi in self.minus), default=None)


def _signed_c_of_t(spectra: Spectra, T: float) -> tuple[float, float]:
    pd = pair_density(thermal_observables(spectra, T), spectra.params.n)
    return _signed_concurrences(pd)


def _positive_intervals(grid: np.ndarray, values: np.ndarray, f,
                        xtol: float) -> list[tuple[float, float]]:
    """Sign-change scan + root refinement; assumes f continuous on [grid[0], grid[-1]]."""
    intervals: list[tuple[float, float]] = []
    open_at: float | None = float(grid[0]) if values[0] > 0 else None
    for i in range(len(grid) - 1):
        fa, fb = values[i], values[i + 1]
        if open_at is None and fb > 0:
            start = (brentq(f, grid[i], grid[i + 1], xtol=xtol)
                     if fa < 0 else float(grid[i]))
            open_at = float(start)
        elif open_at is not None and fb <= 0:
            end = (brentq(f, grid[i], grid[i + 1], xtol=xtol)
                   if fa > 0 > fb else float(grid[i + 1]))
            intervals.append((open_at, float(end)))
            open_at = None
    if open_at is not None:
        intervals.append((open_at, float(grid[-1])))
    return intervals


def limit_temperatures(params: ModelParams, b: float | None = None, *,
                       t_max: float = 2.0, points: int = 400) -> LimitTemperatures:
    """All temperature intervals where C_+ > 0 and where C_- > 0.

    Scans a geometric grid of ``points`` temperatures in [1e-4, t_max] v_x
    (refined linearly at low T just above the factorizing field, where a
    narrow reentrant antiparallel window can hide between grid points) and
    polishes every sign change to 1e-5 v_x.  An interval starting at the
    bottom of the window is extended to T = 0 when the ground-manifold
    concurrence is itself positive.
    """
    p = params if b is None else params.with_field(b)
    spectra = diagonalize(p)
    vx = p.v_x
    grid = np.geomspace(1e-4 * vx, t_max * vx, points)
    d = p.v_x - p.v_z
    chi = p.chi
    if d > 0 and 0.0 < chi < 1.0:
        b_s = d * math.sqrt(chi)
        if b_s < p.b < b_s + 0.05 * d:
            extra = np.linspace(1e-4, 0.05, 1500) * vx
            grid = np.unique(np.concatenate([grid, extra]))

    c0 = _signed_c_of_t(spectra, 0.0)
    vals = np.array([_signed_c_of_t(spectra, t) for t in grid])
    xtol = 1e-5 * vx

    out = []
    for comp in (0, 1):
        f = lambda t, _c=comp: _signed_c_of_t(spectra, t)[_c]
        ivs = _positive_intervals(grid, vals[:, comp], f, xtol)
        # extend down to T = 0 when the ground manifold is itself entangled
        if c0[comp] > 0:
            if ivs and ivs[0][0] <= grid[0] * (1 + 1e-12):
                ivs[0] = (0.0, ivs[0][1])
            elif vals[0, comp] <= 0:
                try:  # positive sliver below the scan window
                    root = brentq(f, 1e-9 * vx, grid[0], xtol=xtol)
                    ivs.insert(0, (0.0, float(root)))
                except ValueError:
                    pass
        out.append(tuple(ivs))
    return LimitTemperatures(plus=out[0], minus=out[1])


def spectrum_low(spectra: Spectra, count: int) -> list[tuple[int, int, int, float]]:
    """Lowest ``count`` excitations above the global ground state.

    Returns (two_s, k, parity, delta_e) tuples sorted by excitation energy;
    the ground level itself is excluded but its (near-)degenerate partners
    are kept, with delta_e ~ 0.
    """
    e = spectra.energy
    order = np.argsort(e, kind="stable")
    ground = order[0]
    rows = []
    for i in order[1:count + 1]:
        rows.append((int(spectra.two_s[i]), int(spectra.k_index[i]),
                     int(spectra.parity[i]), float(e[i] - e[ground])))
    return rows


def _parity_gap(params: ModelParams, b: float) -> float:
    """E0(even) - E0(odd) within the maximum-spin sector at field b."""
    block = build_block(params.with_field(b), params.n)
    lows = {}
    for sub in parity_split(block).blocks:
        if sub.dim == 1:
            lows[sub.parity] = float(sub.diag[0])
        else:
            w = eigh_tridiagonal(sub.diag, sub.off, eigvals_only=True,
                                 select="i", select_range=(0, 0))
            lows[sub.parity] = float(w[0])
    return lows[1] - lows[-1]


def parity_transitions(params: ModelParams,
                       b_range: tuple[float, float] | None = None) -> list[float]:
    """Fields where the maximum-spin ground state's parity flips.

    In the symmetry-breaking regime the two parities are quasi-degenerate and
    their splitting oscillates, giving n/2 crossings that accumulate toward
    the exact factorizing field (1 - 1/n) b_c sqrt(chi).  Tracks the sign of
    the even-odd gap on a dense grid and refines each change by bisection.
    """
    d = params.v_x - params.v_z
    chi = params.chi
    if not (d > 0 and 0.0 < chi <= 1.0):
        raise ValueError("parity transitions require anisotropy chi in (0, 1]")
    b_c = d
    lo, hi = b_range if b_range is not None else (1e-9 * b_c, b_c * (1 - 1e-9))
    grid = np.linspace(lo, hi, max(400, 24 * params.n))
    gaps = np.array([_parity_gap(params, b) for b in grid])
    crossings = []
    for i in range(len(grid) - 1):
        ga, gb = gaps[i], gaps[i + 1]
        if ga == 0.0:
            crossings.append(float(grid[i]))
        elif ga * gb < 0:
            crossings.append(float(brentq(lambda b: _parity_gap(params, b),
                                          grid[i], grid[i + 1],
                                          xtol=1e-12 * b_c)))
    return crossings
