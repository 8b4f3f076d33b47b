"""Partition function from a full quadrature over the static auxiliary fields.

The static-path approximation keeps the complete, non-Gaussian integral over
the time-independent components of the decoupling fields and multiplies each
static configuration by its small-amplitude quantum correction
omega sinh(lam/2T) / (lam sinh(omega/2T)).  It therefore stays finite through
the mean-field transition, where the purely Gaussian treatment diverges, and
becomes exact for vanishing couplings and at high temperature.

The correction factor continues to sin(|omega|/2T) where the squared mode
energy is negative (unstable static regions).  That continuation bounds the
validity of the whole scheme: at |omega|/T = 2 pi the frequency sum behind
the correction factor diverges, the integrand develops a non-integrable
pole, and any quadrature value would depend on where the nodes happen to
fall.  A sampled static point at or past that boundary therefore raises
BreakdownError instead of returning a number.  This failure sets in below a
finite temperature T* and is the low-temperature limit of the method.

Axes with a vanishing coupling carry no auxiliary field and are omitted from
the quadrature.  Axes with a negative coupling require an imaginary-axis
contour and are treated in the Gaussian saddle-point approximation around the
real stationary point, node by node of the remaining quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.optimize import minimize_scalar

from .errors import BreakdownError, NumericalError
from .exact import ConcurrenceReport, Correlators, concurrence, pair_density
from .meanfield import ln_2cosh
from .params import ModelParams

__all__ = [
    "CspaConfig",
    "CspaResult",
    "cspa_integrand",
    "cspa_log_integrand",
    "cspa_log_partition",
    "cspa_observables",
    "cspa_concurrence",
    "cspa_result",
]

_TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class CspaConfig:
    """Quadrature resolution and validity policy.

    Node counts are per axis; the count doubles until ln Z moves by less than
    ``rel_tol`` (relative).  ``cutoff_sigmas`` fixes the integration cutoff
    r_max = v_mu + cutoff_sigmas * sqrt(v_mu/(beta n)) per axis, which covers
    the static saddle (always inside |r_mu| <= v_mu) plus the Gaussian tail;
    the bare-Gaussian mass outside is < 1e-12 for any cutoff_sigmas >= 11.
    """

    rel_tol: float = 1e-10
    min_nodes: int = 24
    max_nodes: int = 768
    cutoff_sigmas: float = 12.0
    allow_negative_couplings: bool = True
    fd_step: float = 1e-5


@dataclass(frozen=True)
class CspaResult:
    """ln Z with correlators and quadrature diagnostics.

    ``validity_margin`` is the minimum of 2 pi - |omega(r)|/T over sampled
    static points whose mode has gone imaginary (2 pi if none has).  It is
    positive by construction: a sampled point at or past the boundary raises
    BreakdownError, so no result is ever returned for it.
    """

    ln_z: float
    corr: Correlators | None
    validity_margin: float
    nodes_per_axis: int


# ---------------------------------------------------------------------------
# core integrand pieces, vectorized


def _ln_2cosh_arr(a: np.ndarray) -> np.ndarray:
    # valid for a >= 0 (a = beta lam / 2 here)
    return a + np.log1p(np.exp(-2.0 * a))


def _ln_sinh_arr(y: np.ndarray) -> np.ndarray:
    return y - math.log(2.0) + np.log(-np.expm1(-2.0 * y))


def _phi_gap(s, beta: float) -> np.ndarray:
    """ln[ sinh(beta sqrt(s)/2)/sqrt(s) ] for s >= 0, series near s = 0."""
    s = np.asarray(s, dtype=float)
    tiny = beta * beta * s < 1e-6
    rt = np.sqrt(np.where(tiny, 1.0, s))
    val = _ln_sinh_arr(0.5 * beta * rt) - np.log(rt)
    return np.where(tiny, math.log(0.5 * beta) + beta * beta * s / 24.0, val)


def _phi_mode(s, beta: float):
    """Same as _phi_gap continued to s < 0 via sin(beta sqrt(-s)/2).

    Returns (phi, bad, margin): ``bad`` marks points at or past the validity
    boundary beta sqrt(-s) >= 2 pi (phi set to +inf there; callers must
    raise BreakdownError when any sampled point is bad), ``margin`` the
    minimum of 2 pi - beta sqrt(-s) over imaginary-mode points, bad ones
    included (2 pi when there are none).
    """
    s = np.asarray(s, dtype=float)
    tiny = beta * beta * np.abs(s) < 1e-6
    pos = (s > 0.0) & ~tiny
    neg = (s < 0.0) & ~tiny

    rt = np.sqrt(np.where(pos, s, 1.0))
    v_pos = _ln_sinh_arr(0.5 * beta * rt) - np.log(rt)

    t = np.sqrt(np.where(neg, -s, 1.0))
    arg = 0.5 * beta * t
    bad = neg & (arg >= math.pi * (1.0 - 1e-6))
    arg_safe = np.where(bad | ~neg, 0.5 * math.pi, arg)
    v_neg = np.log(np.sin(arg_safe)) - np.log(t)

    out = np.where(tiny, math.log(0.5 * beta) + beta * beta * s / 24.0,
                   np.where(pos, v_pos, v_neg))
    out = np.where(bad, np.inf, out)

    margin = float(np.min(np.where(neg, _TWO_PI - 2.0 * arg, _TWO_PI)))
    return out, bad, margin


def _mode_response(s, beta: float) -> np.ndarray:
    """d/d(omega^2) of -phi_mode times 2T: the (2/(beta w) - coth(w/2T))/(2w) factor."""
    s = np.asarray(s, dtype=float)
    tiny = beta * beta * np.abs(s) < 1e-6
    pos = (s > 0.0) & ~tiny
    neg = (s < 0.0) & ~tiny
    rt = np.sqrt(np.where(pos, s, 1.0))
    v_pos = (2.0 / (beta * rt) - 1.0 / np.tanh(0.5 * beta * rt)) / (2.0 * rt)
    t = np.sqrt(np.where(neg, -s, 1.0))
    arg = 0.5 * beta * t
    arg_safe = np.where(neg & (arg < math.pi), arg, 0.5 * math.pi)
    v_neg = (1.0 / np.tan(arg_safe) - 2.0 / (beta * t)) / (2.0 * t)
    return np.where(tiny, -beta / 12.0, np.where(pos, v_pos, v_neg))


def _core_fields(lx2, ly2, lz2, params: ModelParams, beta: float):
    """Static-point mode data from the squared effective-field components.

    The components may be negative on a deformed (imaginary) axis; the total
    lam^2 must stay nonnegative.  Returns (static, phi_w, bad, margin, aux)
    where ``static`` = n ln 2cosh(beta lam/2) + phi(lam^2) is the part that
    never diverges and aux = (w2, fx, fy, fz, tl) feeds the observables.
    """
    lam2 = np.maximum(np.asarray(lx2 + ly2 + lz2, dtype=float), 0.0)
    lam = np.sqrt(lam2)
    vx, vy, vz = params.couplings
    x = 0.5 * beta * lam
    small = x < 1e-4
    tl = np.where(small, 0.5 * beta * (1.0 - x * x / 3.0),
                  np.tanh(x) / np.where(lam == 0.0, 1.0, lam))
    fx, fy, fz = vx * tl, vy * tl, vz * tl
    w2 = (lx2 * (1.0 - fy) * (1.0 - fz)
          + ly2 * (1.0 - fz) * (1.0 - fx)
          + lz2 * (1.0 - fx) * (1.0 - fy))
    static = params.n * _ln_2cosh_arr(x) + _phi_gap(lam2, beta)
    phi_w, bad, margin = _phi_mode(w2, beta)
    return static, phi_w, bad, margin, (w2, fx, fy, fz, tl)


# ---------------------------------------------------------------------------
# quadrature sweeps


def _split_axes(params: ModelParams, cfg: CspaConfig):
    quad, spa = [], []
    for idx, v in enumerate(params.couplings):
        if v > 0.0:
            quad.append(idx)
        elif v < 0.0:
            if not cfg.allow_negative_couplings:
                raise ValueError("negative couplings disabled by configuration")
            spa.append(idx)
    return quad, spa


@lru_cache(maxsize=16)
def _gl(m: int):
    return leggauss(m)


def _axis_nodes(v: float, m: int, beta: float, n: int, sigmas: float,
                full_range: bool):
    rmax = v + sigmas * math.sqrt(v / (beta * n))
    x, w = _gl(m)
    if full_range:
        return rmax * x, rmax * w
    return 0.5 * rmax * (x + 1.0), 0.5 * rmax * w


def _const_terms(params: ModelParams, beta: float, quad, spa) -> float:
    n = params.n
    out = -0.25 * beta * sum(params.couplings)
    for idx in quad:
        v = params.couplings[idx]
        out += 0.5 * math.log(n * beta / (4.0 * math.pi * v))
        if idx != 2:
            out += math.log(2.0)  # x, y integrands are even: half range times 2
    for idx in spa:
        v = abs(params.couplings[idx])
        out += 0.5 * math.log(n * beta / (2.0 * v))
    return out


class _SweepOut:
    __slots__ = ("ln_integral", "averages", "margin", "nodes")

    def __init__(self, ln_integral, averages, margin, nodes):
        self.ln_integral = ln_integral
        self.averages = averages
        self.margin = margin
        self.nodes = nodes


def _breakdown(margin: float) -> BreakdownError:
    return BreakdownError(
        "|omega|/T >= 2 pi at a sampled static point (validity margin "
        f"{margin:.3g}): the quantum correction factor has a pole inside "
        "the integration region, T is below the breakdown temperature T*")


def _combine(slabs, kernel_names, margin, m):
    if not slabs:
        raise NumericalError("empty quadrature")
    shift = max(s[0] for s in slabs)
    if not math.isfinite(shift):
        raise NumericalError("integrand vanished on every node")
    total = 0.0
    sums = {k: 0.0 for k in kernel_names}
    for smax, i_s, k_s in slabs:
        scale = math.exp(smax - shift)
        total += i_s * scale
        for k in kernel_names:
            sums[k] += k_s[k] * scale
    averages = {k: sums[k] / total for k in kernel_names}
    return _SweepOut(shift + math.log(total), averages, margin, m)


def _kernels_for(quad, params: ModelParams, beta: float, lx2, ly2, lz2,
                 aux, z: float):
    """Observable kernels at the sampled static points.

    For each integrated axis: the squared magnetization r_mu^2/v_mu^2 and the
    mode-response term R(w2) * d(w2)/d(v_mu); plus z/v_z for the spin average.
    """
    w2, fx, fy, fz, tl = aux
    r = _mode_response(w2, beta)
    out = {}
    for idx in quad:
        v = params.couplings[idx]
        if idx == 0:
            out["m2_0"] = lx2 / (v * v)
            out["rdw_0"] = r * (-tl) * (ly2 * (1.0 - fz) + lz2 * (1.0 - fy))
        elif idx == 1:
            out["m2_1"] = ly2 / (v * v)
            out["rdw_1"] = r * (-tl) * (lz2 * (1.0 - fx) + lx2 * (1.0 - fz))
        else:
            out["m2_2"] = (z / v) ** 2
            out["rdw_2"] = r * (-tl) * (lx2 * (1.0 - fy) + ly2 * (1.0 - fx))
            out["mz"] = z / v
    return out


def _sweep_vec(params: ModelParams, T: float, cfg: CspaConfig, m: int,
               quad, want_obs: bool) -> _SweepOut:
    beta = 1.0 / T
    n, b = params.n, params.b
    vx, vy, vz = params.couplings

    xs, wx = _axis_nodes(vx, m, beta, n, cfg.cutoff_sigmas, False)
    if 1 in quad:
        ys, wy = _axis_nodes(vy, m, beta, n, cfg.cutoff_sigmas, False)
    else:
        ys, wy = np.array([0.0]), np.array([1.0])
    if 2 in quad:
        zs, wz = _axis_nodes(vz, m, beta, n, cfg.cutoff_sigmas, True)
    else:
        zs, wz = np.array([0.0]), np.array([1.0])

    lx2 = (xs * xs)[:, None]
    ly2 = (ys * ys)[None, :]
    g_quad = -(0.25 * beta * n) * (xs * xs / vx)[:, None]
    if 1 in quad:
        g_quad = g_quad + (-(0.25 * beta * n) * (ys * ys / vy))[None, :]
    lnw_xy = np.log(wx)[:, None] + np.log(wy)[None, :]

    slabs = []
    kernel_names = []
    margin = _TWO_PI
    for iz, z in enumerate(zs):
        lz2 = (z - b) ** 2
        g_z = -(0.25 * beta * n) * z * z / vz if 2 in quad else 0.0
        static, phi_w, bad, mrg, aux = _core_fields(lx2, ly2, lz2, params, beta)
        if bad.any():
            raise _breakdown(mrg)
        margin = min(margin, mrg)
        g_static = static + g_quad + g_z
        lnw = lnw_xy + math.log(wz[iz])
        gw = g_static + lnw - phi_w
        smax = float(np.max(gw))
        if smax == -math.inf:
            continue
        e = np.exp(gw - smax)
        i_s = float(np.sum(e))
        k_s = {}
        if want_obs:
            kern = _kernels_for(quad, params, beta, lx2, ly2, lz2, aux, z)
            kernel_names = list(kern)
            for name, arr in kern.items():
                k_s[name] = float(np.sum(e * np.where(e > 0.0, arr, 0.0)))
        slabs.append((smax, i_s, k_s))
    return _combine(slabs, kernel_names, margin, m)


def _sweep_spa(params: ModelParams, T: float, cfg: CspaConfig, m: int,
               quad, spa, want_obs: bool) -> _SweepOut:
    """Scalar sweep used when some couplings are negative.

    At every node of the integrated axes the deformed (imaginary-contour)
    variables are fixed at the real stationary point of the log-weight:
    y at 0 by symmetry, z by a bounded minimization; the Gaussian
    cross-section contributes -ln(curvature)/2 per deformed axis.  Mixed
    curvature terms vanish because the stationary y is 0.
    """
    beta = 1.0 / T
    n, b = params.n, params.b
    vx, vy, vz = params.couplings

    xs, wx = _axis_nodes(vx, m, beta, n, cfg.cutoff_sigmas, False)
    if 1 in quad:
        ys, wy = _axis_nodes(vy, m, beta, n, cfg.cutoff_sigmas, False)
    else:
        ys, wy = np.array([0.0]), np.array([1.0])
    if 2 in quad:
        zs, wz = _axis_nodes(vz, m, beta, n, cfg.cutoff_sigmas, True)
    else:
        zs, wz = np.array([0.0]), np.array([1.0])

    y_spa = 1 in spa
    z_spa = 2 in spa
    hy = 1e-3 * math.sqrt(2.0 * abs(vy) / (beta * n)) if y_spa else 0.0
    hz = 1e-3 * math.sqrt(2.0 * abs(vz) / (beta * n)) if z_spa else 0.0
    zlim = abs(vz) + cfg.cutoff_sigmas * math.sqrt(abs(vz) / (beta * n)) \
        if z_spa else 0.0

    slabs = []
    kernel_names = []
    margin = _TWO_PI

    def core(lx2, ly2, lz2):
        static, phi_w, bad, mrg, aux = _core_fields(lx2, ly2, lz2, params, beta)
        return float(static), float(phi_w), bool(bad), mrg, aux

    for ix, xv in enumerate(xs):
        for iy, yv in enumerate(ys):
            for iz, zv in enumerate(zs):
                g_quad = -(0.25 * beta * n) * xv * xv / vx
                if 1 in quad:
                    g_quad -= (0.25 * beta * n) * yv * yv / vy
                if 2 in quad:
                    g_quad -= (0.25 * beta * n) * zv * zv / vz
                lnw = math.log(wx[ix] * wy[iy] * wz[iz])

                def p_real(yq: float, zq: float) -> float:
                    # log-weight along the real axis of the deformed
                    # variables; its minimum is the contour crossing
                    g = 0.0
                    ly2v = yv * yv
                    lz2v = (zv - b) ** 2
                    if y_spa:
                        g += 0.25 * beta * n * yq * yq / abs(vy)
                        ly2v = yq * yq
                    if z_spa:
                        g += 0.25 * beta * n * zq * zq / abs(vz)
                        lz2v = (zq - b) ** 2
                    st, pw, bd, _, _ = core(xv * xv, ly2v, lz2v)
                    if bd:
                        return math.inf
                    return g + st - pw

                z0 = zv
                if z_spa:
                    res = minimize_scalar(
                        lambda zq: p_real(0.0, zq),
                        bounds=(-zlim, zlim), method="bounded",
                        options={"xatol": 1e-10 * max(abs(vz), vx)})
                    z0 = float(res.x)
                ly2_eff = 0.0 if y_spa else yv * yv
                lz2_eff = (z0 - b) ** 2
                st, pw, bd, mrg, aux = core(xv * xv, ly2_eff, lz2_eff)
                if bd:
                    raise _breakdown(mrg)
                margin = min(margin, mrg)
                g_static = g_quad + st
                if z_spa:
                    g_static += 0.25 * beta * n * z0 * z0 / abs(vz)
                sw = g_static + lnw
                curv = 0.0
                p0 = p_real(0.0, z0)
                if y_spa:
                    hyy = 2.0 * (p_real(hy, z0) - p0) / (hy * hy)
                    if not hyy > 0.0:
                        raise NumericalError(
                            "nonpositive curvature on the deformed y axis")
                    curv += 0.5 * math.log(hyy)
                if z_spa:
                    hzz = (p_real(0.0, z0 + hz) - 2.0 * p0
                           + p_real(0.0, z0 - hz)) / (hz * hz)
                    if not hzz > 0.0:
                        raise NumericalError(
                            "nonpositive curvature on the deformed z axis")
                    curv += 0.5 * math.log(hzz)
                g_val = sw - pw - curv
                k_s = {}
                if want_obs:
                    kern = _kernels_for(quad, params, beta, xv * xv, ly2_eff,
                                        lz2_eff, aux, zv)
                    if z_spa:
                        kern["mz"] = z0 / vz
                    kernel_names = list(kern)
                    k_s = {name: float(arr) for name, arr in kern.items()}
                slabs.append((g_val, 1.0, k_s))
    return _combine(slabs, kernel_names, margin, m)


def _integrate(params: ModelParams, T: float, cfg: CspaConfig,
               want_obs: bool) -> _SweepOut:
    quad, spa = _split_axes(params, cfg)
    m = cfg.min_nodes
    prev = None
    while True:
        if spa:
            cur = _sweep_spa(params, T, cfg, m, quad, spa, want_obs)
        else:
            cur = _sweep_vec(params, T, cfg, m, quad, want_obs)
        if prev is not None and (abs(cur.ln_integral - prev.ln_integral)
                                 <= cfg.rel_tol * max(1.0, abs(cur.ln_integral))):
            return cur
        if m >= cfg.max_nodes:
            raise NumericalError(
                f"static-path quadrature not converged at {m} nodes per axis")
        prev = cur
        m *= 2


# ---------------------------------------------------------------------------
# public interface


def cspa_log_integrand(r, params: ModelParams, T: float) -> float:
    """ln of the static-path weight at auxiliary field r = (x, y, z).

    This is the bare integrand (without the Gaussian normalization
    prefactors): the quadratic well in r, the Hartree 2cosh power, and the
    quantum correction factor.  Past the validity boundary it raises
    BreakdownError regardless of weight.
    """
    if T <= 0:
        raise ValueError("static-path weight needs T > 0")
    beta = 1.0 / T
    lx2, ly2 = r[0] * r[0], r[1] * r[1]
    lz2 = (r[2] - params.b) ** 2
    static, phi_w, bad, _, _ = _core_fields(lx2, ly2, lz2, params, beta)
    if bad:
        raise BreakdownError(
            "|omega(r)|/T >= 2 pi: static point outside the validity region")
    quad = sum(params.n * rv * rv / v
               for rv, v in zip(r, params.couplings) if v != 0.0)
    return -0.25 * beta * (quad + sum(params.couplings)) + float(static - phi_w)


def cspa_integrand(r, params: ModelParams, T: float) -> float:
    """exp of cspa_log_integrand; inf if the weight overflows a float."""
    try:
        return math.exp(cspa_log_integrand(r, params, T))
    except OverflowError:
        return math.inf


def cspa_log_partition(params: ModelParams, T: float,
                       cfg: CspaConfig | None = None) -> float:
    """ln Z in the static-path approximation.

    Raises BreakdownError below the breakdown temperature T* and
    NumericalError if the quadrature cannot reach the configured tolerance.
    """
    cfg = cfg or CspaConfig()
    if T <= 0:
        raise ValueError("static-path partition function needs T > 0")
    beta = 1.0 / T
    quad, spa = _split_axes(params, cfg)
    if not quad and not spa:
        return params.n * ln_2cosh(0.5 * beta * params.b)
    out = _integrate(params, T, cfg, want_obs=False)
    return out.ln_integral + _const_terms(params, beta, quad, spa)


def cspa_result(params: ModelParams, T: float,
                cfg: CspaConfig | None = None) -> CspaResult:
    """ln Z together with the pair correlators and quadrature diagnostics.

    Correlators on integrated axes come from the sampled averages
    alpha_mu = [n<m_mu^2>/2 - T/v_mu - 1/2 + <R dw^2/dv_mu>] / (2(n-1));
    axes without their own field (v_mu = 0) and deformed axes fall back to
    differentiating ln Z.  The spin average uses sz = <m_z>/2 when the z
    field exists and a central field derivative otherwise.
    """
    cfg = cfg or CspaConfig()
    if T <= 0:
        raise ValueError("static-path partition function needs T > 0")
    if params.n < 2:
        raise ValueError("pair correlators need n >= 2")
    n = params.n
    beta = 1.0 / T
    quad, spa = _split_axes(params, cfg)
    if not quad and not spa:
        # independent spins in a field: everything is analytic
        th = math.tanh(0.5 * beta * params.b)
        corr = Correlators(alpha_x=0.0, alpha_y=0.0, alpha_z=0.25 * th * th,
                           sz=-0.5 * th)
        return CspaResult(n * ln_2cosh(0.5 * beta * params.b), corr,
                          _TWO_PI, 0)

    out = _integrate(params, T, cfg, want_obs=True)
    ln_z = out.ln_integral + _const_terms(params, beta, quad, spa)

    alphas = [0.0, 0.0, 0.0]
    inv = 1.0 / (2.0 * (n - 1))
    for idx in quad:
        v = params.couplings[idx]
        a = (0.5 * n * out.averages[f"m2_{idx}"] - T / v - 0.5
             + out.averages[f"rdw_{idx}"])
        alphas[idx] = inv * a
    for idx in (0, 1, 2):
        if idx in quad:
            continue
        alphas[idx] = _alpha_fd(params, T, cfg, idx, ln_z)

    if 2 in quad or 2 in spa:
        sz = 0.5 * out.averages["mz"]
    else:
        sz = _sz_fd(params, T, cfg)
    corr = Correlators(alpha_x=alphas[0], alpha_y=alphas[1],
                       alpha_z=alphas[2], sz=sz)
    return CspaResult(ln_z, corr, out.margin, out.nodes)


def cspa_observables(params: ModelParams, T: float,
                     cfg: CspaConfig | None = None) -> Correlators:
    return cspa_result(params, T, cfg).corr


def cspa_concurrence(params: ModelParams, T: float,
                     cfg: CspaConfig | None = None,
                     formation: bool = False) -> ConcurrenceReport:
    """Concurrence of the static-path thermal state (via the pair density)."""
    corr = cspa_observables(params, T, cfg)
    return concurrence(pair_density(corr, params.n), formation=formation)


def _with_coupling(params: ModelParams, idx: int, value: float) -> ModelParams:
    kw = dict(n=params.n, b=params.b, v_x=params.v_x, v_y=params.v_y,
              v_z=params.v_z)
    kw[("v_x", "v_y", "v_z")[idx]] = value
    return ModelParams(**kw)


def _alpha_fd(params: ModelParams, T: float, cfg: CspaConfig, idx: int,
              ln_z0: float) -> float:
    """alpha_mu = T d(ln Z)/d(v_mu) / (n - 1) by finite differences.

    One-sided (second order) into v_mu > 0 from the v_mu = 0 boundary, since
    crossing zero changes the integration treatment of the axis; central for
    deformed axes, with the step kept inside the negative range.
    """
    v = params.couplings[idx]
    fac = T / (params.n - 1)
    if v == 0.0:
        h = cfg.fd_step * params.v_x
        f1 = cspa_log_partition(_with_coupling(params, idx, h), T, cfg)
        f2 = cspa_log_partition(_with_coupling(params, idx, 2.0 * h), T, cfg)
        return fac * (4.0 * f1 - 3.0 * ln_z0 - f2) / (2.0 * h)
    h = cfg.fd_step * min(params.v_x, 0.5 * abs(v))
    fp = cspa_log_partition(_with_coupling(params, idx, v + h), T, cfg)
    fm = cspa_log_partition(_with_coupling(params, idx, v - h), T, cfg)
    return fac * (fp - fm) / (2.0 * h)


def _sz_fd(params: ModelParams, T: float, cfg: CspaConfig) -> float:
    """sz = -T d(ln Z)/db / n; exact through b = 0 since ln Z is even in b."""
    h = cfg.fd_step * max(params.b, params.v_x)
    fp = cspa_log_partition(params.with_field(params.b + h), T, cfg)
    fm = cspa_log_partition(params.with_field(params.b - h), T, cfg)
    return -T * (fp - fm) / (2.0 * h * params.n)
