"""Sector-resolved thermodynamics against the dense oracle and closed limits."""

from __future__ import annotations

import math

import numpy as np
import pytest
from scipy.linalg import eigh

from fcspin import (
    ModelParams,
    concurrence,
    diagonalize,
    factorizing_field,
    formation_entanglement,
    full_hamiltonian,
    level_concurrence,
    limit_temperatures,
    log_partition,
    oracle_concurrence,
    oracle_log_partition,
    oracle_observables,
    pair_density,
    parity_transitions,
    spectrum_low,
    thermal_concurrence,
    thermal_observables,
)
from tests.conftest import draw_params, draw_temperature

ATOL = 1e-9


# ---------------------------------------------------------------------------
# agreement with the dense oracle


@pytest.mark.parametrize("n", [2, 3, 5, 7])
def test_matches_oracle(n):
    rng = np.random.default_rng(100 + n)
    for _ in range(6):
        p = draw_params(rng, n)
        T = draw_temperature(rng, p.v_x)
        sp = diagonalize(p)
        assert math.isclose(log_partition(sp, T), oracle_log_partition(p, T),
                            rel_tol=ATOL, abs_tol=ATOL)
        got = thermal_observables(sp, T)
        want = oracle_observables(p, T)
        for f in ("alpha_x", "alpha_y", "alpha_z", "sz"):
            assert math.isclose(getattr(got, f), getattr(want, f),
                                abs_tol=ATOL), f
        assert math.isclose(thermal_concurrence(p, T).c,
                            oracle_concurrence(p, T).c, abs_tol=ATOL)


def test_matches_oracle_at_zero_temperature():
    rng = np.random.default_rng(42)
    for n in (4, 6):
        p = draw_params(rng, n)
        for b in (0.0, 0.4 * p.v_x, 2.0 * p.v_x):
            q = p.with_field(b)
            assert math.isclose(thermal_concurrence(q, 0.0).c,
                                oracle_concurrence(q, 0.0).c, abs_tol=1e-8)


def test_spectrum_multiset_matches_dense():
    # eigenvalues repeated by sector multiplicity exhaust the 2^n spectrum
    rng = np.random.default_rng(3)
    p = draw_params(rng, 6)
    sp = diagonalize(p)
    expanded = np.sort(np.concatenate(
        [np.repeat(s.energy, s.multiplicity) for s in sp.sectors]))
    dense = np.sort(eigh(full_hamiltonian(p), eigvals_only=True))
    assert np.allclose(expanded, dense, atol=1e-11 * p.v_x)


# ---------------------------------------------------------------------------
# thermodynamic identities


def test_correlators_are_coupling_derivatives():
    # alpha_mu = T dlnZ/dv_mu / (n - 1), sz = -T dlnZ/db / n
    p = ModelParams(n=6, b=0.45, v_x=1.0, v_y=0.35, v_z=-0.2)
    T = 0.31
    h = 1e-6
    corr = thermal_observables(diagonalize(p), T)
    for f, name in (("alpha_x", "v_x"), ("alpha_y", "v_y"), ("alpha_z", "v_z")):
        kw = {"n": p.n, "b": p.b, "v_x": p.v_x, "v_y": p.v_y, "v_z": p.v_z}
        up, dn = dict(kw), dict(kw)
        up[name] += h
        dn[name] -= h
        der = (log_partition(diagonalize(ModelParams(**up)), T)
               - log_partition(diagonalize(ModelParams(**dn)), T)) / (2 * h)
        assert math.isclose(getattr(corr, f), T * der / (p.n - 1), abs_tol=1e-8)
    der_b = (log_partition(diagonalize(p.with_field(p.b + h)), T)
             - log_partition(diagonalize(p.with_field(p.b - h)), T)) / (2 * h)
    assert math.isclose(corr.sz, -T * der_b / p.n, abs_tol=1e-8)


def test_weak_coupling_limit():
    # v -> 0 leaves n free spins in a field: ln Z -> n ln 2cosh(b/2T)
    p = ModelParams(n=9, b=0.8, v_x=1e-12, v_y=0.0, v_z=0.0)
    T = 0.6
    want = 9 * math.log(2 * math.cosh(0.8 / (2 * T)))
    assert math.isclose(log_partition(diagonalize(p), T), want, rel_tol=1e-10)
    corr = thermal_observables(diagonalize(p), T)
    assert math.isclose(corr.sz, -0.5 * math.tanh(0.8 / (2 * T)), abs_tol=1e-10)


def test_scale_invariance():
    rng = np.random.default_rng(17)
    p = draw_params(rng, 7)
    T = draw_temperature(rng, p.v_x)
    s = 4.3
    a = thermal_observables(diagonalize(p), T)
    b = thermal_observables(diagonalize(p.scaled(s)), s * T)
    for f in ("alpha_x", "alpha_y", "alpha_z", "sz"):
        assert math.isclose(getattr(a, f), getattr(b, f), abs_tol=1e-10), f
    assert math.isclose(log_partition(diagonalize(p), T),
                        log_partition(diagonalize(p.scaled(s)), s * T),
                        rel_tol=1e-10)
    assert math.isclose(thermal_concurrence(p, T).c,
                        thermal_concurrence(p.scaled(s), s * T).c,
                        abs_tol=1e-10)


def test_per_level_moments_close_the_casimir():
    rng = np.random.default_rng(23)
    p = draw_params(rng, 8)
    for s in diagonalize(p).sectors:
        s_val = s.two_s / 2.0
        total = s.m2x + s.m2y + s.m2z
        assert np.allclose(total, s_val * (s_val + 1.0), atol=1e-10)


def test_pair_density_physicality():
    rng = np.random.default_rng(29)
    for _ in range(10):
        p = draw_params(rng, 6)
        T = draw_temperature(rng, p.v_x)
        pd = pair_density(thermal_observables(diagonalize(p), T), p.n)
        pd.validate()  # raises on any violation


def test_monogamy_bound():
    # pairwise concurrence of a permutation-invariant state cannot beat 2/n
    rng = np.random.default_rng(37)
    for n in (4, 7, 10):
        for _ in range(5):
            p = draw_params(rng, n)
            T = draw_temperature(rng, p.v_x)
            assert thermal_concurrence(p, T).c <= 2.0 / n + 1e-12


# ---------------------------------------------------------------------------
# named levels and special fields


@pytest.mark.parametrize("n", [4, 6, 10])
def test_one_excitation_level_concurrence(n):
    # |S = n/2, M = -(n/2 - 1)> is an eigenstate on the XX line; its Y = 1
    # mixture is the W state with pairwise concurrence exactly 2/n
    p = ModelParams(n=n, b=0.9, v_x=1.0, v_y=1.0, v_z=0.2)
    sp = diagonalize(p)
    sec = next(s for s in sp.sectors if s.two_s == n)
    k = int(np.argmin(np.abs(sec.m1z + (n / 2 - 1))))
    rep = level_concurrence(sp, n, int(sec.k_index[k]), int(sec.parity[k]))
    assert math.isclose(rep.c, 2.0 / n, abs_tol=1e-10)
    assert rep.kind == "antiparallel"


def test_ground_manifold_at_the_finite_n_factorizing_field():
    # at b* the two parity partners cross; the T = 0 equal mixture keeps a
    # residual concurrence from their overlap, exponentially small in n (it
    # would vanish only in the basis of the two product states themselves)
    for n, chi in ((6, 0.5), (8, 0.5), (10, 0.7)):
        p = ModelParams.from_chi(n, 0.0, chi)
        b_star = factorizing_field(p).finite_n
        c_star = thermal_concurrence(p.with_field(b_star), 0.0).c
        assert c_star < chi ** (n - 2)
        if n <= 8:
            assert math.isclose(
                c_star, oracle_concurrence(p.with_field(b_star), 0.0).c,
                abs_tol=1e-10)
        # a sharp dip: both neighbors are several times higher
        for db in (-0.05, 0.05):
            c_near = thermal_concurrence(p.with_field(b_star + db), 0.0).c
            assert c_near > 5.0 * c_star


def test_parity_transitions_count_and_accumulation():
    p = ModelParams.from_chi(6, 0.0, 0.5)
    cross = parity_transitions(p)
    assert len(cross) == 3
    assert math.isclose(cross[-1], factorizing_field(p).finite_n, abs_tol=1e-6)


def test_spectrum_low_matches_dense_gaps():
    rng = np.random.default_rng(41)
    p = draw_params(rng, 6)
    sp = diagonalize(p)
    low = spectrum_low(sp, 6)
    dense = np.sort(eigh(full_hamiltonian(p), eigvals_only=True))
    gaps = dense - dense[0]
    for _, _, _, de in low:
        assert np.min(np.abs(gaps - de)) < 1e-10 * p.v_x
    assert all(low[i][3] <= low[i + 1][3] for i in range(len(low) - 1))


def test_level_concurrence_unknown_level():
    sp = diagonalize(ModelParams(n=4, b=0.1, v_x=1.0, v_y=0.5, v_z=0.0))
    with pytest.raises(ValueError):
        level_concurrence(sp, 3, 0, 1)  # no such sector for even n


# ---------------------------------------------------------------------------
# formation entanglement and limit temperatures


def test_formation_entanglement_frozen():
    assert formation_entanglement(0.0) == 0.0
    assert formation_entanglement(1.0) == 1.0
    assert math.isclose(formation_entanglement(0.5), 0.35457890266527003,
                        rel_tol=1e-12)
    grid = np.linspace(0.0, 1.0, 41)
    vals = [formation_entanglement(float(c)) for c in grid]
    assert all(b >= a for a, b in zip(vals, vals[1:]))


def test_limit_temperature_is_where_concurrence_dies():
    p = ModelParams.from_chi(10, 0.2, 0.5)
    lt = limit_temperatures(p)
    assert lt.t_plus is None  # weak field: no parallel entanglement
    t_l = lt.t_minus
    assert t_l > 0.0
    below = thermal_concurrence(p, t_l - 1e-3)
    above = thermal_concurrence(p, t_l + 1e-3)
    assert below.c_minus > 0.0 > above.c_minus


def test_limit_temperature_strong_field_is_parallel():
    p = ModelParams.from_chi(10, 2.0, 0.5)
    lt = limit_temperatures(p)
    assert lt.t_minus is None
    assert lt.t_plus > 0.0
    assert thermal_concurrence(p, lt.t_plus - 1e-3).c_plus > 0.0
    assert thermal_concurrence(p, lt.t_plus + 1e-3).c_plus < 0.0
