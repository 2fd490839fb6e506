"""Solver tests: closed forms, insertion, continuation, full builds, and the
independent root-finder / multistart oracles."""

import numpy as np
import pytest
from scipy.optimize import brentq

from spiderweb import core, solver
from spiderweb.core import FLOAT64, OrderingViolated, SpiderwebParams
from spiderweb.solver import (
    BracketError,
    ContinuationSettings,
    ContinuationStalled,
    NewtonDiverged,
    SolverError,
    build_configuration,
    continue_mass,
    insert_zero_mass_ring,
    newton_solve,
    solve_single_ring,
)


def single_ring_radius(ell, m0, m1, lam):
    z = float(core.zeta(ell))
    return ((m1 * z / 2**1.5 + m0) / (-lam)) ** (1.0 / 3.0)


def params1(ell=2, m0=0.0, m1=1.0, lam=-1.0):
    return SpiderwebParams(1, ell, m0, np.array([m1]), lam)


# ---------------------------------------------------------------------------
# single ring
# ---------------------------------------------------------------------------

def test_single_ring_ell2():
    c = solve_single_ring(params1())
    assert c.radii[0] == pytest.approx(4.0 ** (-1.0 / 3.0), rel=1e-15)
    assert c.residual_norm < 1e-14


def test_single_ring_mass_scaling():
    base = solve_single_ring(params1(m1=1.0))
    scaled = solve_single_ring(params1(m1=8.0))
    assert scaled.radii[0] == pytest.approx(2.0 * base.radii[0], rel=1e-15)


def test_single_ring_with_central_mass():
    c = solve_single_ring(params1(ell=4, m0=1.0))
    z4 = 2.0 + 1.0 / np.sqrt(2.0)
    assert float(core.zeta(4)) == pytest.approx(z4, rel=1e-14)
    assert c.radii[0] == pytest.approx((z4 / 2**1.5 + 1.0) ** (1.0 / 3.0), rel=1e-14)


def test_single_ring_needs_n1():
    p = SpiderwebParams(2, 2, 0.0, np.array([1.0, 1.0]), -1.0)
    with pytest.raises(ValueError):
        solve_single_ring(p)


def test_settings_validation():
    with pytest.raises(ValueError):
        ContinuationSettings(newton_tol=0.0)
    with pytest.raises(ValueError):
        ContinuationSettings(step_shrink=1.2)
    with pytest.raises(ValueError):
        ContinuationSettings(step_grow=0.9)
    with pytest.raises(ValueError):
        ContinuationSettings(mass_step_init=-1.0)


# ---------------------------------------------------------------------------
# newton
# ---------------------------------------------------------------------------

def test_newton_fixed_point_returns_unchanged():
    p = params1()
    exact = solve_single_ring(p)
    c = newton_solve(p, exact.radii)
    assert c.radii[0] == exact.radii[0]
    assert c.residual_norm <= 1e-12


def test_newton_single_ring_from_crude_start():
    c = newton_solve(params1(), np.array([1.0]))
    assert c.radii[0] == pytest.approx(4.0 ** (-1.0 / 3.0), rel=1e-12)


def test_newton_quadratic_tail():
    p = SpiderwebParams(3, 6, 0.0, np.ones(3), -1.0)
    target = build_configuration(p)
    start = target.radii * np.array([1.05, 0.97, 1.04])
    _, _, _, history = solver._newton_raw(
        start, p.masses, p.m0, p.lam, p.ell, ContinuationSettings()
    )
    tail = [h for h in history if 1e-14 < h < 1e-2]
    assert len(tail) >= 2
    for a, b in zip(tail, tail[1:]):
        assert b <= 50.0 * a * a  # quadratic contraction with modest constant


def test_newton_diverged_is_reported():
    p = params1()
    with pytest.raises(NewtonDiverged):
        newton_solve(p, np.array([1e6]), ContinuationSettings(newton_max_iter=2))


def test_newton_validates_start():
    p = SpiderwebParams(2, 4, 0.0, np.ones(2), -1.0)
    with pytest.raises(OrderingViolated):
        newton_solve(p, np.array([2.0, 1.0]))


# ---------------------------------------------------------------------------
# restricted insertion
# ---------------------------------------------------------------------------

def test_outer_insertion_matches_independent_root_finder():
    p = params1()
    c = solve_single_ring(p)
    ext = insert_zero_mass_ring(c, gap=1)
    assert ext.shape == (2,)
    g = lambda s: core.probe_ring_lambda(p, c.radii, s) - p.lam
    r1 = c.radii[0]
    oracle = brentq(g, r1 * 1.0001, r1 * 64.0, xtol=1e-14)
    assert ext[1] == pytest.approx(oracle, rel=1e-10, abs=1e-12)


def test_probe_lambda_monotone_in_each_gap():
    p = SpiderwebParams(3, 5, 0.2, np.array([1.0, 0.8, 1.3]), -1.0)
    c = build_configuration(p)
    r = c.radii
    gaps = [(r[0], r[1]), (r[1], r[2]), (r[2], 4.0 * r[2])]
    for lo, hi in gaps:
        ss = np.linspace(lo + 1e-4 * (hi - lo), hi - 1e-4 * (hi - lo), 10)
        vals = [core.probe_ring_lambda(p, r, s) for s in ss]
        assert np.all(np.diff(vals) > 0)


def test_insertion_leaves_existing_lambdas_unchanged():
    p = SpiderwebParams(2, 6, 0.0, np.array([1.0, 2.0]), -1.0)
    c = build_configuration(p)
    lam_before = core.lambda_values(p, c.radii)
    ext = insert_zero_mass_ring(c, gap=2)
    lam_after = core._force_per_mass(
        ext, np.append(p.masses, 0.0), p.m0, p.ell, FLOAT64
    ) / ext
    assert np.max(np.abs(lam_after[:2] - lam_before)) < 1e-14


def test_inner_gap_insertion():
    p = SpiderwebParams(2, 4, 0.0, np.array([1.0, 1.0]), -1.0)
    c = build_configuration(p)
    ext = insert_zero_mass_ring(c, gap=1)
    assert c.radii[0] < ext[1] < c.radii[1]
    lam_probe = core.probe_ring_lambda(p, c.radii, ext[1])
    assert lam_probe == pytest.approx(p.lam, abs=1e-9)


def test_gap0_requires_central_mass():
    p0 = SpiderwebParams(1, 3, 0.0, np.array([1.0]), -1.0)
    c0 = solve_single_ring(p0)
    with pytest.raises(BracketError):
        insert_zero_mass_ring(c0, gap=0)
    p1 = SpiderwebParams(1, 3, 2.0, np.array([1.0]), -1.0)
    c1 = solve_single_ring(p1)
    ext = insert_zero_mass_ring(c1, gap=0)
    assert 0.0 < ext[0] < c1.radii[0]


def test_insertion_rejects_non_central_input():
    p = SpiderwebParams(2, 4, 0.0, np.array([1.0, 1.0]), -1.0)
    bogus = core.Configuration(p, np.array([1.0, 2.0]), 0.0)
    with pytest.raises(SolverError):
        insert_zero_mass_ring(bogus, gap=2)


# ---------------------------------------------------------------------------
# continuation
# ---------------------------------------------------------------------------

def test_continue_mass_zero_target_is_identity():
    p = params1()
    c = solve_single_ring(p)
    ext = insert_zero_mass_ring(c, gap=1)
    out = continue_mass(p, ext, 0.0)
    assert np.array_equal(out.radii, ext)
    assert out.params.masses[-1] == 0.0
    assert out.params.n == 2


def test_continue_mass_matches_direct_newton():
    p = params1(ell=2)
    c = solve_single_ring(p)
    ext = insert_zero_mass_ring(c, gap=1)
    cont = continue_mass(p, ext, 1.0)
    assert cont.residual_norm <= 1e-12
    p2 = SpiderwebParams(2, 2, 0.0, np.array([1.0, 1.0]), -1.0)
    direct = newton_solve(p2, np.array([0.55, 1.7]))
    assert np.allclose(cont.radii, direct.radii, rtol=1e-10)


def test_continue_mass_validates_input():
    p = params1()
    with pytest.raises(OrderingViolated):
        continue_mass(p, np.array([2.0, 1.0]), 1.0)
    with pytest.raises(SolverError):
        # radii that do not solve the zero-mass system
        continue_mass(p, np.array([1.0, 2.0]), 1.0)


def test_continuation_stalls_with_unreachable_tolerance():
    p = params1()
    c = solve_single_ring(p)
    ext = insert_zero_mass_ring(c, gap=1)
    hard = ContinuationSettings(newton_tol=1e-30, newton_max_iter=3)
    with pytest.raises(SolverError):
        # the zero-mass precheck itself may trip, or the continuation stalls;
        # either way the failure must be a SolverError with context
        continue_mass(p, ext, 1.0, hard)


def test_continuation_stall_carries_last_good_mass():
    p = params1()
    c = solve_single_ring(p)
    ext = insert_zero_mass_ring(c, gap=1)

    err = ContinuationStalled("synthetic", last_good_mass=0.25)
    assert err.last_good_mass == 0.25
    # real stall: tolerance below the float evaluation floor even after the
    # stagnation grace factor
    settings = ContinuationSettings(newton_tol=1e-18, newton_max_iter=4)
    polished, _, _, _ = solver._newton_raw(
        ext, np.append(p.masses, 0.0), p.m0, p.lam, p.ell,
        ContinuationSettings(newton_tol=1e-15, newton_max_iter=50),
    )
    with pytest.raises(ContinuationStalled) as excinfo:
        continue_mass(p, polished, 1.0, settings)
    assert excinfo.value.last_good_mass is not None


# ---------------------------------------------------------------------------
# full builds
# ---------------------------------------------------------------------------

def test_build_n1_equals_single_ring():
    p = params1(ell=7, m0=0.4, m1=2.0, lam=-0.7)
    assert np.array_equal(build_configuration(p).radii, solve_single_ring(p).radii)


def test_build_n2_multistart_oracle():
    p = SpiderwebParams(2, 5, 0.0, np.array([1.0, 0.6]), -1.0)
    built = build_configuration(p)
    rng = np.random.default_rng(11)
    for _ in range(20):
        start = np.sort(rng.uniform(0.3, 4.0, size=2))
        if start[1] - start[0] < 0.05:
            continue
        try:
            c = newton_solve(p, start)
        except NewtonDiverged:
            continue
        assert np.allclose(c.radii, built.radii, rtol=1e-9)


def test_build_outputs_are_ordered_and_solved():
    for n, ell, m0 in ((3, 2, 0.0), (4, 9, 1.3), (6, 12, 0.0)):
        p = SpiderwebParams(n, ell, m0, np.linspace(1.5, 0.5, n), -1.0)
        c = build_configuration(p)
        assert c.residual_norm <= 1e-12
        assert c.radii[0] > 0 and np.all(np.diff(c.radii) > 0)
        lam = core.lambda_values(p, c.radii)
        assert np.max(np.abs(lam - p.lam)) <= 10 * 1e-12 / np.min(c.radii)


def test_build_step_size_independence():
    p = SpiderwebParams(4, 6, 0.0, np.ones(4), -1.0)
    a = build_configuration(p, ContinuationSettings(mass_step_init=0.02))
    b = build_configuration(p, ContinuationSettings(mass_step_init=0.2))
    assert np.allclose(a.radii, b.radii, rtol=1e-9)


def test_continuation_endpoint_agrees_with_direct_solve():
    # the grown outer ring may move inward or outward depending on (n, ell);
    # what must hold is agreement with an independent direct solve
    for n_base, ell in ((2, 4), (1, 20), (4, 8)):
        base = build_configuration(SpiderwebParams(n_base, ell, 0.0, np.ones(n_base), -1.0))
        ext = insert_zero_mass_ring(base, gap=n_base)
        grown = continue_mass(base.params, ext, 1.0)
        full = SpiderwebParams(n_base + 1, ell, 0.0, np.ones(n_base + 1), -1.0)
        start = np.linspace(0.8, 0.8 * (n_base + 1) + 0.3, n_base + 1)
        direct = newton_solve(full, start)
        assert np.allclose(grown.radii, direct.radii, rtol=1e-9)


def test_build_matches_high_precision_oracle():
    """Independent 40-digit Newton solve of the same system (separate
    formula transcription, separate arithmetic) pins the float radii."""
    import mpmath as mp

    n, ell, m0, lam = 3, 5, 0.4, -1.0
    masses = [1.0, 0.6, 1.7]
    p = SpiderwebParams(n, ell, m0, np.array(masses), lam)
    built = build_configuration(p)

    with mp.workdps(40):
        mm = [mp.mpf(m) for m in masses]
        mm0 = mp.mpf(m0)
        lamm = mp.mpf(lam)
        zeta = sum(1 / mp.sqrt(1 - mp.cos(2 * mp.pi * k / ell)) for k in range(1, ell))

        def f(r):
            out = []
            for i in range(n):
                s = lamm * r[i] + mm[i] * zeta / (2 * mp.sqrt(2) * r[i] ** 2) + mm0 / r[i] ** 2
                for j in range(n):
                    if j == i:
                        continue
                    for k in range(ell):
                        c = mp.cos(2 * mp.pi * k / ell)
                        d = r[i] ** 2 + r[j] ** 2 - 2 * r[i] * r[j] * c
                        s += mm[j] * (r[i] - r[j] * c) / d ** mp.mpf("1.5")
                out.append(s)
            return out

        r = [mp.mpf(x) for x in built.radii]
        for _ in range(30):
            fr = f(r)
            if max(abs(v) for v in fr) < mp.mpf("1e-35"):
                break
            jac = mp.matrix(n, n)
            h = mp.mpf("1e-20")
            for j in range(n):
                rp = list(r)
                rm = list(r)
                rp[j] += h
                rm[j] -= h
                fp, fm = f(rp), f(rm)
                for i in range(n):
                    jac[i, j] = (fp[i] - fm[i]) / (2 * h)
            delta = mp.lu_solve(jac, mp.matrix(fr))
            r = [r[i] - delta[i] for i in range(n)]
        oracle = np.array([float(v) for v in r])

    assert np.allclose(built.radii, oracle, rtol=1e-13)
    # the rigorous certificate ball around the float center contains the
    # high-precision zero
    from spiderweb import certify as cz

    cert = cz.certify(built)
    assert float(np.max(np.abs(built.radii - oracle))) <= cert.rho0


def test_build_failure_reports_ring_index():
    p = SpiderwebParams(3, 2, 0.0, np.ones(3), -1.0)
    with pytest.raises(SolverError) as excinfo:
        build_configuration(p, ContinuationSettings(newton_tol=1e-30, newton_max_iter=2))
    assert getattr(excinfo.value, "ring_index", None) == 2
    assert "ring 2" in str(excinfo.value)
