"""Rigorous certification of computed configurations.

Around a numerical zero r of the residual map f, with A the floating-point
inverse of the float Jacobian, interval arithmetic yields bounds

    Y0 >= ||A f(r)||_inf,
    Z0 >= ||Id - A Df(r)||_inf,
    Z2 >= sup over the rho*-ball of ||A D^2f||, folded row-wise,

and a root of p(rho) = Z2 rho^2 - (1 - Z0) rho + Y0 with p(rho0) < 0 (checked
again in interval arithmetic) proves that A is invertible and that a unique
true configuration lies within rho0 of the numerical one.

The module also carries the computer-assisted positivity check of the
row-dominance kernel h_ell on [0, 1] (rigorous slope bound plus a verified
grid) and the strict diagonal-dominance check of the Jacobian.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import core, intervals
from .core import FLOAT64, INTERVAL, Configuration, SpiderwebParams, require_cone
from .core import h_ell  # noqa: F401  (re-exported: the kernel behind eq-9 rows)
from .intervals import Interval

__all__ = [
    "Certificate",
    "CertificationFailed",
    "BallLeavesCone",
    "HCheckReport",
    "bound_Y0",
    "bound_Z0",
    "bound_Z2",
    "radii_poly_check",
    "certify",
    "h_ell",
    "h_ell_check",
    "verify_h_lower_bound",
    "dominance_check",
    "default_rho_star",
]

Z0_TOO_LARGE = "Z0_TOO_LARGE"
NO_NEGATIVE_VALUE = "NO_NEGATIVE_VALUE"
BALL_LEAVES_CONE = "BALL_LEAVES_CONE"
SINGULAR_JACOBIAN = "SINGULAR_JACOBIAN"


class CertificationFailed(RuntimeError):
    def __init__(self, reason: str, message: str, **data):
        super().__init__(f"{reason}: {message}")
        self.reason = reason
        self.data = data


class BallLeavesCone(CertificationFailed):
    def __init__(self, message: str, **data):
        super().__init__(BALL_LEAVES_CONE, message, **data)


@dataclass
class Certificate:
    """Proof data: a unique true zero lies in the rho0-ball at the center."""

    center: np.ndarray
    rho_star: float
    Y0: float
    Z0: float
    Z2: float
    rho0: float
    p_at_rho0: float


@dataclass
class HCheckReport:
    """Outcome of the grid positivity proof for h_ell on [0, 1]."""

    ell: int
    grid_points: int
    deriv_bound: float
    lower_bound: float
    verified: bool
    negative_at: float | None = None
    negative_value: float | None = None


def bound_Y0(a: np.ndarray, center, params: SpiderwebParams) -> float:
    """Rigorous upper bound of ||A f(center)||_inf."""
    center = require_cone(center)
    f = core.residual(params, Interval.point(center), INTERVAL)
    return intervals.vector_sup_norm(intervals.matvec(np.asarray(a, dtype=np.float64), f))


def bound_Z0(a: np.ndarray, center, params: SpiderwebParams) -> float:
    """Rigorous upper bound of ||Id - A Df(center)||_inf."""
    center = require_cone(center)
    a = np.asarray(a, dtype=np.float64)
    n = a.shape[0]
    jac = core.jacobian(params, Interval.point(center), INTERVAL)
    prod = (Interval.point(a)[:, :, None] * jac[None, :, :]).sum(axis=1)
    return intervals.matrix_sup_norm(Interval.point(np.eye(n)) - prod)


def _ball_box(center, rho_star):
    lo = np.nextafter(center - rho_star, -np.inf)
    hi = np.nextafter(center + rho_star, np.inf)
    if lo[0] <= 0.0 or np.any(hi[:-1] >= lo[1:]):
        raise BallLeavesCone(
            f"radius {rho_star:.3e} ball around the center can break the ordering"
        )
    return Interval(lo, hi)


def bound_Z2(a: np.ndarray, center, params: SpiderwebParams, rho_star: float) -> float:
    """Rigorous upper bound, uniform over the rho*-ball, of
    max_i sum_{l,j} |sum_m A_im d^2_{lj} f_m|, the row-folded Hessian norm."""
    center = require_cone(center)
    if rho_star <= 0:
        raise ValueError(f"rho_star must be positive, got {rho_star}")
    a = np.asarray(a, dtype=np.float64)
    box = _ball_box(center, rho_star)
    try:
        hess = core.hessian(params, box, INTERVAL)
    except (intervals.NegativeSqrt, intervals.DivisionByZeroInterval) as exc:
        raise BallLeavesCone(
            f"interval evaluation on the rho* ball hit a singularity: {exc}"
        ) from exc
    n = a.shape[0]
    worst = 0.0
    for i in range(n):
        row = (Interval.point(a[i])[:, None, None] * hess).sum(axis=0)
        total = intervals.pairwise_sum(
            row.mag().reshape(-1), axis=0, rounder=lambda x: np.nextafter(x, np.inf)
        )
        worst = max(worst, float(total))
    return worst


def radii_poly_check(Y0: float, Z0: float, Z2: float, rho_star: float):
    """Find rho0 <= rho* with p(rho0) < 0 verified in interval arithmetic.

    Returns (rho0, p_upper).  The candidate is the smaller quadratic root in
    its cancellation-free form, inflated until the interval check passes.
    """
    for name, v in (("Y0", Y0), ("Z0", Z0), ("Z2", Z2)):
        if not np.isfinite(v) or v < 0:
            raise ValueError(f"{name} must be finite and nonnegative, got {v}")
    if rho_star <= 0:
        raise ValueError(f"rho_star must be positive, got {rho_star}")
    if Z0 >= 1.0:
        raise CertificationFailed(
            Z0_TOO_LARGE, f"Z0 = {Z0:.6g} >= 1, A is too far from the true inverse",
            Z0=Z0,
        )
    if Y0 == 0.0:
        cand = min(rho_star, 2.0**-100)
    else:
        disc = (1.0 - Z0) ** 2 - 4.0 * Z2 * Y0
        if disc <= 0.0:
            raise CertificationFailed(
                NO_NEGATIVE_VALUE,
                f"negative discriminant {disc:.6g}: p has no real root "
                "(retry with a smaller rho*)",
                Y0=Y0, Z0=Z0, Z2=Z2,
            )
        cand = 2.0 * Y0 / ((1.0 - Z0) + np.sqrt(disc))
    one_minus_z0 = 1.0 - Interval.point(Z0)
    rho0 = float(np.nextafter(cand, np.inf))
    for bump in range(20):
        if rho0 > rho_star:
            break
        riv = Interval.point(rho0)
        p = Interval.point(Z2) * intervals.square(riv) - one_minus_z0 * riv + Y0
        if float(p.hi) < 0.0:
            return rho0, float(p.hi)
        rho0 = float(rho0 * (1.0 + 2.0 ** (-50 + 2 * bump)))
    raise CertificationFailed(
        NO_NEGATIVE_VALUE,
        f"no rho0 <= rho* = {rho_star:.6g} with verified p(rho0) < 0 "
        "(advice: increase rho*)",
        Y0=Y0, Z0=Z0, Z2=Z2, rho_star=rho_star,
    )


def default_rho_star(center) -> float:
    """Heuristic ball cap: a small fraction of the tightest gap."""
    center = np.asarray(center, dtype=np.float64)
    if center.size == 1:
        tight = center[0]
    else:
        tight = min(center[0], float(np.min(np.diff(center))))
    return 1e-4 * tight


def certify(
    config: Configuration, rho_star_init: float | None = None, retries: int = 4
) -> Certificate:
    """Assemble A, compute (Y0, Z0, Z2), and run the radii-polynomial check,
    retrying with rho* halved then doubled when the failure is rho*-related.

    Success proves existence and local uniqueness of a true configuration
    within rho0 of the numerical radii."""
    params = config.params
    center = require_cone(config.radii)
    jac = core.jacobian(params, center, FLOAT64)
    try:
        a = np.linalg.inv(jac)
    except np.linalg.LinAlgError as exc:
        raise CertificationFailed(
            SINGULAR_JACOBIAN, f"float Jacobian not invertible: {exc}"
        ) from exc
    y0 = bound_Y0(a, center, params)
    z0 = bound_Z0(a, center, params)
    if z0 >= 1.0:
        raise CertificationFailed(
            Z0_TOO_LARGE, f"Z0 = {z0:.6g} >= 1 at the given center", Z0=z0
        )
    rho_base = float(rho_star_init) if rho_star_init is not None else default_rho_star(center)
    if rho_base <= 0:
        raise ValueError(f"rho_star_init must be positive, got {rho_star_init}")
    ladder = [rho_base * 0.5**i for i in range(retries + 1)]
    ladder += [rho_base * 2.0**i for i in range(1, retries + 1)]
    failure: CertificationFailed | None = None
    for rho_star in ladder:
        try:
            z2 = bound_Z2(a, center, params, rho_star)
            rho0, p_hi = radii_poly_check(y0, z0, z2, rho_star)
            return Certificate(
                center=center.copy(),
                rho_star=rho_star,
                Y0=y0,
                Z0=z0,
                Z2=z2,
                rho0=rho0,
                p_at_rho0=p_hi,
            )
        except CertificationFailed as exc:
            if exc.reason not in (BALL_LEAVES_CONE, NO_NEGATIVE_VALUE):
                raise
            failure = exc
    assert failure is not None
    raise failure


# ---------------------------------------------------------------------------
# positivity of h_ell on [0, 1] and diagonal dominance
# ---------------------------------------------------------------------------

_PRESAMPLE = 2001
_DERIV_PANELS = 64


def _h_deriv_bound(ell: int) -> float:
    """Rigorous bound M with |h_ell'| < M on [0, 1], by interval evaluation
    of the termwise derivative over coarse panels."""
    edges = np.linspace(0.0, 1.0, _DERIV_PANELS + 1)
    panels = Interval(edges[:-1], edges[1:])
    dv = core.h_ell_deriv(panels, ell, INTERVAL)
    return float(np.nextafter(np.max(dv.mag()), np.inf))


def h_ell_check(ell: int, grid_points: int | None = None) -> HCheckReport:
    """Computer-assisted positivity proof of h_ell on [0, 1].

    A float presample proposes a lower bound m > 0; a rigorous slope bound M
    and a grid of p points with verified h(s_q) > m and M/p < m then prove
    h > 0 everywhere.  When the presample dips below zero the routine instead
    tries to certify a negative value (verified = False either way).
    """
    if ell < 2:
        raise ValueError(f"ell must be >= 2, got {ell}")
    xs = np.linspace(0.0, 1.0, _PRESAMPLE)
    vals = core.h_ell(xs, ell, FLOAT64)
    i_min = int(np.argmin(vals))
    m_est = float(vals[i_min])
    deriv_bound = _h_deriv_bound(ell)
    if m_est <= 0.0:
        witness = core.h_ell(Interval.point(xs[i_min]), ell, INTERVAL)
        if float(witness.hi) < 0.0:
            return HCheckReport(
                ell=ell,
                grid_points=0,
                deriv_bound=deriv_bound,
                lower_bound=m_est,
                verified=False,
                negative_at=float(xs[i_min]),
                negative_value=float(witness.hi),
            )
        return HCheckReport(
            ell=ell,
            grid_points=0,
            deriv_bound=deriv_bound,
            lower_bound=m_est,
            verified=False,
        )
    m = 0.5 * m_est
    p = grid_points if grid_points is not None else int(np.ceil(deriv_bound / m)) + 1
    for _ in range(8):
        ts = np.linspace(0.0, 1.0, p + 1)
        spacing = float(np.max(np.diff(ts)))
        if float(np.nextafter(deriv_bound * spacing, np.inf)) < m:
            break
        p *= 2
    else:
        return HCheckReport(ell, p, deriv_bound, m, verified=False)
    grid_vals = core.h_ell(Interval.point(ts[1:]), ell, INTERVAL)
    ok = bool(np.all(grid_vals.lo > m))
    return HCheckReport(
        ell=ell, grid_points=p, deriv_bound=deriv_bound, lower_bound=m, verified=ok
    )


def verify_h_lower_bound(ell: int, bound: float, max_boxes: int = 400000) -> bool:
    """Rigorously verify min h_ell > bound on [0, 1] by adaptive bisection.

    Returns False when a violation is certain or when the box budget runs out
    (never claims success without proof)."""
    lo = np.array([0.0])
    hi = np.array([1.0])
    used = 0
    while lo.size:
        used += lo.size
        if used > max_boxes:
            return False
        enclosure = core.h_ell(Interval(lo, hi), ell, INTERVAL)
        if np.any(enclosure.hi <= bound):
            return False
        undecided = enclosure.lo <= bound
        if not np.any(undecided):
            return True
        lo, hi = lo[undecided], hi[undecided]
        if np.any(hi - lo < 1e-12):
            return False
        mid = 0.5 * (lo + hi)
        lo = np.concatenate([lo, mid])
        hi = np.concatenate([mid, hi])
    return True


def dominance_check(params: SpiderwebParams, radii) -> bool:
    """Strict diagonal dominance |d_i f_i| > sum_{j != i} |d_j f_i| of the
    Jacobian, verified in interval arithmetic.

    Tries the direct endpoint comparison first; rows that fail it are retried
    through the positive-sum row decomposition (which has no cancellation)
    provided the entry signs are certain."""
    center = require_cone(radii)
    jac = core.jacobian(params, Interval.point(center), INTERVAL)
    n = params.n
    eye = np.eye(n, dtype=bool)
    diag = Interval._make(jac.lo.diagonal().copy(), jac.hi.diagonal().copy())
    off_mag = np.where(eye, 0.0, jac.mag())
    row = intervals.pairwise_sum(off_mag, axis=1, rounder=lambda x: np.nextafter(x, np.inf))
    direct = diag.mig() > row
    if np.all(direct):
        return True
    signs_ok = np.all(diag.hi < 0.0) and np.all(np.where(eye, 1.0, jac.lo) > 0.0)
    if not signs_ok:
        return False
    rows = core.dominance_row_sums(params, Interval.point(center), INTERVAL)
    return bool(np.all(rows.lo > 0.0))
