"""Numerical construction of spiderweb central configurations.

The build follows an induction on the ring count: the single-ring system has
a closed-form radius, a new massless ring has a unique equilibrium radius in
every gap (found by bisection on the strictly monotone probe lambda), and the
new ring's mass is then continued from zero to its target with damped Newton
correction at each continuation step.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import core
from .core import (
    FLOAT64,
    Configuration,
    OrderingViolated,
    SpiderwebParams,
    require_cone,
)

__all__ = [
    "ContinuationSettings",
    "SolverError",
    "NewtonDiverged",
    "SingularJacobian",
    "ContinuationStalled",
    "BracketError",
    "solve_single_ring",
    "newton_solve",
    "insert_zero_mass_ring",
    "continue_mass",
    "build_configuration",
]

_ALPHA_MIN = 2.0**-10
_BRACKET_DOUBLINGS = 60
# stagnation escape: when the Newton step is below this relative size the
# radii are converged to rounding level and the residual is pinned at its
# float evaluation floor, so accept within a small grace factor of the tol
_STALL_STEP_REL = 2.0**-40
_STALL_GRACE = 8.0


class SolverError(RuntimeError):
    pass


class NewtonDiverged(SolverError):
    pass


class SingularJacobian(SolverError):
    pass


class ContinuationStalled(SolverError):
    def __init__(self, message, last_good_mass=None):
        super().__init__(message)
        self.last_good_mass = last_good_mass


class BracketError(SolverError):
    pass


@dataclass
class ContinuationSettings:
    """Tuning knobs for Newton iteration, bisection and mass continuation.

    ``mass_step_init=None`` means one eighth of the target mass;
    ``bisect_tol=None`` means 1e-13 times the outermost radius.
    """

    mass_step_init: float | None = None
    step_shrink: float = 0.5
    step_grow: float = 2.0
    newton_tol: float = 1e-12
    newton_max_iter: int = 50
    bisect_tol: float | None = None

    def __post_init__(self):
        if self.newton_tol <= 0:
            raise ValueError("newton_tol must be positive")
        if not 0 < self.step_shrink < 1 < self.step_grow:
            raise ValueError("need 0 < step_shrink < 1 < step_grow")
        if self.newton_max_iter < 1:
            raise ValueError("newton_max_iter must be at least 1")
        if self.mass_step_init is not None and self.mass_step_init <= 0:
            raise ValueError("mass_step_init must be positive")
        if self.bisect_tol is not None and self.bisect_tol <= 0:
            raise ValueError("bisect_tol must be positive")


def _in_cone(r) -> bool:
    return bool(r[0] > 0.0 and np.all(np.diff(r) > 0.0) and np.all(np.isfinite(r)))


def _norm_inf(v) -> float:
    return float(np.max(np.abs(v)))


def _extend_params(base: SpiderwebParams, mass: float) -> SpiderwebParams:
    """Params with one more ring of the given mass appended.

    A zero mass describes a restricted (massless probe) configuration, which
    the validated constructor deliberately rejects, so build it directly.
    """
    masses = np.append(base.masses, float(mass))
    if mass > 0:
        return SpiderwebParams(base.n + 1, base.ell, base.m0, masses, base.lam)
    p = object.__new__(SpiderwebParams)
    p.n = base.n + 1
    p.ell = base.ell
    p.m0 = base.m0
    p.masses = masses
    p.lam = base.lam
    return p


def _newton_raw(r0, masses, m0, lam, ell, settings: ContinuationSettings):
    """Damped Newton iteration on the raw arrays.

    Returns (radii, residual_norm, iterations, norm_history).  Steps that
    leave the cone or fail to decrease the residual are rejected by halving
    the damping factor down to 2^-10.  When the residual is pinned at its
    float evaluation floor (Newton step at rounding scale, no decrease
    possible), iterates within _STALL_GRACE of the tolerance count as
    converged; the achieved norm is always reported as is.
    """
    r = np.asarray(r0, dtype=np.float64).copy()
    f = core._residual_raw(r, masses, m0, lam, ell, FLOAT64)
    norm = _norm_inf(f)
    history = [norm]

    def at_float_floor(step):
        return _norm_inf(step) <= _STALL_STEP_REL * max(1.0, _norm_inf(r))

    for it in range(settings.newton_max_iter):
        if norm <= settings.newton_tol:
            return r, norm, it, history
        jac = core._jacobian_raw(r, masses, m0, lam, ell, FLOAT64)
        try:
            step = np.linalg.solve(jac, f)
        except np.linalg.LinAlgError as exc:
            raise SingularJacobian(f"linear solve failed at iterate {it}: {exc}") from exc
        alpha = 1.0
        accepted = False
        while alpha >= _ALPHA_MIN:
            cand = r - alpha * step
            if _in_cone(cand):
                f_cand = core._residual_raw(cand, masses, m0, lam, ell, FLOAT64)
                n_cand = _norm_inf(f_cand)
                if n_cand < norm or n_cand <= settings.newton_tol:
                    accepted = True
                    break
            alpha *= 0.5
        if not accepted:
            if norm <= _STALL_GRACE * settings.newton_tol and at_float_floor(step):
                return r, norm, it, history
            raise NewtonDiverged(
                f"no damping step accepted at iterate {it} (|f| = {norm:.3e})"
            )
        r, f, norm = cand, f_cand, n_cand
        history.append(norm)
    if norm <= settings.newton_tol:
        return r, norm, settings.newton_max_iter, history
    raise NewtonDiverged(
        f"residual {norm:.3e} > {settings.newton_tol:.1e} "
        f"after {settings.newton_max_iter} iterations"
    )


def newton_solve(
    params: SpiderwebParams, initial_radii, settings: ContinuationSettings | None = None
) -> Configuration:
    """Damped Newton solve from a starting radii vector in the cone."""
    settings = settings or ContinuationSettings()
    r0 = require_cone(initial_radii)
    if r0.shape != (params.n,):
        raise ValueError(f"expected {params.n} radii, got {r0.shape}")
    r, norm, _, _ = _newton_raw(
        r0, params.masses, params.m0, params.lam, params.ell, settings
    )
    return Configuration(params, r, norm)


def solve_single_ring(
    params: SpiderwebParams, settings: ContinuationSettings | None = None
) -> Configuration:
    """Closed-form solution of the one-ring system."""
    if params.n != 1:
        raise ValueError(f"solve_single_ring needs n = 1, got n = {params.n}")
    z = float(core.zeta(params.ell, FLOAT64))
    r1 = np.cbrt((params.masses[0] * z / (2.0 * np.sqrt(2.0)) + params.m0) / (-params.lam))
    radii = np.array([r1])
    norm = _norm_inf(core.residual(params, radii, FLOAT64))
    return Configuration(params, radii, norm)


def insert_zero_mass_ring(
    config: Configuration, gap: int, settings: ContinuationSettings | None = None
) -> np.ndarray:
    """Radius vector extended by the unique massless-ring equilibrium in the
    chosen gap: gap i in 1..n-1 is (r_i, r_{i+1}), gap n is (r_n, infinity),
    and gap 0 is (0, r_1), which has a root only when a central mass pulls the
    probe lambda to -infinity at the origin."""
    settings = settings or ContinuationSettings()
    params = config.params
    r = require_cone(config.radii)
    n = params.n
    if not 0 <= gap <= n:
        raise ValueError(f"gap must be in 0..{n}, got {gap}")
    norm = _norm_inf(core.residual(params, r, FLOAT64))
    if norm > 1e-8:
        raise SolverError(
            f"insertion requires a solved configuration, |f| = {norm:.3e}"
        )

    def g(s):
        return core.probe_ring_lambda(params, r, s) - params.lam

    if gap == n:
        lo_edge = r[-1]
        hi = 2.0 * r[-1]
        for _ in range(_BRACKET_DOUBLINGS):
            if g(hi) > 0.0:
                break
            hi *= 2.0
        else:
            raise BracketError("probe lambda never exceeded lambda in the outer gap")
        lo = _push_to_sign(g, lo_edge, min(hi, lo_edge * 2.0), want_negative=True)
    else:
        lo_edge = 0.0 if gap == 0 else r[gap - 1]
        hi_edge = r[gap]
        lo = _push_to_sign(g, lo_edge, hi_edge, want_negative=True)
        hi = _push_to_sign(g, hi_edge, lo_edge, want_negative=False)
        if not lo < hi:
            raise BracketError(f"no sign change found inside gap {gap}")
    tol = settings.bisect_tol if settings.bisect_tol is not None else 1e-13 * r[-1]
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if g(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    s = 0.5 * (lo + hi)
    return np.insert(r, gap, s)


def _push_to_sign(g, edge, other, want_negative):
    """Walk from `other` toward `edge` until g has the wanted sign; the probe
    lambda blows up monotonically toward a true gap edge, so a few quarterings
    of the distance suffice when the wanted sign is attainable at all.  The
    walk stops a relative 1e-13 away from the edge, below which cancellation
    noise amplified by the near-singularity would fake sign changes."""
    scale = max(abs(edge), abs(other))
    t = other
    for _ in range(_BRACKET_DOUBLINGS):
        t = edge + 0.25 * (t - edge)
        if abs(t - edge) < 1e-13 * scale:
            break
        val = g(t)
        if (val < 0.0) == want_negative and val != 0.0:
            return t
    raise BracketError(
        f"could not bracket a root near radius {edge:.6g}; "
        "is the input configuration central?"
    )


def continue_mass(
    params: SpiderwebParams,
    radii,
    target_mass: float,
    settings: ContinuationSettings | None = None,
) -> Configuration:
    """Continue the appended ring's mass from zero to target_mass.

    ``params`` describes the n base rings; ``radii`` has n+1 entries and must
    solve the system at zero appended mass.  Constant predictor, damped
    Newton corrector, adaptive mass step.
    """
    settings = settings or ContinuationSettings()
    r = require_cone(radii)
    if r.shape != (params.n + 1,):
        raise OrderingViolated(
            f"expected {params.n + 1} radii (base rings plus one), got {r.shape}"
        )
    target_mass = float(target_mass)
    if target_mass < 0 or not np.isfinite(target_mass):
        raise ValueError(f"target mass must be finite and >= 0, got {target_mass}")

    def masses_at(m):
        return np.append(params.masses, m)

    norm0 = _norm_inf(
        core._residual_raw(r, masses_at(0.0), params.m0, params.lam, params.ell, FLOAT64)
    )
    if norm0 > 1e-8:
        raise SolverError(
            f"input radii do not solve the zero-mass system, |f| = {norm0:.3e}"
        )
    if target_mass == 0.0:
        return Configuration(_extend_params(params, 0.0), r, norm0)

    step_init = settings.mass_step_init or target_mass / 8.0
    step = step_init
    m_cur = 0.0
    norm = norm0
    while m_cur < target_mass:
        m_try = min(target_mass, m_cur + step)
        try:
            r_new, norm, iters, _ = _newton_raw(
                r, masses_at(m_try), params.m0, params.lam, params.ell, settings
            )
        except (NewtonDiverged, SingularJacobian):
            step *= settings.step_shrink
            if step < step_init * 1e-12:
                raise ContinuationStalled(
                    f"mass step underflow at mass {m_cur:.6g} of {target_mass:.6g}",
                    last_good_mass=m_cur,
                ) from None
            continue
        r, m_cur = r_new, m_try
        if iters <= 3:
            step *= settings.step_grow
    return Configuration(_extend_params(params, target_mass), r, norm)


def build_configuration(
    params: SpiderwebParams, settings: ContinuationSettings | None = None
) -> Configuration:
    """Construct the full configuration ring by ring: closed form for one
    ring, then repeated outermost-gap insertion plus mass continuation."""
    settings = settings or ContinuationSettings()
    base = SpiderwebParams(1, params.ell, params.m0, params.masses[:1], params.lam)
    config = solve_single_ring(base, settings)
    for k in range(2, params.n + 1):
        try:
            extended = insert_zero_mass_ring(config, gap=k - 1, settings=settings)
            config = continue_mass(
                config.params, extended, params.masses[k - 1], settings
            )
        except SolverError as exc:
            exc.ring_index = k
            exc.args = (f"construction failed while adding ring {k}: {exc}",)
            raise
    # polish once at the full system so the residual is not merely inherited
    r, norm, _, _ = _newton_raw(
        config.radii, params.masses, params.m0, params.lam, params.ell, settings
    )
    return Configuration(params, r, norm)
