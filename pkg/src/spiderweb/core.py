"""Ring-system formulas evaluated over a generic scalar kind.

A spiderweb system is n concentric rings of ell equally spaced bodies (equal
mass per ring) plus an optional central mass.  This module evaluates the
reduced radial equations: per-ring forces, the residual map whose zeros are
central configurations, its Jacobian and Hessian, and the per-ring
proportionality values lambda_i.

Every formula is written once against a small scalar-kind interface and can
run either in plain float64 (``FLOAT64``, used by the solver) or in
outward-rounded interval arithmetic (``INTERVAL``, used by the certifier), so
the certificate covers exactly the expressions the solver evaluated.  Both
kinds share the same operation tree (same pairwise summation, same power
chains), which guarantees that a float-mode result always lies inside the
matching interval-mode enclosure.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import intervals
from .intervals import Interval, pairwise_sum, powi_tree

__all__ = [
    "SpiderwebParams",
    "Configuration",
    "OrderingViolated",
    "CollisionError",
    "FLOAT64",
    "INTERVAL",
    "zeta",
    "phi",
    "phi_d1",
    "phi_d2",
    "force_contribution",
    "residual",
    "jacobian",
    "jacobian_phi_form",
    "hessian",
    "lambda_values",
    "lambda_gaps",
    "probe_ring_lambda",
    "h_ell",
    "h_ell_deriv",
    "jacobian_row_sums",
    "dominance_row_sums",
    "require_cone",
]

# cap on elements per (n, n, k-chunk) block when summing over the ell axis
_CHUNK_ELEMS = 1 << 21


class OrderingViolated(ValueError):
    """Radii are not strictly increasing positive values."""


class CollisionError(ValueError):
    """Two bodies coincide (zero mutual distance), a true singularity."""


@dataclass
class SpiderwebParams:
    """Problem instance: ring count, spokes per ring, masses and lambda."""

    n: int
    ell: int
    m0: float
    masses: np.ndarray
    lam: float

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"ring count n must be a positive integer, got {self.n}")
        if int(self.ell) != self.ell or self.ell < 2:
            raise ValueError(f"spoke count ell must be an integer >= 2, got {self.ell}")
        self.n = int(self.n)
        self.ell = int(self.ell)
        self.m0 = float(self.m0)
        if not np.isfinite(self.m0) or self.m0 < 0:
            raise ValueError(f"central mass m0 must be finite and >= 0, got {self.m0}")
        self.masses = np.asarray(self.masses, dtype=np.float64).copy()
        if self.masses.shape != (self.n,):
            raise ValueError(
                f"expected {self.n} ring masses, got shape {self.masses.shape}"
            )
        if not np.all(np.isfinite(self.masses)) or np.any(self.masses <= 0):
            raise ValueError("every ring mass must be finite and strictly positive")
        self.lam = float(self.lam)
        if not np.isfinite(self.lam) or self.lam >= 0:
            raise ValueError(f"lambda must be finite and strictly negative, got {self.lam}")


@dataclass
class Configuration:
    """Solver output: params plus strictly increasing radii."""

    params: SpiderwebParams
    radii: np.ndarray
    residual_norm: float

    def __post_init__(self):
        self.radii = np.asarray(self.radii, dtype=np.float64).copy()
        if self.radii.shape != (self.params.n,):
            raise ValueError(
                f"radii length {self.radii.shape} does not match n={self.params.n}"
            )
        self.residual_norm = float(self.residual_norm)


def require_cone(r):
    """Check membership in the open cone 0 < r_1 < ... < r_n."""
    r = np.asarray(r, dtype=np.float64)
    if r.ndim != 1 or r.size < 1:
        raise OrderingViolated(f"radii must be a nonempty vector, got shape {r.shape}")
    if not np.all(np.isfinite(r)):
        raise OrderingViolated("radii must be finite")
    if r[0] <= 0.0 or np.any(np.diff(r) <= 0.0):
        raise OrderingViolated(f"radii must satisfy 0 < r_1 < ... < r_n, got {r}")
    return r


def _validate_radii(radii, kind):
    """Cone check for either a float vector or a vector of interval boxes."""
    if isinstance(radii, Interval):
        if radii.ndim != 1:
            raise OrderingViolated("interval radii must be a vector")
        if np.any(radii.lo <= 0.0):
            raise OrderingViolated("interval radii must be strictly positive")
        if np.any(radii.hi[:-1] >= radii.lo[1:]):
            raise OrderingViolated("interval radii boxes must be strictly ordered")
        return radii
    return require_cone(radii)


# ---------------------------------------------------------------------------
# scalar kinds
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _cos_table(ell: int, mult: int):
    """Endpoint/midpoint tables of cos(2*pi*mult*k/ell) for k = 0..ell-1."""
    lo = np.empty(ell)
    mid = np.empty(ell)
    hi = np.empty(ell)
    for k in range(ell):
        lo[k], mid[k], hi[k] = intervals._cos_two_pi_data(mult * k, ell)
    lo.setflags(write=False)
    mid.setflags(write=False)
    hi.setflags(write=False)
    return lo, mid, hi


class _Float64Kind:
    """Plain numpy float64 evaluation."""

    name = "float64"
    is_interval = False

    def lift(self, x):
        if isinstance(x, Interval):
            raise TypeError("cannot demote an interval value to float64")
        return np.asarray(x, dtype=np.float64)

    def sqrt(self, x):
        return np.sqrt(x)

    def square(self, x):
        return x * x

    def powi(self, x, p):
        if p == 0:
            return np.ones_like(np.asarray(x, dtype=np.float64))
        return powi_tree(x, p, mul=lambda a, b: a * b, square=self.square)

    def pow_half(self, x, p):
        return self.powi(self.sqrt(x), p)

    def sum(self, x, axis=-1):
        return pairwise_sum(x, axis)

    def where(self, cond, a, b):
        return np.where(cond, self.lift(a), self.lift(b))

    def cos_angles(self, ell, mult=1):
        return _cos_table(ell, mult)[1]


class _IntervalKind:
    """Outward-rounded interval evaluation."""

    name = "interval"
    is_interval = True

    def lift(self, x):
        if isinstance(x, Interval):
            return x
        return Interval.point(x)

    def sqrt(self, x):
        return intervals.sqrt(self.lift(x))

    def square(self, x):
        return intervals.square(self.lift(x))

    def powi(self, x, p):
        return intervals.powi(self.lift(x), p)

    def pow_half(self, x, p):
        return intervals.pow_half(self.lift(x), p)

    def sum(self, x, axis=-1):
        return self.lift(x).sum(axis)

    def where(self, cond, a, b):
        a = self.lift(a)
        b = self.lift(b)
        return Interval._make(np.where(cond, a.lo, b.lo), np.where(cond, a.hi, b.hi))

    def cos_angles(self, ell, mult=1):
        lo, _, hi = _cos_table(ell, mult)
        return Interval._make(lo, hi)


FLOAT64 = _Float64Kind()
INTERVAL = _IntervalKind()


def _norm_inf(v) -> float:
    return float(np.max(np.abs(np.asarray(v, dtype=np.float64))))


# ---------------------------------------------------------------------------
# scalar building blocks
# ---------------------------------------------------------------------------

def zeta(ell: int, kind=FLOAT64):
    """Self-ring interaction sum over the ell-1 other spokes of one ring."""
    if int(ell) != ell or ell < 2:
        raise ValueError(f"ell must be an integer >= 2, got {ell}")
    c = kind.cos_angles(int(ell))[1:]
    return kind.sum(1.0 / kind.sqrt(1.0 - c), axis=-1)


def _guard_phi_argument(x, ell):
    x = np.asarray(x, dtype=np.float64)
    if np.any(x == 1.0):
        raise CollisionError("phi argument x = 1 is a collision singularity")
    if ell % 2 == 0 and np.any(x == -1.0):
        raise CollisionError("phi argument x = -1 collides for even ell")
    return x


def _spoke_distances_sq(x, ell, kind, skip_k0=False):
    """d_k(x)^2 = 1 + x^2 - 2 x cos(2 pi k / ell) along a trailing axis, in
    the cancellation-free arrangement (x - c)^2 + (1 - c)(1 + c)."""
    if not isinstance(x, Interval):
        _guard_phi_argument(x, ell)
    c = kind.cos_angles(ell)
    if skip_k0:
        c = c[1:]
    x = kind.lift(x)
    xe = x[..., None]
    d2 = kind.square(xe - c) + (1.0 - c) * (1.0 + c)
    return xe, c, d2


def phi(nu, x, ell: int, kind=FLOAT64):
    """Distance-power sum over one ring's spokes, phi_nu(x) = sum_k d_k(x)^-nu.

    Interval mode supports integer nu; float mode accepts any nu > 0.
    """
    if nu <= 0:
        raise ValueError(f"nu must be positive, got {nu}")
    if int(ell) != ell or ell < 2:
        raise ValueError(f"ell must be an integer >= 2, got {ell}")
    ell = int(ell)
    _, _, d2 = _spoke_distances_sq(x, ell, kind)
    if nu == int(nu):
        nu = int(nu)
        dpow = kind.powi(d2, nu // 2) if nu % 2 == 0 else kind.pow_half(d2, nu)
    elif kind.is_interval:
        raise ValueError("interval mode supports only integer nu")
    else:
        dpow = d2 ** (nu / 2.0)
    return kind.sum(1.0 / dpow, axis=-1)


def phi_d1(x, ell: int, kind=FLOAT64):
    """Termwise first derivative of phi_1."""
    xe, c, d2 = _spoke_distances_sq(x, ell, kind)
    s = kind.sqrt(d2)
    p3 = s * kind.square(s)
    return -kind.sum((xe - c) / p3, axis=-1)


def phi_d2(x, ell: int, kind=FLOAT64):
    """Termwise second derivative of phi_1."""
    xe, c, d2 = _spoke_distances_sq(x, ell, kind)
    s = kind.sqrt(d2)
    p5 = s * kind.square(kind.square(s))
    return -kind.sum((d2 - 3.0 * kind.square(xe - c)) / p5, axis=-1)


def h_ell(x, ell: int, kind=FLOAT64):
    """Row-dominance kernel h_ell(x); equals (1-x) phi_1'' - 2 phi_1' with the
    zero k = 0 term dropped, hence finite at x = 1 as well."""
    xe, c, d2 = _spoke_distances_sq_h(x, ell, kind)
    s = kind.sqrt(d2)
    p5 = s * kind.square(kind.square(s))
    num = (1.0 - c) * (2.0 * kind.square(xe) + xe * (3.0 - c) - 1.0 - 3.0 * c)
    return kind.sum(num / p5, axis=-1)


def h_ell_deriv(x, ell: int, kind=FLOAT64):
    """Termwise derivative of h_ell, used for rigorous slope bounds."""
    xe, c, d2 = _spoke_distances_sq_h(x, ell, kind)
    s = kind.sqrt(d2)
    s2 = kind.square(s)
    p7 = s * s2 * kind.square(s2)
    poly = 2.0 * kind.square(xe) + xe * (3.0 - c) - 1.0 - 3.0 * c
    num = (1.0 - c) * ((4.0 * xe + 3.0 - c) * d2 - 5.0 * ((xe - c) * poly))
    return kind.sum(num / p7, axis=-1)


def _spoke_distances_sq_h(x, ell, kind):
    """Like _spoke_distances_sq but for the k >= 1 sums of h_ell, where x = 1
    is regular because the k = 0 spoke is excluded."""
    if int(ell) != ell or ell < 2:
        raise ValueError(f"ell must be an integer >= 2, got {ell}")
    ell = int(ell)
    c = kind.cos_angles(ell)[1:]
    x = kind.lift(x)
    xe = x[..., None]
    d2 = kind.square(xe - c) + (1.0 - c) * (1.0 + c)
    return xe, c, d2


# ---------------------------------------------------------------------------
# pairwise interaction kernels
# ---------------------------------------------------------------------------

def _k_chunks(ell, n):
    step = max(1, _CHUNK_ELEMS // max(1, n * n))
    for start in range(0, ell, step):
        yield start, min(ell, start + step)


def _pair_sums(radii, ell, kind, want):
    """Spoke-summed pairwise kernels as (n, n) arrays with zero diagonal.

    want is a subset of {"force", "jac_diag", "jac_off", "hess_diag",
    "hess_mixed", "hess_outer"}; kernels sharing the same distance powers are
    computed together.
    """
    r = kind.lift(radii)
    n = r.shape[0]
    eye = np.eye(n, dtype=bool)
    eye3 = eye[:, :, None]
    need_c2 = not want.isdisjoint({"jac_diag", "jac_off", "hess_diag", "hess_mixed", "hess_outer"})
    need_c3 = not want.isdisjoint({"hess_mixed", "hess_outer"})
    acc = {}

    ri = r[:, None, None]
    rj = r[None, :, None]
    ri2 = kind.square(ri)
    rj2 = kind.square(rj)
    rirj = ri * rj

    cos1 = kind.cos_angles(ell)
    cos2 = kind.cos_angles(ell, 2) if need_c2 else None
    cos3 = kind.cos_angles(ell, 3) if need_c3 else None

    for a, b in _k_chunks(ell, n):
        c1 = cos1[a:b][None, None, :]
        c2 = cos2[a:b][None, None, :] if need_c2 else None
        c3 = cos3[a:b][None, None, :] if need_c3 else None

        # cancellation-free distance: (ri - rj c)^2 + rj^2 (1 - c)(1 + c)
        d = kind.square(ri - rj * c1) + rj2 * ((1.0 - c1) * (1.0 + c1))
        dsafe = kind.where(eye3, 1.0, d)
        s = kind.sqrt(dsafe)
        s2 = kind.square(s)
        s4 = kind.square(s2)

        chunk = {}
        if "force" in want:
            p3 = s * s2
            chunk["force"] = (ri - rj * c1) / p3
        if "jac_diag" in want or "jac_off" in want:
            p5 = s * s4
            if "jac_diag" in want:
                num = 4.0 * ri2 + rj2 - 8.0 * (rirj * c1) + 3.0 * (rj2 * c2)
                chunk["jac_diag"] = num / p5
            if "jac_off" in want:
                num = rirj * (7.0 + c2) - 4.0 * ((ri2 + rj2) * c1)
                chunk["jac_off"] = num / p5
        if need_c3 or "hess_diag" in want:
            p7 = s * s2 * s4
            if "hess_diag" in want:
                num = (ri - rj * c1) * (
                    4.0 * ri2 - rj2 - 8.0 * (rirj * c1) + 5.0 * (rj2 * c2)
                )
                chunk["hess_diag"] = num / p7
            if "hess_mixed" in want:
                num = (
                    (ri * (8.0 * ri2 + 23.0 * rj2)) * c1
                    - rj * (20.0 * ri2 + 2.0 * rj2)
                    - (rj * (4.0 * ri2 + 6.0 * rj2)) * c2
                    + (ri * rj2) * c3
                )
                chunk["hess_mixed"] = num / p7
            if "hess_outer" in want:
                num = (
                    (rj * (8.0 * rj2 + 23.0 * ri2)) * c1
                    - ri * (20.0 * rj2 + 2.0 * ri2)
                    - (ri * (4.0 * rj2 + 6.0 * ri2)) * c2
                    + (ri2 * rj) * c3
                )
                chunk["hess_outer"] = num / p7

        for name, block in chunk.items():
            part = kind.sum(block, axis=-1)
            acc[name] = part if name not in acc else acc[name] + part

    zero = kind.lift(0.0)
    return {name: kind.where(eye, zero, val) for name, val in acc.items()}


def _check_distinct_positive(r):
    r = np.asarray(r, dtype=np.float64)
    if np.any(~np.isfinite(r)) or np.any(r <= 0.0):
        raise OrderingViolated(f"radii must be finite and positive, got {r}")
    if np.unique(r).size != r.size:
        raise CollisionError(f"coincident radii in {r}")
    return r


def _force_per_mass(radii, masses, m0, ell, kind):
    """F_i / m_i for every ring, for raw (possibly unsorted) distinct radii.

    Zero entries in ``masses`` are legal and describe massless probe rings.
    """
    if not isinstance(radii, Interval):
        _check_distinct_positive(radii)
    r = kind.lift(radii)
    m = kind.lift(np.asarray(masses, dtype=np.float64))
    z = zeta(ell, kind)
    sqrt8 = kind.sqrt(kind.lift(8.0))
    r2 = kind.square(r)
    sums = _pair_sums(radii, ell, kind, {"force"})
    inter = kind.sum(sums["force"] * m[None, :], axis=1)
    return -(((m * z) / sqrt8 + m0) / r2) - inter


def _residual_raw(radii, masses, m0, lam, ell, kind):
    r = kind.lift(radii)
    return lam * r - _force_per_mass(radii, masses, m0, ell, kind)


def _jacobian_raw(radii, masses, m0, lam, ell, kind):
    if not isinstance(radii, Interval):
        _check_distinct_positive(radii)
    r = kind.lift(radii)
    m = kind.lift(np.asarray(masses, dtype=np.float64))
    n = r.shape[0]
    z = zeta(ell, kind)
    sqrt2 = kind.sqrt(kind.lift(2.0))
    r3 = r * kind.square(r)
    sums = _pair_sums(radii, ell, kind, {"jac_diag", "jac_off"})
    diag = (
        lam
        - (m * z) / (sqrt2 * r3)
        - (2.0 * m0) / r3
        - 0.5 * kind.sum(sums["jac_diag"] * m[None, :], axis=1)
    )
    off = -0.5 * (sums["jac_off"] * m[None, :])
    eye = np.eye(n, dtype=bool)
    return kind.where(eye, diag[:, None], off)


def _hessian_raw(radii, masses, m0, ell, kind):
    if not isinstance(radii, Interval):
        _check_distinct_positive(radii)
    r = kind.lift(radii)
    m = kind.lift(np.asarray(masses, dtype=np.float64))
    n = r.shape[0]
    z = zeta(ell, kind)
    sqrt2 = kind.sqrt(kind.lift(2.0))
    r4 = kind.square(kind.square(r))
    sums = _pair_sums(radii, ell, kind, {"hess_diag", "hess_mixed", "hess_outer"})
    diag = (
        (3.0 * (m * z)) / (sqrt2 * r4)
        + (6.0 * m0) / r4
        + 1.5 * kind.sum(sums["hess_diag"] * m[None, :], axis=1)
    )
    t_mixed = -0.75 * (sums["hess_mixed"] * m[None, :])
    t_outer = -0.75 * (sums["hess_outer"] * m[None, :])

    i_ix, l_ix, j_ix = np.ogrid[0:n, 0:n, 0:n]
    on_diag = (i_ix == l_ix) & (l_ix == j_ix)
    l_is_i = (l_ix == i_ix) & (j_ix != i_ix)
    j_is_i = (j_ix == i_ix) & (l_ix != i_ix)
    l_eq_j = (l_ix == j_ix) & (j_ix != i_ix)

    zero = kind.lift(0.0)
    out = kind.where(l_eq_j, t_outer[:, None, :], zero)
    out = kind.where(j_is_i, t_mixed[:, :, None], out)
    out = kind.where(l_is_i, t_mixed[:, None, :], out)
    return kind.where(on_diag, diag[:, None, None], out)


# ---------------------------------------------------------------------------
# public operations
# ---------------------------------------------------------------------------

def force_contribution(i: int, j: int, params: SpiderwebParams, radii, kind=FLOAT64):
    """F_ij / m_i: force per unit mass on a body of ring i (1-based) from ring
    j (1-based; j = 0 is the central mass), along the four-case split."""
    if not 1 <= i <= params.n:
        raise ValueError(f"ring index i must be in 1..{params.n}, got {i}")
    if not 0 <= j <= params.n:
        raise ValueError(f"source index j must be in 0..{params.n}, got {j}")
    radii = _validate_radii(radii, kind)
    r = kind.lift(radii)
    ri = r[i - 1]
    ri2 = kind.square(ri)
    if j == 0:
        return -(params.m0 / ri2)
    mj = params.masses[j - 1]
    if j == i:
        sqrt8 = kind.sqrt(kind.lift(8.0))
        return -(mj * zeta(params.ell, kind)) / (sqrt8 * ri2)
    if j < i:
        y = r[j - 1] / ri
        return -(mj / ri2) * (phi(1, y, params.ell, kind) + y * phi_d1(y, params.ell, kind))
    x = ri / r[j - 1]
    return ((mj * kind.square(x)) / ri2) * phi_d1(x, params.ell, kind)


def residual(params: SpiderwebParams, radii, kind=FLOAT64):
    """The map f whose zeros in the cone are central configurations."""
    radii = _validate_radii(radii, kind)
    return _residual_raw(radii, params.masses, params.m0, params.lam, params.ell, kind)


def jacobian(params: SpiderwebParams, radii, kind=FLOAT64):
    """Jacobian D_r f in the spoke-summed trigonometric form."""
    radii = _validate_radii(radii, kind)
    return _jacobian_raw(radii, params.masses, params.m0, params.lam, params.ell, kind)


def jacobian_phi_form(params: SpiderwebParams, radii, kind=FLOAT64):
    """Jacobian D_r f assembled from phi_1 and its derivatives; equivalent to
    :func:`jacobian` and kept as an independent cross-check."""
    radii = _validate_radii(radii, kind)
    r = kind.lift(radii)
    n, ell, m = params.n, params.ell, params.masses
    sqrt2 = kind.sqrt(kind.lift(2.0))
    z = zeta(ell, kind)
    rows = []
    for i in range(n):
        ri = r[i]
        ri3 = ri * kind.square(ri)
        entries = [None] * n
        diag = params.lam - (m[i] * z) / (sqrt2 * ri3) - (2.0 * params.m0) / ri3
        for j in range(n):
            if j == i:
                continue
            if j < i:
                y = r[j] / ri
                p, d1, d2 = (
                    phi(1, y, ell, kind),
                    phi_d1(y, ell, kind),
                    phi_d2(y, ell, kind),
                )
                diag = diag - (m[j] / ri3) * (
                    2.0 * p + 4.0 * (y * d1) + kind.square(y) * d2
                )
                entries[j] = (m[j] / ri3) * (2.0 * d1 + y * d2)
            else:
                x = ri / r[j]
                d1, d2 = phi_d1(x, ell, kind), phi_d2(x, ell, kind)
                x3 = x * kind.square(x)
                diag = diag - ((m[j] * x3) / ri3) * d2
                entries[j] = ((m[j] * x3) / ri3) * (2.0 * d1 + x * d2)
        entries[i] = diag
        rows.append(entries)
    if kind.is_interval:
        lo = np.array([[e.lo for e in row] for row in rows])
        hi = np.array([[e.hi for e in row] for row in rows])
        return Interval._make(lo, hi)
    return np.array(rows, dtype=np.float64)


def hessian(params: SpiderwebParams, radii, kind=FLOAT64):
    """Second-derivative tensor H[i, l, j] = d^2 f_i / (dr_l dr_j)."""
    radii = _validate_radii(radii, kind)
    return _hessian_raw(radii, params.masses, params.m0, params.ell, kind)


def lambda_values(params: SpiderwebParams, radii, kind=FLOAT64):
    """Per-ring proportionality values lambda_i = F_i / (m_i r_i); the radii
    form a central configuration for value lam iff all lambda_i equal lam."""
    radii = _validate_radii(radii, kind)
    r = kind.lift(radii)
    return _force_per_mass(radii, params.masses, params.m0, params.ell, kind) / r


def lambda_gaps(params: SpiderwebParams, radii, kind=FLOAT64):
    """Consecutive differences lambda_i - lambda_{i+1} (zero at a solution)."""
    lam_i = lambda_values(params, radii, kind)
    return lam_i[:-1] - lam_i[1:]


def probe_ring_lambda(params: SpiderwebParams, radii, s: float) -> float:
    """lambda of a massless probe ring at radius s inserted into an existing
    system; s may sit anywhere strictly between, below or above the radii."""
    radii = require_cone(radii)
    s = float(s)
    if s <= 0.0:
        raise OrderingViolated(f"probe radius must be positive, got {s}")
    if np.any(radii == s):
        raise CollisionError(f"probe radius {s} coincides with an existing ring")
    r_ext = np.append(radii, s)
    m_ext = np.append(params.masses, 0.0)
    force = _force_per_mass(r_ext, m_ext, params.m0, params.ell, FLOAT64)
    return float(force[-1] / s)


def jacobian_row_sums(jac, kind=FLOAT64):
    """-d_i f_i - sum_{j != i} d_j f_i for every row of a Jacobian matrix."""
    return -kind.sum(jac, axis=1)


def dominance_row_sums(params: SpiderwebParams, radii, kind=FLOAT64):
    """The same row sums written as the manifestly positive decomposition
    -lam + m_i zeta/(sqrt2 r_i^3) + 2 m0/r_i^3 + sum_j m_j x^3 h_ell(x)/r_i^3
    with x = r_i / r_j, evaluated independently of the Jacobian."""
    radii = _validate_radii(radii, kind)
    r = kind.lift(radii)
    n = params.n
    m = kind.lift(params.masses)
    eye = np.eye(n, dtype=bool)
    x = kind.where(eye, 0.5, r[:, None] / r[None, :])
    x3 = x * kind.square(x)
    hvals = h_ell(x, params.ell, kind)
    zero = kind.lift(0.0)
    pair = kind.where(eye, zero, (x3 * hvals) * m[None, :])
    pair_row = kind.sum(pair, axis=1)
    sqrt2 = kind.sqrt(kind.lift(2.0))
    r3 = r * kind.square(r)
    z = zeta(params.ell, kind)
    return (
        -params.lam
        + (m * z) / (sqrt2 * r3)
        + (2.0 * params.m0) / r3
        + pair_row / r3
    )
