"""Pointwise geometry of g = ds^2 + r^2 h in the adapted orthonormal frame.

Every tensor of a warped product over an Einstein fiber has at most two
distinct eigenvalues in the frame {d/ds, r^-1 e_a}: a radial one and a
tangential one.  The module evaluates those eigenvalue pairs from the
profile arrays, assembles the defining residuals of the critical-metric
equation, and checks the conformal-flatness reconstruction of the sectional
curvatures from the potential.  Second derivatives of the potential always
come from its governing ODE, never from finite differences.

Sign conventions: the mean curvature H of a level {s = const} is taken with
respect to d/ds (increasing s); boundary exports flip the sign on the left
face where the outward normal is -d/ds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import (
    AllPointsMasked,
    CriticalLevel,
    FiberMismatch,
    InvalidRegime,
    OutOfGrid,
)
from .matching import FiberSpec
from .profiles import (
    OdeParams,
    Profile,
    conserved_quantity,
    potential_accel,
    warp_accel,
)

__all__ = [
    "CurvatureSample",
    "ResidualReport",
    "LevelSetData",
    "curvature_at",
    "curvature_samples",
    "verify_critical",
    "verify_conformally_flat",
    "level_set_geometry",
]

_LD = np.longdouble

# Fraction of max|lam| below which conformal reconstruction is masked
# (the reconstruction divides by lam).
_LAMBDA_FLOOR = 1e-4

# Default gate on the conserved-quantity residual against a declared fiber.
_FIBER_TOL = 1e-8


class CurvatureSample(NamedTuple):
    """Two-eigenvalue curvature data at one arclength."""

    s: float
    ric_ss: float
    ric_tan: float
    scal: float
    hess_ss: float
    hess_tan: float
    lap: float
    sec_rad: float
    sec_tan: float
    mean_curv: float
    schouten_ss: float
    schouten_tan: float


@dataclass(frozen=True)
class ResidualReport:
    """Maxima of the pointwise verification residuals over a grid."""

    max_critical_residual: float
    max_scal_deviation: float
    max_weyl_residual: float
    max_einstein_residual: float | None
    grid_size: int
    tolerances: dict

    def as_dict(self) -> dict:
        return {
            "max_critical_residual": self.max_critical_residual,
            "max_scal_deviation": self.max_scal_deviation,
            "max_weyl_residual": self.max_weyl_residual,
            "max_einstein_residual": self.max_einstein_residual,
            "grid_size": self.grid_size,
            "tolerances": dict(self.tolerances),
        }


class LevelSetData(NamedTuple):
    """Geometry of a regular level set of the potential."""

    s: float
    grad_norm: float
    umbilic_factor: float
    mean_curv: float
    einstein_residual: float | None


# ----------------------------------------------------------------------
# Frame-eigenvalue evaluation
# ----------------------------------------------------------------------


def _frame_tensors(params: OdeParams, kappa0: float, s, r, rp, lam, lamp):
    """All curvature pairs from profile data, in extended precision.

    Returns a dict of longdouble arrays.  lam/lamp may be None, in which
    case the Hessian entries are omitted.
    """
    n = params.n
    r = np.asarray(r, dtype=_LD)
    rp = np.asarray(rp, dtype=_LD)
    racc = warp_accel(params, r)
    sec_rad = -racc / r
    sec_tan = (_LD(kappa0) - rp**2) / r**2
    ric_ss = _LD(n - 1) * sec_rad
    ric_tan = _LD(n - 2) * sec_tan + sec_rad
    scal = ric_ss + _LD(n - 1) * ric_tan
    out = {
        "s": np.asarray(s, dtype=_LD),
        "sec_rad": sec_rad,
        "sec_tan": sec_tan,
        "ric_ss": ric_ss,
        "ric_tan": ric_tan,
        "scal": scal,
        "mean_curv": _LD(n - 1) * rp / r,
        "schouten_ss": (ric_ss - scal / _LD(2 * (n - 1))) / _LD(n - 2),
        "schouten_tan": (ric_tan - scal / _LD(2 * (n - 1))) / _LD(n - 2),
    }
    if lam is not None:
        lam = np.asarray(lam, dtype=_LD)
        lamp = np.asarray(lamp, dtype=_LD)
        hess_ss = potential_accel(params, r, lam)
        hess_tan = rp / r * lamp
        out["hess_ss"] = hess_ss
        out["hess_tan"] = hess_tan
        out["lap"] = hess_ss + _LD(n - 1) * hess_tan
    return out


def curvature_samples(
    profile: Profile, fiber: FiberSpec | None = None, s=None
) -> dict:
    """Curvature pairs at the given arclengths (grid by default), as arrays.

    Pole-anchored profiles exclude the degenerate origin r = 0
    automatically when sampling on their own grid.
    """
    kappa0 = profile.kappa0 if fiber is None else fiber.kappa0
    if s is None:
        s = profile.grid
        r, rp, lam, lamp = profile.r, profile.rp, profile.lam, profile.lamp
        if profile.degenerate_origin:
            keep = np.asarray(r, dtype=float) > 0.0
            if not np.any(keep):
                raise AllPointsMasked("every grid point sits at the degenerate pole")
            s, r, rp = s[keep], r[keep], rp[keep]
            if lam is not None:
                lam, lamp = lam[keep], lamp[keep]
    else:
        v = profile.sample(s)
        s, r, rp, lam, lamp = v.s, v.r, v.rp, v.lam, v.lamp
        if np.any(np.asarray(r, dtype=float) <= 0.0):
            raise OutOfGrid("curvature evaluation requires r > 0")
    return _frame_tensors(profile.params, kappa0, s, r, rp, lam, lamp)


def curvature_at(profile: Profile, fiber: FiberSpec | None, s: float) -> CurvatureSample:
    """Curvature pairs at a single arclength inside the window."""
    t = curvature_samples(profile, fiber, np.atleast_1d(float(s)))
    if "hess_ss" not in t:
        nan = float("nan")
        t["hess_ss"] = t["hess_tan"] = t["lap"] = np.array([nan])
    return CurvatureSample(
        s=float(s),
        ric_ss=float(t["ric_ss"][0]),
        ric_tan=float(t["ric_tan"][0]),
        scal=float(t["scal"][0]),
        hess_ss=float(t["hess_ss"][0]),
        hess_tan=float(t["hess_tan"][0]),
        lap=float(t["lap"][0]),
        sec_rad=float(t["sec_rad"][0]),
        sec_tan=float(t["sec_tan"][0]),
        mean_curv=float(t["mean_curv"][0]),
        schouten_ss=float(t["schouten_ss"][0]),
        schouten_tan=float(t["schouten_tan"][0]),
    )


# ----------------------------------------------------------------------
# Verification
# ----------------------------------------------------------------------


def _grid_slice(profile: Profile, interval):
    """Grid arrays restricted to an interval (full grid when None)."""
    s = profile.grid
    keep = np.ones(s.shape, dtype=bool)
    if interval is not None:
        lo, hi = float(interval[0]), float(interval[1])
        keep &= (np.asarray(s, dtype=float) >= lo) & (np.asarray(s, dtype=float) <= hi)
    if profile.degenerate_origin:
        keep &= np.asarray(profile.r, dtype=float) > 0.0
    if not np.any(keep):
        raise AllPointsMasked("no grid points inside the requested interval")
    lam = profile.lam[keep] if profile.lam is not None else None
    lamp = profile.lamp[keep] if profile.lamp is not None else None
    return s[keep], profile.r[keep], profile.rp[keep], lam, lamp


def _fiber_gate(profile, fiber: FiberSpec, r, rp, tol: float) -> float:
    """Conserved-quantity residual against the declared fiber curvature.

    The allowance combines the user tolerance with a representation floor:
    float64-quantized inputs (e.g. CSV round trips) perturb (r')^2 + c2 r^2
    at relative machine scale of the individual terms, which dominates the
    true drift on wide windows.
    """
    params = profile.params
    cons = np.asarray(conserved_quantity(params, r, rp), dtype=float)
    resid = float(np.max(np.abs(cons - fiber.kappa0)))
    r64 = np.asarray(r, dtype=float)
    rp64 = np.asarray(rp, dtype=float)
    term_scale = float(
        np.max(
            rp64**2
            + abs(params.c2) * r64**2
            + abs(2.0 * params.a / (params.n - 2)) * r64 ** (2 - params.n)
        )
    )
    eps64 = float(np.finfo(np.float64).eps)
    allowance = tol * (1.0 + abs(fiber.kappa0)) + 64.0 * eps64 * term_scale
    if fiber.dim != params.n - 1:
        raise FiberMismatch(
            f"fiber dimension {fiber.dim} does not match n-1 = {params.n - 1}"
        )
    if resid > allowance:
        raise FiberMismatch(
            f"declared fiber curvature {fiber.kappa0:.12g} is inconsistent with "
            f"the profile: conserved-quantity residual {resid:.3e} exceeds "
            f"allowance {allowance:.3e}"
        )
    return resid


def verify_critical(
    profile: Profile,
    fiber: FiberSpec | None = None,
    *,
    interval=None,
    fiber_tol: float = _FIBER_TOL,
) -> ResidualReport:
    """Pointwise residuals of the critical-metric equation on the grid.

    Evaluates both independent frame components

        ss:  -lap + hess_ss - lam * ric_ss - 1
        tan: -lap + hess_tan - lam * ric_tan - 1

    together with the trace relation lap + (R lam + n)/(n-1) = 0, the
    scalar-curvature deviation |scal - R|, the conformal-flatness
    reconstruction residual, and (for a = 0) the Einstein reduction.  The
    declared fiber is gated against the conserved quantity first
    (FiberMismatch).
    """
    if not profile.complete:
        raise InvalidRegime("verification requires a profile with a potential")
    params = profile.params
    if fiber is None:
        fiber = FiberSpec(dim=params.n - 1, kappa0=profile.kappa0)
    s, r, rp, lam, lamp = _grid_slice(profile, interval)
    _fiber_gate(profile, fiber, r, rp, fiber_tol)

    t = _frame_tensors(params, fiber.kappa0, s, r, rp, lam, lamp)
    n = params.n
    lam_ld = np.asarray(lam, dtype=_LD)
    one = _LD(1.0)
    ss = -t["lap"] + t["hess_ss"] - lam_ld * t["ric_ss"] - one
    tan = -t["lap"] + t["hess_tan"] - lam_ld * t["ric_tan"] - one
    trace = t["lap"] + (_LD(params.R) * lam_ld + _LD(n)) / _LD(n - 1)
    max_crit = float(
        max(np.max(np.abs(ss)), np.max(np.abs(tan)), np.max(np.abs(trace)))
    )
    max_scal = float(np.max(np.abs(t["scal"] - _LD(params.R))))

    weyl = _conformal_residual(t, lam_ld, params)
    einstein = None
    if params.a == 0.0:
        kap = _LD(params.R) / _LD(n * (n - 1))
        target = -kap * lam_ld - one / _LD(n - 1)
        einstein = float(
            max(
                np.max(np.abs(t["hess_ss"] - target)),
                np.max(np.abs(t["hess_tan"] - target)),
                np.max(np.abs(t["ric_ss"] - t["ric_tan"])),
            )
        )

    return ResidualReport(
        max_critical_residual=max_crit,
        max_scal_deviation=max_scal,
        max_weyl_residual=weyl,
        max_einstein_residual=einstein,
        grid_size=int(np.size(s)),
        tolerances={"fiber_tol": fiber_tol, "lambda_floor": _LAMBDA_FLOOR},
    )


def _conformal_residual(t: dict, lam_ld: np.ndarray, params: OdeParams) -> float:
    """Reconstruction residual of both sectional curvatures from the potential.

    At points where the potential is nonzero, the curvature tensor is
    determined by the metric, the potential and its Hessian; the two
    sectional curvatures must satisfy

        sec_rad = B + (hess_ss + hess_tan) / ((n-2) lam)
        sec_tan = B + 2 hess_tan / ((n-2) lam),     B = (R + 2/lam) / ((n-1)(n-2))

    Points with |lam| below the floor (relative to the sup of |lam| over the
    window under evaluation) are masked.
    """
    n = params.n
    floor = _LAMBDA_FLOOR * float(np.max(np.abs(np.asarray(lam_ld, dtype=float))))
    keep = np.abs(np.asarray(lam_ld, dtype=float)) > floor
    if not np.any(keep):
        raise AllPointsMasked(
            "every grid point is below the potential floor; the conformal "
            "reconstruction is undefined on this window"
        )
    lam = lam_ld[keep]
    base = (_LD(params.R) + _LD(2.0) / lam) / _LD((n - 1) * (n - 2))
    rad_rhs = base + (t["hess_ss"][keep] + t["hess_tan"][keep]) / (_LD(n - 2) * lam)
    tan_rhs = base + _LD(2.0) * t["hess_tan"][keep] / (_LD(n - 2) * lam)
    res_rad = np.abs(t["sec_rad"][keep] - rad_rhs)
    res_tan = np.abs(t["sec_tan"][keep] - tan_rhs)
    return float(max(np.max(res_rad), np.max(res_tan)))


def verify_conformally_flat(
    profile: Profile, fiber: FiberSpec | None = None, *, interval=None
) -> float:
    """Max residual of the sectional-curvature reconstruction (masked)."""
    if not profile.complete:
        raise InvalidRegime("verification requires a profile with a potential")
    kappa0 = profile.kappa0 if fiber is None else fiber.kappa0
    s, r, rp, lam, lamp = _grid_slice(profile, interval)
    t = _frame_tensors(profile.params, kappa0, s, r, rp, lam, lamp)
    return _conformal_residual(t, np.asarray(lam, dtype=_LD), profile.params)


def level_set_geometry(profile: Profile, s: float) -> LevelSetData:
    """Geometry of the level set of the potential through arclength s.

    Requires a regular level (CriticalLevel when the potential gradient
    vanishes).  For Einstein profiles (a = 0) the umbilic factor is
    cross-checked against the potential route and the residual reported.
    """
    if not profile.complete:
        raise InvalidRegime("level-set geometry requires a potential")
    v = profile.sample(float(s))
    r = float(v.r[0])
    rp = float(v.rp[0])
    lamp = float(v.lamp[0])
    if r <= 0.0:
        raise OutOfGrid("level set through the degenerate pole")
    scale = float(np.max(np.abs(np.asarray(profile.lamp, dtype=float))))
    if abs(lamp) <= 1e-12 * max(scale, 1.0):
        raise CriticalLevel(
            f"the potential has a critical point at s = {s:.6g}; "
            "the level set is not a regular hypersurface"
        )
    n = profile.params.n
    umbilic = rp / r
    einstein = None
    if profile.params.a == 0.0:
        lam = float(v.lam[0])
        kap = profile.params.R / (n * (n - 1))
        # Second fundamental form w.r.t. the potential-gradient normal:
        # sign(lamp) * umbilic must equal (-kap*lam - 1/(n-1)) / |lamp|.
        einstein = abs(math.copysign(umbilic, lamp) - (-kap * lam - 1.0 / (n - 1)) / abs(lamp))
    return LevelSetData(
        s=float(s),
        grad_norm=abs(lamp),
        umbilic_factor=umbilic,
        mean_curv=(n - 1) * umbilic,
        einstein_residual=einstein,
    )
