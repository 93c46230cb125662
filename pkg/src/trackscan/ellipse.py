"""Direct least-squares ellipse fitting with geometric residuals.

The fit solves the ellipse-constrained conic least-squares problem (the
constraint 4AC - B^2 = 1 turned into a small eigenproblem, in the
numerically stable partitioned form) and then refines the five geometric
parameters by damped Gauss-Newton on the true point-to-ellipse distances.
The refinement matters on shallow arcs such as track cross-sections, where
the purely algebraic solution is strongly biased toward small ellipses.

Residuals are geometric distances obtained by Newton projection onto the
curve, with a dense angular sweep as fallback for the few points where
Newton is unreliable (near the evolute or pinned at a quadrant boundary).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class DegenerateFit(Exception):
    """Input points admit no ellipse: too few, collinear, or unstable."""


NEWTON_TOL_PX = 1e-10
NEWTON_MAX_ITER = 50
FALLBACK_STEP_RAD = 1e-3
_COLLINEAR_RTOL = 1e-10
_REFINE_MAX_ITER = 40


@dataclass
class EllipseFit:
    """Fitted ellipse in pixel coordinates.

    semi_axis_a >= semi_axis_b; rotation is the angle of the major axis in
    [0, pi). residuals are signed geometric distances (positive outside the
    curve); mean_abs_residual is the mean of their absolute values.
    """

    center_x: float
    center_z: float
    semi_axis_a: float
    semi_axis_b: float
    rotation: float
    residuals: np.ndarray
    mean_abs_residual: float
    rms_residual: float


def _solve_conic(x: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Ellipse-constrained conic coefficients [A B C D E F] for centered data."""
    d1 = np.column_stack([x * x, x * z, z * z])
    d2 = np.column_stack([x, z, np.ones_like(x)])
    s1 = d1.T @ d1
    s2 = d1.T @ d2
    s3 = d2.T @ d2
    try:
        t = -np.linalg.solve(s3, s2.T)
    except np.linalg.LinAlgError as exc:
        raise DegenerateFit("linear scatter matrix is singular") from exc
    m = s1 + s2 @ t
    # multiply by the inverse of the constraint matrix [[0,0,2],[0,-1,0],[2,0,0]]
    m = np.array([m[2] / 2.0, -m[1], m[0] / 2.0])
    eigval, eigvec = np.linalg.eig(m)
    if np.iscomplexobj(eigvec):
        real = np.abs(eigvec.imag).max(axis=0) < 1e-9
        eigvec = eigvec[:, real].real
        if eigvec.size == 0:
            raise DegenerateFit("no real eigenvector satisfies the ellipse constraint")
    cond = 4.0 * eigvec[0] * eigvec[2] - eigvec[1] ** 2
    ok = np.flatnonzero(cond > 0)
    if ok.size == 0:
        raise DegenerateFit("constrained eigenproblem has no ellipse solution")
    a1 = eigvec[:, ok[0]]
    return np.concatenate([a1, t @ a1])


def _denormalize_conic(coeffs: np.ndarray, mx: float, mz: float, s: float) -> np.ndarray:
    """Map a conic fitted on (x-mx)/s, (z-mz)/s back to original coordinates."""
    a, b, c, d, e, f = coeffs
    s2 = s * s
    return np.array(
        [
            a / s2,
            b / s2,
            c / s2,
            (-2.0 * a * mx - b * mz) / s2 + d / s,
            (-b * mx - 2.0 * c * mz) / s2 + e / s,
            (a * mx * mx + b * mx * mz + c * mz * mz) / s2 - (d * mx + e * mz) / s + f,
        ]
    )


def _conic_to_geometry(coeffs: np.ndarray) -> tuple[float, float, float, float, float]:
    """Center, semi-axes (major, minor) and major-axis angle of a conic."""
    a, b, c, d, e, f = coeffs
    den = b * b - 4.0 * a * c
    if not den < 0:
        raise DegenerateFit("conic is not an ellipse")
    cx = (2.0 * c * d - b * e) / den
    cz = (2.0 * a * e - b * d) / den
    f0 = f + (d * cx + e * cz) / 2.0
    quad = np.array([[a, b / 2.0], [b / 2.0, c]])
    lam, vec = np.linalg.eigh(quad)
    semi_sq = -f0 / lam
    if not np.all(semi_sq > 0) or not np.all(np.isfinite(semi_sq)):
        raise DegenerateFit("conic has no real positive axes")
    semi = np.sqrt(semi_sq)
    major = int(np.argmax(semi))
    minor = 1 - major
    rotation = float(np.arctan2(vec[1, major], vec[0, major])) % np.pi
    return float(cx), float(cz), float(semi[major]), float(semi[minor]), rotation


def _project_quadrant(a: float, b: float, pu: np.ndarray, pv: np.ndarray) -> np.ndarray:
    """Foot-point parameters for first-quadrant points (pu, pv) >= 0.

    Newton iteration on the projection equation, run only on the points
    that have not converged yet; leftovers fall back to a dense sweep of
    the quarter arc.
    """
    n = pu.size
    t = np.arctan2(a * pv, b * pu)
    tol = NEWTON_TOL_PX / max(a, b, 1.0)
    ab2 = a * a - b * b
    active = np.arange(n)
    fallback = []
    for _ in range(NEWTON_MAX_ITER):
        ta = t[active]
        st = np.sin(ta)
        ct = np.cos(ta)
        f1 = 2.0 * (a * pu[active] * st - b * pv[active] * ct - ab2 * st * ct)
        f2 = 2.0 * (a * pu[active] * ct + b * pv[active] * st - ab2 * np.cos(2.0 * ta))
        usable = f2 > 0
        if not usable.all():  # non-convex spot (inside the evolute): sweep instead
            fallback.append(active[~usable])
            active = active[usable]
            ta, st, ct, f1, f2 = (arr[usable] for arr in (ta, st, ct, f1, f2))
        step = f1 / f2
        t_new = np.clip(ta - step, 0.0, np.pi / 2.0)
        t[active] = t_new
        done = (np.abs(step) < tol) | (t_new == ta)  # pinned at 0 or pi/2 is optimal
        active = active[~done]
        if active.size == 0:
            break
    fallback.append(active)  # whatever never settled
    stragglers = np.concatenate(fallback)
    if stragglers.size:
        ts = np.arange(0.0, np.pi / 2.0 + FALLBACK_STEP_RAD, FALLBACK_STEP_RAD)
        du = pu[stragglers, None] - a * np.cos(ts)[None, :]
        dv = pv[stragglers, None] - b * np.sin(ts)[None, :]
        t[stragglers] = ts[np.argmin(du * du + dv * dv, axis=1)]
    return t


def _canonical_coords(
    center_x: float, center_z: float, rotation: float, points: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    dx = points[:, 0] - center_x
    dz = points[:, 1] - center_z
    ct = np.cos(rotation)
    st = np.sin(rotation)
    return ct * dx + st * dz, -st * dx + ct * dz


def ellipse_residuals(
    center_x: float,
    center_z: float,
    semi_axis_a: float,
    semi_axis_b: float,
    rotation: float,
    points: np.ndarray,
) -> np.ndarray:
    """Signed geometric distances from points to an ellipse (positive outside)."""
    pts = np.asarray(points, dtype=float)
    u, v = _canonical_coords(center_x, center_z, rotation, pts)
    pu = np.abs(u)
    pv = np.abs(v)
    t = _project_quadrant(semi_axis_a, semi_axis_b, pu, pv)
    dist = np.hypot(pu - semi_axis_a * np.cos(t), pv - semi_axis_b * np.sin(t))
    inside = (pu / semi_axis_a) ** 2 + (pv / semi_axis_b) ** 2 - 1.0
    return np.where(inside >= 0, dist, -dist)


def _residuals_and_jacobian(params: np.ndarray, pts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Signed residuals and their Gauss-Newton Jacobian wrt (cx, cz, a, b, rot).

    Uses the envelope identity: moving a parameter moves the foot point f,
    and d(signed distance) = -n_out . df with n_out the outward unit normal
    at the foot point, which stays well defined as the distance crosses 0.
    """
    cx, cz, a, b, rot = params
    u, v = _canonical_coords(cx, cz, rot, pts)
    su = np.where(u >= 0, 1.0, -1.0)
    sv = np.where(v >= 0, 1.0, -1.0)
    t = _project_quadrant(a, b, np.abs(u), np.abs(v))
    qu = su * a * np.cos(t)  # foot point, canonical frame
    qv = sv * b * np.sin(t)
    ru = u - qu
    rv = v - qv
    dist = np.hypot(ru, rv)
    inside = (u / a) ** 2 + (v / b) ** 2 - 1.0
    res = np.where(inside >= 0, dist, -dist)

    nu = qu / (a * a)  # outward normal direction at the foot point
    nv = qv / (b * b)
    norm = np.hypot(nu, nv)
    nu /= norm
    nv /= norm

    jac = np.empty((pts.shape[0], 5))
    ct = np.cos(rot)
    st = np.sin(rot)
    # center shifts expressed in the canonical frame
    jac[:, 0] = -(nu * ct + nv * -st)
    jac[:, 1] = -(nu * st + nv * ct)
    jac[:, 2] = -nu * su * np.cos(t)
    jac[:, 3] = -nv * sv * np.sin(t)
    jac[:, 4] = -(nu * -qv + nv * qu)
    return res, jac


def _refine_geometric(params: np.ndarray, pts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Damped Gauss-Newton on geometric distances from the algebraic seed."""
    p = np.asarray(params, dtype=float)
    residuals, jac = _residuals_and_jacobian(p, pts)
    cost = float(residuals @ residuals)
    if cost < pts.shape[0] * 1e-24:  # already on the curve
        return p, residuals
    lam = 1e-3
    for _ in range(_REFINE_MAX_ITER):
        normal = jac.T @ jac + lam * np.eye(5)
        try:
            step = np.linalg.solve(normal, -(jac.T @ residuals))
        except np.linalg.LinAlgError:
            break
        trial = p + step
        trial[2] = abs(trial[2])
        trial[3] = abs(trial[3])
        if not (trial[2] > 0 and trial[3] > 0 and np.all(np.isfinite(trial))):
            break
        trial_res, trial_jac = _residuals_and_jacobian(trial, pts)
        trial_cost = float(trial_res @ trial_res)
        if trial_cost < cost:
            improvement = (cost - trial_cost) / max(cost, 1e-300)
            p, residuals, jac, cost = trial, trial_res, trial_jac, trial_cost
            lam = max(lam / 10.0, 1e-12)
            if improvement < 1e-12:
                break
        else:
            lam *= 10.0
            if lam > 1e8:
                break
    return p, residuals


def fit_ellipse(points) -> EllipseFit:
    """Fit an ellipse to >= 6 points and attach geometric residuals.

    The ellipse-constrained algebraic solution seeds a geometric
    least-squares refinement. Raises DegenerateFit for fewer than 6 points,
    collinear points, or when the constrained problem has no ellipse
    solution.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("points must be an (n, 2) array of (x, z) pairs")
    if pts.shape[0] < 6:
        raise DegenerateFit(f"need at least 6 points, got {pts.shape[0]}")
    if not np.all(np.isfinite(pts)):
        raise ValueError("points must be finite")

    mx, mz = pts.mean(axis=0)
    centered = pts - [mx, mz]
    sv = np.linalg.svd(centered, compute_uv=False)
    if sv[1] <= _COLLINEAR_RTOL * sv[0]:
        raise DegenerateFit("points are collinear")
    scale = float(np.sqrt(np.mean(np.sum(centered**2, axis=1))))

    coeffs = _solve_conic(centered[:, 0] / scale, centered[:, 1] / scale)
    coeffs = _denormalize_conic(coeffs, mx, mz, scale)
    cx, cz, semi_a, semi_b, rotation = _conic_to_geometry(coeffs)

    params, residuals = _refine_geometric(
        np.array([cx, cz, semi_a, semi_b, rotation]), pts
    )
    cx, cz, semi_a, semi_b, rotation = (float(val) for val in params)
    if semi_b > semi_a:
        semi_a, semi_b = semi_b, semi_a
        rotation += np.pi / 2.0
    rotation %= np.pi
    return EllipseFit(
        center_x=cx,
        center_z=cz,
        semi_axis_a=semi_a,
        semi_axis_b=semi_b,
        rotation=rotation,
        residuals=residuals,
        mean_abs_residual=float(np.mean(np.abs(residuals))),
        rms_residual=float(np.sqrt(np.mean(residuals**2))),
    )


def sample_ellipse(
    center_x: float,
    center_z: float,
    semi_axis_a: float,
    semi_axis_b: float,
    rotation: float,
    n_points: int,
) -> np.ndarray:
    """Exact points on an ellipse at uniformly spaced parameter angles."""
    t = np.linspace(0.0, 2.0 * np.pi, n_points, endpoint=False)
    u = semi_axis_a * np.cos(t)
    v = semi_axis_b * np.sin(t)
    ct = np.cos(rotation)
    st = np.sin(rotation)
    return np.column_stack([center_x + ct * u - st * v, center_z + st * u + ct * v])
