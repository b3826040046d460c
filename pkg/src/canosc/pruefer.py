"""Pruefer-angle integration for canonical systems.

Writing a real solution as u = R e_theta turns the system into the scalar
equation theta' = t * e_theta^T H(x) e_theta.  On singular intervals
(H = P_alpha) this integrates in closed form; elsewhere an embedded adaptive
Runge-Kutta pair advances the angle with a per-segment error budget.  The
angle is kept unwrapped (no mod-pi reduction) so that the counting formulas
can apply ceil/floor directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import rk
from .hamiltonian import (
    ConstantAngle,
    ConstantMatrix,
    Hamiltonian,
    PhiRamp,
    PhiTable,
    Segment,
    require_valid,
)

PI = math.pi

#: below this |cos(theta - alpha)| the angle sits exactly on a stationary point
STATIONARY_EPS = 1e-15


def step_singular(theta_in: float, alpha: float, length: float, t: float) -> float:
    """Advance theta' = t cos^2(theta - alpha) across a singular interval.

    Closed form: with d = theta_in - alpha reduced to r in [-pi/2, pi/2)
    modulo pi, the exit angle is alpha + k*pi + arctan(tan r + t*length).
    """
    if length < 0.0:
        raise ValueError("length must be nonnegative")
    d = theta_in - alpha
    if abs(math.cos(d)) < STATIONARY_EPS:
        return theta_in
    k = math.floor((d + PI / 2) / PI)
    r = d - k * PI
    return alpha + k * PI + math.atan(math.tan(r) + t * length)


def _theta_rhs(seg: Segment, t: float):
    """Right-hand side t * e_theta^T H e_theta on one segment (offset coords)."""
    kind = seg.kind
    if isinstance(kind, ConstantMatrix):
        m = kind.matrix

        def f(x, th):
            c, s = math.cos(th), math.sin(th)
            return t * (m.h11 * c * c + 2.0 * m.h12 * s * c + m.h22 * s * s)

        return f

    def f(x, th):
        c = math.cos(th - seg.phi_at(x))
        return t * c * c

    return f


@dataclass
class PrueferTrajectory:
    """Sampled (x, theta(x; t)) for one real spectral parameter."""

    t: float
    theta0: float
    xs: np.ndarray
    thetas: np.ndarray
    err_bound: float

    def theta_end(self) -> float:
        return float(self.thetas[-1])

    def value(self, x: float) -> float:
        """theta at x, linear interpolation between samples."""
        return float(np.interp(x, self.xs, self.thetas))


def integrate(
    H: Hamiltonian,
    t: float,
    theta0: float,
    L: float,
    tol: float = 1e-9,
    x_eval=(),
) -> PrueferTrajectory:
    """Pruefer trajectory on [0, L] with err_bound <= tol.

    Singular segments advance exactly; the rest by adaptive RK.  Every
    segment boundary and every requested x_eval point appears among the
    samples.  L may exceed X_max when a singular tail is attached.
    """
    require_valid(H)
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    if L < 0.0:
        raise ValueError("L must be nonnegative")
    if L > H.x_max and H.tail is None:
        raise ValueError(f"L = {L} beyond X_max = {H.x_max} and no tail attached")

    segs = list(H.segments)
    if L > H.x_max:
        segs.append(Segment(L - H.x_max, ConstantAngle(H.tail.gamma)))

    eval_pts = sorted({float(x) for x in x_eval if 0.0 < float(x) < L})
    rk_length = 0.0
    acc = 0.0
    for s in segs:
        if acc >= L:
            break
        if not s.is_singular:
            rk_length += min(s.length, L - acc)
        acc += s.length

    xs = [0.0]
    thetas = [float(theta0)]
    err = 0.0
    x = 0.0
    theta = float(theta0)
    remaining = L
    for seg in segs:
        if remaining <= 0.0:
            break
        span = min(seg.length, remaining)
        inner = [p - x for p in eval_pts if x < p < x + span]
        if seg.is_singular:
            alpha = seg.kind.alpha
            for off in inner:
                xs.append(x + off)
                thetas.append(step_singular(theta, alpha, off, t))
            theta = step_singular(theta, alpha, span, t)
            xs.append(x + span)
            thetas.append(theta)
        else:
            budget = tol * (span / rk_length) if rk_length > 0 else tol
            sx, sy, e = rk.integrate_adaptive(
                _theta_rhs(seg, t), 0.0, span, theta, budget, x_eval=inner
            )
            for xi, yi in zip(sx[1:], sy[1:]):
                xs.append(x + xi)
                thetas.append(float(yi))
            theta = float(sy[-1])
            err += e
        x += span
        remaining -= span
    if not math.isfinite(theta):
        raise rk.IntegrationError("non-finite Pruefer angle")
    return PrueferTrajectory(
        t=t,
        theta0=float(theta0),
        xs=np.asarray(xs),
        thetas=np.asarray(thetas),
        err_bound=err,
    )


def theta_at(H: Hamiltonian, t: float, theta0: float, L: float, tol: float = 1e-9) -> float:
    """theta(L; t) with initial angle theta0."""
    return integrate(H, t, theta0, L, tol).theta_end()


def theta_of_t_sweep(
    H: Hamiltonian,
    theta0: float,
    L: float,
    t_grid,
    tol: float = 1e-9,
) -> list[tuple[float, float]]:
    """(t, theta(L; t)) over a sorted grid; nondecreasing in t up to 2*tol."""
    t_grid = list(t_grid)
    if any(b < a for a, b in zip(t_grid, t_grid[1:])):
        raise ValueError("t_grid must be sorted")
    return [(t, theta_at(H, t, theta0, L, tol)) for t in t_grid]
