"""Complex transfer matrices and entire-function growth estimation.

The transfer matrix T(x; z) solves U' = z J H(x) U with T(0; z) = 1 and has
unit determinant (the generator is trace free).  On singular intervals the
factor is exactly 1 + z*l*J*P_alpha because (J P_alpha)^2 = 0; constant
full-rank segments use the matrix exponential; angle ramps integrate by
adaptive RK in complex arithmetic.  Growth (order, exponential type) is
estimated by regression on log M(r) over geometric radii, with a scaled
product path available to avoid overflow for large |z|.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.linalg import expm
from scipy.special import zeta as hurwitz_zeta

from . import rk
from .hamiltonian import (
    ConstantAngle,
    ConstantMatrix,
    Hamiltonian,
    Segment,
    p_alpha,
    require_valid,
)

J = np.array([[0.0, -1.0], [1.0, 0.0]])

#: determinant drift beyond this aborts with an integrator-failure report
DET_FAILURE = 1e-6


class DetDriftError(RuntimeError):
    """Transfer-matrix determinant drifted beyond the failure threshold."""


@dataclass
class TransferMatrix:
    entries: np.ndarray  # 2x2 complex
    x: float
    z: complex
    #: determinant accumulated factor by factor.  Exact factors (singular
    #: intervals, matrix exponentials of trace-free generators) contribute
    #: exactly 1; only integrated factors contribute numerically.  Evaluating
    #: det from the final entries instead would lose it to cancellation once
    #: the entries are large, since that difference of products carries an
    #: error of order |T|^2 * eps.
    det: complex = 1.0 + 0.0j

    def __post_init__(self):
        if abs(self.det - 1.0) > DET_FAILURE:
            raise DetDriftError(
                f"det T = {self.det} at x = {self.x}, z = {self.z}; "
                "integrator failure"
            )

    @property
    def first_column(self) -> tuple[complex, complex]:
        """(A, C) = (u1, u2) for the solution with u(0) = e1."""
        return complex(self.entries[0, 0]), complex(self.entries[1, 0])


def _det2(M: np.ndarray) -> complex:
    return complex(M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0])


def _segment_factor(
    seg: Segment, span: float, z: complex, tol: float
) -> tuple[np.ndarray, complex]:
    """(factor, det of factor).

    The exact factors have unit determinant analytically: tr(J P_alpha) = 0
    with (J P_alpha)^2 = 0 for singular intervals, and det expm(z l J H) =
    exp(z l tr(J H)) = 1 since J H is trace free.  The determinant of an
    integrated factor is the residual that measures integrator quality.
    """
    kind = seg.kind
    if isinstance(kind, ConstantAngle):
        return np.eye(2, dtype=complex) + z * span * (J @ p_alpha(kind.alpha)), 1.0
    if isinstance(kind, ConstantMatrix):
        return expm(z * span * (J @ kind.matrix.as_array())), 1.0

    def f(x, u):
        return z * (J @ seg.h_at(x) @ u.reshape(2, 2)).reshape(4)

    _, ys, _ = rk.integrate_adaptive(
        f, 0.0, span, np.eye(2, dtype=complex).reshape(4), tol
    )
    F = ys[-1].reshape(2, 2)
    return F, _det2(F)


def transfer_matrix(
    H: Hamiltonian,
    x: float,
    z: complex,
    tol: float = 1e-10,
) -> TransferMatrix:
    """T(x; z), product of per-segment factors."""
    require_valid(H)
    if x > H.x_max + 1e-12 and H.tail is None:
        raise ValueError("x beyond X_max")
    T = np.eye(2, dtype=complex)
    det = complex(1.0)
    acc = 0.0
    for seg in H.segments:
        if acc >= x:
            break
        span = min(seg.length, x - acc)
        F, d = _segment_factor(seg, span, z, tol)
        T = F @ T
        det *= d
        acc += seg.length
    if x > acc and H.tail is not None:
        tail_seg = Segment(x - acc, ConstantAngle(H.tail.gamma))
        F, d = _segment_factor(tail_seg, x - acc, z, tol)
        T = F @ T
        det *= d
    return TransferMatrix(entries=T, x=x, z=z, det=det)


def transfer_matrix_log(
    H: Hamiltonian,
    x: float,
    z: complex,
    tol: float = 1e-10,
) -> tuple[np.ndarray, float]:
    """(U, s) with T(x; z) = exp(s) * U and max |U entry| = 1.

    Per-segment rescaling keeps the running product inside floating range,
    so growth can be probed at radii where T itself would overflow.
    """
    require_valid(H)
    U = np.eye(2, dtype=complex)
    logscale = 0.0
    acc = 0.0
    for seg in H.segments:
        if acc >= x:
            break
        span = min(seg.length, x - acc)
        U = _segment_factor(seg, span, z, tol)[0] @ U
        m = float(np.max(np.abs(U)))
        if m > 0.0:
            U = U / m
            logscale += math.log(m)
        acc += seg.length
    return U, logscale


def log_max_entry(H: Hamiltonian, x: float, z: complex, tol: float = 1e-10) -> float:
    """log of the largest |entry| of T(x; z), overflow safe."""
    U, s = transfer_matrix_log(H, x, z, tol)
    m = float(np.max(np.abs(U)))
    return s + math.log(m) if m > 0.0 else -math.inf


# ---------------------------------------------------------------------------
# growth fits


@dataclass
class GrowthFit:
    radii: np.ndarray
    logmax: np.ndarray  # log M(r)
    order: float
    residual: float
    n_phases: int

    def table(self) -> list[tuple[float, float]]:
        return list(zip(self.radii.tolist(), self.logmax.tolist()))


def order_fit(
    evaluate: Callable[[complex], complex],
    r_min: float,
    r_max: float,
    n_radii: int = 12,
    n_phases: int = 16,
    log_abs: bool = False,
) -> GrowthFit:
    """Least-squares growth order of an entire function.

    M(r) is the max of |F| over sampled phases; the order estimate is the
    slope of log log+ M against log r over the upper half of the radii.
    When ``log_abs`` is set, ``evaluate`` must return log |F(z)| directly
    (overflow-safe path).
    """
    if r_max / r_min < 1e3:
        raise ValueError("need r_max / r_min >= 1e3 for a stable fit")
    if n_radii < 8:
        raise ValueError("need at least 8 radii")
    radii = np.geomspace(r_min, r_max, n_radii)
    # phase offset keeps samples off the positive real axis, where zeros live
    phases = 2.0 * math.pi * (np.arange(n_phases) + 0.37) / n_phases
    logmax = np.empty(n_radii)
    for i, r in enumerate(radii):
        vals = []
        for ph in phases:
            zz = r * complex(math.cos(ph), math.sin(ph))
            v = evaluate(zz)
            vals.append(float(v) if log_abs else math.log(max(abs(v), 1e-300)))
        logmax[i] = max(vals)
    upper = radii >= radii[n_radii // 2 - 1]
    mask = upper & (logmax > 1e-9)
    if mask.sum() < 3:
        # essentially no growth: treat as order 0
        return GrowthFit(radii, logmax, order=0.0, residual=0.0, n_phases=n_phases)
    xs = np.log(radii[mask])
    ys = np.log(logmax[mask])
    slope, intercept = np.polyfit(xs, ys, 1)
    resid = float(np.sqrt(np.mean((ys - (slope * xs + intercept)) ** 2)))
    return GrowthFit(radii, logmax, order=float(slope), residual=resid, n_phases=n_phases)


def type_fit_imaginary(
    evaluate_log: Callable[[complex], float],
    y_min: float,
    y_max: float,
    n_points: int = 12,
) -> float:
    """Exponential growth rate along the positive imaginary axis.

    Fits log M(iy) ~ tau * y over the upper half of a geometric y-grid;
    used to compare measured growth with the de Branges type.
    """
    ys = np.geomspace(y_min, y_max, n_points)
    lm = np.array([evaluate_log(complex(0.0, y)) for y in ys])
    upper = ys >= ys[n_points // 2 - 1]
    slope, _ = np.polyfit(ys[upper], lm[upper], 1)
    return float(slope)


# ---------------------------------------------------------------------------
# Hadamard products


def _auto_terms(z: complex, alpha: float, eps: float = 1e-12) -> int:
    r = abs(z)
    n1 = (2.0 * max(r, 1.0)) ** (1.0 / alpha)
    n2 = (max(r, 1.0) ** 2 / (2.0 * (2.0 * alpha - 1.0) * eps)) ** (1.0 / (2.0 * alpha - 1.0))
    return int(max(50, math.ceil(n1), math.ceil(n2)))


def hadamard_a(z: complex, alpha: float, N: Optional[int] = None) -> complex:
    """prod_{n>=1} (1 - z / n^alpha), partial product with tail correction.

    The tail beyond N contributes exp(-z * sum_{n>N} n^(-alpha)) to first
    order; N (auto-chosen if omitted) keeps the neglected second-order tail
    below 1e-12.  z within 1e-12 of a retained zero returns exactly 0.
    """
    if alpha <= 2.0:
        raise ValueError("alpha must exceed 2")
    if N is None:
        N = _auto_terms(z, alpha)
    n = np.arange(1, N + 1, dtype=float)
    zeros = n**alpha
    dist = np.abs(z - zeros)
    if np.min(dist) < 1e-12 * max(1.0, abs(z)):
        return 0.0 + 0.0j
    prod = complex(np.prod(1.0 - z / zeros))
    tail = float(hurwitz_zeta(alpha, N + 1))
    return prod * np.exp(-z * tail)


def hadamard_a_log(z: complex, alpha: float, N: Optional[int] = None) -> float:
    """log |A(z)|, overflow safe."""
    if N is None:
        N = _auto_terms(z, alpha)
    n = np.arange(1, N + 1, dtype=float)
    with np.errstate(divide="ignore"):
        s = float(np.sum(np.log(np.abs(1.0 - z / n**alpha))))
    tail = float(hurwitz_zeta(alpha, N + 1))
    return s + float((-z * tail).real)


def hadamard_c_zeros(alpha: float, count: int) -> np.ndarray:
    """Nonzero zeros (n^alpha + (n+1)^alpha) / 2 for n = 1..count."""
    n = np.arange(1, count + 1, dtype=float)
    return 0.5 * (n**alpha + (n + 1.0) ** alpha)


def hadamard_c(z: complex, alpha: float, N: Optional[int] = None) -> complex:
    """z * prod (1 - z / z_n) with z_n = (n^alpha + (n+1)^alpha)/2, C'(0) = 1.

    The zeros alternate with those of hadamard_a by construction.
    """
    if alpha <= 2.0:
        raise ValueError("alpha must exceed 2")
    if N is None:
        N = _auto_terms(z, alpha)
    zeros = hadamard_c_zeros(alpha, N)
    if abs(z) < 1e-300:
        return complex(z)
    dist = np.abs(z - zeros)
    if np.min(dist) < 1e-12 * max(1.0, abs(z)):
        return 0.0 + 0.0j
    prod = complex(np.prod(1.0 - z / zeros))
    # tail sum of 1/z_n, bounded via the Hurwitz zeta of the smaller zero
    tail = float(hurwitz_zeta(alpha, N + 1))
    return z * prod * np.exp(-z * tail)


def hadamard_c_log(z: complex, alpha: float, N: Optional[int] = None) -> float:
    if N is None:
        N = _auto_terms(z, alpha)
    zeros = hadamard_c_zeros(alpha, N)
    if abs(z) < 1e-300:
        return -math.inf
    with np.errstate(divide="ignore"):
        s = float(np.sum(np.log(np.abs(1.0 - z / zeros))))
    tail = float(hurwitz_zeta(alpha, N + 1))
    return math.log(abs(z)) + s + float((-z * tail).real)


@dataclass
class H2MembershipResult:
    value: float
    value_half_range: float
    verdict: str  # "converges_likely" | "inconclusive"


def h2_membership_integral(
    alpha: float,
    N: Optional[int] = None,
    R: float = 1e3,
) -> H2MembershipResult:
    """int dt / ((1+t^2)(A^2 + C^2)) over [-R, R], refined near zeros of A.

    Interlacing keeps A^2 + C^2 positive, so the integrand is bounded;
    the verdict compares the value with the half-range integral and calls
    convergence likely when the difference is below 1%.
    """
    from scipy.integrate import quad

    def integrand(t):
        a = hadamard_a(complex(t), alpha, N).real
        c = hadamard_c(complex(t), alpha, N).real
        return 1.0 / ((1.0 + t * t) * (a * a + c * c))

    def run(upper):
        pts = [0.0]
        k = 1
        while k**alpha < upper:
            pts.append(k**alpha)
            k += 1
        pts.append(upper)
        total = 0.0
        for lo, hi in zip(pts, pts[1:]):
            v, _ = quad(integrand, lo, hi, limit=200)
            total += v
        v_neg, _ = quad(integrand, -upper, 0.0, limit=200)
        return total + v_neg

    full = run(R)
    half = run(R / 2.0)
    rel = abs(full - half) / max(abs(full), 1e-300)
    verdict = "converges_likely" if rel < 0.01 else "inconclusive"
    return H2MembershipResult(value=full, value_half_range=half, verdict=verdict)


# ---------------------------------------------------------------------------
# order bound report


@dataclass
class OrderBoundReport:
    fitted_order: float
    residual: float
    upper_ok: bool  # fitted order <= 0.55
    has_ramp_mass: bool
    tau: Optional[float]
    lower_resolvable: bool
    lower_ok: Optional[bool]  # fitted order >= 0.45, when applicable
    r_range: tuple[float, float]


def order_bound_check(
    H: Hamiltonian,
    L: Optional[float] = None,
    r_min: float = 1.0,
    r_max: Optional[float] = None,
    n_radii: int = 10,
    n_phases: int = 8,
    tol: float = 1e-8,
) -> OrderBoundReport:
    """Growth-order report for a semibounded system's transfer matrix.

    Checks the fitted order against the 1/2 ceiling; when the profile
    carries absolutely continuous mass (a ramp), the order must also reach
    1/2, which is asserted only when the de Branges type is large enough to
    be resolvable at the sampled radii.
    """
    from . import transforms
    from .hamiltonian import extract_phi

    if L is None:
        L = H.x_max
    all_singular = all(s.is_singular for s in H.segments)
    if r_max is None:
        r_max = 1e8 if all_singular else 1e3
    fit = order_fit(
        lambda zz: log_max_entry(H, L, zz, tol),
        r_min,
        r_max,
        n_radii=n_radii,
        n_phases=n_phases,
        log_abs=True,
    )
    phi = extract_phi(H)
    has_ramp = any(not p.is_plateau for p in phi.pieces if p.x0 < L)
    tau = None
    resolvable = False
    lower_ok = None
    if has_ramp:
        try:
            diag = transforms.canonical_to_diagonal(phi)
            tau = transforms.debranges_type(diag)
        except transforms.SplitRequired:
            tau = None
        if tau is not None:
            resolvable = tau * math.sqrt(r_max) >= 5.0
        if resolvable:
            lower_ok = fit.order >= 0.45
    return OrderBoundReport(
        fitted_order=fit.order,
        residual=fit.residual,
        upper_ok=fit.order <= 0.55,
        has_ramp_mass=has_ramp,
        tau=tau,
        lower_resolvable=resolvable,
        lower_ok=lower_ok,
        r_range=(r_min, r_max),
    )
