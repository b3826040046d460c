"""Eigenvalue counting and location, semiboundedness, essential spectrum.

Counting rests on the unwrapped Pruefer angle at the right endpoint: the
eigenvalues of the problem on [0, L] with boundary condition
u1(L) sin(beta) - u2(L) cos(beta) = 0 are exactly the parameters where
theta(L; lambda) hits beta modulo pi, and the angle is monotone in lambda.
Half-line results are obtained by truncation with a stabilization rule that
is reported honestly (stabilized / divergent / inconclusive), never
extrapolated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import pruefer
from .hamiltonian import (
    Hamiltonian,
    NotRankOne,
    PhiProfile,
    extract_phi,
    require_valid,
    truncate_with_tail,
)

PI = math.pi
HALF_PI = math.pi / 2


@dataclass(frozen=True)
class SpectralWindow:
    """Half-open spectral window [s, t)."""

    s: float
    t: float
    include_s: bool = True
    include_t: bool = False

    def __post_init__(self):
        if not self.s < self.t:
            raise ValueError("need s < t")


@dataclass
class CountResult:
    count: int
    L_used: float
    certified: bool


def _ceil_level(theta: float, beta: float) -> int:
    return math.ceil((theta - beta) / PI)


def _is_full_singular_pi_half(H: Hamiltonian, L: float) -> bool:
    """True when (0, L) is a single singular interval of type pi/2 mod pi."""
    alpha = H.single_singular_type()
    if alpha is None or L > H.x_max:
        first = H.segments[0]
        if not (first.is_singular and first.length >= L - 1e-12):
            return False
        alpha = first.kind.alpha
    d = (alpha - HALF_PI) / PI
    return abs(d - round(d)) < 1e-12


def count_bounded(
    H: Hamiltonian,
    L: float,
    beta: float,
    w: SpectralWindow,
    tol: float = 1e-9,
) -> CountResult:
    """Number of eigenvalues of the [0, L] problem in [s, t).

    Ceil formula on the Pruefer angle with theta(0) = 0.  The result is
    certified when both endpoint angles are farther than the integration
    error bound from the counting discontinuities.
    """
    if not (0.0 <= beta < PI):
        raise ValueError("beta must lie in [0, pi)")
    if _is_full_singular_pi_half(H, L):
        # Trivial case: all spectral projections vanish.
        return CountResult(count=0, L_used=L, certified=True)
    tr_t = pruefer.integrate(H, w.t, 0.0, L, tol)
    tr_s = pruefer.integrate(H, w.s, 0.0, L, tol)
    th_t, th_s = tr_t.theta_end(), tr_s.theta_end()
    count = _ceil_level(th_t, beta) - _ceil_level(th_s, beta)
    err = max(tr_t.err_bound, tr_s.err_bound, 1e-15)
    certified = all(
        _dist_to_grid(th - beta) > err for th in (th_t, th_s)
    )
    return CountResult(count=count, L_used=L, certified=certified)


def _dist_to_grid(v: float) -> float:
    """Distance of v to the nearest multiple of pi."""
    r = v / PI
    return abs(r - round(r)) * PI


class NoUniqueRoot(Exception):
    """theta(L; .) is constant on a bracketing interval."""


def locate_eigenvalues(
    H: Hamiltonian,
    L: float,
    beta: float,
    w: SpectralWindow,
    tol: float = 1e-9,
) -> list[float]:
    """Eigenvalues in [s, t), by bisection on the monotone angle map."""
    if _is_full_singular_pi_half(H, L):
        return []
    th_s = pruefer.theta_at(H, w.s, 0.0, L, tol)
    th_t = pruefer.theta_at(H, w.t, 0.0, L, tol)
    n_lo = _ceil_level(th_s, beta)
    n_hi = _ceil_level(th_t, beta)
    out = []
    for n in range(n_lo, n_hi):
        target = beta + n * PI
        lo, hi = w.s, w.t
        f_lo = th_s - target
        f_hi = th_t - target
        if f_lo == f_hi:
            raise NoUniqueRoot(f"flat angle map at level {n}")
        # theta(L; .) is nondecreasing; bisect to |theta - target| < tol
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            f_mid = pruefer.theta_at(H, mid, 0.0, L, tol) - target
            if abs(f_mid) < tol or hi - lo < 1e-14 * max(1.0, abs(mid)):
                break
            if f_mid < 0.0:
                lo = mid
            else:
                hi = mid
        out.append(0.5 * (lo + hi))
    return sorted(out)


@dataclass
class HalfLineCount:
    """Outcome of the truncation scheme for a half-line count."""

    status: str  # "stabilized" | "divergent" | "inconclusive"
    count: Optional[int]
    L_values: list[float] = field(default_factory=list)
    F_values: list[float] = field(default_factory=list)

    @property
    def divergent(self) -> bool:
        return self.status == "divergent"


def halfline_count(
    H: Hamiltonian,
    w: SpectralWindow,
    L_schedule,
    tol: float = 1e-9,
    divergence_threshold: float = 50.0,
) -> HalfLineCount:
    """dim E(s, t) of the half-line problem via floor((theta_t - theta_s)/pi).

    With a singular tail attached the problem is exactly the bounded one
    with boundary condition gamma + pi/2, and the count is final.  Otherwise
    F(L) is evaluated along the schedule; the floor must agree on three
    consecutive points to count as stabilized.
    """
    require_valid(H)
    if H.tail is not None:
        beta = math.fmod(H.tail.gamma + HALF_PI, PI)
        if beta < 0.0:
            beta += PI
        res = count_bounded(H, H.x_max, beta, w, tol)
        return HalfLineCount(
            status="stabilized",
            count=res.count,
            L_values=[H.x_max],
            F_values=[float(res.count)],
        )
    schedule = sorted(float(L) for L in L_schedule)
    if not schedule or schedule[0] <= 0.0:
        raise ValueError("L_schedule must be positive and nonempty")
    if schedule[-1] > H.x_max + 1e-12:
        raise ValueError("L_schedule exceeds X_max")
    L_max = schedule[-1]
    tr_t = pruefer.integrate(H, w.t, 0.0, L_max, tol, x_eval=schedule)
    tr_s = pruefer.integrate(H, w.s, 0.0, L_max, tol, x_eval=schedule)
    F = [
        (tr_t.value(L) - tr_s.value(L)) / PI
        for L in schedule
    ]
    floors = [math.floor(f + 1e-12) for f in F]
    if max(F) > divergence_threshold:
        return HalfLineCount("divergent", None, schedule, F)
    if len(floors) >= 3 and floors[-1] == floors[-2] == floors[-3]:
        return HalfLineCount("stabilized", floors[-1], schedule, F)
    return HalfLineCount("inconclusive", None, schedule, F)


# ---------------------------------------------------------------------------
# semiboundedness classification


@dataclass
class Classification:
    kind: str  # "in_c_plus" | "neg_eigs_at_most" | "not_semibounded"
    phi: Optional[PhiProfile] = None
    n_bound: Optional[int] = None
    witness: Optional[str] = None

    @property
    def in_c_plus(self) -> bool:
        return self.kind == "in_c_plus"


def classify_semibounded(H: Hamiltonian, tol: float = 1e-10) -> Classification:
    """Nonnegative spectrum / at-most-N negative eigenvalues / neither.

    A system is in C+ iff its normalized angle profile stays above -pi/2;
    a limit in (-N*pi - pi/2, -(N-1)*pi - pi/2] allows at most N negative
    eigenvalues.  A segment of full rank rules out semiboundedness of this
    rank-one kind entirely.
    """
    try:
        phi = extract_phi(H, tol)
    except NotRankOne as exc:
        return Classification(
            kind="not_semibounded",
            witness=f"segment {exc.segment_index} has det H = {exc.det:g} > {tol:g}",
        )
    # extract_phi output is nonincreasing by construction, but keep the
    # witness path for future segment kinds
    vals = [phi.pieces[0].phi0] + [p.phi1 for p in phi.pieces]
    for a, b in zip(vals, vals[1:]):
        if b > a + 1e-9:
            return Classification(
                kind="not_semibounded",
                witness=f"phi increases from {a:g} to {b:g}",
            )
    phi = phi.normalized()
    if phi.phi_infinity >= -HALF_PI - 1e-12:
        return Classification(kind="in_c_plus", phi=phi)
    n = math.ceil((-phi.phi_infinity - HALF_PI) / PI - 1e-12)
    return Classification(kind="neg_eigs_at_most", phi=phi, n_bound=n)


def classify_wholeline(
    phi_left: PhiProfile,
    phi_right: PhiProfile,
    tol: float = 1e-9,
) -> bool:
    """Whole-line nonnegativity: total drop phi(-inf) - phi(inf) <= pi.

    ``phi_left`` describes the left half line in reflected coordinates (the
    profile of the system mirrored onto [0, infinity)), so its own drop
    equals phi(-inf) - phi(0-).  The junction jump is normalized into
    [0, pi) because each profile is only determined modulo pi.
    """
    joint = math.fmod(-phi_left.phi_start - phi_right.phi_start, PI)
    if joint < -tol:
        joint += PI
    total = phi_left.drop + phi_right.drop + max(joint, 0.0)
    return total <= PI + tol


# ---------------------------------------------------------------------------
# m-function endpoints


def _neg_tan_extended(phi: float) -> float:
    """-tan(phi), with +-pi/2 mapped to the appropriate infinity."""
    if _dist_to_grid(phi - HALF_PI) < 1e-12:
        # tan pole: phi = pi/2 gives -infinity, phi = -pi/2 gives +infinity
        r = (phi - HALF_PI) / PI
        return -math.inf if round(r) % 2 == 0 else math.inf
    return -math.tan(phi)


def m_endpoints(phi: PhiProfile) -> tuple[float, float]:
    """(m(-infinity), m(0-)) = (-tan phi(0+), -tan phi(infinity))."""
    return _neg_tan_extended(phi.phi_start), _neg_tan_extended(phi.phi_infinity)


def m_halfline_real(
    H: Hamiltonian,
    minus_t: float,
    L: Optional[float] = None,
    tol: float = 1e-10,
) -> float:
    """m(minus_t) for minus_t < 0 via truncation at L with tail P_phi(L).

    The square-integrable direction of the tail, e_(phi(L)+pi/2), is pulled
    back to x = 0 through the transfer matrix; the result is f1(0)/f2(0) as
    an extended real.
    """
    if minus_t >= 0.0:
        raise ValueError("minus_t must be negative")
    from . import entire  # local import; entire depends on hamiltonian only

    phi = extract_phi(H)
    if L is None:
        L = H.x_max
    phi_L = phi.value(L) if L < phi.x_max else phi.pieces[-1].phi1
    T = entire.transfer_matrix(H, L, complex(minus_t), tol).entries.real
    f_L = np.array([math.cos(phi_L + HALF_PI), math.sin(phi_L + HALF_PI)])
    # det T = 1, so the inverse is explicit
    T_inv = np.array([[T[1, 1], -T[0, 1]], [-T[1, 0], T[0, 0]]])
    f0 = T_inv @ f_L
    if f0[1] == 0.0:
        return math.inf
    return float(f0[0] / f0[1])


# ---------------------------------------------------------------------------
# essential spectrum


@dataclass
class EssBounds:
    A: float
    B: float
    lower: float
    upper: float
    tail_window: tuple[float, float]
    sigma_ess_empty: bool
    zero_in_ess: bool
    warnings: list[str] = field(default_factory=list)


def ess_spectrum_bounds(
    phi: PhiProfile,
    tail_fraction: float = 0.5,
    n_samples: int = 1000,
    empty_threshold: float = 1e-8,
) -> EssBounds:
    """Bottom-of-essential-spectrum bounds from g(x) = x (phi(x) - phi(inf)).

    A and B are the finite-window sup and inf of g over the declared tail
    window; the bounds are 1/(4A) <= min sigma_ess <= min(1/A, 1/(4B)).
    A ~ 0 reports an empty essential spectrum; a sup still growing at the
    window end is flagged as divergent (0 in the essential spectrum).
    """
    if not (0.0 < tail_fraction < 1.0):
        raise ValueError("tail_fraction must be in (0, 1)")
    x_lo = tail_fraction * phi.x_max
    x_hi = phi.x_max
    xs = sorted(
        {p.x0 for p in phi.pieces if x_lo <= p.x0 <= x_hi}
        | set(np.linspace(x_lo, x_hi, n_samples))
    )
    g = np.array([x * (phi.value(x) - phi.phi_infinity) for x in xs])
    g = np.maximum(g, 0.0)
    A = float(np.max(g))
    B = float(np.min(g))
    warnings = []
    # growth diagnosis: compare the sup of g over [X/4, X/2] with [X/2, X];
    # a bounded limsup gives ratio ~1, g ~ x^p growth gives ratio 2^p
    def window_sup(lo, hi):
        ws = np.linspace(lo, hi, n_samples)
        return float(max(x * (phi.value(x) - phi.phi_infinity) for x in ws))

    sup1 = max(window_sup(0.25 * phi.x_max, 0.5 * phi.x_max), 0.0)
    sup2 = max(window_sup(0.5 * phi.x_max, phi.x_max), 0.0)
    trending = sup2 > 1.1 * sup1 + empty_threshold
    diverging = sup2 > 1.3 * sup1 + empty_threshold and sup2 > 1.0
    if trending:
        warnings.append(
            "g(x) = x*(phi - phi_inf) still trending upward at the window end; "
            "the asymptotic limsup/liminf may differ from the finite-window values"
        )
    empty = A <= empty_threshold
    lower = math.inf if A == 0.0 else 1.0 / (4.0 * A)
    upper = math.inf if A == 0.0 else 1.0 / A
    if B > 0.0:
        upper = min(upper, 1.0 / (4.0 * B))
    return EssBounds(
        A=A,
        B=B,
        lower=lower,
        upper=upper,
        tail_window=(x_lo, x_hi),
        sigma_ess_empty=empty,
        zero_in_ess=diverging,
        warnings=warnings,
    )


@dataclass
class ZeroEigenvalueCheck:
    is_eigenvalue: bool
    integral: float
    tail_converges: bool


def zero_eigenvalue_check(phi: PhiProfile) -> ZeroEigenvalueCheck:
    """Is 0 an eigenvalue: square-integrability of phi + pi/2.

    Requires phi(inf) = -pi/2 (otherwise the z = 0 solution e_0 has infinite
    H-norm).  The body integral of cos^2(phi) is exact per linear piece; the
    tail is judged by the decay rate of phi + pi/2 over the last stretch of
    the profile (power-law fit; faster decay than x^(-1/2) converges).
    """
    if abs(phi.phi_infinity + HALF_PI) > 1e-9:
        return ZeroEigenvalueCheck(False, math.inf, False)
    total = sum(_int_cos2(p) for p in phi.pieces)
    # decay of g = phi + pi/2 between the window midpoint and the end
    x1 = phi.x_max
    x0 = 0.5 * x1
    g1 = phi.value(0.999 * x1) + HALF_PI
    g0 = phi.value(x0) + HALF_PI
    if g1 <= 1e-12:
        return ZeroEigenvalueCheck(True, total, True)
    if g0 <= g1:
        return ZeroEigenvalueCheck(False, total, False)
    p = math.log(g1 / g0) / math.log(x1 / x0)
    converges = p < -0.5 - 1e-3
    return ZeroEigenvalueCheck(converges, total, converges)


def _int_cos2(piece) -> float:
    """Integral of cos^2(phi) over one linear piece, in closed form."""
    dx = piece.x1 - piece.x0
    a, b = piece.phi0, piece.phi1
    if abs(b - a) < 1e-14:
        c = math.cos(a)
        return dx * c * c
    # int cos^2 = phi/2 + sin(2 phi)/4, change of variables x -> phi
    prim = lambda v: 0.5 * v + 0.25 * math.sin(2.0 * v)
    return dx * (prim(a) - prim(b)) / (a - b)


def truncation_beta(phi: PhiProfile, L: float) -> float:
    """Natural boundary condition phi(L) + pi/2 mod pi at a truncation."""
    beta = math.fmod(phi.value(L) + HALF_PI, PI)
    if beta < 0.0:
        beta += PI
    return beta


def negative_count_at_truncation(
    H: Hamiltonian,
    L: float,
    T_floor: float = 1e4,
    tol: float = 1e-9,
) -> int:
    """Number of negative eigenvalues of the [0, L] problem with the natural
    tail boundary condition."""
    phi = extract_phi(H)
    beta = truncation_beta(phi, L)
    w = SpectralWindow(-T_floor, 0.0)
    return count_bounded(H, L, beta, w, tol).count
