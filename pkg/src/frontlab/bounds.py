"""Closed-form bounds on the critical wave speed.

Every function here is pure and cheap; the shooting and nonlocal solvers use
them as sanity windows around their numerical answers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import FrontlabError, ModelParams, SigmaBounds, validate_params


class BracketInvalid(FrontlabError):
    pass


SQRT_BRANCH_START = 16.0
MANIFOLD_THRESHOLD = 3.0 + 2.0 * math.sqrt(2.0)


def breakpoint_poly(a: float) -> float:
    """``a^3 - 32 a^2 + 256 a - 256``; zero where the two T2 upper bounds meet."""
    return a ** 3 - 32.0 * a ** 2 + 256.0 * a - 256.0


@dataclass(frozen=True)
class CubicRoot:
    value: float
    residual: float


def a_star(tol: float = 1e-12) -> CubicRoot:
    """Root of :func:`breakpoint_poly` in ``(2, 16)`` by plain bisection."""
    lo, hi = 2.0, 16.0
    plo, phi_ = breakpoint_poly(lo), breakpoint_poly(hi)
    if not (plo > 0 and phi_ < 0):
        raise BracketInvalid(f"p(2)={plo}, p(16)={phi_}: no sign change")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if breakpoint_poly(mid) > 0:
            lo = mid
        else:
            hi = mid
    x = 0.5 * (lo + hi)
    return CubicRoot(x, abs(breakpoint_poly(x)))


_A_STAR = a_star().value


def t3_upper(a: float, b: float) -> float:
    return math.sqrt((math.sqrt(a * a + 8 * a + 4 * b + 16) + a + 4) / 2)


def t3_lower(a: float, b: float) -> float:
    """Manifold lower bound for ``b > 0``, ``a^2 >= 4 b`` (the ``max`` with 2 is not applied).

    With ``s = a - sqrt(a^2 - 4b)`` the bound reads ``(2b - s)/sqrt(2bs)``.
    Substituting ``s = 4b/q``, ``q = a + sqrt(a^2 - 4b)``, gives the
    cancellation-free ``(q - 2)/sqrt(2q)``, which tends to ``(a-1)/sqrt(a)`` as b -> 0.
    """
    q = a + math.sqrt(max(a * a - 4 * b, 0.0))
    return (q - 2) / math.sqrt(2 * q)


def sigma_upper(p: ModelParams) -> tuple[float, str]:
    """Upper bound on sigma* and the label of the branch that produced it."""
    a, b = p.a, p.b
    if max(a, b) <= 2:
        return 2.0, "T1"
    if b == 0:
        if a <= _A_STAR:
            return math.sqrt((a * a + 4) / a), "T2-parabola"
        if a <= SQRT_BRANCH_START:
            return 2 + a / 8, "T2-fisher"
        return math.sqrt(a), "T2-sqrt"
    return max(2.0, t3_upper(a, b)), "T3"


def sigma_lower(p: ModelParams) -> tuple[float, str]:
    a, b = p.a, p.b
    if b == 0:
        if a <= MANIFOLD_THRESHOLD:
            return 2.0, "trivial-2"
        return (a - 1) / math.sqrt(a), "T2-manifold"
    if a * a >= 4 * b:
        val = t3_lower(a, b)
        if val > 2:
            return val, "T3-manifold"
    return 2.0, "trivial-2"


def sigma_bounds(p: ModelParams) -> SigmaBounds:
    lo, lo_b = sigma_lower(p)
    up, up_b = sigma_upper(p)
    return SigmaBounds(p.a, p.b, lo, up, lo_b, up_b)


def theorem3_speed_cap(p: ModelParams) -> float:
    """Upper bound on the speed of nonlocal fronts (requires ``b/(2 lam^2) < 1``)."""
    validate_params(p, "nonlocal")
    a, b, lam = p.a, p.b, p.lam
    base = 2 + a / lam
    return base + (b / (4 * lam ** 2)) * base / (1 - b / (2 * lam ** 2))


def chebyshev_points(n: int) -> np.ndarray:
    """Chebyshev nodes mapped into the open interval (0, 1)."""
    k = np.arange(1, n + 1)
    return 0.5 * (1 - np.cos((2 * k - 1) * np.pi / (2 * n)))


def verify_subsolution(p: ModelParams, sigma: float, alpha_coef: float = 1.0,
                       n_check: int = 1000) -> tuple[bool, float]:
    """Check that ``S(phi) = alpha_coef * phi * (1 - phi)`` is a strict subsolution.

    Returns ``(holds, worst_margin)`` where the margin is
    ``rhs(S) - S'`` minimised over ``n_check`` Chebyshev points in (0, 1).
    A strict subsolution certifies that fronts exist at speed ``sigma``.
    """
    if p.lam != 0:
        raise ValueError("subsolution check is for the local model (lambda=0)")
    if n_check < 100:
        raise ValueError("n_check must be >= 100")
    phi = chebyshev_points(n_check)
    z = phi * (1 - phi)
    s = alpha_coef * z
    ds = alpha_coef * (1 - 2 * phi)
    rhs = (sigma * s - p.a * s * s - z) / (s * (1 + p.b * s * s))
    margin = rhs - ds
    worst = float(margin.min())
    return bool(worst > 0), worst
