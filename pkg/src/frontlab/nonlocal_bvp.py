"""Nonlocal fronts (lambda > 0) through a truncated, pinned boundary-value problem.

On ``[-alpha, alpha]`` we solve

    phi'' + sigma phi' + g(phi) u' phi' + g(phi) phi (1 - phi) = 0,
    phi(-alpha) = 1,  phi(alpha) = 0,  phi(0) = theta,

with ``u = Gamma * (a phi + (b/2) phi'^2)`` and ``g`` a C^1 cutoff that
vanishes below ``theta``. The pinning condition makes ``sigma`` an unknown.
The front on the whole line is recovered by letting ``theta -> 0`` and
``alpha -> infinity``.

Numerics: second-order central differences; for a frozen potential ``u`` the
pair ``(phi, sigma)`` is found by Newton's method on the bordered system
(residual rows plus the pinning row); the potential is updated by damped
Picard iteration around it. :func:`newton_phi` solves at fixed ``sigma`` and
drives the alternative secant route.

Cutoff fronts approach their limit logarithmically slowly in ``theta``
(roughly ``sigma(theta) ~ sigma_inf - C / log(theta)^2`` for pulled fronts), so
:func:`continue_theta_alpha` reports an extrapolated speed alongside the
table of truncated speeds.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
import scipy.sparse as sp
from scipy.integrate import trapezoid
from scipy.interpolate import PchipInterpolator
from scipy.linalg import solve_banded
from scipy.optimize import least_squares
from scipy.sparse.linalg import splu
from scipy.special import expit

from .bounds import theorem3_speed_cap
from .core import (FrontlabError, Grid1D, ModelParams, ValidationError, WaveProfile,
                   grid_for_spacing, validate_params)
from .helmholtz import PotentialField, central_gradient, potential_from_profile, velocity


class NewtonDiverged(FrontlabError):
    pass


class SecantStalled(FrontlabError):
    pass


class PicardNotContracting(FrontlabError):
    pass


class ContinuationBroken(FrontlabError):
    pass


class NonmonotoneSigma(UserWarning):
    pass


SHALLOW_THETAS = (0.2, 0.1, 0.05, 0.02, 0.01)
DEEP_THETAS = (0.2, 0.1, 0.05, 0.02, 0.01, 1e-3, 1e-4, 1e-6, 1e-10, 1e-15, 1e-20, 1e-30)


def alpha_for_theta(theta: float, lam: float = 0.0, margin: float = 40.0) -> float:
    """Half-width that leaves room for the leading edge (about ``|log theta|``
    long) plus ``margin`` units for the relaxation to ``phi = 1``."""
    return max(margin + 1.3 * math.log(1.0 / theta), 3 * lam, 20.0)


# ---------------------------------------------------------------------------
# truncation function and configuration
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TruncationG:
    """C^1 cutoff: 0 below ``theta``, cubic smoothstep up to ``theta + width``, then 1.

    ``width=None`` spreads the ramp over the whole range ``[theta, 1]``.
    """

    theta: float
    width: float | None = None

    @property
    def ramp(self) -> float:
        return 1.0 - self.theta if self.width is None else self.width

    def __call__(self, phi):
        t = np.clip((np.asarray(phi, dtype=float) - self.theta) / self.ramp, 0.0, 1.0)
        return t * t * (3.0 - 2.0 * t)

    def deriv(self, phi):
        t = (np.asarray(phi, dtype=float) - self.theta) / self.ramp
        inside = (t > 0) & (t < 1)
        return np.where(inside, 6.0 * t * (1.0 - t) / self.ramp, 0.0)


def g_eval(g: TruncationG, phi: float) -> float:
    return float(g(phi))


@dataclass(frozen=True)
class TruncationConfig:
    """Truncation level ``theta``, domain half-width ``alpha`` and cutoff ramp width.

    ``g_smoothing=None`` uses a ramp of width ``theta`` (capped so that it ends
    at 1), i.e. ``g = 1`` for ``phi >= 2 theta``; this is what makes ``g -> 1``
    as ``theta -> 0``.
    """

    theta: float
    alpha: float
    g_smoothing: float | None = None

    def __post_init__(self):
        if not 0.0 < self.theta < 1.0 / 3.0:
            raise ValidationError(f"theta={self.theta!r} must lie in (0, 1/3)")
        if not self.alpha > 0:
            raise ValidationError("alpha must be positive")

    @property
    def g(self) -> TruncationG:
        w = self.g_smoothing
        if w is None:
            w = min(self.theta, 1.0 - self.theta)
        return TruncationG(self.theta, w)

    def alpha_min(self, lam: float) -> float:
        return max(-math.log(self.theta), 0.5 * lam * math.log(3.0))

    def check(self, lam: float) -> None:
        if not self.alpha > self.alpha_min(lam):
            raise ValidationError(
                f"alpha={self.alpha:g} must exceed max(-log theta, (lambda/2) log 3)"
                f" = {self.alpha_min(lam):g}"
            )


# ---------------------------------------------------------------------------
# discrete operator
# ---------------------------------------------------------------------------

def _weights(phi: np.ndarray, theta: float) -> np.ndarray:
    # residual scale: O(1) in the bulk, O(phi) in the leading edge and tail
    return 1.0 / np.maximum(np.abs(phi), theta)


def residual(p: ModelParams, cfg: TruncationConfig, grid: Grid1D, phi: np.ndarray,
             u: PotentialField, sigma: float) -> np.ndarray:
    """Discrete residual; rows 0 and n hold the Dirichlet defects ``phi_0 - 1`` and ``phi_n``."""
    h = grid.h
    g = cfg.g(phi[1:-1])
    c = phi[1:-1]
    d1 = (phi[2:] - phi[:-2]) / (2 * h)
    d2 = (phi[2:] - 2 * c + phi[:-2]) / (h * h)
    r = np.empty_like(phi)
    r[1:-1] = d2 + (sigma + g * u.du[1:-1]) * d1 + g * c * (1 - c)
    r[0] = phi[0] - 1.0
    r[-1] = phi[-1]
    return r


def _jacobian_bands(cfg, grid, phi, du, sigma):
    """Tridiagonal Jacobian of :func:`residual` w.r.t. ``phi`` (``u`` frozen)
    as (sub, diag, super) plus the column ``d residual / d sigma``."""
    h = grid.h
    m = len(phi)
    c = phi[1:-1]
    gfun = cfg.g
    g = gfun(c)
    dg = gfun.deriv(c)
    d1 = (phi[2:] - phi[:-2]) / (2 * h)
    coef = sigma + g * du[1:-1]

    lower = np.zeros(m)   # entry (i, i-1)
    diag = np.ones(m)
    upper = np.zeros(m)   # entry (i, i+1)
    lower[1:-1] = 1 / (h * h) - coef / (2 * h)
    upper[1:-1] = 1 / (h * h) + coef / (2 * h)
    diag[1:-1] = -2 / (h * h) + dg * du[1:-1] * d1 + dg * c * (1 - c) + g * (1 - 2 * c)
    dsig = np.zeros(m)
    dsig[1:-1] = d1
    return lower, diag, upper, dsig


def newton_phi(p: ModelParams, cfg: TruncationConfig, grid: Grid1D, u: PotentialField,
               sigma: float, phi0: np.ndarray, tol: float = 1e-10,
               max_iter: int = 50) -> np.ndarray:
    """Damped Newton for ``phi`` at fixed ``sigma`` and frozen ``u``.

    Boundary values are imposed; the pinning condition is *not*. Convergence
    is judged on the residual scaled by ``1/max(phi, theta)``, so the leading
    edge counts as much as the bulk.
    """
    return _newton_phi(p, cfg, grid, u, sigma, phi0, tol, max_iter)[0]


def _newton_phi(p, cfg, grid, u, sigma, phi0, tol=1e-10, max_iter=50):
    phi = np.array(phi0, dtype=float)
    phi[0], phi[-1] = 1.0, 0.0
    w = _weights(phi, cfg.theta)
    r = residual(p, cfg, grid, phi, u, sigma)
    norm = np.max(np.abs(r) * w)
    for it in range(max_iter):
        if norm < tol:
            return phi, it
        lower, diag, upper, _ = _jacobian_bands(cfg, grid, phi, u.du, sigma)
        ab = np.zeros((3, len(phi)))
        ab[0, 1:] = upper[:-1]
        ab[1] = diag
        ab[2, :-1] = lower[1:]
        step = solve_banded((1, 1), ab, -r)
        t = 1.0
        for _ in range(30):
            trial = phi + t * step
            trial[0], trial[-1] = 1.0, 0.0
            rt = residual(p, cfg, grid, trial, u, sigma)
            nt = np.max(np.abs(rt) * _weights(trial, cfg.theta))
            if nt < norm or nt < tol:
                break
            t *= 0.5
        else:
            raise NewtonDiverged(f"line search failed at iteration {it}, residual {norm:.3e}")
        phi, r, norm = trial, rt, nt
    if norm < tol:
        return phi, max_iter
    raise NewtonDiverged(f"no convergence in {max_iter} iterations (residual {norm:.3e})")


def _pinned_newton(p, cfg, grid, u, sigma, phi0, tol=1e-10, max_iter=50):
    """Newton on ``(phi, sigma)`` with the pinning row ``(phi_mid - theta)/theta = 0``."""
    theta = cfg.theta
    mid = grid.mid
    m = len(phi0)
    phi = np.array(phi0, dtype=float)
    phi[0], phi[-1] = 1.0, 0.0

    def full_norm(ph, s):
        r = residual(p, cfg, grid, ph, u, s)
        pin = (ph[mid] - theta) / theta
        return r, pin, max(np.max(np.abs(r) * _weights(ph, theta)), abs(pin))

    r, pin, norm = full_norm(phi, sigma)
    rows_i = np.arange(1, m - 1)
    for it in range(max_iter):
        if norm < tol:
            return phi, sigma, it
        lower, diag, upper, dsig = _jacobian_bands(cfg, grid, phi, u.du, sigma)
        rows = np.concatenate([np.arange(m), rows_i, rows_i, rows_i, [m]])
        cols = np.concatenate([np.arange(m), rows_i - 1, rows_i + 1,
                               np.full(m - 2, m), [mid]])
        vals = np.concatenate([diag, lower[1:-1], upper[1:-1], dsig[1:-1], [1.0 / theta]])
        jac = sp.csc_matrix((vals, (rows, cols)), shape=(m + 1, m + 1))
        try:
            step = splu(jac).solve(-np.append(r, pin))
        except RuntimeError as exc:  # exactly singular factor
            raise NewtonDiverged(f"singular bordered Jacobian: {exc}") from exc
        t = 1.0
        for _ in range(30):
            trial = phi + t * step[:m]
            trial[0], trial[-1] = 1.0, 0.0
            s_trial = sigma + t * step[m]
            rt, pt, nt = full_norm(trial, s_trial)
            if nt < norm or nt < tol:
                break
            t *= 0.5
        else:
            raise NewtonDiverged(f"line search failed at iteration {it}, residual {norm:.3e}")
        phi, sigma, r, pin, norm = trial, s_trial, rt, pt, nt
    if norm < tol:
        return phi, sigma, max_iter
    raise NewtonDiverged(f"pinned Newton: no convergence (residual {norm:.3e})")


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Diagnostic:
    name: str
    value: float
    bound: float
    ok: bool

    def __post_init__(self):
        object.__setattr__(self, "value", float(self.value))
        object.__setattr__(self, "bound", float(self.bound))
        object.__setattr__(self, "ok", bool(self.ok))

    @property
    def margin(self) -> float:
        return self.bound - self.value


@dataclass(frozen=True, eq=False)
class NonlocalSolveReport:
    params: ModelParams
    config: TruncationConfig
    profile: WaveProfile
    sigma: float
    iterations: dict
    energy_lhs: float
    energy_rhs: float
    diagnostics: tuple
    method: str = "bordered"

    @property
    def ok(self) -> bool:
        return all(d.ok for d in self.diagnostics)

    def diagnostic(self, name: str) -> Diagnostic:
        for d in self.diagnostics:
            if d.name == name:
                return d
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "a": self.params.a, "b": self.params.b, "lambda": self.params.lam,
            "theta": self.config.theta, "alpha": self.config.alpha,
            "h": self.profile.grid.h, "n": self.profile.grid.n,
            "sigma": self.sigma, "method": self.method,
            "iterations": dict(self.iterations),
            "energy_lhs": self.energy_lhs, "energy_rhs": self.energy_rhs,
            "energy_margin": self.energy_rhs - self.energy_lhs,
            "diagnostics": [
                {"name": d.name, "value": d.value, "bound": d.bound,
                 "margin": d.margin, "ok": d.ok}
                for d in self.diagnostics
            ],
        }


def linear_tail(theta: float, sigma: float, alpha: float, xi) -> np.ndarray:
    """Solution of ``phi'' + sigma phi' = 0`` with ``phi(0) = theta``, ``phi(alpha) = 0``."""
    xi = np.asarray(xi, dtype=float)
    if abs(sigma) * alpha < 1e-12:
        return theta * (1 - xi / alpha)
    return theta * (np.exp(-sigma * xi) - np.exp(-sigma * alpha)) / (-np.expm1(-sigma * alpha))


def _diagnostics(p, cfg, grid, phi, field, sigma, tol):
    h = grid.h
    lam, a, b = p.lam, p.a, p.b
    theta, alpha = cfg.theta, cfg.alpha
    dphi = central_gradient(phi, h)
    g = cfg.g(phi)
    energy_lhs = (1 - b / (2 * lam ** 2)) * trapezoid(dphi ** 2, dx=h) + trapezoid(
        g * phi * (1 - phi) ** 2, dx=h)
    energy_rhs = 2 + a / lam + theta / alpha
    du_inf = float(np.abs(field.du).max())
    cap = theorem3_speed_cap(p)
    dphi_bound = 1.5 * (abs(sigma) + du_inf) + 0.75 * lam + 1.5 / lam
    xi = grid.xi
    right = xi >= 0
    tail_err = float(np.abs(phi[right] - linear_tail(theta, sigma, alpha, xi[right])).max())
    diags = [
        Diagnostic("energy", energy_lhs, energy_rhs + 10 * h * h,
                   energy_lhs <= energy_rhs + 10 * h * h),
        Diagnostic("speed_cap", sigma, cap + tol, sigma <= cap + tol),
        Diagnostic("speed_floor", -sigma, 1.2 * theta / alpha + tol,
                   sigma >= -1.2 * theta / alpha - tol),
        Diagnostic("speed_vs_du", sigma, 2 + du_inf + tol, sigma < 2 + du_inf + tol),
        Diagnostic("dphi_bound", float(np.abs(dphi).max()), dphi_bound + tol,
                   float(np.abs(dphi).max()) <= dphi_bound + tol),
        Diagnostic("linear_tail", tail_err, theta * max(sigma * sigma, 1.0) * h * h,
                   tail_err <= theta * max(sigma * sigma, 1.0) * h * h),
    ]
    for name, value, bound, _ in field.diagnostics:
        diags.append(Diagnostic(name, value, bound + tol, value <= bound + tol))
    prof = WaveProfile(grid, phi, sigma, theta)
    bad = prof.invariant_violations()
    diags.append(Diagnostic("profile_invariants", float(len(bad)), 0.0, not bad))
    return energy_lhs, energy_rhs, tuple(diags)


# ---------------------------------------------------------------------------
# solvers
# ---------------------------------------------------------------------------

def initial_guess(grid: Grid1D, theta: float) -> np.ndarray:
    """Logistic ramp through ``(0, theta)`` with the Dirichlet values imposed."""
    shift = math.log((1 - theta) / theta)
    phi = expit(-(grid.xi + shift))
    phi[0], phi[-1] = 1.0, 0.0
    return phi


def _picard(p, cfg, grid, phi, solve_inner, omega, tol, max_picard):
    """Damped fixed-point iteration on the potential around ``solve_inner``."""
    field = potential_from_profile(p, phi, grid, check=False)
    history = []
    for k in range(1, max_picard + 1):
        phi, extra = solve_inner(field, phi)
        new = potential_from_profile(p, phi, grid, check=False)
        change = float(np.abs(new.u - field.u).max())
        history.append(change)
        if change < tol:
            return phi, extra, new, k
        if k >= 8 and change > 0.9 * history[-8]:
            raise PicardNotContracting(
                f"potential update stalled at {change:.3e} after {k} iterations"
                f" (b/(2 lambda^2) = {p.coupling_ratio:.3g})"
            )
        field = PotentialField(grid, (1 - omega) * field.u + omega * new.u,
                               (1 - omega) * field.du + omega * new.du)
    raise PicardNotContracting(f"no convergence in {max_picard} Picard iterations")


def _local_speed(p: ModelParams) -> float:
    """Local critical speed as a starting value for ``sigma``; 2 if shooting fails."""
    from .shooting import sigma_star

    try:
        return sigma_star(ModelParams(p.a, p.b, 0.0), tol=1e-3).sigma_star
    except FrontlabError:
        return 2.0


def solve_truncated(p: ModelParams, cfg: TruncationConfig, grid: Grid1D | None = None,
                    phi0: np.ndarray | None = None, sigma0: float | None = None, *,
                    method: str = "bordered", omega: float = 0.5,
                    picard_tol: float = 1e-9, newton_tol: float = 1e-10,
                    pin_tol: float = 1e-8, max_picard: int = 200,
                    diag_tol: float = 1e-6) -> NonlocalSolveReport:
    """Solve the pinned truncated problem for ``(phi, u, sigma)``.

    ``method="bordered"`` (default) runs Picard on ``u`` with a Newton solve
    for ``(phi, sigma)`` inside. ``method="secant"`` replaces the inner solve: a
    secant iteration on ``sigma`` drives ``phi(0) - theta`` to zero, each
    evaluation a :func:`newton_phi` solve at fixed ``sigma`` and frozen ``u``. The
    secant route is only practical for moderate ``alpha``: at fixed ``sigma``
    the Newton matrix has a near-translation mode whose conditioning degrades
    like ``exp(c * alpha)``, and a solution with the front inside the domain
    exists only for ``sigma`` very close to the pinned speed. Without
    ``sigma0`` it is therefore seeded from a bordered solve on a coarser grid.
    """
    validate_params(p, "nonlocal")
    cfg.check(p.lam)
    if grid is None:
        grid = grid_for_spacing(cfg.alpha, 0.01)
    if abs(grid.alpha - cfg.alpha) > 1e-12 * cfg.alpha:
        raise ValidationError("grid and configuration disagree on alpha")
    phi = initial_guess(grid, cfg.theta) if phi0 is None else np.array(phi0, dtype=float)
    sigma = _local_speed(p) if sigma0 is None else float(sigma0)
    counts = {"newton": 0, "picard": 0, "secant": 0}

    if method == "bordered":
        state = {"sigma": sigma}

        def inner(field, ph):
            ph, s, its = _pinned_newton(p, cfg, grid, field, state["sigma"], ph, tol=newton_tol)
            counts["newton"] += its
            state["sigma"] = s
            return ph, s

        phi, sigma, field, k = _picard(p, cfg, grid, phi, inner, omega, picard_tol, max_picard)
        counts["picard"] = k
    elif method == "secant":
        theta, mid = cfg.theta, grid.mid
        if sigma0 is None:
            # fixed-speed solutions only exist in a thin band around the
            # pinned speed, so seed from a cheap bordered solve on a coarse grid
            coarse = grid_for_spacing(cfg.alpha, 4 * grid.h)
            if coarse.n < grid.n:
                seed = solve_truncated(p, cfg, coarse, omega=omega)
                sigma = seed.sigma
                if phi0 is None:
                    phi = regrid_profile(seed.profile, grid)
        state = {"sigma": sigma}

        def inner(field, ph):
            cache = {"phi": ph}

            def pin(s):
                for _ in range(12):
                    try:
                        out, its = _newton_phi(p, cfg, grid, field, s, cache["phi"],
                                               tol=newton_tol)
                        break
                    except NewtonDiverged:
                        # no interior front at this speed; step back toward the last good one
                        s = 0.5 * (s + state["sigma"])
                else:
                    raise SecantStalled(f"no fixed-speed solution near sigma={s!r}")
                counts["newton"] += its
                counts["secant"] += 1
                cache["phi"] = out
                return s, (out[mid] - theta) / theta

            s0, f0 = pin(state["sigma"])
            if abs(f0) < pin_tol:
                return cache["phi"], s0
            s1, f1 = pin(s0 - 1e-4 * math.copysign(1.0, f0))
            for _ in range(60):
                if abs(f1) < pin_tol:
                    state["sigma"] = s1
                    return cache["phi"], s1
                if f1 == f0:
                    raise SecantStalled(f"flat secant at sigma={s1!r}")
                s2 = s1 - f1 * (s1 - s0) / (f1 - f0)
                s0, f0 = s1, f1
                state["sigma"] = s1
                s1, f1 = pin(s2)
            raise SecantStalled(f"pinning defect {f1 * theta:.3e} after 60 secant steps")

        phi, sigma, field, k = _picard(p, cfg, grid, phi, inner, omega, picard_tol, max_picard)
        counts["picard"] = k
    else:
        raise ValueError(f"unknown method {method!r}")

    field = potential_from_profile(p, phi, grid, check=True)
    e_lhs, e_rhs, diags = _diagnostics(p, cfg, grid, phi, field, sigma, diag_tol)
    prof = WaveProfile(grid, phi, float(sigma), cfg.theta, u=field.u, v=velocity(field))
    return NonlocalSolveReport(p, cfg, prof, float(sigma), counts, float(e_lhs),
                               float(e_rhs), diags, method)


# ---------------------------------------------------------------------------
# continuation
# ---------------------------------------------------------------------------

def regrid_profile(prof: WaveProfile, grid: Grid1D, shift: float = 0.0) -> np.ndarray:
    """Sample ``phi(xi + shift)`` on ``grid`` by monotone cubic interpolation.

    Points left of the old domain get 1, points right of it get 0.
    """
    f = PchipInterpolator(prof.xi, prof.phi, extrapolate=False)
    x = grid.xi + shift
    out = f(x)
    out[x < prof.xi[0]] = 1.0
    out[x > prof.xi[-1]] = 0.0
    out[0], out[-1] = 1.0, 0.0
    return out


def _crossing(prof: WaveProfile, level: float) -> float:
    """Position where a decreasing profile crosses ``level`` (log-linear between nodes)."""
    phi, xi = prof.phi, prof.xi
    k = int(np.searchsorted(-phi, -level))
    k = min(max(k, 1), len(phi) - 1)
    p0, p1 = phi[k - 1], phi[k]
    if p0 > 0 and p1 > 0 and level > 0:
        t = math.log(p0 / level) / math.log(p0 / p1)
    else:
        t = (p0 - level) / (p0 - p1)
    return float(xi[k - 1] + t * (xi[k] - xi[k - 1]))


def centered_profile(prof: WaveProfile, level: float = 0.5) -> WaveProfile:
    """Translate so that ``phi(0) = level``; ``u`` and ``v`` are shifted alongside."""
    shift = _crossing(prof, level)
    grid = prof.grid

    def move(y, left, right):
        if y is None:
            return None
        f = PchipInterpolator(prof.xi, y, extrapolate=False)
        x = grid.xi + shift
        out = f(x)
        out[x < prof.xi[0]] = left
        out[x > prof.xi[-1]] = right
        return out

    phi = move(prof.phi, 1.0, 0.0)
    u = move(prof.u, prof.u[0] if prof.u is not None else 0.0, 0.0)
    v = move(prof.v, 0.0, 0.0)
    return WaveProfile(grid, phi, prof.sigma, prof.theta, u=u, v=v)


@dataclass(frozen=True)
class ExtrapolatedSpeed:
    sigma: float
    model: str
    coefficients: tuple
    points_used: int


def extrapolate_theta(thetas: Sequence[float], sigmas: Sequence[float],
                      max_points: int = 4) -> ExtrapolatedSpeed:
    """Limit ``theta -> 0`` of truncated speeds.

    Fits ``sigma_inf - C / (L + d)^2`` with ``L = -log(theta)`` to the
    ``max_points`` smallest thetas (the leading cutoff correction of a pulled
    front). With two points ``C`` is fixed to ``pi^2``; with one point the
    value itself is returned.
    """
    th = np.asarray(thetas, dtype=float)
    sg = np.asarray(sigmas, dtype=float)
    order = np.argsort(th)[:max_points]
    th, sg = th[order], sg[order]
    L = -np.log(th)
    if len(th) == 1:
        return ExtrapolatedSpeed(float(sg[0]), "none", (), 1)
    if len(th) == 2:
        fun = lambda q: q[0] - math.pi ** 2 / (L + q[1]) ** 2 - sg
        res = least_squares(fun, [sg[0], 0.0], bounds=([-np.inf, -L.min() + 0.5], np.inf),
                            ftol=1e-15, xtol=1e-15, gtol=1e-15)
        return ExtrapolatedSpeed(float(res.x[0]), "pi2/(L+d)^2", tuple(map(float, res.x)), 2)
    fun = lambda q: q[0] - q[1] / (L + q[2]) ** 2 - sg
    res = least_squares(fun, [sg[0], math.pi ** 2, 0.0],
                        bounds=([-np.inf, -np.inf, -L.min() + 0.5], np.inf),
                        ftol=1e-15, xtol=1e-15, gtol=1e-15)
    return ExtrapolatedSpeed(float(res.x[0]), "C/(L+d)^2", tuple(map(float, res.x)), len(th))


@dataclass(frozen=True, eq=False)
class ContinuationResult:
    params: ModelParams
    table: tuple  # rows (alpha, theta, sigma)
    reports: tuple
    sigma_limit: ExtrapolatedSpeed
    final: NonlocalSolveReport
    profile: WaveProfile  # final profile translated to phi(0) = 1/2
    skipped: tuple = ()
    warnings: tuple = ()

    @property
    def sigma(self) -> float:
        return self.sigma_limit.sigma

    def sigmas_at(self, alpha: float) -> list[tuple[float, float]]:
        return [(th, s) for (al, th, s) in self.table if al == alpha]

    def to_dict(self) -> dict:
        return {
            "a": self.params.a, "b": self.params.b, "lambda": self.params.lam,
            "sigma": self.sigma,
            "sigma_truncated": self.final.sigma,
            "extrapolation": {
                "model": self.sigma_limit.model,
                "coefficients": list(self.sigma_limit.coefficients),
                "points_used": self.sigma_limit.points_used,
            },
            "table": [{"alpha": a, "theta": t, "sigma": s} for a, t, s in self.table],
            "skipped": [{"alpha": a, "theta": t, "reason": r} for a, t, r in self.skipped],
            "warnings": list(self.warnings),
            "final": self.final.to_dict(),
        }


def continue_theta_alpha(p: ModelParams, thetas: Sequence[float] = SHALLOW_THETAS,
                         alphas: Sequence[float] = (20.0, 30.0, 40.0), h: float = 0.01, *,
                         g_smoothing: float | None = None, sigma0: float | None = None,
                         start: WaveProfile | None = None, **solve_kw) -> ContinuationResult:
    """Warm-started sweep of :func:`solve_truncated` over ``theta`` (decreasing)
    and ``alpha`` (increasing) on grids of spacing ``h``.

    Combinations with ``alpha`` below the admissible minimum are skipped and
    listed. The limiting speed is extrapolated from the speeds at the largest
    ``alpha``.
    """
    validate_params(p, "nonlocal")
    thetas = [float(t) for t in thetas]
    alphas = [float(a) for a in alphas]
    if not thetas or not alphas:
        raise ValueError("schedules must be nonempty")
    if any(t1 <= t2 for t1, t2 in zip(thetas, thetas[1:])):
        raise ValueError("theta schedule must be strictly decreasing")
    if any(a1 >= a2 for a1, a2 in zip(alphas, alphas[1:])):
        raise ValueError("alpha schedule must be strictly increasing")

    table, reports, skipped = [], [], []
    by_theta: dict[float, NonlocalSolveReport] = {}
    prev = start
    sigma = sigma0
    for alpha in alphas:
        grid = grid_for_spacing(alpha, h)
        prev_here = None
        for theta in thetas:
            cfg = TruncationConfig(theta, grid.alpha, g_smoothing)
            if not cfg.alpha > cfg.alpha_min(p.lam):
                skipped.append((alpha, theta, "alpha below admissible minimum"))
                continue
            if prev_here is not None:
                src = prev_here.profile
                phi0 = regrid_profile(src, grid, shift=_crossing(src, theta))
                s0 = prev_here.sigma
            elif theta in by_theta:
                src = by_theta[theta].profile
                phi0 = regrid_profile(src, grid)
                s0 = by_theta[theta].sigma
            elif prev is not None:
                phi0 = regrid_profile(prev, grid, shift=_crossing(prev, theta))
                s0 = sigma
            else:
                phi0, s0 = None, sigma
            rep = solve_truncated(p, cfg, grid, phi0, s0, **solve_kw)
            table.append((grid.alpha, theta, rep.sigma))
            reports.append(rep)
            by_theta[theta] = rep
            prev_here = rep
            prev = rep.profile
    if not reports:
        raise ContinuationBroken("no admissible (theta, alpha) combination")

    a_last = max(r.config.alpha for r in reports)
    last = [(r.config.theta, r.sigma) for r in reports if r.config.alpha == a_last]
    notes = []
    sig_seq = [s for _, s in last]
    steps = np.diff(sig_seq)
    if len(steps) > 1 and not (np.all(steps >= 0) or np.all(steps <= 0)):
        msg = f"sigma(theta) not monotone at alpha={a_last:g}: {sig_seq}"
        warnings.warn(msg, NonmonotoneSigma)
        notes.append(msg)
    ext = extrapolate_theta([t for t, _ in last], sig_seq)
    table = [(float(a), float(t), float(s)) for a, t, s in table]
    final = reports[-1]
    return ContinuationResult(p, tuple(table), tuple(reports), ext, final,
                              centered_profile(final.profile), tuple(skipped), tuple(notes))


def deep_schedule(lam: float = 0.0, smallest: float = 1e-30) -> tuple[tuple, tuple]:
    """Theta schedule reaching ``smallest`` and a single matching ``alpha``."""
    thetas = tuple(t for t in DEEP_THETAS if t >= smallest)
    return thetas, (alpha_for_theta(thetas[-1], lam),)


@dataclass(frozen=True)
class LambdaStep:
    lam: float
    sigma: float | None
    result: ContinuationResult | None
    reason: str = ""


@dataclass(frozen=True)
class LambdaContinuation:
    a: float
    b: float
    steps: tuple
    sigma_local: float
    approach_monotone: bool

    def rows(self) -> list[dict]:
        return [
            {"lambda": s.lam, "sigma": s.sigma, "sigma_local": self.sigma_local,
             "gap": None if s.sigma is None else abs(s.sigma - self.sigma_local),
             "note": s.reason}
            for s in self.steps
        ]


def lambda_continuation(a: float, b: float, lambdas: Sequence[float],
                        thetas: Sequence[float] | None = None,
                        alphas: Sequence[float] | None = None, h: float = 0.01,
                        **kw) -> LambdaContinuation:
    """Nonlocal speed along a decreasing list of screening lengths.

    Lambdas violating ``b/(2 lambda^2) < 1`` end the list (with a reason);
    ``approach_monotone`` reports whether ``|sigma(lambda) - sigma*_local|``
    strictly decreases along the computed part.
    """
    from .shooting import sigma_star

    lambdas = [float(l) for l in lambdas]
    if any(l1 <= l2 for l1, l2 in zip(lambdas, lambdas[1:])):
        raise ValueError("lambda list must be strictly decreasing")
    if thetas is None:
        thetas, alphas_default = deep_schedule(max(lambdas))
        alphas = alphas_default if alphas is None else alphas
    elif alphas is None:
        alphas = (40.0,)
    local = sigma_star(ModelParams(a, b, 0.0)).sigma_star

    steps = []
    start = None
    for i, lam in enumerate(lambdas):
        p = ModelParams(a, b, lam)
        if not p.nonlocal_solvable:
            for rest in lambdas[i:]:
                steps.append(LambdaStep(rest, None, None,
                                        f"b/(2 lambda^2) = {b / (2 * rest ** 2):.4g} >= 1"))
            break
        try:
            res = continue_theta_alpha(p, thetas, alphas, h, start=start, **kw)
        except FrontlabError:
            # one retry on a grid twice as fine, from scratch
            try:
                res = continue_theta_alpha(p, thetas, alphas, h / 2, **kw)
            except FrontlabError as exc:
                raise ContinuationBroken(f"lambda={lam:g}: {exc}") from exc
        steps.append(LambdaStep(lam, res.sigma, res))
        start = res.final.profile
    gaps = [abs(s.sigma - local) for s in steps if s.sigma is not None]
    mono = all(g2 < g1 for g1, g2 in zip(gaps, gaps[1:]))
    return LambdaContinuation(a, b, tuple(steps), local, mono)
