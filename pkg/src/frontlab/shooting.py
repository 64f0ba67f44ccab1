"""Phase-plane shooting for the local model (lambda = 0).

The front equation ``(1 + b phi'^2) phi'' + sigma phi' + a phi'^2 + phi(1-phi) = 0``
is integrated as a first-order system in ``(phi, psi = phi')`` starting on the
unstable manifold of the saddle ``(1, 0)``. A run is admissible when the
trajectory lands in the origin without crossing ``phi = 0``; the critical speed
is the smallest admissible ``sigma``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .bounds import sigma_bounds, sigma_upper
from .core import (FrontlabError, Grid1D, ModelParams, PhaseState, SigmaBounds,
                   WaveProfile, validate_params)


class StepSizeUnderflow(FrontlabError):
    pass


class BracketFailure(FrontlabError):
    pass


class InconclusiveRegion(FrontlabError):
    pass


class NotAdmissible(FrontlabError):
    pass


class Outcome(enum.Enum):
    CONVERGED = "Converged"
    OVERSHOOT = "Overshoot"
    TURNBACK = "Turnback"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class ShootOptions:
    rtol: float = 1e-10
    atol: float = 1e-14
    eps_origin: float = 1e-6
    eps_turn: float = 1e-9
    t_max: float = 1e4
    delta: float = 1e-6
    psi_steep: float = 1e3
    method: str = "DOP853"


@dataclass(frozen=True)
class ShootOutcome:
    kind: Outcome
    t_event: float
    state_event: PhaseState
    # True when the verdict came from the linearisation at the origin rather
    # than from an observed crossing
    predicted: bool = False

    @property
    def converged(self) -> bool:
        return self.kind is Outcome.CONVERGED


@dataclass(frozen=True)
class SigmaStarResult:
    sigma_star: float
    bracket: tuple[float, float]
    evaluations: int
    bounds: SigmaBounds
    bounds_ok: bool
    tol: float


def rhs_phase(p: ModelParams, s, sigma: float):
    """Vector field ``(dphi, dpsi)`` of the reduced system at state ``s``."""
    phi, psi = (s.phi, s.psi) if isinstance(s, PhaseState) else s
    dpsi = (-sigma * psi - p.a * psi * psi - phi * (1 - phi)) / (1 + p.b * psi * psi)
    return psi, dpsi


def unstable_rate(sigma: float) -> float:
    """Positive root of ``l^2 + sigma l - 1 = 0`` (saddle at ``(1, 0)``)."""
    return (-sigma + math.sqrt(sigma * sigma + 4)) / 2


def saddle_departure(sigma: float, delta: float = 1e-6) -> PhaseState:
    lam = unstable_rate(sigma)
    return PhaseState(1.0 - delta, -delta * lam)


def _origin_verdict(sigma: float, phi: float, psi: float):
    """Fate of a state near the origin under the linearised flow.

    The quadratic advection terms do not enter the linearisation, so the
    origin is a focus for ``sigma < 2`` (the trajectory must spiral through
    ``phi = 0``) and a node otherwise. For a node the sign of the slow-mode
    coefficient decides which side the trajectory finally settles on.

    Returns ``(converged, t_cross)`` with ``t_cross`` the predicted time to the
    first ``phi = 0`` crossing (``None`` if none).
    """
    if sigma < 2:
        om = math.sqrt(1 - sigma * sigma / 4)
        # phi(t) = e^{-sigma t/2} (phi cos(om t) + ((psi + sigma phi/2)/om) sin(om t))
        c = phi
        s = (psi + 0.5 * sigma * phi) / om
        # first t > 0 with c cos + s sin = 0
        t = math.atan2(-c, s) / om
        if t <= 0:
            t += math.pi / om
        return False, t
    disc = math.sqrt(max(sigma * sigma - 4, 0.0))
    if disc == 0.0:
        # phi = (c1 + c2 t) e^{-t}
        c1, c2 = phi, psi + phi
        if c2 == 0:
            return c1 >= 0, None
        t = -c1 / c2
        return c2 > 0, (t if t > 0 else None)
    m_slow = (-sigma + disc) / 2
    m_fast = (-sigma - disc) / 2
    c_slow = (psi - m_fast * phi) / (m_slow - m_fast)
    c_fast = phi - c_slow
    if c_slow == 0:
        return c_fast >= 0, None
    ratio = -c_fast / c_slow
    t = math.log(ratio) / (m_slow - m_fast) if ratio > 0 else None
    if t is not None and t <= 0:
        t = None
    return c_slow > 0, t


def _linear_state(sigma: float, phi: float, psi: float, t: float) -> PhaseState:
    from scipy.linalg import expm

    m = np.array([[0.0, 1.0], [-1.0, -sigma]])
    x = expm(m * t) @ np.array([phi, psi])
    return PhaseState(float(x[0]), float(x[1]))


def classify(p: ModelParams, sigma: float, opts: ShootOptions = ShootOptions()) -> ShootOutcome:
    """Integrate from the saddle and decide whether the trajectory is a front."""
    if p.lam != 0:
        raise ValueError("shooting applies to the local model (lambda=0)")
    s0 = saddle_departure(sigma, opts.delta)

    def f(t, y):
        return rhs_phase(p, y, sigma)

    def ev_origin(t, y):
        return math.hypot(y[0], y[1]) - opts.eps_origin
    ev_origin.terminal = True
    ev_origin.direction = -1

    def ev_overshoot(t, y):
        return y[0]
    ev_overshoot.terminal = True
    ev_overshoot.direction = -1

    def ev_turn(t, y):
        return y[1] - opts.eps_turn
    ev_turn.terminal = True
    ev_turn.direction = 1

    # beyond this slope a*psi^2 dominates sigma*|psi| and psi can only
    # decrease further, so the run is finished in the phi variable
    psi_steep = max(opts.psi_steep, 10.0 * sigma / p.a) if p.a > 0 else math.inf

    def ev_steep(t, y):
        return y[1] + psi_steep
    ev_steep.terminal = True
    ev_steep.direction = -1

    sol = solve_ivp(f, (0.0, opts.t_max), s0.as_array(), method=opts.method,
                    rtol=opts.rtol, atol=opts.atol,
                    events=(ev_origin, ev_overshoot, ev_turn, ev_steep))
    if sol.status == -1:
        raise StepSizeUnderflow(sol.message)

    hits = [(te[0], k, ye[0]) for k, (te, ye) in enumerate(zip(sol.t_events, sol.y_events))
            if te.size]
    if not hits:
        y = sol.y[:, -1]
        return ShootOutcome(Outcome.INCONCLUSIVE, float(sol.t[-1]), PhaseState(*map(float, y)))
    t_ev, k, y = min(hits)
    state = PhaseState(float(y[0]), float(y[1]))
    if k == 1:
        # the root finder lands on phi ~ +-1e-17; report a state just past the crossing
        dt = 1e-12 + 2 * abs(state.phi) / max(-state.psi, 1e-300)
        dphi, dpsi = rhs_phase(p, state, sigma)
        past = PhaseState(state.phi + dphi * dt, state.psi + dpsi * dt)
        return ShootOutcome(Outcome.OVERSHOOT, float(t_ev + dt), past)
    if k == 2:
        return ShootOutcome(Outcome.TURNBACK, float(t_ev), state)
    if k == 3:
        return _finish_steep(p, sigma, float(t_ev), state, opts)

    ok, t_cross = _origin_verdict(sigma, state.phi, state.psi)
    if ok and state.phi >= 0:
        return ShootOutcome(Outcome.CONVERGED, float(t_ev), state)
    if t_cross is None:
        # settles on the wrong side without a finite crossing time (degenerate)
        return ShootOutcome(Outcome.OVERSHOOT, float(t_ev), state, predicted=True)
    # report the linear prediction just past the crossing
    t_after = t_cross * (1 + 1e-6) + 1e-9
    after = _linear_state(sigma, state.phi, state.psi, t_after)
    return ShootOutcome(Outcome.OVERSHOOT, float(t_ev + t_after), after, predicted=True)


def _finish_steep(p, sigma, t0, state, opts) -> ShootOutcome:
    """Continue a steep run with ``phi`` as independent variable until ``phi < 0``."""

    def g(phi, y):
        psi = y[1]
        dpsi = (-sigma * psi - p.a * psi * psi - phi * (1 - phi)) / (1 + p.b * psi * psi)
        return [1.0 / psi, dpsi / psi]

    phi_end = -1e-3 * max(state.phi, 1e-12)
    sol = solve_ivp(g, (state.phi, phi_end), [t0, state.psi], method=opts.method,
                    rtol=opts.rtol, atol=opts.atol)
    if sol.status != 0:
        raise StepSizeUnderflow(sol.message)
    t_end, psi_end = sol.y[:, -1]
    return ShootOutcome(Outcome.OVERSHOOT, float(t_end), PhaseState(float(phi_end), float(psi_end)))


def sigma_star(p: ModelParams, tol: float = 1e-4,
               opts: ShootOptions = ShootOptions()) -> SigmaStarResult:
    """Critical speed by bisection on the admissibility predicate."""
    validate_params(p, "local")
    bounds = sigma_bounds(p)
    evals = 0

    def admissible(s: float) -> bool:
        nonlocal evals
        evals += 1
        out = classify(p, s, opts)
        if out.kind is Outcome.INCONCLUSIVE:
            raise InconclusiveRegion(f"sigma={s!r}: integration inconclusive at t={out.t_event:g}")
        return out.converged

    def finish(s, lo, hi):
        ok = bounds.contains(s, tol)
        return SigmaStarResult(s, (lo, hi), evals, bounds, ok, tol)

    if admissible(2.0):
        return finish(2.0, 2.0 - tol, 2.0)

    lo = 2.0
    hi = sigma_upper(p)[0] + 1.0
    width = hi - lo
    for _ in range(4):
        if admissible(hi):
            break
        lo = hi
        width *= 2
        hi = lo + width
    else:
        raise BracketFailure(f"no admissible speed found up to sigma={hi:g}")

    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if admissible(mid):
            hi = mid
        else:
            lo = mid
    return finish(0.5 * (lo + hi), lo, hi)


def profile_from_shot(p: ModelParams, sigma: float, grid: Grid1D,
                      opts: ShootOptions = ShootOptions()) -> WaveProfile:
    """Front profile ``phi(xi)`` at speed ``sigma``, normalised to ``phi(0) = 1/2``.

    The trajectory is sampled through the integrator's dense output, which is
    far more accurate at the grid nodes than interpolating between adaptive
    steps. The part of the grid left of the departure point uses the linear
    unstable-manifold solution.
    """
    verdict = classify(p, sigma, opts)
    if not verdict.converged:
        raise NotAdmissible(f"sigma={sigma!r} is not admissible ({verdict.kind.value})")

    lam = unstable_rate(sigma)
    s0 = saddle_departure(sigma, opts.delta)

    def f(t, y):
        return rhs_phase(p, y, sigma)

    def ev_half(t, y):
        return y[0] - 0.5
    ev_half.terminal = True

    first = solve_ivp(f, (0.0, opts.t_max), s0.as_array(), method=opts.method,
                      rtol=opts.rtol, atol=opts.atol, events=ev_half)
    t_half = float(first.t_events[0][0])
    t_end = t_half + grid.alpha + 1.0
    sol = solve_ivp(f, (0.0, t_end), s0.as_array(), method=opts.method,
                    rtol=opts.rtol, atol=opts.atol, dense_output=True)
    if sol.status != 0:
        raise StepSizeUnderflow(sol.message)

    t = grid.xi + t_half
    phi = np.empty_like(t)
    before = t < 0
    phi[before] = 1.0 - opts.delta * np.exp(lam * t[before])
    phi[~before] = sol.sol(t[~before])[0]
    return WaveProfile(grid=grid, phi=phi, sigma=float(sigma))


def profile_residual(p: ModelParams, prof: WaveProfile) -> np.ndarray:
    """Second-order finite-difference residual of the local front equation at interior nodes."""
    h = prof.grid.h
    phi = prof.phi
    d1 = (phi[2:] - phi[:-2]) / (2 * h)
    d2 = (phi[2:] - 2 * phi[1:-1] + phi[:-2]) / (h * h)
    c = phi[1:-1]
    return (1 + p.b * d1 * d1) * d2 + prof.sigma * d1 + p.a * d1 * d1 + c * (1 - c)
