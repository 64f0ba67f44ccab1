"""Shared value types, grids, parameter validation and CSV/JSON serialization."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field, fields
from typing import Any, Iterable, Mapping, Sequence

import numpy as np


class FrontlabError(Exception):
    """Base class for all library errors."""


class ValidationError(FrontlabError, ValueError):
    pass


class NegativeParameter(ValidationError):
    pass


class NonlocalConditionViolated(ValidationError):
    pass


class OddN(ValidationError):
    pass


class TooCoarse(ValidationError):
    pass


class NonFiniteValue(ValidationError):
    pass


# ---------------------------------------------------------------------------
# model parameters
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ModelParams:
    """Dimensionless parameters ``(a, b, lambda)`` of the interface model.

    ``a`` and ``b`` are the linear and quadratic advection strengths,
    ``lam`` the screening length of the Helmholtz kernel (0 = local model).
    """

    a: float
    b: float
    lam: float = 0.0

    @property
    def coupling_ratio(self) -> float:
        """``b / (2 lam^2)``; infinite in the local limit with ``b > 0``."""
        if self.lam > 0:
            denom = 2.0 * self.lam ** 2
            if denom == 0.0:  # lam**2 underflows
                return math.inf if self.b > 0 else 0.0
            return self.b / denom
        return math.inf if self.b > 0 else 0.0

    @property
    def nonlocal_solvable(self) -> bool:
        return self.lam > 0 and self.coupling_ratio < 1.0

    @property
    def is_local(self) -> bool:
        return self.lam == 0


def validate_params(p: ModelParams, mode: str = "local") -> ModelParams:
    """Return ``p`` unchanged if it is admissible for ``mode``.

    ``mode="local"`` requires ``lam == 0``; ``mode="nonlocal"`` requires
    ``lam > 0`` and ``b/(2 lam^2) < 1``.
    """
    for name in ("a", "b", "lam"):
        v = getattr(p, name)
        if not math.isfinite(v):
            raise NonFiniteValue(f"{name}={v!r} is not finite")
        if v < 0:
            raise NegativeParameter(f"{name}={v!r} must be >= 0")
    if mode == "local":
        if p.lam != 0:
            raise ValidationError(f"local mode requires lambda=0, got {p.lam!r}")
    elif mode == "nonlocal":
        if p.lam <= 0:
            raise ValidationError("nonlocal mode requires lambda > 0")
        ratio = p.coupling_ratio
        if not ratio < 1.0:
            raise NonlocalConditionViolated(
                f"b/(2*lambda^2) = {ratio:.6g} >= 1 (b={p.b:g}, lambda={p.lam:g})"
            )
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return p


# ---------------------------------------------------------------------------
# grids and phase-plane states
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Grid1D:
    """Uniform grid on ``[-alpha, alpha]`` with ``n`` intervals (``n`` even)."""

    alpha: float
    n: int

    @property
    def h(self) -> float:
        return 2.0 * self.alpha / self.n

    @property
    def mid(self) -> int:
        return self.n // 2

    @property
    def xi(self) -> np.ndarray:
        # built from the integer index so the midpoint is exactly 0
        i = np.arange(self.n + 1) - self.mid
        x = i * self.h
        x[0], x[-1] = -self.alpha, self.alpha
        return x

    def __len__(self) -> int:
        return self.n + 1


def make_grid(alpha: float, n: int) -> Grid1D:
    if not (math.isfinite(alpha) and alpha > 0):
        raise ValidationError(f"alpha must be positive, got {alpha!r}")
    if int(n) != n:
        raise ValidationError(f"n must be an integer, got {n!r}")
    n = int(n)
    if n % 2:
        raise OddN(f"n={n} must be even so that xi=0 is a node")
    if n < 8:
        raise TooCoarse(f"n={n} < 8")
    return Grid1D(float(alpha), n)


def grid_for_spacing(alpha: float, h: float) -> Grid1D:
    """Grid on ``[-alpha, alpha]`` whose spacing is as close to ``h`` as an even ``n`` allows."""
    n = int(round(2.0 * alpha / h))
    n += n % 2
    return make_grid(alpha, max(n, 8))


@dataclass(frozen=True)
class PhaseState:
    phi: float
    psi: float

    def as_array(self) -> np.ndarray:
        return np.array([self.phi, self.psi])


# ---------------------------------------------------------------------------
# results
# ---------------------------------------------------------------------------

def _frozen_array(x) -> np.ndarray | None:
    if x is None:
        return None
    arr = np.array(x, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class WaveProfile:
    """A front sampled on a :class:`Grid1D`.

    ``u`` and ``v`` are only present for nonlocal solutions; ``theta`` is the
    truncation level of the solve that produced the profile (0 for shooting).
    """

    grid: Grid1D
    phi: np.ndarray
    sigma: float
    theta: float = 0.0
    u: np.ndarray | None = None
    v: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "phi", _frozen_array(self.phi))
        object.__setattr__(self, "u", _frozen_array(self.u))
        object.__setattr__(self, "v", _frozen_array(self.v))
        m = len(self.grid)
        for name in ("phi", "u", "v"):
            arr = getattr(self, name)
            if arr is not None and arr.shape != (m,):
                raise ValidationError(f"{name} has shape {arr.shape}, expected ({m},)")
        if not 0.0 <= self.theta < 1.0 / 3.0:
            raise ValidationError(f"theta={self.theta!r} outside [0, 1/3)")

    @property
    def xi(self) -> np.ndarray:
        return self.grid.xi

    def invariant_violations(self, tol: float = 1e-12) -> list[str]:
        """Names of the profile invariants that fail (empty list if all hold)."""
        out = []
        phi = self.phi
        if phi.min() < -tol or phi.max() > 1 + tol:
            out.append("bounded")
        d = np.diff(phi)
        # flat tails saturated at 0 or 1 may be constant to roundoff
        flat = ((phi[:-1] >= 1 - tol) & (phi[1:] >= 1 - tol)) | (
            (np.abs(phi[:-1]) <= tol) & (np.abs(phi[1:]) <= tol)
        )
        if not np.all((d < 0) | (flat & (d <= tol))):
            out.append("monotone")
        return out

    def __eq__(self, other):
        if not isinstance(other, WaveProfile):
            return NotImplemented
        same = lambda x, y: (x is None and y is None) or (
            x is not None and y is not None and np.array_equal(x, y)
        )
        return (
            self.grid == other.grid
            and self.sigma == other.sigma
            and self.theta == other.theta
            and same(self.phi, other.phi)
            and same(self.u, other.u)
            and same(self.v, other.v)
        )


@dataclass(frozen=True)
class SigmaBounds:
    """Lower and upper bounds on the critical speed, with the branch that produced each."""

    a: float
    b: float
    lower: float
    upper: float
    lower_branch: str
    upper_branch: str

    def contains(self, sigma: float, tol: float = 0.0) -> bool:
        return self.lower - tol <= sigma <= self.upper + tol


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

SWEEP_COLUMNS = (
    "a", "b", "sigma_lower", "sigma_upper", "sigma_star",
    "lower_branch", "upper_branch", "status",
)
BOUNDS_COLUMNS = ("a", "b", "lower", "upper", "lower_branch", "upper_branch")
PROFILE_COLUMNS = ("xi", "phi", "u", "v")


def fmt_float(x: float) -> str:
    """17 significant digits, locale independent."""
    return format(float(x), ".17g")


def _check_finite(values: Iterable[Any], what: str):
    for v in values:
        if isinstance(v, (float, int, np.floating)) and not math.isfinite(v):
            raise NonFiniteValue(f"non-finite value in {what}")


def _profile_record(prof: WaveProfile) -> dict:
    rec = {
        "kind": "wave_profile",
        "alpha": prof.grid.alpha,
        "n": prof.grid.n,
        "h": prof.grid.h,
        "sigma": prof.sigma,
        "theta": prof.theta,
        "xi": prof.xi.tolist(),
        "phi": prof.phi.tolist(),
    }
    if prof.u is not None:
        rec["u"] = prof.u.tolist()
    if prof.v is not None:
        rec["v"] = prof.v.tolist()
    return rec


def _row_cell(v) -> str:
    if isinstance(v, (float, np.floating)):
        return fmt_float(v)
    return str(v)


def serialize(result, format: str = "json") -> bytes:
    """Encode a :class:`WaveProfile`, :class:`SigmaBounds` or a list of sweep rows.

    Sweep rows are mappings keyed by :data:`SWEEP_COLUMNS`. Non-finite floats
    raise :class:`NonFiniteValue` (``sigma_star`` of a failed sweep point is
    written as an empty cell instead).
    """
    if format not in ("csv", "json"):
        raise ValueError(f"unknown format {format!r}")

    if isinstance(result, WaveProfile):
        arrays = [result.phi] + [x for x in (result.u, result.v) if x is not None]
        for arr in arrays:
            if not np.all(np.isfinite(arr)):
                raise NonFiniteValue("profile contains non-finite values")
        _check_finite([result.sigma, result.theta], "profile metadata")
        if format == "json":
            return (json.dumps(_profile_record(result)) + "\n").encode()
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(PROFILE_COLUMNS)
        xi = result.xi
        for i in range(len(xi)):
            w.writerow([
                fmt_float(xi[i]),
                fmt_float(result.phi[i]),
                fmt_float(result.u[i]) if result.u is not None else "",
                fmt_float(result.v[i]) if result.v is not None else "",
            ])
        return buf.getvalue().encode()

    if isinstance(result, SigmaBounds):
        rec = {k: getattr(result, k) for k in BOUNDS_COLUMNS}
        _check_finite(rec.values(), "bounds")
        if format == "json":
            return (json.dumps({"kind": "sigma_bounds", **rec}) + "\n").encode()
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(BOUNDS_COLUMNS)
        w.writerow([_row_cell(rec[k]) for k in BOUNDS_COLUMNS])
        return buf.getvalue().encode()

    rows = [dict(r) for r in result]
    for r in rows:
        missing = set(SWEEP_COLUMNS) - set(r)
        if missing:
            raise ValidationError(f"sweep row missing columns {sorted(missing)}")
        _check_finite(
            [r[k] for k in SWEEP_COLUMNS if r[k] is not None], "sweep row"
        )
    if format == "json":
        return (json.dumps({"kind": "sweep", "rows": rows}) + "\n").encode()
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_COLUMNS)
    for r in rows:
        w.writerow(["" if r[k] is None else _row_cell(r[k]) for k in SWEEP_COLUMNS])
    return buf.getvalue().encode()


def _to_float_or_none(s: str):
    return None if s == "" else float(s)


def parse(data: bytes | str, format: str = "json", kind: str | None = None):
    """Inverse of :func:`serialize`.

    JSON carries its own ``kind`` tag. CSV has to be told what it holds via
    ``kind`` (``"wave_profile"``, ``"sigma_bounds"`` or ``"sweep"``); when
    omitted it is inferred from the header.
    """
    text = data.decode() if isinstance(data, bytes) else data
    if format == "json":
        rec = json.loads(text)
        kind = rec.get("kind")
        if kind == "wave_profile":
            return WaveProfile(
                grid=make_grid(rec["alpha"], rec["n"]),
                phi=np.array(rec["phi"]),
                sigma=rec["sigma"],
                theta=rec["theta"],
                u=None if "u" not in rec else np.array(rec["u"]),
                v=None if "v" not in rec else np.array(rec["v"]),
            )
        if kind == "sigma_bounds":
            return SigmaBounds(**{k: rec[k] for k in BOUNDS_COLUMNS})
        if kind == "sweep":
            return rec["rows"]
        raise ValidationError(f"unknown JSON record kind {kind!r}")

    rows = list(csv.reader(io.StringIO(text)))
    header, body = tuple(rows[0]), rows[1:]
    if kind is None:
        kind = {
            PROFILE_COLUMNS: "wave_profile",
            BOUNDS_COLUMNS: "sigma_bounds",
            SWEEP_COLUMNS: "sweep",
        }.get(header)
    if kind == "sigma_bounds":
        (r,) = body
        return SigmaBounds(
            float(r[0]), float(r[1]), float(r[2]), float(r[3]), r[4], r[5]
        )
    if kind == "sweep":
        out = []
        for r in body:
            rec = dict(zip(header, r))
            for k in ("a", "b", "sigma_lower", "sigma_upper", "sigma_star"):
                rec[k] = _to_float_or_none(rec[k])
            out.append(rec)
        return out
    if kind == "wave_profile":
        cols = np.array(body, dtype=object).T
        xi = cols[0].astype(float)
        u = None if cols[2][0] == "" else cols[2].astype(float)
        v = None if cols[3][0] == "" else cols[3].astype(float)
        # profile CSVs carry no sigma/theta (those live in the JSON report), so
        # the columns come back as plain arrays
        return {"xi": xi, "phi": cols[1].astype(float), "u": u, "v": v}
    raise ValidationError(f"cannot parse CSV with header {header}")
