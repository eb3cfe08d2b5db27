"""Harmonic seed functions with prescribed nodal geometry.

Two closed-form families plus a fitted family:

* ``StripeSinCosh(k)``: sin(kx) cosh(ky). Its zero set inside the disk is the
  family of vertical chords x = j*pi/k, so the nodal length inside the unit
  disk is an explicit chord sum that grows without bound in k.
* ``HarmonicPolynomialReZm(m)``: Re((x + iy)^m).
* ``PolynomialExpansion``: coefficients over the real harmonic polynomial
  basis {1, r^m cos(m th), r^m sin(m th)}, m = 1..M.

``fit_cauchy_data`` produces an expansion whose value is ~0 and whose normal
derivative is ~1 along a user curve, by ridge-regularized least squares on
collocation points. This is the constructive stand-in for extending a local
harmonic function with that Cauchy data to the whole plane: the basis consists
of entire harmonic functions, and closeness near the curve is all that the
downstream promotion step uses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

from .errors import CurveFileError, IllConditionedFitError, InvalidParameterError
from .grid import DiskGrid, ScalarField, laplacian, sample_function

CONDITION_LIMIT = 1e14


@dataclass(frozen=True)
class StripeSinCosh:
    k: float

    def __post_init__(self):
        if not (self.k > 0 and math.isfinite(self.k)):
            raise InvalidParameterError(f"stripe frequency must be positive, got {self.k}")


@dataclass(frozen=True)
class HarmonicPolynomialReZm:
    m: int

    def __post_init__(self):
        if not (isinstance(self.m, int) and self.m >= 1):
            raise InvalidParameterError(f"degree m must be an integer >= 1, got {self.m}")


@dataclass(frozen=True, eq=False)
class PolynomialExpansion:
    """a0 + sum_m cos_coeffs[m-1] * r^m cos(m th) + sin_coeffs[m-1] * r^m sin(m th)."""

    a0: float
    cos_coeffs: np.ndarray
    sin_coeffs: np.ndarray

    def __post_init__(self):
        if len(self.cos_coeffs) != len(self.sin_coeffs):
            raise InvalidParameterError("cos and sin coefficient arrays differ in length")

    @property
    def degree(self) -> int:
        return len(self.cos_coeffs)


HarmonicSeed = Union[StripeSinCosh, HarmonicPolynomialReZm, PolynomialExpansion]


def evaluate_seed(seed: HarmonicSeed, x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if isinstance(seed, StripeSinCosh):
        return np.sin(seed.k * x) * np.cosh(seed.k * y)
    if isinstance(seed, HarmonicPolynomialReZm):
        return ((x + 1j * y) ** seed.m).real
    if isinstance(seed, PolynomialExpansion):
        z = x + 1j * y
        out = np.full_like(x, seed.a0)
        zp = np.ones_like(z)
        for m in range(1, seed.degree + 1):
            zp = zp * z
            out = out + seed.cos_coeffs[m - 1] * zp.real + seed.sin_coeffs[m - 1] * zp.imag
        return out
    raise InvalidParameterError(f"unknown seed type {type(seed).__name__}")


def sample(seed: HarmonicSeed, grid: DiskGrid) -> ScalarField:
    """Evaluate the seed at every value-carrying node of the grid."""
    return sample_function(grid, lambda x, y: evaluate_seed(seed, x, y))


def nodal_line_count(seed: StripeSinCosh) -> int:
    """Number of vertical nodal lines x = j*pi/k strictly inside the disk."""
    count, j = 1, 1
    while j * math.pi / seed.k < 1.0:
        count += 2
        j += 1
    return count


def predicted_nodal_length(seed: StripeSinCosh) -> float:
    """Total chord length of the nodal lines of sin(kx) cosh(ky) in the disk.

    The chord at offset x0 has length 2 sqrt(1 - x0^2); summing over
    x0 = j*pi/k gives a total that grows like k for large k.
    """
    total, j = 2.0, 1
    while j * math.pi / seed.k < 1.0:
        total += 4.0 * math.sqrt(1.0 - (j * math.pi / seed.k) ** 2)
        j += 1
    return total


def verify_harmonicity(seed: HarmonicSeed, grid: DiskGrid) -> float:
    """Sup of the discrete Laplacian of the sampled seed over interior nodes."""
    lap = laplacian(sample(seed, grid))
    return float(np.abs(lap.values[grid.interior]).max(initial=0.0))


# ---------------------------------------------------------------------------
# curves and Cauchy-data fitting


@dataclass(frozen=True, eq=False)
class CurveSpec:
    """Smooth parameterized curve c(t): [0, 1] -> open unit disk.

    ``fn`` maps an array of parameters to an (N, 2) array of points; ``dfn``
    is its derivative (finite differences are used when absent). The normal
    is the tangent rotated a quarter turn counterclockwise, times
    ``orientation``.
    """

    fn: Callable
    dfn: Callable | None = None
    orientation: int = 1
    n_collocation: int = 256
    closed: bool = False
    name: str = "curve"

    def parameters(self) -> np.ndarray:
        if self.closed:
            return np.arange(self.n_collocation) / self.n_collocation
        return np.linspace(0.0, 1.0, self.n_collocation)

    def points(self, ts=None) -> np.ndarray:
        ts = self.parameters() if ts is None else np.asarray(ts, dtype=float)
        return np.asarray(self.fn(ts), dtype=float).reshape(len(ts), 2)

    def normals(self, ts=None) -> np.ndarray:
        ts = self.parameters() if ts is None else np.asarray(ts, dtype=float)
        if self.dfn is not None:
            tang = np.asarray(self.dfn(ts), dtype=float).reshape(len(ts), 2)
        else:
            dt = 1e-6
            if self.closed:
                tang = (self.points(np.mod(ts + dt, 1.0))
                        - self.points(np.mod(ts - dt, 1.0))) / (2 * dt)
            else:
                tp = np.minimum(ts + dt, 1.0)
                tm = np.maximum(ts - dt, 0.0)
                tang = (self.points(tp) - self.points(tm)) / (tp - tm)[:, None]
        nrm = np.hypot(tang[:, 0], tang[:, 1])
        normal = np.column_stack([-tang[:, 1], tang[:, 0]]) / nrm[:, None]
        return self.orientation * normal

    def containment_margin(self) -> float:
        pts = self.points()
        return float(1.0 - np.hypot(pts[:, 0], pts[:, 1]).max())

    def min_pairwise_distance(self) -> float:
        """Approximate injectivity check over the collocation points."""
        pts = self.points()
        d = np.hypot(pts[:, None, 0] - pts[None, :, 0],
                     pts[:, None, 1] - pts[None, :, 1])
        np.fill_diagonal(d, np.inf)
        return float(d.min())

    def validate(self) -> None:
        if self.n_collocation < 4:
            raise InvalidParameterError("need at least 4 collocation points")
        if self.orientation not in (-1, 1):
            raise InvalidParameterError("orientation sign must be +1 or -1")
        if self.containment_margin() <= 0:
            raise InvalidParameterError(
                f"curve {self.name!r} leaves the open unit disk "
                f"(margin {self.containment_margin():.3e})")


def builtin_curve(name: str, n_collocation: int = 256) -> CurveSpec:
    """Named curves: segment, arc, circle-arc-with-gap, circle."""
    if name == "segment":
        return CurveSpec(
            fn=lambda t: np.column_stack([-0.5 + np.asarray(t), np.zeros_like(np.asarray(t, dtype=float))]),
            dfn=lambda t: np.column_stack([np.ones_like(np.asarray(t, dtype=float)),
                                           np.zeros_like(np.asarray(t, dtype=float))]),
            orientation=1, n_collocation=n_collocation, closed=False, name=name)

    def circle_piece(th0, th1, closed):
        span = th1 - th0

        def fn(t):
            th = th0 + span * np.asarray(t, dtype=float)
            return 0.5 * np.column_stack([np.cos(th), np.sin(th)])

        def dfn(t):
            th = th0 + span * np.asarray(t, dtype=float)
            return 0.5 * span * np.column_stack([-np.sin(th), np.cos(th)])

        # orientation -1 turns the left normal of a counterclockwise arc outward
        return CurveSpec(fn=fn, dfn=dfn, orientation=-1,
                         n_collocation=n_collocation, closed=closed, name=name)

    if name == "arc":
        return circle_piece(-math.pi / 4, math.pi / 4, closed=False)
    if name == "circle-arc-with-gap":
        # 120 degree arc: an open piece of the circle leaving a wide gap, so
        # that entire harmonic functions can approximate its local extension
        return circle_piece(-math.pi / 3, math.pi / 3, closed=False)
    if name == "circle":
        # closed curves carry a flux obstruction: no entire harmonic function
        # has net normal derivative through a closed curve, so the normal
        # residual of a fit cannot drop below ~1; kept as an honest diagnostic
        return circle_piece(0.0, 2 * math.pi, closed=True)
    raise InvalidParameterError(
        f"unknown builtin curve {name!r}; choose segment, arc, circle-arc-with-gap or circle")


def curve_from_file(path) -> CurveSpec:
    """Read a sampled curve from a text file of "t x y" rows.

    Blank lines and '#' comments are skipped; t must be strictly increasing.
    The samples become the collocation points; a closed curve repeats its
    first point in the last row.
    """
    ts, xs, ys = [], [], []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            s = line.strip()
            if not s or s.startswith("#"):
                continue
            parts = s.split()
            if len(parts) != 3:
                raise CurveFileError(path, lineno, f"expected 't x y', got {len(parts)} fields")
            try:
                t, x, y = (float(p) for p in parts)
            except ValueError:
                raise CurveFileError(path, lineno, f"non-numeric field in {s!r}") from None
            if ts and t <= ts[-1]:
                raise CurveFileError(path, lineno, "parameter t must be strictly increasing")
            ts.append(t)
            xs.append(x)
            ys.append(y)
    if len(ts) < 4:
        raise CurveFileError(path, len(ts) + 1, "need at least 4 sample points")
    ts = np.asarray(ts)
    xs = np.asarray(xs)
    ys = np.asarray(ys)
    closed = math.hypot(xs[0] - xs[-1], ys[0] - ys[-1]) < 1e-12
    if closed:
        ts, xs, ys = ts[:-1], xs[:-1], ys[:-1]
    tn = (ts - ts[0]) / (ts[-1] - ts[0]) if not closed else (ts - ts[0]) / (ts.max() - ts[0] + (ts[1] - ts[0]))
    dx = np.gradient(xs, tn)
    dy = np.gradient(ys, tn)

    def fn(t):
        t = np.asarray(t, dtype=float)
        return np.column_stack([np.interp(t, tn, xs), np.interp(t, tn, ys)])

    def dfn(t):
        t = np.asarray(t, dtype=float)
        return np.column_stack([np.interp(t, tn, dx), np.interp(t, tn, dy)])

    return CurveSpec(fn=fn, dfn=dfn, orientation=1, n_collocation=len(tn),
                     closed=closed, name=str(path))


@dataclass(frozen=True)
class CauchyFitReport:
    residual_value: float
    residual_normal: float
    degree: int
    condition: float
    ridge: float
    objective: float


def _basis_blocks(pts: np.ndarray, normals: np.ndarray, degree: int):
    """Value and normal-derivative rows of {1, Re z^m, Im z^m} at the points.

    Gradients come from the holomorphic derivative: for f = z^m,
    grad Re f = m (Re z^{m-1}, -Im z^{m-1}) and grad Im f = m (Im z^{m-1}, Re z^{m-1}).
    """
    z = pts[:, 0] + 1j * pts[:, 1]
    n = len(z)
    ncols = 2 * degree + 1
    val = np.zeros((n, ncols))
    der = np.zeros((n, ncols))
    val[:, 0] = 1.0
    zp = np.ones_like(z)       # z^{m-1}
    for m in range(1, degree + 1):
        zm = zp * z
        val[:, 2 * m - 1] = zm.real
        val[:, 2 * m] = zm.imag
        gx_cos, gy_cos = m * zp.real, -m * zp.imag
        gx_sin, gy_sin = m * zp.imag, m * zp.real
        der[:, 2 * m - 1] = gx_cos * normals[:, 0] + gy_cos * normals[:, 1]
        der[:, 2 * m] = gx_sin * normals[:, 0] + gy_sin * normals[:, 1]
        zp = zm
    return val, der


def fit_cauchy_data(curve: CurveSpec, degree: int,
                    ridge: float | None = None) -> tuple[PolynomialExpansion, CauchyFitReport]:
    """Least-squares fit of a harmonic polynomial to (value 0, normal slope 1) on the curve.

    Minimizes sum_i p(c_i)^2 + (dp/dnu(c_i) - 1)^2 over expansions of degree
    <= M, with ridge term mu ||coeffs||^2; mu defaults to 1e-10 times the
    largest normal-equation diagonal. Raises IllConditionedFitError when the
    collocation system is rank deficient beyond what the ridge can rescue.
    """
    if degree < 1:
        raise InvalidParameterError(f"fit degree must be >= 1, got {degree}")
    curve.validate()
    ncols = 2 * degree + 1
    if curve.n_collocation < 4 * ncols:
        raise InvalidParameterError(
            f"need at least {4 * ncols} collocation points for degree {degree}, "
            f"have {curve.n_collocation}")
    pts = curve.points()
    normals = curve.normals()
    val, der = _basis_blocks(pts, normals, degree)
    A = np.vstack([val, der])
    b = np.concatenate([np.zeros(len(pts)), np.ones(len(pts))])

    cond = float(np.linalg.cond(A))
    if not math.isfinite(cond) or cond > CONDITION_LIMIT:
        raise IllConditionedFitError(
            f"collocation system for degree {degree} on curve {curve.name!r} "
            "is rank deficient", condition=cond)

    mu = ridge if ridge is not None else 1e-10 * float((A * A).sum(axis=0).max())
    A_aug = np.vstack([A, math.sqrt(mu) * np.eye(ncols)])
    b_aug = np.concatenate([b, np.zeros(ncols)])
    coeffs, *_ = np.linalg.lstsq(A_aug, b_aug, rcond=None)

    seed = PolynomialExpansion(a0=float(coeffs[0]),
                               cos_coeffs=coeffs[1::2].copy(),
                               sin_coeffs=coeffs[2::2].copy())
    resid_val = float(np.abs(val @ coeffs).max())
    resid_nrm = float(np.abs(der @ coeffs - 1.0).max())
    objective = float(np.sum((A @ coeffs - b) ** 2) + mu * np.sum(coeffs**2))
    report = CauchyFitReport(residual_value=resid_val, residual_normal=resid_nrm,
                             degree=degree, condition=cond, ridge=mu,
                             objective=objective)
    return seed, report
