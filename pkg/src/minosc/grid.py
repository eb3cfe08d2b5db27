"""Uniform Cartesian discretization of the unit disk with cut-cell boundary geometry.

Nodes live on the lattice ``i*h`` for integer ``i``. Every lattice point strictly
inside the circle ``x^2 + y^2 = 1`` carries a field value and is classified as

* ``INTERIOR``: all four axis neighbors are also inside,
* ``CUT``: at least one axis neighbor falls outside; the fractional arm length
  to the circle along each cut direction is stored exactly from the circle
  equation,
* ``MERGED``: a cut node whose shortest arm fraction is below ``MERGE_REL * h``.
  Such nodes are folded into the boundary (their value is prescribed from
  boundary data) so that cut-arm stencil coefficients stay bounded.

Finite-difference calculus (gradient, Hessian, Laplacian) uses second-order
central stencils wherever both axis neighbors carry values and falls back to
one-sided stencils near the rim: three-point one-sided first derivatives and
four-point one-sided second derivatives are still second order; where even
those do not fit, lower-order two-point or zero fallbacks keep every output
finite. The mixed partial is computed once, as the x-derivative of the
y-derivative, so Hessians are symmetric by construction.

Discrete norms: ``ck_norm(f, k)`` is the max over value-carrying nodes of
``|f|`` (k = 0), additionally of the gradient components (k = 1), and of the
Hessian entries (k = 2). Sup norms deliberately include boundary-cut nodes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable

import numpy as np

from .errors import InvalidParameterError

# node classification codes
EXTERIOR = 0
INTERIOR = 1
CUT = 2
MERGED = 3

# directions: +x, -x, +y, -y
_DIRS = ((1, 0), (-1, 0), (0, 1), (0, -1))

# cut arms shorter than MERGE_REL*h (in units of h) are merged into the boundary
MERGE_REL = 0.1


def _shift(a: np.ndarray, dx: int, dy: int, fill=0):
    """out[i, j] = a[i + dx, j + dy], padded with `fill` outside the lattice."""
    out = np.full_like(a, fill)
    n = a.shape[0]
    sx = slice(max(0, -dx), min(n, n - dx))
    tx = slice(max(0, dx), min(n, n + dx))
    sy = slice(max(0, -dy), min(n, n - dy))
    ty = slice(max(0, dy), min(n, n + dy))
    out[sx, sy] = a[tx, ty]
    return out


def _freeze(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class DiskGrid:
    """Lattice over [-1, 1]^2 with per-node classification and cut-arm fractions.

    Attributes:
        h: grid spacing (disk radius is 1).
        coords: 1d axis coordinates, shape (n,); node (i, j) sits at
            (coords[i], coords[j]).
        classification: (n, n) uint8 array of EXTERIOR/INTERIOR/CUT/MERGED.
        arm: (4, n, n) arm fractions in units of h for directions
            (+x, -x, +y, -y); 1.0 for arms ending at a lattice neighbor,
            the exact fraction to the circle in (0, 1] for cut arms.
    """

    h: float
    coords: np.ndarray
    classification: np.ndarray
    arm: np.ndarray

    @property
    def n(self) -> int:
        return len(self.coords)

    @cached_property
    def inside(self) -> np.ndarray:
        """Mask of value-carrying nodes (interior, cut and merged)."""
        return _freeze(self.classification != EXTERIOR)

    @cached_property
    def interior(self) -> np.ndarray:
        return _freeze(self.classification == INTERIOR)

    @cached_property
    def cut(self) -> np.ndarray:
        return _freeze(self.classification == CUT)

    @cached_property
    def merged(self) -> np.ndarray:
        return _freeze(self.classification == MERGED)

    @cached_property
    def unknown(self) -> np.ndarray:
        """Mask of Poisson unknowns: interior plus cut (merged nodes hold data)."""
        return _freeze(self.interior | self.cut)

    @cached_property
    def xy(self) -> tuple[np.ndarray, np.ndarray]:
        X, Y = np.meshgrid(self.coords, self.coords, indexing="ij")
        return _freeze(X), _freeze(Y)

    @property
    def n_inside(self) -> int:
        return int(self.inside.sum())

    @property
    def n_interior(self) -> int:
        return int(self.interior.sum())

    def __repr__(self):  # keep reprs short; arrays are large
        return (f"DiskGrid(h={self.h}, n={self.n}, inside={self.n_inside}, "
                f"interior={self.n_interior}, cut={int(self.cut.sum())}, "
                f"merged={int(self.merged.sum())})")


def build_disk_grid(h: float) -> DiskGrid:
    """Construct the disk lattice for spacing h, 0 < h <= 0.5.

    Classification and cut fractions are computed exactly from the circle
    equation, so the construction is deterministic for fixed h.
    """
    if not (isinstance(h, (int, float)) and math.isfinite(h)):
        raise InvalidParameterError(f"grid spacing must be a finite number, got {h!r}")
    h = float(h)
    if not (0.0 < h <= 0.5):
        raise InvalidParameterError(f"grid spacing must satisfy 0 < h <= 0.5, got {h}")

    N = int(math.ceil(1.0 / h))
    coords = np.arange(-N, N + 1, dtype=float) * h
    n = len(coords)
    X, Y = np.meshgrid(coords, coords, indexing="ij")
    inside = X**2 + Y**2 < 1.0

    arm = np.ones((4, n, n))
    cut_any = np.zeros((n, n), dtype=bool)
    for d, (dx, dy) in enumerate(_DIRS):
        nb_inside = _shift(inside, dx, dy, fill=False)
        cut_dir = inside & ~nb_inside
        # distance along the axis from the node to the circle, in units of h
        if dx != 0:
            t = (-dx * X + np.sqrt(np.maximum(1.0 - Y**2, 0.0))) / h
        else:
            t = (-dy * Y + np.sqrt(np.maximum(1.0 - X**2, 0.0))) / h
        theta = np.where(cut_dir, np.minimum(t, 1.0), 1.0)
        arm[d] = theta
        cut_any |= cut_dir

    classification = np.zeros((n, n), dtype=np.uint8)
    classification[inside] = INTERIOR
    classification[cut_any] = CUT
    min_arm = arm.min(axis=0)
    classification[cut_any & (min_arm < MERGE_REL * h)] = MERGED

    return DiskGrid(h=h, coords=_freeze(coords),
                    classification=_freeze(classification), arm=_freeze(arm))


@dataclass(frozen=True, eq=False)
class ScalarField:
    """One real value per inside node, stored on the full (n, n) lattice.

    Exterior entries are zero and never read through a public operation.
    """

    grid: DiskGrid
    values: np.ndarray

    def __post_init__(self):
        if self.values.shape != (self.grid.n, self.grid.n):
            raise InvalidParameterError(
                f"field shape {self.values.shape} does not match grid n={self.grid.n}")
        if not np.all(np.isfinite(self.values[self.grid.inside])):
            raise InvalidParameterError("field holds non-finite values at inside nodes")
        _freeze(self.values)

    def inside_values(self) -> np.ndarray:
        return self.values[self.grid.inside]

    def __add__(self, other: "ScalarField") -> "ScalarField":
        return ScalarField(self.grid, self.values + other.values)

    def __sub__(self, other: "ScalarField") -> "ScalarField":
        return ScalarField(self.grid, self.values - other.values)

    def __mul__(self, c: float) -> "ScalarField":
        return ScalarField(self.grid, self.values * float(c))

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class VectorField:
    grid: DiskGrid
    vx: np.ndarray
    vy: np.ndarray


@dataclass(frozen=True, eq=False)
class MatrixField:
    """Symmetric 2x2 matrix per node; the mixed partial is stored once."""

    grid: DiskGrid
    fxx: np.ndarray
    fxy: np.ndarray
    fyy: np.ndarray

    @property
    def fyx(self) -> np.ndarray:
        return self.fxy


def sample_function(grid: DiskGrid, fn: Callable) -> ScalarField:
    """Evaluate fn(x, y) (numpy-vectorized) at every inside node."""
    X, Y = grid.xy
    vals = np.zeros((grid.n, grid.n))
    m = grid.inside
    vals[m] = np.asarray(fn(X[m], Y[m]), dtype=float)
    return ScalarField(grid, vals)


def _axis_masks(grid: DiskGrid, axis: int):
    """Neighbor-availability masks along one axis, cached on the grid."""
    cache = grid.__dict__.setdefault("_axis_mask_cache", {})
    if axis in cache:
        return cache[axis]
    dx, dy = (1, 0) if axis == 0 else (0, 1)
    ins = grid.inside
    has = {s: _shift(ins, s * dx, s * dy, fill=False)
           for s in (1, 2, 3, -1, -2, -3)}
    cache[axis] = has
    return has


def _d1(grid: DiskGrid, vals: np.ndarray, axis: int) -> np.ndarray:
    """First derivative along an axis with the one-sided fallback ladder."""
    h = grid.h
    dx, dy = (1, 0) if axis == 0 else (0, 1)
    has = _axis_masks(grid, axis)
    v = vals
    vp1 = _shift(v, dx, dy)
    vm1 = _shift(v, -dx, -dy)
    vp2 = _shift(v, 2 * dx, 2 * dy)
    vm2 = _shift(v, -2 * dx, -2 * dy)

    out = np.zeros_like(v)
    ins = grid.inside
    central = ins & has[1] & has[-1]
    osm = ins & ~has[1] & has[-1] & has[-2]
    osp = ins & ~has[-1] & has[1] & has[2]
    twom = ins & ~has[1] & has[-1] & ~has[-2]
    twop = ins & ~has[-1] & has[1] & ~has[2]

    out[central] = (vp1[central] - vm1[central]) / (2 * h)
    out[osm] = (3 * v[osm] - 4 * vm1[osm] + vm2[osm]) / (2 * h)
    out[osp] = (-3 * v[osp] + 4 * vp1[osp] - vp2[osp]) / (2 * h)
    out[twom] = (v[twom] - vm1[twom]) / h
    out[twop] = (vp1[twop] - v[twop]) / h
    return out


def _d2(grid: DiskGrid, vals: np.ndarray, axis: int) -> np.ndarray:
    """Pure second derivative along an axis, one-sided near the rim."""
    h2 = grid.h * grid.h
    dx, dy = (1, 0) if axis == 0 else (0, 1)
    has = _axis_masks(grid, axis)
    v = vals
    vp1 = _shift(v, dx, dy)
    vm1 = _shift(v, -dx, -dy)
    vp2 = _shift(v, 2 * dx, 2 * dy)
    vm2 = _shift(v, -2 * dx, -2 * dy)
    vp3 = _shift(v, 3 * dx, 3 * dy)
    vm3 = _shift(v, -3 * dx, -3 * dy)

    out = np.zeros_like(v)
    ins = grid.inside
    central = ins & has[1] & has[-1]
    os4m = ins & ~has[1] & has[-1] & has[-2] & has[-3]
    os3m = ins & ~has[1] & has[-1] & has[-2] & ~has[-3]
    os4p = ins & ~has[-1] & has[1] & has[2] & has[3]
    os3p = ins & ~has[-1] & has[1] & has[2] & ~has[3]

    out[central] = (vp1[central] - 2 * v[central] + vm1[central]) / h2
    out[os4m] = (2 * v[os4m] - 5 * vm1[os4m] + 4 * vm2[os4m] - vm3[os4m]) / h2
    out[os3m] = (v[os3m] - 2 * vm1[os3m] + vm2[os3m]) / h2
    out[os4p] = (2 * v[os4p] - 5 * vp1[os4p] + 4 * vp2[os4p] - vp3[os4p]) / h2
    out[os3p] = (v[os3p] - 2 * vp1[os3p] + vp2[os3p]) / h2
    return out


def gradient(f: ScalarField) -> VectorField:
    g = f.grid
    return VectorField(g, _freeze(_d1(g, f.values, 0)), _freeze(_d1(g, f.values, 1)))


def hessian(f: ScalarField) -> MatrixField:
    g = f.grid
    fxx = _d2(g, f.values, 0)
    fyy = _d2(g, f.values, 1)
    # mixed partial computed once: x-derivative of the y-derivative field
    fxy = _d1(g, _d1(g, f.values, 1), 0)
    return MatrixField(g, _freeze(fxx), _freeze(fxy), _freeze(fyy))


def laplacian(f: ScalarField) -> ScalarField:
    """Five-point Laplacian at interior nodes, one-sided closures at the rim.

    Values at cut and merged nodes use the fallback ladder and may be lower
    order there; sup-norm diagnostics over interior nodes keep the clean
    O(h^2) behavior.
    """
    g = f.grid
    return ScalarField(g, _d2(g, f.values, 0) + _d2(g, f.values, 1))


def boundary_values(g, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Evaluate Dirichlet data at circle points; scalars broadcast."""
    if callable(g):
        return np.asarray(g(xs, ys), dtype=float)
    return np.full_like(np.asarray(xs, dtype=float), float(g))


def laplacian_dirichlet(f: ScalarField, boundary=0.0) -> ScalarField:
    """Shortley-Weller Laplacian at the unknown nodes (interior plus cut).

    Arms ending at a lattice neighbor read the field value there (including
    merged nodes, whose values are expected to hold the boundary data); arms
    cut by the circle read the Dirichlet value at the exact crossing point.
    Output is zero outside the unknown set.
    """
    g = f.grid
    h = g.h
    X, Y = g.xy
    out = np.zeros_like(f.values)
    unk = g.unknown
    for axis in range(2):
        dxy = ((1, 0), (0, 1))[axis]
        dp = 2 * axis      # +x or +y direction index into g.arm
        dm = 2 * axis + 1
        ap = g.arm[dp] * h
        am = g.arm[dm] * h
        vp = _shift(f.values, dxy[0], dxy[1])
        vm = _shift(f.values, -dxy[0], -dxy[1])
        # replace exterior-neighbor values with boundary data at the crossing
        nb_in_p = _shift(g.inside, dxy[0], dxy[1], fill=False)
        nb_in_m = _shift(g.inside, -dxy[0], -dxy[1], fill=False)
        cxp = X + ap * dxy[0]
        cyp = Y + ap * dxy[1]
        cxm = X - am * dxy[0]
        cym = Y - am * dxy[1]
        sel_p = unk & ~nb_in_p
        sel_m = unk & ~nb_in_m
        vp = vp.copy()
        vm = vm.copy()
        vp[sel_p] = boundary_values(boundary, cxp[sel_p], cyp[sel_p])
        vm[sel_m] = boundary_values(boundary, cxm[sel_m], cym[sel_m])
        s = ap + am
        out[unk] += (2 * vm[unk] / (am[unk] * s[unk])
                     - 2 * f.values[unk] / (am[unk] * ap[unk])
                     + 2 * vp[unk] / (ap[unk] * s[unk]))
    return ScalarField(g, out)


def ck_norm(f: ScalarField, k: int) -> float:
    """Discrete C^k sup norm, k in {0, 1, 2}; max of value, gradient and
    Hessian magnitudes over all value-carrying nodes."""
    if k not in (0, 1, 2):
        raise InvalidParameterError(f"derivative order k must be 0, 1 or 2, got {k}")
    g = f.grid
    m = g.inside
    parts = [np.abs(f.values[m]).max(initial=0.0)]
    if k >= 1:
        grad = gradient(f)
        parts.append(np.abs(grad.vx[m]).max(initial=0.0))
        parts.append(np.abs(grad.vy[m]).max(initial=0.0))
    if k >= 2:
        hess = hessian(f)
        parts.append(np.abs(hess.fxx[m]).max(initial=0.0))
        parts.append(np.abs(hess.fxy[m]).max(initial=0.0))
        parts.append(np.abs(hess.fyy[m]).max(initial=0.0))
    return float(max(parts))


def save_field_table(f: ScalarField, path) -> None:
    """Write the field as a text table, one "x y value" row per inside node.

    Rows are emitted row-major over the bounding lattice (x outer, y inner);
    exterior nodes are omitted. The header records h for reconstruction.
    """
    g = f.grid
    X, Y = g.xy
    m = g.inside
    with open(path, "w", newline="\n") as fh:
        fh.write(f"# disk field table, h = {g.h!r}\n")
        fh.write("# columns: x y value\n")
        for x, y, v in zip(X[m], Y[m], f.values[m]):
            fh.write(f"{x:.17g} {y:.17g} {v:.17g}\n")


def load_field_table(path, grid: DiskGrid | None = None) -> ScalarField:
    """Read a field table written by save_field_table.

    If no grid is supplied, h is taken from the header and the grid rebuilt;
    the node set in the file must match the grid's inside nodes exactly.
    """
    h = None
    xs, ys, vs = [], [], []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            s = line.strip()
            if not s:
                continue
            if s.startswith("#"):
                if "h =" in s and h is None:
                    h = float(s.split("h =")[1])
                continue
            parts = s.split()
            if len(parts) != 3:
                raise InvalidParameterError(f"{path}:{lineno}: expected 'x y value'")
            xs.append(float(parts[0]))
            ys.append(float(parts[1]))
            vs.append(float(parts[2]))
    if grid is None:
        if h is None:
            raise InvalidParameterError(f"{path}: missing h header and no grid given")
        grid = build_disk_grid(h)
    vals = np.zeros((grid.n, grid.n))
    seen = np.zeros((grid.n, grid.n), dtype=bool)
    x0 = grid.coords[0]
    for x, y, v in zip(xs, ys, vs):
        i = int(round((x - x0) / grid.h))
        j = int(round((y - x0) / grid.h))
        if not (0 <= i < grid.n and 0 <= j < grid.n) or not grid.inside[i, j]:
            raise InvalidParameterError(f"{path}: node ({x}, {y}) is not an inside node")
        vals[i, j] = v
        seen[i, j] = True
    if not np.array_equal(seen, grid.inside):
        raise InvalidParameterError(f"{path}: node set does not cover the grid")
    return ScalarField(grid, vals)
