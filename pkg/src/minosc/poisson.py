"""Dirichlet problem for the Laplacian on the disk: solve lap(w) = f, w = g on the circle.

The discrete operator acts on the unknown nodes (interior plus cut) with
Shortley-Weller unequal arms at cut nodes; arms that leave the disk terminate
at the exact circle crossing, where the Dirichlet value enters the right-hand
side. Merged nodes are Dirichlet sources holding g at their radial projection
onto the circle.

Two solve paths are provided. The default is a sparse LU factorization,
reused across repeated solves with the same operator; its residual sits at
machine level, which keeps second-difference norms of solution differences
clean down to ~1e-12 (a Krylov solve at 1e-10 relative residual leaves noise
of order tol/h^2 in those norms). The unsymmetrized Krylov path (BiCGSTAB
with Jacobi preconditioning) is kept for cross-checks; the cut-arm rows make
the 2d operator impossible to symmetrize exactly by diagonal scaling.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import InvalidParameterError, SolverStallError
from .grid import DiskGrid, ScalarField, boundary_values

ITERATION_CAP_FACTOR = 50  # Krylov cap: 50 * sqrt(n_unknowns)


@dataclass(frozen=True)
class LinearSolveStats:
    iterations: int
    relative_residual: float
    n_unknowns: int
    method: str


@dataclass(frozen=True, eq=False)
class PoissonProblem:
    grid: DiskGrid
    rhs: ScalarField
    boundary: object = 0.0  # callable g(x, y) or a constant

    def __post_init__(self):
        if self.rhs.grid is not self.grid:
            raise InvalidParameterError("rhs field lives on a different grid")


class DiskLaplacianOperator:
    """Assembled Shortley-Weller operator on the unknown nodes of a grid."""

    def __init__(self, grid: DiskGrid):
        self.grid = grid
        n = grid.n
        unk = grid.unknown
        self.n_unknowns = int(unk.sum())
        index = np.full((n, n), -1, dtype=np.int64)
        index[unk] = np.arange(self.n_unknowns)
        self.index = index

        h = grid.h
        X, Y = grid.xy
        rows, cols, data = [], [], []
        diag = np.zeros(self.n_unknowns)
        # Dirichlet sources per row: positions and coefficients
        src_rows, src_x, src_y, src_c = [], [], [], []

        ii, jj = np.nonzero(unk)
        ridx = index[ii, jj]
        for axis in range(2):
            dxy = ((1, 0), (0, 1))[axis]
            ap = grid.arm[2 * axis][ii, jj] * h
            am = grid.arm[2 * axis + 1][ii, jj] * h
            s = ap + am
            diag[ridx] += -2.0 / (ap * am)
            for sign, a in ((+1, ap), (-1, am)):
                ni = ii + sign * dxy[0]
                nj = jj + sign * dxy[1]
                valid = (0 <= ni) & (ni < n) & (0 <= nj) & (nj < n)
                nclass = np.zeros(len(ii), dtype=np.uint8)
                nclass[valid] = grid.classification[ni[valid], nj[valid]]
                coef = 2.0 / (a * s)
                is_unknown = valid.copy()
                is_unknown[valid] = grid.unknown[ni[valid], nj[valid]]
                rows.append(ridx[is_unknown])
                cols.append(index[ni[is_unknown], nj[is_unknown]])
                data.append(coef[is_unknown])
                # merged neighbor: boundary value at its radial projection
                is_merged = ~is_unknown & (nclass != 0)
                if is_merged.any():
                    mx = X[ni[is_merged], nj[is_merged]]
                    my = Y[ni[is_merged], nj[is_merged]]
                    r = np.hypot(mx, my)
                    src_rows.append(ridx[is_merged])
                    src_x.append(mx / r)
                    src_y.append(my / r)
                    src_c.append(coef[is_merged])
                # exterior neighbor: boundary value at the circle crossing
                is_ext = ~is_unknown & (nclass == 0)
                if is_ext.any():
                    bx = X[ii[is_ext], jj[is_ext]] + sign * dxy[0] * a[is_ext]
                    by = Y[ii[is_ext], jj[is_ext]] + sign * dxy[1] * a[is_ext]
                    src_rows.append(ridx[is_ext])
                    src_x.append(bx)
                    src_y.append(by)
                    src_c.append(coef[is_ext])

        rows.append(np.arange(self.n_unknowns))
        cols.append(np.arange(self.n_unknowns))
        data.append(diag)
        self.matrix = sp.csr_matrix(
            (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))),
            shape=(self.n_unknowns, self.n_unknowns))
        self._src_rows = np.concatenate(src_rows) if src_rows else np.zeros(0, dtype=np.int64)
        self._src_x = np.concatenate(src_x) if src_x else np.zeros(0)
        self._src_y = np.concatenate(src_y) if src_y else np.zeros(0)
        self._src_c = np.concatenate(src_c) if src_c else np.zeros(0)

    @cached_property
    def _lu(self):
        return spla.splu(self.matrix.tocsc())

    def boundary_term(self, boundary) -> np.ndarray:
        """Per-row contribution of the Dirichlet data (to move to the rhs)."""
        out = np.zeros(self.n_unknowns)
        if len(self._src_rows):
            vals = boundary_values(boundary, self._src_x, self._src_y)
            np.add.at(out, self._src_rows, self._src_c * vals)
        return out

    def apply(self, f: ScalarField, boundary=0.0) -> ScalarField:
        """Evaluate the discrete Laplacian of a field, boundary data included.

        Matches the stencil evaluation in grid.laplacian_dirichlet node by
        node when the field holds the boundary data at merged nodes.
        """
        x = f.values[self.grid.unknown]
        out = np.zeros_like(f.values)
        out[self.grid.unknown] = self.matrix @ x + self.boundary_term(boundary)
        return ScalarField(self.grid, out)

    def solve(self, rhs: ScalarField, boundary=0.0, tol: float = 1e-10,
              method: str = "direct") -> tuple[ScalarField, LinearSolveStats]:
        if not (0.0 < tol <= 1e-2):
            raise InvalidParameterError(f"solver tolerance must lie in (0, 1e-2], got {tol}")
        if rhs.grid is not self.grid:
            raise InvalidParameterError("rhs field lives on a different grid")
        b = rhs.values[self.grid.unknown] - self.boundary_term(boundary)
        bnorm = float(np.linalg.norm(b))

        if method == "direct":
            x = self._lu.solve(b) if bnorm > 0 else np.zeros_like(b)
            iters = 1
        elif method == "bicgstab":
            cap = int(ITERATION_CAP_FACTOR * np.sqrt(self.n_unknowns)) + 1
            dinv = 1.0 / self.matrix.diagonal()
            precond = spla.LinearOperator(self.matrix.shape, matvec=lambda v: dinv * v)
            count = [0]

            def cb(_):
                count[0] += 1

            x, info = spla.bicgstab(self.matrix, b, rtol=tol, atol=0.0,
                                    maxiter=cap, M=precond, callback=cb)
            iters = count[0]
            if info != 0:
                res = float(np.linalg.norm(b - self.matrix @ x) / bnorm) if bnorm else 0.0
                raise SolverStallError(
                    f"bicgstab failed to reach rtol={tol} within {cap} iterations "
                    f"(info={info}, achieved {res:.3e})",
                    stats=LinearSolveStats(iters, res, self.n_unknowns, method))
        else:
            raise InvalidParameterError(f"unknown solver method {method!r}")

        relres = float(np.linalg.norm(b - self.matrix @ x) / bnorm) if bnorm else 0.0
        if relres > max(tol, 1e-12):
            raise SolverStallError(
                f"{method} solve residual {relres:.3e} above tolerance {tol}",
                stats=LinearSolveStats(iters, relres, self.n_unknowns, method))
        stats = LinearSolveStats(iters, relres, self.n_unknowns, method)

        vals = np.zeros_like(rhs.values)
        vals[self.grid.unknown] = x
        if self.grid.merged.any():
            X, Y = self.grid.xy
            mx, my = X[self.grid.merged], Y[self.grid.merged]
            r = np.hypot(mx, my)
            vals[self.grid.merged] = boundary_values(boundary, mx / r, my / r)
        return ScalarField(self.grid, vals), stats


def assemble(grid: DiskGrid) -> DiskLaplacianOperator:
    return DiskLaplacianOperator(grid)


def solve_dirichlet(problem: PoissonProblem, tol: float = 1e-10,
                    method: str = "direct") -> tuple[ScalarField, LinearSolveStats]:
    op = assemble(problem.grid)
    return op.solve(problem.rhs, boundary=problem.boundary, tol=tol, method=method)


def maximum_principle_check(problem: PoissonProblem,
                            solution: ScalarField) -> tuple[bool, float]:
    """Check sup|w| <= sup|f|/4 + sup|g| and return (ok, margin).

    1/4 is the sharp constant for the unit disk: the barrier (1 - |x|^2)/4 has
    Laplacian -1 and peaks at 1/4. The discrete operator reproduces the
    barrier exactly (quadratic exactness of the unequal-arm stencil), so the
    inequality holds discretely up to solver tolerance.
    """
    g = problem.grid
    sup_w = float(np.abs(solution.values[g.inside]).max(initial=0.0))
    sup_f = float(np.abs(problem.rhs.values[g.unknown]).max(initial=0.0))
    op = assemble(g)
    if len(op._src_rows):
        gvals = boundary_values(problem.boundary, op._src_x, op._src_y)
        sup_g = float(np.abs(gvals).max(initial=0.0))
    else:
        sup_g = 0.0
    margin = 0.25 * sup_f + sup_g - sup_w
    return margin >= -1e-9 * max(1.0, sup_f + sup_g), margin
