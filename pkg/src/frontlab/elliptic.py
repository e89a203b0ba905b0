"""Fast direct solvers for Poisson and implicit-diffusion problems.

The plans diagonalize the 3-point finite-difference Laplacian, not the
continuum operator: DST-I modes are its exact eigenvectors under
Dirichlet ends, DCT-I modes under reflective Neumann ends.  Solves are
therefore exact relative to the stencils, up to transform round-off.

Inhomogeneous Dirichlet data in x (temperature fields) must be lifted to
homogeneous form first; linear_lift/lift_x/unlift_x do that.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy.fft import dct, dst, idct, idst

from .errors import ConfigurationError
from .grid import (
    DIRICHLET,
    NEUMANN,
    BoundaryKind,
    ScalarField,
    StripGrid,
    vorticity_bc,
)

SINE = "sine"
COSINE = "cosine"


def _mode_eigenvalues(n: int, h: float, kind: str) -> np.ndarray:
    """Eigenvalues of the 1D 3-point Laplacian under the given transform."""
    if kind == SINE:
        k = np.arange(1, n - 1)
    else:
        k = np.arange(n)
    return -(4.0 / h**2) * np.sin(np.pi * k / (2.0 * (n - 1))) ** 2


def _axis_kind(end_kind: str) -> str:
    if end_kind == DIRICHLET:
        return SINE
    if end_kind == NEUMANN:
        return COSINE
    raise ConfigurationError(f"no transform for boundary kind {end_kind!r}")


class EllipticPlan:
    """Immutable transform plan for one (grid, bc) pair.

    Dirichlet directions transform the interior nodes with DST-I; Neumann
    directions transform all nodes with DCT-I.  Dirichlet boundary values
    are treated as homogeneous; callers lift inhomogeneities.
    """

    def __init__(self, grid: StripGrid, bc: BoundaryKind):
        if bc.x_periodic:
            raise ConfigurationError("periodic plans are not supported here")
        if bc.x_left.kind != bc.x_right.kind:
            raise ConfigurationError("mixed x-end kinds have no transform plan")
        self.grid = grid
        self.bc = bc
        self.x_kind = _axis_kind(bc.x_left.kind)
        self.z_kind = _axis_kind(
            DIRICHLET if bc.z_walls == "dirichlet_zero" else NEUMANN
        )
        mux = _mode_eigenvalues(grid.nx, grid.hx, self.x_kind)
        muz = _mode_eigenvalues(grid.nz, grid.hz, self.z_kind)
        self.eigenvalues = mux[:, None] + muz[None, :]
        self._xsl = slice(1, -1) if self.x_kind == SINE else slice(None)
        self._zsl = slice(1, -1) if self.z_kind == SINE else slice(None)

    @property
    def has_zero_mode(self) -> bool:
        return self.x_kind == COSINE and self.z_kind == COSINE

    def _forward(self, a: np.ndarray) -> np.ndarray:
        a = dst(a, type=1, axis=0) if self.x_kind == SINE else dct(a, type=1, axis=0)
        a = dst(a, type=1, axis=1) if self.z_kind == SINE else dct(a, type=1, axis=1)
        return a

    def _inverse(self, a: np.ndarray) -> np.ndarray:
        a = idst(a, type=1, axis=0) if self.x_kind == SINE else idct(a, type=1, axis=0)
        a = idst(a, type=1, axis=1) if self.z_kind == SINE else idct(a, type=1, axis=1)
        return a

    def _solve(self, rhs: np.ndarray, denom: np.ndarray) -> np.ndarray:
        """Solve denom(mu) * u_hat = rhs_hat on the plan's lattice."""
        out = np.zeros(self.grid.shape)
        core = rhs[self._xsl, self._zsl]
        out[self._xsl, self._zsl] = self._inverse(self._forward(core) / denom)
        return out

    def solve_poisson(self, rhs: ScalarField) -> ScalarField:
        if self.has_zero_mode:
            raise ConfigurationError("Poisson is singular for an all-Neumann plan")
        u = self._solve(rhs.values, self.eigenvalues)
        return ScalarField(self.grid, u, self.bc)

    def solve_helmholtz(self, rhs: ScalarField, s: float) -> ScalarField:
        if s < 0:
            raise ConfigurationError("anti-diffusion (s < 0) is not allowed")
        if s == 0.0:
            return ScalarField(self.grid, rhs.values.copy(), self.bc)
        u = self._solve(rhs.values, 1.0 - s * self.eigenvalues)
        return ScalarField(self.grid, u, self.bc)


@lru_cache(maxsize=32)
def plan_for(grid: StripGrid, bc: BoundaryKind) -> EllipticPlan:
    return EllipticPlan(grid, bc)


def poisson_dirichlet(rhs: ScalarField) -> ScalarField:
    """Solve lap(u) = rhs with u = 0 on all four sides."""
    plan = plan_for(rhs.grid, vorticity_bc())
    return plan.solve_poisson(rhs)


def helmholtz_solve(rhs: ScalarField, s: float, bc: BoundaryKind) -> ScalarField:
    """Solve (I - s*lap) u = rhs under bc (Dirichlet parts homogeneous)."""
    plan = plan_for(rhs.grid, bc)
    return plan.solve_helmholtz(rhs, s)


def poincare_mode_constant(bc: BoundaryKind, grid: StripGrid) -> float:
    """1/sqrt(|mu_min|) for the smallest-magnitude nonzero eigenvalue.

    Converges to lam/pi on a long strip with Dirichlet walls.
    """
    plan = plan_for(grid, bc)
    if plan.has_zero_mode:
        raise ConfigurationError("all-Neumann plan has a zero mode")
    mu = np.abs(plan.eigenvalues)
    mu_min = mu[mu > 0.0].min()
    return float(1.0 / np.sqrt(mu_min))


def linear_lift(grid: StripGrid, left: float, right: float) -> np.ndarray:
    """x-linear field with the given end values, shape (nx, 1).

    Its ghost-aware Laplacian vanishes identically, so subtracting it
    turns an inhomogeneous-Dirichlet solve into a homogeneous one.
    """
    t = (grid.x + grid.a) / (2.0 * grid.a)
    return (left + (right - left) * t)[:, None]


def lift_x(field: ScalarField) -> tuple[ScalarField, float, float]:
    """Subtract the linear interpolant of the field's own x-end values."""
    left = float(field.values[0, :].mean())
    right = float(field.values[-1, :].mean())
    hom = field.values - linear_lift(field.grid, left, right)
    return ScalarField(field.grid, hom, None), left, right


def unlift_x(field: ScalarField, left: float, right: float, bc: BoundaryKind) -> ScalarField:
    values = field.values + linear_lift(field.grid, left, right)
    return ScalarField(field.grid, values, bc)
