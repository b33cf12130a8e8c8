"""Discrete polyharmonic operators (-Delta)^m on intervals, rectangles and
radial balls, with Dirichlet (clamped) or Navier (hinged) conditions.

Grids store interior nodes only; boundary values are identically zero and
never materialized.  Quadrature weights double as the inner-product weights,
so every operator built here is exactly self-adjoint with respect to the
discrete integral, not merely up to truncation error:

  interval   x_i = (i+1)h, h = L/(n+1), weight h per node (trapezoid with
             zero boundary values)
  rectangle  tensor product of interval grids, weight hx*hy, row-major
             flattening u[ix, iy] -> ix*ny + iy
  ball       radial nodes r_i = i*h, h = R/n (center included, boundary
             excluded); the Laplacian is a finite-volume balance over the
             shells [r_i - h/2, r_i + h/2] with exact face areas and exact
             shell volumes.  The r = 0 row reduces to (2N/h^2)(u_0 - u_1),
             the symmetric-ghost limit N u''(0), and the scheme applied to
             quadratics in r^2 is exact to rounding.

Navier (-Delta)^m is the m-fold composition of the Dirichlet Laplacian.
Dirichlet m = 2 is the composed Laplacian plus a diagonal ghost-reflection
correction (+2/h^4 at nodes adjacent to a flat boundary face, the radial
analogue at the last shell), which reproduces the classical clamped stencil
while keeping the weighted symmetry exact.  Dirichlet with m >= 3 is out of
scope and rejected.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .errors import ConvergenceError, ValidationError

DIRICHLET = "dirichlet"
NAVIER = "navier"

_MIN_NODES = 16


def unit_sphere_measure(N: int) -> float:
    """Surface measure of the unit sphere in R^N (N=3 gives 4 pi)."""
    return 2.0 * math.pi ** (N / 2.0) / math.gamma(N / 2.0)


class Domain:
    """Interior-node grid plus quadrature; see the module docstring for the
    node layouts.  Construct through the interval/rectangle/ball factories."""

    def __init__(self, kind: str, **geom):
        self.kind = kind
        self.__dict__.update(geom)

    # -- factories ----------------------------------------------------------

    @classmethod
    def interval(cls, length: float = 1.0, nodes: int = 256) -> "Domain":
        _check_nodes(nodes)
        if not length > 0:
            raise ValidationError("interval length must be positive")
        h = length / (nodes + 1)
        x = h * np.arange(1, nodes + 1)
        return cls(
            "interval",
            length=float(length),
            n=nodes,
            h=h,
            x=x,
            volumes=np.full(nodes, h),
        )

    @classmethod
    def rectangle(
        cls, lx: float, ly: float, nx: int = 48, ny: int = 48
    ) -> "Domain":
        _check_nodes(nx)
        _check_nodes(ny)
        if not (lx > 0 and ly > 0):
            raise ValidationError("rectangle sides must be positive")
        hx, hy = lx / (nx + 1), ly / (ny + 1)
        x = hx * np.arange(1, nx + 1)
        y = hy * np.arange(1, ny + 1)
        return cls(
            "rectangle",
            lx=float(lx), ly=float(ly),
            nx=nx, ny=ny, n=nx * ny,
            hx=hx, hy=hy, x=x, y=y,
            volumes=np.full(nx * ny, hx * hy),
        )

    @classmethod
    def ball(cls, radius: float = 1.0, dim: int = 3, nodes: int = 256) -> "Domain":
        _check_nodes(nodes)
        if isinstance(dim, bool) or not isinstance(dim, int) or dim < 2:
            raise ValidationError("ball dimension must be an integer >= 2")
        if not radius > 0:
            raise ValidationError("ball radius must be positive")
        h = radius / nodes
        r = h * np.arange(nodes)
        omega = unit_sphere_measure(dim)
        outer = (r + h / 2.0) ** dim
        inner = np.maximum(r - h / 2.0, 0.0) ** dim
        volumes = omega * (outer - inner) / dim
        return cls(
            "ball",
            radius=float(radius), dim=dim,
            n=nodes, h=h, r=r,
            omega=omega, volumes=volumes,
        )

    # -- quadrature ---------------------------------------------------------

    def check_values(self, values: np.ndarray) -> np.ndarray:
        values = np.asarray(values, dtype=float)
        if values.shape != (self.n,):
            raise ValidationError(
                f"field has shape {values.shape}, domain holds {self.n} nodes"
            )
        if not np.all(np.isfinite(values)):
            raise ValidationError("field contains non-finite values")
        return values

    def integrate(self, values: np.ndarray) -> float:
        return float(np.dot(self.volumes, self.check_values(values)))

    def inner(self, u: np.ndarray, v: np.ndarray) -> float:
        return float(np.dot(self.volumes, np.asarray(u) * np.asarray(v)))

    def sup_norm(self, values: np.ndarray) -> float:
        return float(np.max(np.abs(self.check_values(values))))

    def coordinate_columns(self) -> tuple[list[str], list[np.ndarray]]:
        """Column names and arrays locating each node, for CSV emission."""
        if self.kind == "interval":
            return ["x"], [self.x]
        if self.kind == "ball":
            return ["r"], [self.r]
        xg, yg = np.meshgrid(self.x, self.y, indexing="ij")
        return ["x", "y"], [xg.ravel(), yg.ravel()]


def _check_nodes(n) -> None:
    if isinstance(n, bool) or not isinstance(n, int) or n < _MIN_NODES:
        raise ValidationError(f"resolution must be an integer >= {_MIN_NODES} nodes per axis")


@dataclass
class GridField:
    """Sampled function on a domain grid."""

    domain: Domain
    values: np.ndarray

    def __post_init__(self) -> None:
        self.values = self.domain.check_values(self.values)

    def integrate(self) -> float:
        return self.domain.integrate(self.values)

    def sup_norm(self) -> float:
        return self.domain.sup_norm(self.values)


@dataclass(frozen=True)
class FaceTrace:
    """Samples of |D^m u| on one boundary face with its surface weights."""

    label: str
    values: np.ndarray
    weights: np.ndarray


def _laplacian_1d(n: int, h: float) -> sp.csr_matrix:
    main = np.full(n, 2.0 / h**2)
    off = np.full(n - 1, -1.0 / h**2)
    return sp.diags([off, main, off], [-1, 0, 1], format="csr")


def _laplacian_ball(domain: Domain) -> sp.csr_matrix:
    n, h, dim, omega = domain.n, domain.h, domain.dim, domain.omega
    faces = omega * ((np.arange(n) + 0.5) * h) ** (dim - 1)   # face i+1/2
    diag = np.empty(n)
    diag[0] = faces[0] / h
    diag[1:] = (faces[:-1] + faces[1:]) / h
    off = -faces[:-1] / h
    M = sp.diags([off, diag, off], [-1, 0, 1], format="csr")
    return sp.diags(1.0 / domain.volumes) @ M


def build_laplacian(domain: Domain) -> sp.csr_matrix:
    """Discrete -Delta with zero Dirichlet values on interior nodes."""
    if domain.kind == "interval":
        return _laplacian_1d(domain.n, domain.h)
    if domain.kind == "ball":
        return _laplacian_ball(domain)
    Px = _laplacian_1d(domain.nx, domain.hx)
    Py = _laplacian_1d(domain.ny, domain.hy)
    return (
        sp.kron(Px, sp.identity(domain.ny), format="csr")
        + sp.kron(sp.identity(domain.nx), Py, format="csr")
    )


def _clamped_correction(domain: Domain) -> sp.csr_matrix:
    """Diagonal ghost-reflection terms turning Lap^2 into the clamped
    bilaplacian.  Flat faces contribute 2/h^4 at the adjacent interior node;
    the radial boundary contributes A_{n-1/2}/(h V_{n-1}) * 2/h^2."""
    if domain.kind == "interval":
        d = np.zeros(domain.n)
        d[0] = d[-1] = 2.0 / domain.h**4
    elif domain.kind == "ball":
        d = np.zeros(domain.n)
        face = domain.omega * (domain.radius - domain.h / 2.0) ** (domain.dim - 1)
        d[-1] = face / (domain.h * domain.volumes[-1]) * 2.0 / domain.h**2
    else:
        d2 = np.zeros((domain.nx, domain.ny))
        d2[0, :] += 2.0 / domain.hx**4
        d2[-1, :] += 2.0 / domain.hx**4
        d2[:, 0] += 2.0 / domain.hy**4
        d2[:, -1] += 2.0 / domain.hy**4
        d = d2.ravel()
    return sp.diags(d, format="csr")


class PolyharmonicOperator:
    """apply / solve / quadratic form / boundary trace for (-Delta)^m."""

    def __init__(self, domain: Domain, m: int, bc: str):
        if isinstance(m, bool) or not isinstance(m, int) or m < 1:
            raise ValidationError("operator order m must be an integer >= 1")
        if bc not in (DIRICHLET, NAVIER):
            raise ValidationError(f"unknown boundary-condition mode: {bc!r}")
        if bc == DIRICHLET and m > 2:
            raise ValidationError("Dirichlet supported for m <= 2")
        self.domain = domain
        self.m = m
        self.bc = bc
        self.P = build_laplacian(domain)
        try:
            self._lu_P = splu(self.P.tocsc())
            if bc == DIRICHLET and m == 2:
                self.B = (self.P @ self.P + _clamped_correction(domain)).tocsr()
                self._lu_B = splu(self.B.tocsc())
            else:
                self.B = None
                self._lu_B = None
        except RuntimeError as exc:
            raise RuntimeError(f"operator factorization failed: {exc}") from exc
        self._eig: tuple[float, np.ndarray] | None = None

    # -- linear algebra -----------------------------------------------------

    def apply(self, u: np.ndarray) -> np.ndarray:
        u = self.domain.check_values(u)
        if self.B is not None:
            return self.B @ u
        v = u
        for _ in range(self.m):
            v = self.P @ v
        return v

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        rhs = self.domain.check_values(rhs)
        if self._lu_B is not None:
            return self._lu_B.solve(rhs)
        v = rhs
        for _ in range(self.m):
            v = self._lu_P.solve(v)
        return v

    def inner(self, u: np.ndarray, v: np.ndarray) -> float:
        return self.domain.inner(u, v)

    def form(self, u: np.ndarray) -> float:
        """Discrete integral |D^m u|^2.  Summation by parts is exact for the
        weighted inner product, so both parities of m collapse to <Au, u>."""
        return self.inner(self.apply(u), u)

    def principal_eigenpair(
        self, tol: float = 1e-10, max_iter: int = 10_000
    ) -> tuple[float, np.ndarray]:
        """Smallest eigenvalue and positive, form-normalized eigenfunction,
        by inverse power iteration from the all-ones start."""
        if self._eig is not None:
            return self._eig
        x = np.ones(self.domain.n)
        x /= math.sqrt(self.inner(x, x))
        lam_old = math.inf
        for _ in range(max_iter):
            y = self.solve(x)
            lam = self.inner(x, y) / self.inner(y, y)
            x = y / math.sqrt(self.inner(y, y))
            if abs(lam - lam_old) <= tol * abs(lam):
                break
            lam_old = lam
        else:
            raise ConvergenceError("inverse power iteration did not converge")
        if self.domain.integrate(x) < 0:
            x = -x
        lam = self.form(x)                      # Rayleigh at the iterate
        w0 = x / math.sqrt(lam)                 # form(w0) = 1
        self._eig = (float(lam), w0)
        return self._eig

    # -- boundary machinery ---------------------------------------------------

    def check_boundary_compliance(self, u: np.ndarray) -> None:
        """Reject fields that violate the boundary conditions beyond a
        resolution-aware tolerance.  Only the clamped normal derivative is
        observable from interior samples; everything else is structural."""
        u = self.domain.check_values(u)
        if not (self.bc == DIRICHLET and self.m == 2):
            return
        sup = self.domain.sup_norm(u)
        worst = 0.0
        for face in self._normal_derivative_faces(u):
            worst = max(worst, float(np.max(np.abs(face.values))))
        h = max(self._face_steps())
        tol = max(1e-6, 25.0 * h * h) * (1.0 + sup)
        if worst > tol:
            raise ValidationError(
                f"boundary conditions violated: |du/dnu| up to {worst:.3e} "
                f"exceeds tolerance {tol:.3e}"
            )

    def boundary_trace(self, u: np.ndarray, check: bool = True) -> list[FaceTrace]:
        """Samples of |D^m u| on the boundary: the normal derivative of
        Delta^((m-1)/2) u for odd m (one-sided, second order), boundary
        values of Delta^(m/2) u for even m (zero under Navier conditions,
        ghost-reflected under clamped conditions)."""
        u = self.domain.check_values(u)
        if check:
            self.check_boundary_compliance(u)
        if self.m % 2 == 1:
            v = u
            for _ in range((self.m - 1) // 2):
                v = self.P @ v
            return self._normal_derivative_faces(v)
        if self.bc == NAVIER:
            return [
                FaceTrace(f.label, np.zeros_like(f.values), f.weights)
                for f in self._normal_derivative_faces(u)
            ]
        return self._clamped_boundary_laplacian_faces(u)

    def _face_steps(self) -> list[float]:
        d = self.domain
        return [d.hx, d.hy] if d.kind == "rectangle" else [d.h]

    def _normal_derivative_faces(self, v: np.ndarray) -> list[FaceTrace]:
        d = self.domain
        if d.kind == "interval":
            h = d.h
            left = (4.0 * v[0] - v[1]) / (2.0 * h)
            right = (4.0 * v[-1] - v[-2]) / (2.0 * h)
            one = np.ones(1)
            return [
                FaceTrace("x=0", np.array([left]), one.copy()),
                FaceTrace("x=L", np.array([right]), one.copy()),
            ]
        if d.kind == "ball":
            h = d.h
            val = (4.0 * v[-1] - v[-2]) / (2.0 * h)
            w = d.omega * d.radius ** (d.dim - 1)
            return [FaceTrace("r=R", np.array([val]), np.array([w]))]
        g = v.reshape(d.nx, d.ny)
        faces = [
            ("x=0", (4.0 * g[0, :] - g[1, :]) / (2.0 * d.hx), np.full(d.ny, d.hy)),
            ("x=lx", (4.0 * g[-1, :] - g[-2, :]) / (2.0 * d.hx), np.full(d.ny, d.hy)),
            ("y=0", (4.0 * g[:, 0] - g[:, 1]) / (2.0 * d.hy), np.full(d.nx, d.hx)),
            ("y=ly", (4.0 * g[:, -1] - g[:, -2]) / (2.0 * d.hy), np.full(d.nx, d.hx)),
        ]
        return [FaceTrace(lbl, vals, w) for lbl, vals, w in faces]

    def _clamped_boundary_laplacian_faces(self, u: np.ndarray) -> list[FaceTrace]:
        d = self.domain
        if d.kind == "interval":
            h = d.h
            one = np.ones(1)
            return [
                FaceTrace("x=0", np.array([2.0 * u[0] / h**2]), one.copy()),
                FaceTrace("x=L", np.array([2.0 * u[-1] / h**2]), one.copy()),
            ]
        if d.kind == "ball":
            w = d.omega * d.radius ** (d.dim - 1)
            return [FaceTrace("r=R", np.array([2.0 * u[-1] / d.h**2]), np.array([w]))]
        g = u.reshape(d.nx, d.ny)
        faces = [
            ("x=0", 2.0 * g[0, :] / d.hx**2, np.full(d.ny, d.hy)),
            ("x=lx", 2.0 * g[-1, :] / d.hx**2, np.full(d.ny, d.hy)),
            ("y=0", 2.0 * g[:, 0] / d.hy**2, np.full(d.nx, d.hx)),
            ("y=ly", 2.0 * g[:, -1] / d.hy**2, np.full(d.nx, d.hx)),
        ]
        return [FaceTrace(lbl, vals, w) for lbl, vals, w in faces]


def build_operator(domain: Domain, m: int, bc: str) -> PolyharmonicOperator:
    return PolyharmonicOperator(domain, m, bc)
