"""Uniform rectangular Dirichlet grids: discrete Laplacian, fast sine-basis
Poisson solve, norms, the gradient-estimate weight, and the GRD2 dump format.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.fft as sfft

__all__ = [
    "Domain", "GridFunction", "laplacian_apply", "poisson_solve",
    "h1_norm", "h1_inner", "l2_inner", "lp_norm", "sup_norm",
    "weight_psi", "psi_gradient_ratio_sup", "node_coordinates",
    "write_grd2", "read_grd2",
]

GRD2_MAGIC = b"GRD2"
GRD2_VERSION = 1
_HEADER = struct.Struct("<4sIIIdd")  # magic, version, nx, ny, Lx, Ly (32 bytes)


@dataclass(frozen=True)
class Domain:
    """Rectangle (0,Lx)x(0,Ly) with nx x ny interior nodes, zero trace."""

    Lx: float
    Ly: float
    nx: int
    ny: int

    def __post_init__(self):
        if not (self.Lx > 0.0 and self.Ly > 0.0):
            raise ValueError("side lengths must be positive")
        if self.nx < 3 or self.ny < 3:
            raise ValueError("need at least 3 interior nodes per axis")

    @property
    def hx(self) -> float:
        return self.Lx / (self.nx + 1)

    @property
    def hy(self) -> float:
        return self.Ly / (self.ny + 1)

    @property
    def cell_area(self) -> float:
        return self.hx * self.hy


@lru_cache(maxsize=64)
def node_coordinates(dom: Domain) -> tuple[np.ndarray, np.ndarray]:
    """Interior node coordinates as broadcastable (nx,1) and (1,ny) arrays."""
    x = (np.arange(1, dom.nx + 1) * dom.hx)[:, None]
    y = (np.arange(1, dom.ny + 1) * dom.hy)[None, :]
    return x, y


class GridFunction:
    """Values on interior nodes, shape (nx, ny), implicit zero boundary."""

    __slots__ = ("dom", "values")

    def __init__(self, dom: Domain, values):
        values = np.asarray(values, dtype=float)
        if values.shape != (dom.nx, dom.ny):
            raise ValueError(f"expected shape {(dom.nx, dom.ny)}, got {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("non-finite grid values")
        self.dom = dom
        self.values = values

    @classmethod
    def zeros(cls, dom: Domain) -> "GridFunction":
        return cls(dom, np.zeros((dom.nx, dom.ny)))

    @classmethod
    def from_callable(cls, dom: Domain, fn) -> "GridFunction":
        x, y = node_coordinates(dom)
        return cls(dom, np.broadcast_to(fn(x, y), (dom.nx, dom.ny)).copy())

    def copy(self) -> "GridFunction":
        return GridFunction(self.dom, self.values.copy())

    def _binop(self, other, op):
        if isinstance(other, GridFunction):
            if other.dom != self.dom:
                raise ValueError("domain mismatch")
            return GridFunction(self.dom, op(self.values, other.values))
        return GridFunction(self.dom, op(self.values, other))

    def __add__(self, other):
        return self._binop(other, np.add)

    def __sub__(self, other):
        return self._binop(other, np.subtract)

    def __mul__(self, c):
        return GridFunction(self.dom, self.values * float(c))

    __rmul__ = __mul__

    def __neg__(self):
        return GridFunction(self.dom, -self.values)


def _lap(values: np.ndarray, hx: float, hy: float) -> np.ndarray:
    p = np.pad(values, 1)
    return ((2.0 * values - p[:-2, 1:-1] - p[2:, 1:-1]) / hx ** 2
            + (2.0 * values - p[1:-1, :-2] - p[1:-1, 2:]) / hy ** 2)


def laplacian_apply(u: GridFunction) -> GridFunction:
    """5-point minus-Laplacian with implicit zero Dirichlet padding."""
    return GridFunction(u.dom, _lap(u.values, u.dom.hx, u.dom.hy))


@lru_cache(maxsize=64)
def _sine_eigenvalues(dom: Domain) -> np.ndarray:
    kx = np.arange(1, dom.nx + 1)
    ky = np.arange(1, dom.ny + 1)
    lx = (2.0 - 2.0 * np.cos(np.pi * kx / (dom.nx + 1))) / dom.hx ** 2
    ly = (2.0 - 2.0 * np.cos(np.pi * ky / (dom.ny + 1))) / dom.hy ** 2
    return lx[:, None] + ly[None, :]


def poisson_solve(rhs: GridFunction) -> GridFunction:
    """Solve laplacian_apply(u) = rhs by diagonalization in the DST-I basis."""
    lam = _sine_eigenvalues(rhs.dom)
    fhat = sfft.dstn(rhs.values, type=1, norm="ortho")
    return GridFunction(rhs.dom, sfft.dstn(fhat / lam, type=1, norm="ortho"))


def _edge_diffs(u: GridFunction) -> tuple[np.ndarray, np.ndarray]:
    p = np.pad(u.values, 1)
    dx = np.diff(p[:, 1:-1], axis=0) / u.dom.hx  # (nx+1, ny)
    dy = np.diff(p[1:-1, :], axis=1) / u.dom.hy  # (nx, ny+1)
    return dx, dy


def h1_norm(u: GridFunction) -> float:
    """Energy norm: edge-summed squared differences times cell area."""
    dx, dy = _edge_diffs(u)
    return float(np.sqrt((np.sum(dx * dx) + np.sum(dy * dy)) * u.dom.cell_area))


def h1_inner(u: GridFunction, v: GridFunction) -> float:
    if u.dom != v.dom:
        raise ValueError("domain mismatch")
    ux, uy = _edge_diffs(u)
    vx, vy = _edge_diffs(v)
    return float((np.sum(ux * vx) + np.sum(uy * vy)) * u.dom.cell_area)


def l2_inner(u: GridFunction, v: GridFunction) -> float:
    if u.dom != v.dom:
        raise ValueError("domain mismatch")
    return float(np.sum(u.values * v.values) * u.dom.cell_area)


def lp_norm(u: GridFunction, p: float) -> float:
    if not 1.0 <= p < np.inf:
        raise ValueError("p must lie in [1, inf)")
    return float((np.sum(np.abs(u.values) ** p) * u.dom.cell_area) ** (1.0 / p))


def sup_norm(u: GridFunction) -> float:
    return float(np.max(np.abs(u.values))) if u.values.size else 0.0


def weight_psi(dom: Domain) -> GridFunction:
    """psi = sin^2(pi x/Lx) sin^2(pi y/Ly): positive inside, zero trace,
    with |grad psi|^2/psi bounded (the Lemma-3.1 weight)."""
    x, y = node_coordinates(dom)
    return GridFunction(dom, np.sin(np.pi * x / dom.Lx) ** 2
                        * np.sin(np.pi * y / dom.Ly) ** 2)


def psi_gradient_ratio_sup(dom: Domain) -> float:
    """Discrete sup of |grad psi|^2 / psi over interior nodes (closed form:
    4 pi^2 [cos^2(pi x/Lx) sin^2(pi y/Ly)/Lx^2 + sym.])."""
    x, y = node_coordinates(dom)
    sx = np.sin(np.pi * x / dom.Lx) ** 2
    sy = np.sin(np.pi * y / dom.Ly) ** 2
    ratio = 4.0 * np.pi ** 2 * ((1.0 - sx) * sy / dom.Lx ** 2
                                + sx * (1.0 - sy) / dom.Ly ** 2)
    return float(np.max(ratio))


def write_grd2(u: GridFunction, path) -> None:
    """Bit-exact dump: 32-byte header (magic, version, nx, ny, Lx, Ly,
    little-endian) followed by nx*ny float64 values row-major."""
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(GRD2_MAGIC, GRD2_VERSION, u.dom.nx, u.dom.ny,
                              u.dom.Lx, u.dom.Ly))
        fh.write(u.values.astype("<f8").tobytes(order="C"))


def read_grd2(path) -> GridFunction:
    with open(path, "rb") as fh:
        header = fh.read(_HEADER.size)
        if len(header) != _HEADER.size:
            raise ValueError("truncated GRD2 header")
        magic, version, nx, ny, lx, ly = _HEADER.unpack(header)
        if magic != GRD2_MAGIC:
            raise ValueError("bad GRD2 magic")
        if version != GRD2_VERSION:
            raise ValueError(f"unsupported GRD2 version {version}")
        data = np.frombuffer(fh.read(nx * ny * 8), dtype="<f8")
        if data.size != nx * ny:
            raise ValueError("truncated GRD2 payload")
    return GridFunction(Domain(lx, ly, nx, ny), data.reshape(nx, ny).copy())
