"""The regularized energy J_{eps,lambda}, its H^1_0 gradient, the strong-form
PDE residual, the Choquard double integral, and the singular L^1 diagnostic.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import scalars as sc
from .grid import (Domain, GridFunction, h1_norm, l2_inner, laplacian_apply,
                   lp_norm, node_coordinates, poisson_solve, sup_norm)
from .riesz import apply_kernel_values, kernel_for

__all__ = [
    "ProblemConfig", "EPS_STAR", "choquard_double", "energy", "h1_gradient",
    "residual", "nonlinear_rhs", "singular_l1_diagnostic",
]

# admissible regularization range: min(eps0, 1/2) with eps0 = 1/3
EPS_STAR = min(sc.EPS0, 0.5)


@dataclass(frozen=True)
class ProblemConfig:
    """Full problem data for (P_{eps,lambda}) on a rectangle."""

    lam: float
    mu: float
    eps: float
    singular: sc.SingularParams
    model: sc.NonlinearityModel
    dom: Domain

    def __post_init__(self):
        if not self.lam > 0.0:
            raise ValueError("lambda must be positive")
        if not 0.0 < self.mu < 1.0:
            raise ValueError("mu must lie in (0, 1)")
        if not 0.0 < self.eps < EPS_STAR:
            raise ValueError(f"eps must lie in (0, {EPS_STAR:.6g})")
        if (self.singular.family == "power_log"
                and not self.singular.q < self.model.r0 - 1.0):
            raise ValueError("q < r0 - 1 is required")


def _saturation_check(u: GridFunction, cfg: ProblemConfig) -> None:
    if sup_norm(u) > cfg.model.t_sat:
        raise sc.SaturationError(
            f"iterate sup {sup_norm(u):.3g} exceeds the exp guard "
            f"{cfg.model.t_sat:.3g}")


def choquard_double(u: GridFunction, cfg: ProblemConfig,
                    backend: str = "fft") -> float:
    """Double integral iint F(u(y)) F(u(x)) |x-y|^(-mu): <K[F(u)], F(u)>.

    Within ~e^5 of the exp guard the product F*K[F] can overflow; the
    result is then +inf (the energy becomes -inf), which line searches and
    the barrier scan treat as deeply negative energy.
    """
    _saturation_check(u, cfg)
    fu = sc.F_eval(u.values, cfg.model)
    k = kernel_for(cfg.dom, cfg.mu)
    with np.errstate(over="ignore"):
        conv = apply_kernel_values(k, fu, backend)
        return float(np.sum(conv * fu) * cfg.dom.cell_area)


def energy(u: GridFunction, cfg: ProblemConfig, backend: str = "fft") -> float:
    """J(u) = ||u||^2/2 + int L_eps(u) - (lambda/2) * Choquard double term."""
    _saturation_check(u, cfg)
    l_term = float(np.sum(sc.L_eps_grid(u.values, cfg.eps, cfg.singular))
                   * cfg.dom.cell_area)
    return (0.5 * h1_norm(u) ** 2 + l_term
            - 0.5 * cfg.lam * choquard_double(u, cfg, backend))


def nonlinear_rhs(u: GridFunction, cfg: ProblemConfig,
                  backend: str = "fft") -> GridFunction:
    """l_eps(u) - lambda K[F(u)] f(u): the non-Laplacian part of the residual."""
    _saturation_check(u, cfg)
    fu = sc.F_eval(u.values, cfg.model)
    k = kernel_for(cfg.dom, cfg.mu)
    with np.errstate(over="ignore"):
        conv = apply_kernel_values(k, fu, backend)
        vals = (sc.l_eps(u.values, cfg.eps, cfg.singular)
                - cfg.lam * conv * sc.f_eval(u.values, cfg.model))
    if not np.all(np.isfinite(vals)):
        raise sc.SaturationError("nonlinear term overflow near the exp guard")
    return GridFunction(u.dom, vals)


def h1_gradient(u: GridFunction, cfg: ProblemConfig,
                backend: str = "fft") -> GridFunction:
    """Riesz representative of J' in H^1_0: u + (-lap)^(-1)(nonlinear part)."""
    return u + poisson_solve(nonlinear_rhs(u, cfg, backend))


def residual(u: GridFunction, cfg: ProblemConfig,
             backend: str = "fft") -> GridFunction:
    """Strong-form residual -lap(u) + l_eps(u) - lambda K[F(u)] f(u)."""
    return laplacian_apply(u) + nonlinear_rhs(u, cfg, backend)


def residual_scale(u: GridFunction, cfg: ProblemConfig,
                   backend: str = "fft") -> float:
    """1 + |nonlinear part|_2: the natural size for residual tolerances."""
    return 1.0 + lp_norm(nonlinear_rhs(u, cfg, backend), 2.0)


def singular_l1_diagnostic(u: GridFunction, cfg: ProblemConfig,
                           margin: float) -> float:
    """int over the margin-inset subrectangle of |l_limit(u)| on {u > 0}.

    Tracks the local integrability of the limit singularity across the
    continuation; finite on the grid by construction.
    """
    dom = u.dom
    if not 0.0 < margin < 0.5 * min(dom.Lx, dom.Ly):
        raise ValueError("margin must lie in (0, min(Lx, Ly)/2)")
    x, y = node_coordinates(dom)
    inside = ((x >= margin) & (x <= dom.Lx - margin)
              & (y >= margin) & (y <= dom.Ly - margin))
    mask = inside & (u.values > 0.0)
    if not np.any(mask):
        return 0.0
    vals = np.abs(sc.l_limit(u.values[mask], cfg.singular))
    return float(np.sum(vals) * dom.cell_area)
