"""Piecewise-Chebyshev antiderivative tables for scalar integrands.

Backs the cached antiderivatives of the regularized singular term and of
the nonlinearity: a one-time panel-wise Chebyshev fit of the integrand is
integrated exactly, giving a vectorized evaluator that grid-sized callers
can hit millions of times without re-running adaptive quadrature. Panels
are fitted in batched rounds (one matrix product per refinement level), so
building a table costs a few milliseconds.
"""
from __future__ import annotations

import numpy as np


class QuadratureError(RuntimeError):
    """Quadrature or panel fit failed to reach the requested tolerance."""

    def __init__(self, message: str, achieved: float):
        super().__init__(f"{message} (achieved tolerance {achieved:.3e})")
        self.achieved = achieved


def _fit_matrix(npts: int) -> tuple[np.ndarray, np.ndarray]:
    # Chebyshev points of the first kind and the interpolation matrix
    # (discrete orthogonality: coef = FIT @ values)
    theta = (np.arange(npts) + 0.5) * np.pi / npts
    x = np.cos(theta)
    k = np.arange(npts)[:, None]
    fit = (2.0 / npts) * np.cos(k * theta[None, :])
    fit[0] *= 0.5
    return x, fit


class ChebyshevAntiderivative:
    """Antiderivative of ``fun`` on [knots[0], knots[-1]], vanishing at the left end.

    Each panel holds a Chebyshev interpolant of the integrand, bisected until
    its coefficient tail is negligible (relative decay, or absolute panel
    contribution under the tolerance floor), then integrated term by term.
    Evaluation is a vectorized Clenshaw recurrence over per-point panel
    coefficients. Instances are immutable after build and safe to share
    across threads.
    """

    def __init__(self, fun, knots, degree: int = 24, tail_tol: float = 2e-14,
                 max_depth: int = 14):
        knots = np.unique(np.asarray(knots, dtype=float))
        if knots.size < 2:
            raise ValueError("need at least two knots")
        npts = degree + 1
        xref, fit = _fit_matrix(npts)

        # entries: (a, b, coef-or-None); refine pending panels in rounds
        entries: list = [[a, b, None] for a, b in zip(knots[:-1], knots[1:])]
        for _ in range(max_depth + 1):
            pending = [i for i, e in enumerate(entries) if e[2] is None]
            if not pending:
                break
            a = np.array([entries[i][0] for i in pending])
            b = np.array([entries[i][1] for i in pending])
            pts = 0.5 * (a[:, None] * (1.0 - xref) + b[:, None] * (1.0 + xref))
            vals = fun(pts.ravel()).reshape(pts.shape)
            coef = vals @ fit.T
            tail = np.abs(coef[:, -3:]).max(axis=1)
            scale = np.maximum(np.abs(coef).max(axis=1), 1e-30)
            ok = (tail <= tail_tol * scale) | (tail * (b - a) <= 2e-15)
            for j, i in enumerate(pending):
                if ok[j]:
                    entries[i][2] = coef[j]
            # split failures in place, preserving order
            for j, i in sorted(enumerate(pending), key=lambda t: -t[1]):
                if not ok[j]:
                    lo, hi = entries[i][0], entries[i][1]
                    mid = 0.5 * (lo + hi)
                    entries[i: i + 1] = [[lo, mid, None], [mid, hi, None]]
        bad = [e for e in entries if e[2] is None]
        if bad:
            raise QuadratureError(
                f"panel [{bad[0][0]:g}, {bad[0][1]:g}] did not converge",
                float("nan"))

        m = len(entries)
        ncoef = degree + 2
        self.breaks = np.empty(m + 1)
        self.breaks[:-1] = [e[0] for e in entries]
        self.breaks[-1] = entries[-1][1]
        widths = np.diff(self.breaks)
        c = np.vstack([e[2] for e in entries])
        cp = np.hstack([c, np.zeros((m, 2))])
        bcoef = np.zeros((m, ncoef))
        kk = np.arange(1, ncoef)
        left = cp[:, 0:ncoef - 1].copy()
        left[:, 0] *= 2.0  # the k=1 term integrates c_0 T_0 to c_0 T_1
        bcoef[:, 1:] = (left - cp[:, 2:ncoef + 1]) / (2.0 * kk)
        bcoef *= 0.5 * widths[:, None]
        signs = (-1.0) ** kk
        bcoef[:, 0] = -bcoef[:, 1:] @ signs  # vanish at the panel's left edge
        ends = bcoef.sum(axis=1)             # value at the right edge
        offsets = np.concatenate([[0.0], np.cumsum(ends)[:-1]])
        bcoef[:, 0] += offsets
        self.coefs = bcoef

    @property
    def tmax(self) -> float:
        return float(self.breaks[-1])

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        scalar = t.ndim == 0
        x = np.atleast_1d(t).ravel()
        idx = np.clip(np.searchsorted(self.breaks, x, side="right") - 1,
                      0, len(self.coefs) - 1)
        a = self.breaks[idx]
        b = self.breaks[idx + 1]
        s = (2.0 * x - (a + b)) / (b - a)
        c = self.coefs[idx]
        b1 = np.zeros_like(s)
        b2 = np.zeros_like(s)
        for k in range(c.shape[1] - 1, 0, -1):
            b1, b2 = c[:, k] + 2.0 * s * b1 - b2, b1
        out = c[:, 0] + s * b1 - b2
        return float(out[0]) if scalar else out.reshape(t.shape)


def geometric_knots(lo: float, hi: float, ratio: float = 3.0) -> np.ndarray:
    """Knots from lo to hi with roughly geometric spacing (endpoints included)."""
    n = max(int(np.ceil(np.log(hi / lo) / np.log(ratio))), 1)
    return np.geomspace(lo, hi, n + 1)
