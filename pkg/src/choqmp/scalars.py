"""Pointwise scalar terms: the regularized singular absorption l_eps and its
antiderivative, the singular limit, the gradient-estimate majorant Z, the
exponential-subcritical nonlinearity pair (f, F), and the sampled verification
of the closed-form estimates that hold uniformly in eps.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import integrate, optimize

from ._cheb import ChebyshevAntiderivative, QuadratureError, geometric_knots

__all__ = [
    "SingularParams", "NonlinearityModel", "SaturationError", "QuadratureError",
    "Violation", "ViolationReport", "l_eps", "L_eps", "l_limit", "Z_majorant",
    "z_prime", "z_breakpoint", "f_eval", "fprime_eval", "F_eval",
    "scalar_constants", "check_scalar_estimates", "check_nonlinearity_hypotheses",
    "l_eps_antiderivative", "kronecker_sequence",
]

EXP_GUARD = 700.0          # exp argument cap; beyond this doubles overflow
ESTIMATE_SLACK = 1e-12     # absolute slack for the (2.6)-(2.11) checks
SAFETY = 1.01              # padding factor for empirically estimated constants
EPS0 = 1.0 / 3.0           # validity threshold of the small-t log lower bound
T_RANGE_MAX = 20.0         # upper end of the sampled t ranges


class SaturationError(FloatingPointError):
    """Input would overflow exp; the caller should treat it as divergence."""


# ---------------------------------------------------------------------------
# parameter containers


@dataclass(frozen=True)
class SingularParams:
    """Parameters selecting the singular absorption family.

    power_log: l_eps(t) = -t^q/(t+eps)^(beta+q) * log(t + eps/(t+eps)),
    with limit singularity t^(-beta) log t.
    pure_log:  l_eps(t) = -|log A|^(k-2) log A with A = t + eps/(t+eps),
    with limit singularity |log t|^(k-2) log t.
    """

    family: str
    beta: float | None = None
    q: float | None = None
    k: int | None = None

    def __post_init__(self):
        if self.family == "power_log":
            if self.beta is None or not 0.0 < self.beta < 1.0:
                raise ValueError("power_log requires beta in (0, 1)")
            if self.q is None or not 0.0 < self.q < 1.0:
                raise ValueError("power_log requires q in (0, 1)")
            if self.k is not None:
                raise ValueError("k is a pure_log parameter")
        elif self.family == "pure_log":
            if self.k is None or int(self.k) != self.k or self.k < 2:
                raise ValueError("pure_log requires integer k >= 2")
            if self.beta is not None or self.q is not None:
                raise ValueError("beta/q are power_log parameters")
        else:
            raise ValueError(f"unknown family {self.family!r}")

    @classmethod
    def power_log(cls, beta: float, q: float) -> "SingularParams":
        return cls("power_log", beta=beta, q=q)

    @classmethod
    def pure_log(cls, k: int) -> "SingularParams":
        return cls("pure_log", k=int(k))


@dataclass(frozen=True)
class NonlinearityModel:
    """f(t) = t^r0 * exp(t^s) on t > 0, extended by zero on t <= 0.

    The exponents live in (1, 2): r0 gives the small-t power of (f3) and the
    monotonicity exponent of (f4); s < 2 keeps the growth subcritical for the
    exponential Trudinger-Moser regime and gives the (f5) exponent s - 1.
    F has no closed form; a piecewise-Chebyshev antiderivative covers
    [1/2, t_sat] and an exact power series covers [0, 1/2].
    """

    r0: float
    s: float
    _table: ChebyshevAntiderivative = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not 1.0 < self.r0 < 2.0:
            raise ValueError("r0 must lie in (1, 2)")
        if not 1.0 < self.s < 2.0:
            raise ValueError("s must lie in (1, 2)")
        object.__setattr__(self, "_table", _build_F_table(self.r0, self.s))

    @property
    def gamma0(self) -> float:
        """(f5) exponent: t^gamma0 F(t) <= T0 f(t) for large t."""
        return self.s - 1.0

    @property
    def l_mono(self) -> float:
        """(f4) exponent: f(t)/t^l_mono is nondecreasing."""
        return self.r0

    @property
    def t_sat(self) -> float:
        """Largest admissible argument: t^s <= EXP_GUARD."""
        return EXP_GUARD ** (1.0 / self.s)


def _F_series(t: np.ndarray, r0: float, s: float) -> np.ndarray:
    # F(t) = sum_k t^(r0+ks+1) / (k! (r0+ks+1)); converges fast for t <= 1/2
    out = np.zeros_like(t)
    term = t ** (r0 + 1.0)  # t^(r0+ks+1)/k!
    ts = t ** s
    for k in range(24):
        out += term / (r0 + k * s + 1.0)
        term = term * ts / (k + 1.0)
    return out


def _build_F_table(r0: float, s: float) -> ChebyshevAntiderivative:
    t_sat = EXP_GUARD ** (1.0 / s)
    # panel ends chosen so t^s advances by <= 3 per panel
    w = np.arange(0.5 ** s, EXP_GUARD + 3.0, 3.0)
    knots = np.concatenate([[0.5, 1.0], w ** (1.0 / s), [t_sat]])
    knots = np.unique(np.clip(knots, 0.5, t_sat))
    fun = lambda t: t ** r0 * np.exp(t ** s)
    # exp(t^s) carries relative noise ~ t^s * ulp near the guard; the tail
    # tolerance must sit above that floor
    return ChebyshevAntiderivative(fun, knots, degree=24, tail_tol=4e-13)


# ---------------------------------------------------------------------------
# the regularized singular term and its relatives


def _check_finite(t) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    if not np.all(np.isfinite(t)):
        raise ValueError("non-finite input")
    return t


def _check_eps(eps: float) -> float:
    eps = float(eps)
    if not 0.0 < eps < 1.0 or not math.isfinite(eps):
        raise ValueError("eps must lie in (0, 1)")
    return eps


def _log_arg(t, eps: float):
    # log(t + eps/(t+eps)) = log1p(t(t+eps-1)/(t+eps)): exact at the root
    # t = 1-eps and free of the 1e-7 relative noise of the naive form at t ~ 0
    return np.log1p(t * (t + eps - 1.0) / (t + eps))


def l_eps(t, eps: float, p: SingularParams):
    """Regularized singular term; zero on t <= 0, finite for all t >= 0."""
    t = _check_finite(t)
    eps = _check_eps(eps)
    scalar = t.ndim == 0
    tt = np.maximum(np.atleast_1d(t), 0.0)
    log_a = _log_arg(tt, eps)
    if p.family == "power_log":
        out = -tt ** p.q / (tt + eps) ** (p.beta + p.q) * log_a
    else:
        out = -np.abs(log_a) ** (p.k - 2) * log_a
    out = np.where(np.atleast_1d(t) > 0.0, out, 0.0)
    return float(out[0]) if scalar else out.reshape(t.shape)


def L_eps(t: float, eps: float, p: SingularParams) -> float:
    """Antiderivative of l_eps from 0 to t by adaptive quadrature (abs tol 1e-12)."""
    t = float(t)
    if not math.isfinite(t) or t < 0.0:
        raise ValueError("t must be finite and >= 0")
    eps = _check_eps(eps)
    if t == 0.0:
        return 0.0
    pts = [x for x in (eps, 1.0 - eps) if 0.0 < x < t]
    val, err = integrate.quad(lambda s: l_eps(s, eps, p), 0.0, t,
                              epsabs=1e-13, epsrel=1e-13, limit=200,
                              points=pts or None)
    if err > max(1e-12, 1e-13 * abs(val)):
        raise QuadratureError(f"L_eps({t}, {eps}) did not converge", err)
    return val


@lru_cache(maxsize=256)
def l_eps_antiderivative(eps: float, p: SingularParams,
                         tmax: float = 100.0) -> ChebyshevAntiderivative:
    """Cached vectorized evaluator of L_eps on (t0, tmax].

    The table starts at t0 = min(1e-10, eps*1e-4), below which |L_eps| is
    under 1e-13 and is treated as zero (Chebyshev panels cannot absorb the
    t^q endpoint, and the contribution is beneath the 1e-12 tolerance);
    geometric panels toward t0 absorb the remaining algebraic behavior.
    """
    eps = _check_eps(eps)
    t0 = min(1e-10, eps * 1e-4)
    knots = np.concatenate([
        geometric_knots(t0, 1.0, ratio=3.0),
        [eps, 1.0 - eps], np.arange(1.0, tmax + 0.5, 0.5), [tmax]])
    knots = np.unique(np.clip(knots, t0, tmax))
    return ChebyshevAntiderivative(lambda s: l_eps(s, eps, p), knots, degree=24)


def L_eps_grid(t, eps: float, p: SingularParams, tmax: float = 100.0):
    """Vectorized L_eps via the cached table; quad fallback beyond its range."""
    t = np.asarray(t, dtype=float)
    table = l_eps_antiderivative(eps, p, tmax)
    t_lo = float(table.breaks[0])
    out = table(np.clip(t, t_lo, table.tmax))
    out = np.where(t > 0.0, out, 0.0)
    high = t > table.tmax
    if np.any(high):
        out = np.array(out, copy=True)
        for idx in np.argwhere(high):
            out[tuple(idx)] = L_eps(float(t[tuple(idx)]), eps, p)
    return out


def l_limit(t, p: SingularParams):
    """Pointwise limit of -l_eps as eps -> 0; zero on t <= 0 by convention."""
    t = _check_finite(t)
    scalar = t.ndim == 0
    tt = np.where(np.atleast_1d(t) > 0.0, np.atleast_1d(t), 1.0)
    log_t = np.log(tt)
    if p.family == "power_log":
        out = tt ** (-p.beta) * log_t
    else:
        out = np.abs(log_t) ** (p.k - 2) * log_t
    out = np.where(np.atleast_1d(t) > 0.0, out, 0.0)
    return float(out[0]) if scalar else out.reshape(t.shape)


@lru_cache(maxsize=64)
def z_breakpoint(p: SingularParams) -> float:
    """Concavity breakpoint of Z: 1 for power_log, else the root t* of
    |log t|^(k-2)/t = 2/(k-1), found by bracketed bisection to 1e-12."""
    if p.family == "power_log":
        return 1.0
    g = lambda t: (-math.log(t)) ** (p.k - 2) - 2.0 * t / (p.k - 1)
    try:
        return float(optimize.brentq(g, 1e-12, 1.0 - 1e-12, xtol=1e-13))
    except ValueError as exc:  # no sign change: k invalid for the bracket
        raise ValueError(f"breakpoint root-finding failed for k={p.k}") from exc


def _pure_log_integral(t: np.ndarray, k: int) -> np.ndarray:
    # int_0^t |log s|^(k-2) log s ds = -(k-1)! t sum_j (-log t)^j / j!  (t <= 1)
    tt = np.where(t > 0.0, t, 1.0)
    y = -np.log(tt)
    acc = np.zeros_like(tt)
    term = np.ones_like(tt)
    for j in range(k):
        acc += term
        term = term * y / (j + 1.0)
    return np.where(t > 0.0, -math.factorial(k - 1) * tt * acc, 0.0)


def Z_majorant(t, p: SingularParams):
    """Gradient-estimate majorant: continuous, C^1 at the breakpoint,
    nondecreasing, Z(0) = 0, concave before the breakpoint, linear after."""
    t = _check_finite(t)
    if np.any(np.atleast_1d(t) < 0.0):
        raise ValueError("Z_majorant requires t >= 0")
    scalar = t.ndim == 0
    x = np.atleast_1d(t).astype(float)
    ts = z_breakpoint(p)
    if p.family == "power_log":
        b = p.beta
        xx = np.where((x > 0.0) & (x <= 1.0), x, 0.5)
        low = xx ** 2 / 2.0 + xx ** (1.0 - b) / (1.0 - b) ** 2 \
            - xx ** (1.0 - b) * np.log(xx) / (1.0 - b)
        high = x - 0.5 + 1.0 / (1.0 - b) ** 2
        out = np.where(x <= 1.0, np.where(x > 0.0, low, 0.0), high)
    else:
        k = p.k
        low = x ** 2 - _pure_log_integral(np.minimum(x, ts), k)
        z_star = ts ** 2 - _pure_log_integral(np.asarray([ts]), k)[0]
        slope = 2.0 * ts + (-math.log(ts)) ** (k - 1)
        out = np.where(x <= ts, low, z_star + (x - ts) * slope)
    return float(out[0]) if scalar else out.reshape(t.shape)


def z_prime(t, p: SingularParams):
    """Closed-form derivative of Z (t - t^(-beta) log t below the breakpoint)."""
    t = _check_finite(t)
    scalar = t.ndim == 0
    x = np.atleast_1d(t).astype(float)
    ts = z_breakpoint(p)
    xx = np.where((x > 0.0) & (x < ts), x, 0.5 * ts)
    if p.family == "power_log":
        low = xx - xx ** (-p.beta) * np.log(xx)
        high = 1.0
    else:
        low = 2.0 * xx + (-np.log(xx)) ** (p.k - 1)
        high = 2.0 * ts + (-math.log(ts)) ** (p.k - 1)
    out = np.where(x < ts, low, high)
    return float(out[0]) if scalar else out.reshape(t.shape)


# ---------------------------------------------------------------------------
# nonlinearity


def f_eval(t, m: NonlinearityModel):
    """f(t) = t^r0 exp(t^s); zero on t <= 0; raises SaturationError past the guard."""
    t = _check_finite(t)
    scalar = t.ndim == 0
    x = np.maximum(np.atleast_1d(t).astype(float), 0.0)
    if np.any(x > m.t_sat):
        raise SaturationError(f"t^s > {EXP_GUARD:g} would overflow exp")
    out = x ** m.r0 * np.exp(x ** m.s)
    out = np.where(np.atleast_1d(t) > 0.0, out, 0.0)
    return float(out[0]) if scalar else out.reshape(t.shape)


def fprime_eval(t, m: NonlinearityModel):
    """f'(t) = exp(t^s)(r0 t^(r0-1) + s t^(r0+s-1)); zero on t <= 0."""
    t = _check_finite(t)
    scalar = t.ndim == 0
    x = np.maximum(np.atleast_1d(t).astype(float), 0.0)
    if np.any(x > m.t_sat):
        raise SaturationError(f"t^s > {EXP_GUARD:g} would overflow exp")
    out = np.exp(x ** m.s) * (m.r0 * x ** (m.r0 - 1.0)
                              + m.s * x ** (m.r0 + m.s - 1.0))
    out = np.where(np.atleast_1d(t) > 0.0, out, 0.0)
    return float(out[0]) if scalar else out.reshape(t.shape)


def F_eval(t, m: NonlinearityModel):
    """F(t) = int_0^t f; series below 1/2, cached Chebyshev table above."""
    t = _check_finite(t)
    scalar = t.ndim == 0
    x = np.maximum(np.atleast_1d(t).astype(float), 0.0)
    if np.any(x > m.t_sat):
        raise SaturationError(f"t^s > {EXP_GUARD:g} would overflow exp")
    low = x <= 0.5
    out = np.empty_like(x)
    if np.any(low):
        out[low] = _F_series(x[low], m.r0, m.s)
    if np.any(~low):
        out[~low] = _F_half(m.r0, m.s) + m._table(x[~low])
    return float(out[0]) if scalar else out.reshape(t.shape)


@lru_cache(maxsize=64)
def _F_half(r0: float, s: float) -> float:
    return float(_F_series(np.asarray(0.5), r0, s))


# ---------------------------------------------------------------------------
# sampled verification of the uniform-in-eps estimates


@dataclass(frozen=True)
class Violation:
    check: str
    t: float
    eps: float
    lhs: float
    rhs: float

    def as_tuple(self) -> tuple:
        return (self.check, self.t, self.eps, self.lhs, self.rhs)


@dataclass
class ViolationReport:
    params: SingularParams
    sample_count: int
    constants: dict
    violations: list
    checks_run: int

    @property
    def ok(self) -> bool:
        return not self.violations


_PLASTIC = 1.3247179572447460259  # real root of x^3 = x + 1; R2 lattice base


def kronecker_sequence(n: int, dim: int, seed: int = 0) -> np.ndarray:
    """Deterministic quasi-uniform points in [0,1)^dim (R2 lattice)."""
    alphas = 1.0 / _PLASTIC ** np.arange(1, dim + 1)
    offs = np.modf((seed + 1) * np.sqrt(np.arange(2, dim + 2)))[0]
    idx = np.arange(1, n + 1)[:, None]
    return np.modf(offs + idx * alphas)[0]


def _log_uniform(u: np.ndarray, lo: float, hi: float) -> np.ndarray:
    return np.exp(np.log(lo) + u * (np.log(hi) - np.log(lo)))


@lru_cache(maxsize=32)
def scalar_constants(p: SingularParams) -> dict:
    """Empirical constants of the estimates (suprema over dense grids x 1.01).

    m_tilde  : bound of L_eps on [0, 1-eps]           (positivity estimate)
    k0_p25/k0_p3 : L_eps(t) >= -k0 t^p0 for t >= 1-eps, p0 in {2.5, 3}
    c_tl     : |t l_eps(t)| <= c_tl (1 + t^(2-beta))
    delta0   : -log(t + eps/(t+eps)) >= t on [0, delta0) for eps < 1/3
    """
    if p.family != "power_log":
        raise ValueError("estimates are stated for the power_log family")
    eps_grid = np.unique(np.concatenate([
        _log_uniform(np.linspace(0.0, 1.0, 120), 1e-6, 0.5),
        np.linspace(0.5, 0.999, 60)]))
    m_tilde = max(
        float(l_eps_antiderivative(e, p, tmax=1.0)(1.0 - e)) for e in eps_grid)

    k0 = {2.5: 1e-6, 3.0: 1e-6}
    for e in _log_uniform(np.linspace(0.0, 1.0, 40), 1e-6, 0.5):
        t = _log_uniform(np.linspace(0.0, 1.0, 400), 1.0 - e, T_RANGE_MAX)
        val = l_eps_antiderivative(e, p, tmax=T_RANGE_MAX)(t)
        for p0 in k0:
            k0[p0] = max(k0[p0], np.max(np.maximum(-val, 0.0) / t ** p0))

    c_tl = 0.0
    t = _log_uniform(np.linspace(0.0, 1.0, 2000), 1e-8, T_RANGE_MAX)
    for e in _log_uniform(np.linspace(0.0, 1.0, 60), 1e-6, 0.999):
        ratio = np.abs(t * l_eps(t, e, p)) / (1.0 + t ** (2.0 - p.beta))
        c_tl = max(c_tl, float(np.max(ratio)))

    delta0 = math.inf
    for e in _log_uniform(np.linspace(0.0, 1.0, 200), 1e-6, EPS0 - 1e-9):
        g = lambda tt, e=e: -float(_log_arg(tt, e)) - tt
        delta0 = min(delta0, optimize.brentq(g, 1e-9, 0.7, xtol=1e-12))

    return {
        "m_tilde": SAFETY * m_tilde,
        "k0_p25": SAFETY * k0[2.5],
        "k0_p3": SAFETY * k0[3.0],
        "c_tl": SAFETY * c_tl,
        "delta0": delta0 / SAFETY,
        "eps0": EPS0,
    }


def check_scalar_estimates(p: SingularParams, sample_count: int,
                           seed: int = 0) -> ViolationReport:
    """Sample the six closed-form estimates quasi-uniformly over their stated
    validity ranges; any violation beyond 1e-12 absolute slack is returned.
    """
    if p.family != "power_log":
        raise ValueError("estimates are stated for the power_log family")
    consts = scalar_constants(p)
    violations: list[Violation] = []
    checks_run = 0
    slack = ESTIMATE_SLACK

    def record(check, mask, t, e, lhs, rhs):
        for i in np.flatnonzero(mask)[:16]:
            violations.append(Violation(check, float(t[i]), float(e[i]),
                                        float(lhs[i]), float(rhs[i])))

    # (2.6): 0 <= -l_eps(t) <= t on t >= 1-eps, eps < 1/2  (closed form,
    # evaluated over paired (t, eps) arrays)
    uv = kronecker_sequence(sample_count, 2, seed)
    e = _log_uniform(uv[:, 0], 1e-6, 0.5 - 1e-9)
    t = _log_uniform(uv[:, 1], 1.0 - e, T_RANGE_MAX)
    neg_l = t ** p.q / (t + e) ** (p.beta + p.q) * _log_arg(t, e)
    record("2.6", (neg_l < -slack) | (neg_l - t > slack), t, e, neg_l, t)
    checks_run += sample_count

    # (2.10): |t l_eps(t)| <= C (1 + t^(2-beta)), any t > 0, eps < 1  (closed form)
    uv = kronecker_sequence(sample_count, 2, seed + 1)
    e = _log_uniform(uv[:, 0], 1e-6, 1.0 - 1e-9)
    t = _log_uniform(uv[:, 1], 1e-8, T_RANGE_MAX)
    lhs = np.abs(t * (t ** p.q) / (t + e) ** (p.beta + p.q) * _log_arg(t, e))
    rhs = consts["c_tl"] * (1.0 + t ** (2.0 - p.beta))
    record("2.10", lhs - rhs > slack, t, e, lhs, rhs)
    checks_run += sample_count

    # (2.11): -log(t + eps/(t+eps)) >= t on [0, delta0), eps < 1/3  (closed form)
    uv = kronecker_sequence(sample_count, 2, seed + 2)
    e = _log_uniform(uv[:, 0], 1e-6, EPS0 - 1e-12)
    t = uv[:, 1] * consts["delta0"]
    lhs = -_log_arg(t, e)
    record("2.11", t - lhs > slack, t, e, lhs, t)
    checks_run += sample_count

    # (2.7)-(2.9) need L_eps: stratify eps so the cached tables are shared
    n_eps = max(int(round(math.sqrt(sample_count))), 1)
    n_t = max(-(-sample_count // n_eps), 1)
    eps_07 = _log_uniform(kronecker_sequence(n_eps, 1, seed + 3)[:, 0],
                          1e-6, 1.0 - 1e-9)
    eps_09 = _log_uniform(kronecker_sequence(n_eps, 1, seed + 4)[:, 0],
                          1e-6, 0.5)
    ut = kronecker_sequence(n_t, 1, seed + 5)[:, 0]

    for e in eps_07:
        # (2.7): 0 < L_eps < m_tilde on [0, 1-eps]
        t = np.concatenate([[0.0, 1.0 - e], _log_uniform(ut, 1e-8, 1.0 - e)])
        val = L_eps_grid(t, e, p, tmax=T_RANGE_MAX)
        ee = np.full_like(t, e)
        record("2.7", (val < -slack) | (val - consts["m_tilde"] > slack),
               t, ee, val, np.full_like(t, consts["m_tilde"]))
        # (2.8): |L_eps(t)| <= t^(2-b)/(2-b) + t^(1-b)/(1-b) + m_tilde, all t
        t8 = _log_uniform(ut, 1e-8, T_RANGE_MAX)
        val8 = np.abs(L_eps_grid(t8, e, p, tmax=T_RANGE_MAX))
        bound = t8 ** (2.0 - p.beta) / (2.0 - p.beta) \
            + t8 ** (1.0 - p.beta) / (1.0 - p.beta) + consts["m_tilde"]
        record("2.8", val8 - bound > slack, t8, np.full_like(t8, e), val8, bound)
        checks_run += t.size + t8.size

    for e in eps_09:
        t = _log_uniform(ut, 1.0 - e, T_RANGE_MAX)
        val = L_eps_grid(t, e, p, tmax=T_RANGE_MAX)
        for p0, key in ((2.5, "k0_p25"), (3.0, "k0_p3")):
            bound = -consts[key] * t ** p0
            record(f"2.9@p0={p0:g}", bound - val > slack,
                   t, np.full_like(t, e), val, bound)
            checks_run += t.size

    return ViolationReport(params=p, sample_count=sample_count,
                           constants=consts, violations=violations,
                           checks_run=checks_run)


def check_nonlinearity_hypotheses(m: NonlinearityModel,
                                  n: int = 400) -> ViolationReport:
    """Sampled checks of (f3)-(f5) plus f(0) = f'(0) = 0 and the derived
    superlinear lower bound F(t) >= A t^gamma; constants recorded."""
    violations: list[Violation] = []
    t = _log_uniform(np.linspace(0.0, 1.0, n), 1e-8, T_RANGE_MAX)

    # (f3): f(t)/t^r0 bounded near 0 (equals exp(t^s) -> 1)
    ratio3 = f_eval(t, m) / t ** m.r0
    for i in np.flatnonzero((t < 0.1) & (ratio3 > 2.0))[:4]:
        violations.append(Violation("f3", float(t[i]), 0.0,
                                    float(ratio3[i]), 2.0))

    # (f4): f(t)/t^l nondecreasing
    ratio4 = ratio3  # l = r0 for this family
    bad = np.diff(ratio4) < -1e-12 * np.maximum(ratio4[1:], 1.0)
    for i in np.flatnonzero(bad)[:4]:
        violations.append(Violation("f4", float(t[i + 1]), 0.0,
                                    float(ratio4[i + 1]), float(ratio4[i])))

    # (f5): t^gamma0 F(t) <= T0 f(t) on [T, 20], T = 1, T0 from the grid
    mask = t >= 1.0
    lhs5 = t[mask] ** m.gamma0 * F_eval(t[mask], m)
    t0_const = SAFETY * float(np.max(lhs5 / f_eval(t[mask], m)))
    bad5 = lhs5 - t0_const * f_eval(t[mask], m) > ESTIMATE_SLACK
    for i in np.flatnonzero(bad5)[:4]:
        violations.append(Violation("f5", float(t[mask][i]), 0.0,
                                    float(lhs5[i]), t0_const))

    # derived growth bound F(t) >= A t^gamma for t >= t0 = 1, gamma = 2
    gamma = 2.0
    a_const = float(np.min(F_eval(t[mask], m) / t[mask] ** gamma)) / SAFETY
    if a_const <= 0.0:
        violations.append(Violation("growth_1.3", 1.0, 0.0, a_const, 0.0))

    # f(0) = f'(0) = 0
    if f_eval(0.0, m) != 0.0 or fprime_eval(0.0, m) != 0.0:
        violations.append(Violation("f_origin", 0.0, 0.0,
                                    f_eval(0.0, m), 0.0))

    consts = {"T": 1.0, "T0": t0_const, "A": a_const, "t0": 1.0,
              "gamma": gamma}
    return ViolationReport(params=None, sample_count=n, constants=consts,
                           violations=violations, checks_run=4 * n)
