"""Critical-point search: mountain-pass geometry (find_K), the path-based
saddle search with plain-descent polish, per-solve bound diagnostics, and
the eps-continuation driver toward the singular limit problem.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np
from scipy import optimize

from . import scalars as sc
from .functional import ProblemConfig, energy, h1_gradient, nonlinear_rhs, residual
from .grid import (Domain, GridFunction, h1_inner, h1_norm, laplacian_apply,
                   node_coordinates, sup_norm, weight_psi)
from .riesz import apply_kernel_values, kernel_for

__all__ = [
    "SolveReport", "SolverError", "NoNegativeEnergy", "Stalled", "Saturated",
    "build_phi", "find_K", "mpa_solve", "bounds_report", "continuation",
    "ContinuationResult", "lambda_probe", "report_to_json", "REPORT_KEYS",
]

ARMIJO_C = 1e-4
MAX_BACKTRACKS = 50
STALL_LIMIT = 50
LEVEL_SLACK = 1e-10
Z_FLOOR = 1e-12  # Z_a regularization at u <= 0 nodes in the gradient ratio
ENDGAME_FACTOR = 1e3   # below ENDGAME_FACTOR*tol the path max is refined hard
PEAK_TEST_REL = 1e-4   # peak-based acceptance while gn > PEAK_TEST_REL*(1+|J|)

REPORT_KEYS = ("eps", "lambda", "energy", "grad_norm", "h1", "sup", "K_path",
               "m2", "K_grad_emp", "l1_singular", "iterations", "status")


class SolverError(RuntimeError):
    pass


class NoNegativeEnergy(SolverError):
    """Saturation cap reached before the ray energy went negative
    (coupling too small for this model/grid)."""


class Stalled(SolverError):
    """Line search failed on STALL_LIMIT consecutive iterations."""


class Saturated(SolverError):
    """Iterates exceeded the exp guard (diverging toward the well)."""


@dataclass
class SolveReport:
    eps: float = 0.0
    lam: float = 0.0
    energy: float = 0.0
    grad_norm: float = 0.0
    h1: float = 0.0
    sup: float = 0.0
    K_path: float = 0.0
    m2: float = 0.0
    K_grad_emp: float = 0.0
    l1_singular: float = 0.0
    iterations: int = 0
    status: str = "diagnostic"
    # traces for tests/CSV emission; not part of the wire format
    path_energies: list = field(default_factory=list, repr=False, compare=False)
    polish_energies: list = field(default_factory=list, repr=False, compare=False)


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def report_to_json(rep: SolveReport) -> str:
    """One JSON object per line, fixed key order, 17 significant digits."""
    vals = {
        "eps": _fmt(rep.eps), "lambda": _fmt(rep.lam),
        "energy": _fmt(rep.energy), "grad_norm": _fmt(rep.grad_norm),
        "h1": _fmt(rep.h1), "sup": _fmt(rep.sup), "K_path": _fmt(rep.K_path),
        "m2": _fmt(rep.m2), "K_grad_emp": _fmt(rep.K_grad_emp),
        "l1_singular": _fmt(rep.l1_singular),
        "iterations": str(rep.iterations), "status": f'"{rep.status}"',
    }
    body = ", ".join(f'"{k}": {vals[k]}' for k in REPORT_KEYS)
    return "{" + body + "}"


@lru_cache(maxsize=32)
def build_phi(dom: Domain) -> GridFunction:
    """First Dirichlet eigenfunction, normalized to h1_norm = 1."""
    x, y = node_coordinates(dom)
    raw = GridFunction(dom, np.sin(np.pi * x / dom.Lx)
                       * np.sin(np.pi * y / dom.Ly))
    return (1.0 / h1_norm(raw)) * raw


def find_K(cfg: ProblemConfig, backend: str = "fft") -> tuple[float, float]:
    """Double t from 1 until J(t*phi) < 0 (capped at the exp guard), then
    take m2 = max J over [0, K] from a 256-point scan with golden refinement.
    """
    phi = build_phi(cfg.dom)
    t_cap = cfg.model.t_sat / sup_norm(phi)
    t = 1.0
    while True:
        if t > t_cap:
            raise NoNegativeEnergy(
                f"saturation cap {t_cap:.3g} reached with J(t*phi) >= 0")
        if energy(t * phi, cfg, backend) < 0.0:
            break
        t *= 2.0
    big_k = t

    ts = np.linspace(0.0, big_k, 256)
    es = np.array([energy(float(s) * phi, cfg, backend) for s in ts])
    i = int(np.argmax(es))
    m2 = float(es[i])
    if 0 < i < len(ts) - 1:
        res = optimize.minimize_scalar(
            lambda s: -energy(float(s) * phi, cfg, backend),
            bracket=(ts[i - 1], ts[i], ts[i + 1]), method="golden",
            options={"xtol": 1e-10})
        m2 = max(m2, float(-res.fun))
    return big_k, m2


def _armijo_step(u, g, gn2, e0, alpha0, cfg, backend):
    """One backtracking descent step; returns (u_new, e_new, alpha, failure)
    with failure None, "stall", or "saturated"."""
    alpha = alpha0
    saturated = False
    for _ in range(MAX_BACKTRACKS):
        trial = u - alpha * g
        try:
            et = energy(trial, cfg, backend)
        except sc.SaturationError:
            saturated = True
            alpha *= 0.5
            continue
        if math.isfinite(et) and et <= e0 - ARMIJO_C * alpha * gn2:
            return trial, et, alpha, None
        saturated = not math.isfinite(et)
        alpha *= 0.5
    return None, None, alpha, "saturated" if saturated else "stall"


def _segment_max(ua, ea, ub, eb, cfg, backend, xatol):
    """Maximum of J on the straight segment from ua to ub (linear in H^1)."""
    dirn = ub - ua

    def j(t: float) -> float:
        return energy(ua + float(t) * dirn, cfg, backend)

    res = optimize.minimize_scalar(lambda t: -j(t), bounds=(0.0, 1.0),
                                   method="bounded",
                                   options={"xatol": xatol, "maxiter": 80})
    t_best, e_best = float(res.x), float(-res.fun)
    for t_end, e_end in ((0.0, ea), (1.0, eb)):
        if e_end > e_best:
            t_best, e_best = t_end, e_end
    return t_best, e_best


def _directional_refine(ua, ub, t0, cfg, backend):
    """Purify the segment maximum by locating the root of the directional
    derivative (energy values alone resolve the ridge only to ~sqrt(ulp))."""
    dirn = ub - ua

    def dd(t: float) -> float:
        return h1_inner(h1_gradient(ua + float(t) * dirn, cfg, backend), dirn)

    delta = 1e-3
    while delta < 0.5:
        lo, hi = max(t0 - delta, 0.0), min(t0 + delta, 1.0)
        dlo, dhi = dd(lo), dd(hi)
        if dlo > 0.0 > dhi:
            root = optimize.brentq(dd, lo, hi, xtol=1e-14)
            return float(root)
        delta *= 4.0
    return None


def _path_maximum(nodes, energies, istar, cfg, backend, xatol, refine):
    """Best point of the interpolated path near the max node: the node and
    the maxima of its two adjacent segments compete."""
    best_u, best_e = nodes[istar], energies[istar]
    best_seg = None
    for a, b in ((istar - 1, istar), (istar, istar + 1)):
        if a < 0 or b >= len(nodes):
            continue
        t, e = _segment_max(nodes[a], energies[a], nodes[b], energies[b],
                            cfg, backend, xatol)
        if e > best_e and 0.0 < t < 1.0:
            best_u = nodes[a] + t * (nodes[b] - nodes[a])
            best_e = e
            best_seg = (a, b, t)
    if refine and best_seg is not None:
        a, b, t = best_seg
        root = _directional_refine(nodes[a], nodes[b], t, cfg, backend)
        if root is not None:
            cand = nodes[a] + root * (nodes[b] - nodes[a])
            e_cand = energy(cand, cfg, backend)
            if e_cand >= best_e - 1e-12 * max(abs(best_e), 1.0):
                best_u, best_e = cand, e_cand
    return best_u, best_e


def _local_peak(nodes, energies, istar, trial, cfg, backend):
    """Refined maximum of the path near node istar with ``trial`` in its
    slot: the quantity a productive step must decrease. Coarse in-segment
    tolerance; the far endpoints keep their cached energies."""
    try:
        e_node = energy(trial, cfg, backend)
    except sc.SaturationError:
        return math.inf, math.inf
    peak = e_node
    for a, b in ((istar - 1, istar), (istar, istar + 1)):
        if a < 0 or b >= len(nodes):
            continue
        ua, ea = (trial, e_node) if a == istar else (nodes[a], energies[a])
        ub, eb = (trial, e_node) if b == istar else (nodes[b], energies[b])
        _, e = _segment_max(ua, ea, ub, eb, cfg, backend, xatol=1e-3)
        peak = max(peak, e)
    return peak, e_node


def mpa_solve(cfg: ProblemConfig, path_points: int = 32, tol: float = 1e-8,
              backend: str = "fft", max_iterations: int = 200_000,
              max_rounds: int = 200) -> tuple[GridFunction, SolveReport]:
    """Mountain-pass solve of (P_{eps,lambda}).

    Discrete path t_i*K*phi from 0 to K*phi; repeatedly locate the path
    maximum (max-energy node, sharpened on its adjacent segments), take one
    backtracking H^1-steepest-descent step there, and re-insert, until the
    gradient at the path maximum falls to 10*tol; then polish that point by
    plain H^1 descent to tol. A polish that stops progressing returns to
    the path phase (the unstable coordinate only grows under descent, so it
    must be re-zeroed by re-maximizing); energy decreases monotonically
    within every polish run.
    """
    if path_points < 16:
        raise ValueError("path_points must be >= 16")
    phi = build_phi(cfg.dom)
    big_k, m2 = find_K(cfg, backend)

    p_count = path_points
    nodes = [(float(i) / p_count * big_k) * phi for i in range(p_count + 1)]
    energies = [energy(u, cfg, backend) for u in nodes]

    iterations = 0
    stall_streak = 0
    alpha_mem = 1.0
    last_gn = math.inf
    polish_runs: list[list[float]] = []
    u_final = None
    e_final = gn_final = 0.0

    def interior_argmax() -> int:
        return 1 + int(np.argmax(energies[1:-1]))

    def register_failure(failure: str) -> None:
        nonlocal stall_streak, alpha_mem
        stall_streak += 1
        alpha_mem = 1.0
        if stall_streak >= STALL_LIMIT:
            if failure == "saturated":
                raise Saturated("iterate exceeded the exp guard")
            raise Stalled(f"line search failed {STALL_LIMIT}x consecutively")

    def register_success(alpha: float) -> None:
        nonlocal stall_streak, alpha_mem
        stall_streak = 0
        alpha_mem = min(2.0 * alpha, 4.0)

    def take_step(u, g, gn, e0):
        nonlocal iterations
        trial, et, alpha, failure = _armijo_step(
            u, g, gn * gn, e0, alpha_mem, cfg, backend)
        iterations += 1
        if failure is not None:
            register_failure(failure)
            return None, None
        register_success(alpha)
        return trial, et

    def take_peak_step(istar, u, g, gn, peak0):
        # backtrack on the refined local path maximum: descending into a
        # basin is free, so plain energy decrease cannot certify progress
        # of the minimax level while gradients are still large
        nonlocal iterations
        iterations += 1
        alpha = alpha_mem
        for _ in range(MAX_BACKTRACKS):
            trial = u - alpha * g
            peak, e_node = _local_peak(nodes, energies, istar, trial,
                                       cfg, backend)
            if peak <= peak0 - ARMIJO_C * alpha * gn * gn:
                register_success(alpha)
                return trial, e_node
            alpha *= 0.5
        register_failure("stall")
        return None, None

    for _ in range(max_rounds):
        # path phase: descend at the (refined) path maximum
        while True:
            if iterations >= max_iterations:
                raise Stalled(f"iteration cap {max_iterations} reached")
            istar = interior_argmax()
            endgame = last_gn <= ENDGAME_FACTOR * tol
            u_max, e_max = _path_maximum(
                nodes, energies, istar, cfg, backend,
                xatol=1e-9 if endgame else 1e-4, refine=endgame)
            g = h1_gradient(u_max, cfg, backend)
            gn = h1_norm(g)
            last_gn = gn
            if gn <= 10.0 * tol:
                break
            if gn > PEAK_TEST_REL * (1.0 + abs(e_max)):
                trial, et = take_peak_step(istar, u_max, g, gn, e_max)
            else:
                trial, et = take_step(u_max, g, gn, e_max)
            if trial is not None:
                nodes[istar] = trial
                energies[istar] = et

        if gn <= tol:
            u_final, e_final, gn_final = u_max, e_max, gn
            break

        # polish: plain descent from the path maximum, re-inserted each step
        u, e = u_max, e_max
        gn_enter = gn
        run: list[float] = [e]
        converged = False
        while iterations < max_iterations:
            g = h1_gradient(u, cfg, backend)
            gn = h1_norm(g)
            if gn <= tol:
                converged = True
                break
            if gn > max(100.0 * tol, 3.0 * gn_enter) or e < 0.0:
                break  # escaped along the unstable direction: re-maximize
            trial, et = take_step(u, g, gn, e)
            if trial is None:
                continue
            u, e = trial, et
            run.append(e)
            nodes[istar] = u
            energies[istar] = e
        polish_runs.append(run)
        if converged:
            u_final, e_final, gn_final = u, e, gn
            break
    else:
        raise Stalled(f"no convergence within {max_rounds} path/polish rounds")

    if u_final is None:
        raise Stalled(f"iteration cap {max_iterations} reached")
    if not 0.0 < e_final <= m2 + LEVEL_SLACK:
        raise SolverError(
            f"level sandwich violated: J = {e_final:.6g}, m2 = {m2:.6g}")
    if sup_norm(u_final) <= 0.0:
        raise SolverError("converged to the trivial solution")

    rep = bounds_report(u_final, cfg)
    rep.eps, rep.lam = cfg.eps, cfg.lam
    rep.energy, rep.grad_norm = e_final, gn_final
    rep.K_path, rep.m2 = big_k, m2
    rep.iterations, rep.status = iterations, "converged"
    rep.path_energies = [(float(i) / p_count * big_k, energies[i])
                         for i in range(p_count + 1)]
    rep.polish_energies = polish_runs
    return u_final, rep


def bounds_report(u: GridFunction, cfg: ProblemConfig,
                  margin: float | None = None) -> SolveReport:
    """Bound diagnostics of the paper's a-priori estimates: H^1 and sup
    norms, the empirical gradient-estimate constant max psi|grad u|^2/Z(u),
    and the local L^1 mass of the limit singularity."""
    from .functional import singular_l1_diagnostic

    dom = u.dom
    if margin is None:
        margin = min(dom.Lx, dom.Ly) / 8.0
    p = np.pad(u.values, 1)
    gx = (p[2:, 1:-1] - p[:-2, 1:-1]) / (2.0 * dom.hx)
    gy = (p[1:-1, 2:] - p[1:-1, :-2]) / (2.0 * dom.hy)
    grad2 = gx * gx + gy * gy
    psi = weight_psi(dom).values
    k_emp = 0.0
    pos = u.values > 0.0
    if np.any(pos):
        z = sc.Z_majorant(u.values[pos], cfg.singular)
        k_emp = float(np.max(psi[pos] * grad2[pos] / z)) if z.size else 0.0
    neg = (~pos) & (grad2 > 0.0)
    if np.any(neg):
        # Z_a device: u <= 0 nodes contribute with Z(0) + a, a = 1e-12
        k_emp = max(k_emp, float(np.max(psi[neg] * grad2[neg] / Z_FLOOR)))
    return SolveReport(
        eps=cfg.eps, lam=cfg.lam, h1=h1_norm(u), sup=sup_norm(u),
        K_grad_emp=k_emp,
        l1_singular=singular_l1_diagnostic(u, cfg, margin),
        status="diagnostic")


def _warm_polish(u0: GridFunction, cfg: ProblemConfig, tol: float,
                 backend: str, max_iterations: int = 20_000
                 ) -> tuple[GridFunction, float, float, int, list[float]]:
    """Plain H^1 descent from a warm start; raises Stalled when the iterate
    escapes (gradient growth or negative energy) instead of converging."""
    u = u0.copy()
    e = energy(u, cfg, backend)
    run = [e]
    g = h1_gradient(u, cfg, backend)
    gn0 = h1_norm(g)
    alpha_mem = 1.0
    stall = 0
    for it in range(max_iterations):
        gn = h1_norm(g)
        if gn <= tol:
            return u, e, gn, it, run
        if gn > max(20.0 * gn0, 100.0 * tol) or e < 0.0:
            raise Stalled("warm polish escaped the saddle region")
        trial, et, alpha, failure = _armijo_step(
            u, g, gn * gn, e, alpha_mem, cfg, backend)
        if failure is not None:
            stall += 1
            alpha_mem = 1.0
            if stall >= STALL_LIMIT:
                raise Stalled("warm polish line search stalled")
            continue
        stall = 0
        alpha_mem = min(2.0 * alpha, 4.0)
        u, e = trial, et
        run.append(e)
        g = h1_gradient(u, cfg, backend)
    raise Stalled("warm polish iteration cap reached")


@dataclass
class ContinuationResult:
    steps: list  # (eps, SolveReport) in run order
    solutions: list  # GridFunction per converged step
    cauchy: list  # h1_norm(u_{k+1} - u_k)
    eps_residual: float = math.nan  # final-step residual norm on {u > delta0}
    limit_residual: float = math.nan  # Def-1.1 residual of the candidate there
    failures: list = field(default_factory=list)


def continuation(cfg: ProblemConfig, eps_list, tol: float,
                 path_points: int = 32, backend: str = "fft"
                 ) -> ContinuationResult:
    """Solve (P_{eps,lambda}) along a decreasing eps sequence with warm
    starts; the final solution is the singular-limit candidate, scored by
    its Def-1.1 residual against the limit singularity on {u > delta0}.
    """
    eps_list = [float(e) for e in eps_list]
    if any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise ValueError("eps_list must be strictly decreasing")

    steps: list = []
    solutions: list[GridFunction] = []
    failures: list = []
    u_prev = None
    k0 = m20 = 0.0
    last_ok_eps = None
    for e in eps_list:
        cfg_k = replace(cfg, eps=e)
        rep = None
        if u_prev is not None:
            try:
                u, eng, gn, iters, run = _warm_polish(u_prev, cfg_k, tol, backend)
                if not 0.0 < eng <= m20 + LEVEL_SLACK:
                    raise Stalled("warm polish left the level sandwich")
                rep = bounds_report(u, cfg_k)
                rep.energy, rep.grad_norm = eng, gn
                rep.K_path, rep.m2 = k0, m20  # K and m2 are eps-independent
                rep.iterations, rep.status = iters, "converged"
                rep.polish_energies = [run]
            except SolverError as exc:
                failures.append((e, "warm", str(exc)))
                rep = None
        if rep is None:
            try:
                u, rep = mpa_solve(cfg_k, path_points, tol, backend)
            except SolverError as exc:
                failures.append((e, "cold", str(exc)))
                status = "saturated" if isinstance(exc, Saturated) else "stalled"
                steps.append((e, SolveReport(eps=e, lam=cfg.lam, status=status)))
                continue
        k0, m20 = rep.K_path, rep.m2
        steps.append((e, rep))
        solutions.append(u)
        u_prev = u
        last_ok_eps = e

    cauchy = [h1_norm(b - a) for a, b in zip(solutions, solutions[1:])]
    result = ContinuationResult(steps=steps, solutions=solutions,
                                cauchy=cauchy, failures=failures)
    if solutions:
        result.eps_residual, result.limit_residual = _limit_residuals(
            solutions[-1], replace(cfg, eps=last_ok_eps), backend)
    return result


def _limit_residuals(u: GridFunction, cfg: ProblemConfig,
                     backend: str) -> tuple[float, float]:
    """L^2 norms, on {u > delta0}, of the eps-residual and of the Def-1.1
    residual with the limit singularity in place of l_eps."""
    delta0 = sc.scalar_constants(cfg.singular)["delta0"] \
        if cfg.singular.family == "power_log" else 0.1
    mask = u.values > delta0
    r_eps = residual(u, cfg, backend).values
    fu = sc.F_eval(u.values, cfg.model)
    conv = apply_kernel_values(kernel_for(cfg.dom, cfg.mu), fu, backend)
    lap = laplacian_apply(u).values
    r_lim = (lap - np.where(u.values > 0.0,
                            sc.l_limit(u.values, cfg.singular), 0.0)
             - cfg.lam * conv * sc.f_eval(u.values, cfg.model))
    area = cfg.dom.cell_area
    eps_res = float(np.sqrt(np.sum(r_eps[mask] ** 2) * area))
    lim_res = float(np.sqrt(np.sum(r_lim[mask] ** 2) * area))
    return eps_res, lim_res


def lambda_probe(cfg: ProblemConfig, lam_lo: float, lam_hi: float,
                 bisections: int = 6, path_points: int = 16,
                 tol: float = 1e-6, backend: str = "fft") -> dict:
    """Empirical analogue of the solvability threshold: bisect the coupling
    between a solvable lam_lo and an unsolvable lam_hi on solver success
    (converged with positive level). The true theoretical threshold depends
    on Sobolev constants that have no numerical value here.
    """
    def succeeds(lam: float) -> bool:
        try:
            mpa_solve(replace(cfg, lam=lam), path_points, tol, backend)
            return True
        except SolverError:
            return False

    history = []
    if not succeeds(lam_lo):
        raise ValueError(f"lam_lo={lam_lo} must be solvable")
    if succeeds(lam_hi):
        return {"lambda_bar": lam_hi, "bracket": (lam_lo, lam_hi),
                "history": history, "upper_solvable": True}
    lo, hi = lam_lo, lam_hi
    for _ in range(bisections):
        mid = 0.5 * (lo + hi)
        ok = succeeds(mid)
        history.append((mid, ok))
        if ok:
            lo = mid
        else:
            hi = mid
    return {"lambda_bar": lo, "bracket": (lo, hi), "history": history,
            "upper_solvable": False}
