"""Two-level variational solver for the strongly indefinite energy.

Inner level: for a unit plus-direction w, monotone ascent of
G(t, z) = t^2/2 - ||z^-||_-^2/2 - I(t w + z) over the half-space
R+ w (+) E0 (+) E-, giving the maximizer m(w), its height s_w and the reduced
value Psi(w).  Outer level: projected gradient descent of Psi on the unit
sphere of the truncated plus space, multi-start.  The reduced gradient is the
Riesz representative of h -> s_w Phi'(m(w))[h] in the plus inner product.

Steps use a Barzilai-Borwein guess from successive gradients, safeguarded by
backtracking so the inner ascent is monotone and the outer descent never
increases Psi.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .control import GramReport, kernel_gram, kernel_gram_basis
from .energy import EnergyContext, phi_eval, phi_gradient, residual_dual_norm
from .fields import SpectralField


class NoCoerciveDirectionError(RuntimeError):
    """Raised when every start diverges: no maximizable plus-direction found."""


@dataclass
class SolverConfig:
    # defaults sit above the float64 monotone-ascent noise floor measured on
    # desk-scale problems (value-monitored ascent cannot certify gains below
    # ~16 ulp of G, which caps reachable gradient norms near 2e-9)
    tol_inner: float = 1e-8
    tol_outer: float = 1e-6
    max_inner: int = 4000
    max_outer: int = 400
    n_starts: int = 4
    step_inner0: float = 1.0
    step_outer0: float = 0.5
    divergence_norm: float = 1e6
    divergence_value: float = 1e12
    eps_kernel: float = 1e-8
    seed: int = 0

    def __post_init__(self):
        if min(self.tol_inner, self.tol_outer) <= 0:
            raise ValueError("tolerances must be positive")
        if self.n_starts < 1:
            raise ValueError("need at least one start")


@dataclass
class SaddleResult:
    m_hat: SpectralField
    s_w: float
    psi: float
    iterations: int
    grad_norm: float
    diverged: bool
    converged: bool
    _state: tuple = field(default=None, repr=False)


@dataclass
class GroundStateResult:
    u_star: SpectralField
    energy: float
    residual: float
    s_w: float
    converged: bool
    message: str
    history: list
    kernel_report: GramReport | None
    dropped_kernel: list
    quadrature_gap: float = 0.0


def plus_norm(u: SpectralField) -> float:
    """||.||_+ of the plus part."""
    cat = u.catalog
    c = u.coeffs[cat.plus_idx]
    return math.sqrt(float(np.sum(cat.eig[cat.plus_idx] * c * c)))


def random_plus_direction(catalog, rng) -> SpectralField:
    """Random unit vector of the truncated plus space."""
    coeffs = np.zeros(catalog.size)
    coeffs[catalog.plus_idx] = rng.standard_normal(len(catalog.plus_idx))
    w = SpectralField(catalog, coeffs)
    n = plus_norm(w)
    if n == 0:
        raise ValueError("catalog has no plus modes")
    w.coeffs /= n
    return w


def lowest_plus_direction(catalog) -> SpectralField:
    """Unit plus-field concentrated on the smallest positive eigenvalue."""
    if len(catalog.plus_idx) == 0:
        raise ValueError("catalog has no plus modes")
    lam_plus = catalog.eig[catalog.plus_idx]
    i = catalog.plus_idx[int(np.argmin(lam_plus))]
    coeffs = np.zeros(catalog.size)
    coeffs[i] = 1.0 / math.sqrt(catalog.eig[i])
    return SpectralField(catalog, coeffs)


def _check_plus_unit(w: SpectralField):
    cat = w.catalog
    off = w.coeffs[cat.classes != 1]
    if off.size and float(np.max(np.abs(off))) > 1e-12:
        raise ValueError("w must be plus-class only")
    n = plus_norm(w)
    if abs(n - 1.0) > 1e-8:
        raise ValueError("w must have unit plus-norm")


class _InnerProblem:
    """G(t, y, zm) with its Riesz-ascent gradient, on the restricted kernel."""

    def __init__(self, w, ctx, kernel_basis):
        cat = ctx.catalog
        self.ctx = ctx
        self.cat = cat
        self.plus = cat.plus_idx
        self.zero = cat.zero_idx
        self.minus = cat.minus_idx
        self.wp = w.coeffs[self.plus]
        self.lam_minus = cat.eig[self.minus]  # negative values
        self.V = kernel_basis  # (n_zero, n_kept) or None for identity
        self.n_y = (kernel_basis.shape[1] if kernel_basis is not None else len(self.zero))

    def assemble(self, t, y, zm):
        u = np.zeros(self.cat.size)
        u[self.plus] = t * self.wp
        if self.n_y:
            u[self.zero] = self.V @ y if self.V is not None else y
        u[self.minus] = zm
        return u

    def value(self, t, y, zm):
        u = self.assemble(t, y, zm)
        quad = 0.5 * t * t - 0.5 * float(np.sum(-self.lam_minus * zm * zm))
        return quad - self.ctx.potential_from_values(self.ctx.synth(u)), u

    def gradient(self, u):
        g = self.ctx.nonlinear_coeffs(self.ctx.synth(u))
        full = self.cat.eig * u - g
        gt = float(full[self.plus] @ self.wp)
        gz = full[self.zero]
        gy = (self.V.T @ gz if self.V is not None else gz) if self.n_y else np.zeros(0)
        gm = full[self.minus]
        dm = gm / np.abs(self.lam_minus) if len(gm) else gm
        norm = math.sqrt(gt * gt + float(gy @ gy) + float(gm @ dm))
        return gt, gy, dm, norm


def _initial_height(problem, ctx, cfg, w):
    """Line search on t -> Phi(t w): bracket the hump, refine with Brent."""
    wvals = ctx.synth(problem.assemble(1.0, np.zeros(problem.n_y), np.zeros(len(problem.minus))))

    def phi_ray(t):
        return 0.5 * t * t - ctx.potential_from_values(t * wvals)

    best_t, best_v = 1e-3, phi_ray(1e-3)
    t = 2e-3
    while t <= cfg.divergence_norm:
        v = phi_ray(t)
        if v > best_v:
            best_t, best_v = t, v
        elif v < 0 and v < best_v:
            break
        t *= 2.0
    if best_t * 2.0 > cfg.divergence_norm:
        return None  # still climbing at the cap: the ray is not maximizable
    res = minimize_scalar(
        lambda s: -phi_ray(s), bounds=(best_t / 4.0, best_t * 4.0), method="bounded"
    )
    return float(res.x)


def inner_maximize(
    w: SpectralField,
    ctx: EnergyContext,
    cfg: SolverConfig,
    kernel_basis: np.ndarray | None = None,
    warm: tuple | None = None,
) -> SaddleResult:
    """Maximize Phi over the half-space of w; see module docstring.

    ``kernel_basis`` restricts the kernel block to the columns of an
    orthonormal matrix (the q-Gram subspace computed by the caller); ``warm``
    is a previous (t, y, zm) state.
    """
    _check_plus_unit(w)
    problem = _InnerProblem(w, ctx, kernel_basis)

    def result(t, y, zm, value, iters, gnorm, diverged):
        u = problem.assemble(t, y, zm)
        return SaddleResult(
            SpectralField(ctx.catalog, u),
            t,
            value,
            iters,
            gnorm,
            diverged,
            (not diverged) and gnorm <= cfg.tol_inner,
            _state=(t, y.copy(), zm.copy()),
        )

    if warm is not None:
        t, y, zm = warm
        t = max(float(t), 1e-8)
        y = np.asarray(y, dtype=float).copy()
        zm = np.asarray(zm, dtype=float).copy()
        if y.shape != (problem.n_y,) or zm.shape != (len(problem.minus),):
            raise ValueError("warm state has wrong block sizes")
    else:
        t0 = _initial_height(problem, ctx, cfg, w)
        if t0 is None:
            zero_y = np.zeros(problem.n_y)
            zero_m = np.zeros(len(problem.minus))
            return result(1.0, zero_y, zero_m, math.nan, 0, math.inf, True)
        t, y, zm = t0, np.zeros(problem.n_y), np.zeros(len(problem.minus))

    value, u = problem.value(t, y, zm)
    gt, gy, dm, gnorm = problem.gradient(u)
    eta = cfg.step_inner0
    prev = None  # (t, y, zm, gt, gy, dm)
    stagnant = 0

    for it in range(1, cfg.max_inner + 1):
        if gnorm <= cfg.tol_inner:
            return result(t, y, zm, value, it - 1, gnorm, False)
        state_norm = math.sqrt(t * t + float(y @ y) + float(zm @ zm))
        if state_norm > cfg.divergence_norm or value > cfg.divergence_value:
            return result(t, y, zm, value, it - 1, gnorm, True)

        if prev is not None:
            ds = np.concatenate(([t - prev[0]], y - prev[1], zm - prev[2]))
            dg = np.concatenate(([gt - prev[3]], gy - prev[4], dm - prev[5]))
            denom = -float(ds @ dg)
            if denom > 1e-300:
                eta = min(max(float(ds @ ds) / denom, 1e-12), 1e6)
        prev = (t, y.copy(), zm.copy(), gt, gy, dm.copy())

        accepted = False
        for _ in range(60):
            if t < 0.1:
                t_try = t * math.exp(eta * gt * t)  # log-space keeps t > 0
            else:
                t_try = t + eta * gt
            if t_try <= 0 or not math.isfinite(t_try):
                eta *= 0.5
                continue
            y_try = y + eta * gy
            zm_try = zm + eta * dm
            v_try, u_try = problem.value(t_try, y_try, zm_try)
            if v_try >= value + 1e-4 * eta * gnorm * gnorm:
                gain = v_try - value
                t, y, zm, value, u = t_try, y_try, zm_try, v_try, u_try
                accepted = True
                break
            eta *= 0.5
        if not accepted:
            # no ascent left at machine precision
            return result(t, y, zm, value, it, gnorm, False)
        if gain <= 16.0 * np.finfo(float).eps * max(1.0, abs(value)):
            stagnant += 1
            if stagnant >= 3:
                # ascent hit the roundoff floor of G; gnorm is the honest exit norm
                return result(t, y, zm, value, it, gnorm, False)
        else:
            stagnant = 0
        gt, gy, dm, gnorm = problem.gradient(u)

    return result(t, y, zm, value, cfg.max_inner, gnorm, False)


def psi_gradient(w: SpectralField, saddle: SaddleResult, ctx: EnergyContext) -> SpectralField:
    """Riesz representative of the reduced derivative, tangent at w."""
    cat = ctx.catalog
    g = phi_gradient(saddle.m_hat, ctx).coeffs
    lam_plus = cat.eig[cat.plus_idx]
    rep = saddle.s_w * g[cat.plus_idx] / lam_plus
    wp = w.coeffs[cat.plus_idx]
    for _ in range(2):  # re-orthogonalize once to push tangency to roundoff
        rep = rep - float(np.sum(lam_plus * rep * wp)) * wp
    out = np.zeros(cat.size)
    out[cat.plus_idx] = rep
    return SpectralField(cat, out)


def _normalized_plus(catalog, plus_coeffs):
    coeffs = np.zeros(catalog.size)
    coeffs[catalog.plus_idx] = plus_coeffs
    f = SpectralField(catalog, coeffs)
    n = plus_norm(f)
    f.coeffs /= n
    return f


def _run_start(start_id, w, ctx, cfg, kernel_basis, records):
    saddle = inner_maximize(w, ctx, cfg, kernel_basis)
    if saddle.diverged:
        records.append({"start": start_id, "outer": 0, "event": "diverged"})
        return None
    eta = cfg.step_outer0
    outer = 0
    grad = psi_gradient(w, saddle, ctx)
    gn = plus_norm(grad)
    records.append(
        {"start": start_id, "outer": outer, "psi": saddle.psi, "grad_plus": gn,
         "inner_iters": saddle.iterations}
    )
    while gn > cfg.tol_outer and outer < cfg.max_outer:
        outer += 1
        accepted = False
        # require a decrease that beats both Armijo and the roundoff floor of Psi
        noise = 32.0 * np.finfo(float).eps * max(1.0, abs(saddle.psi))
        for _ in range(50):
            trial = _normalized_plus(
                ctx.catalog, (w.coeffs - eta * grad.coeffs)[ctx.catalog.plus_idx]
            )
            s_trial = inner_maximize(trial, ctx, cfg, kernel_basis, warm=saddle._state)
            drop = max(1e-4 * eta * gn * gn, noise)
            if (not s_trial.diverged) and s_trial.psi <= saddle.psi - drop:
                w, saddle = trial, s_trial
                accepted = True
                eta = min(eta * 1.3, 1e3)
                break
            eta *= 0.5
            if eta < 1e-14:
                break
        if not accepted:
            records.append({"start": start_id, "outer": outer, "event": "stalled",
                            "psi": saddle.psi, "grad_plus": gn})
            break
        grad = psi_gradient(w, saddle, ctx)
        gn = plus_norm(grad)
        records.append(
            {"start": start_id, "outer": outer, "psi": saddle.psi, "grad_plus": gn,
             "inner_iters": saddle.iterations}
        )
    return {"w": w, "saddle": saddle, "grad_plus": gn, "outer": outer,
            "converged": gn <= cfg.tol_outer}


def ground_state(ctx: EnergyContext, cfg: SolverConfig, threads: int = 1) -> GroundStateResult:
    """Multi-start outer minimization; returns the best converged saddle point.

    Before solving, the truncated-kernel q-Gram is diagonalized and directions
    below the eigenvalue floor are dropped from the inner problem (reported in
    the result).  Raises NoCoerciveDirectionError if every start diverges.
    """
    if ctx.weight.is_trivial():
        raise ValueError("weight must not vanish identically for a solve")
    cat = ctx.catalog
    kernel_report = None
    kernel_basis = None
    dropped: list = []
    if cat.kernel_dim() > 0:
        kernel_report = kernel_gram(ctx.weight, cat, ctx.grid, cfg.eps_kernel)
        kernel_basis, dropped = kernel_gram_basis(kernel_report)

    rng = np.random.default_rng(cfg.seed)
    starts = [lowest_plus_direction(cat)]
    while len(starts) < cfg.n_starts:
        starts.append(random_plus_direction(cat, rng))

    all_records: list = [[] for _ in starts]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = [
                pool.submit(_run_start, i, w, ctx, cfg, kernel_basis, all_records[i])
                for i, w in enumerate(starts)
            ]
            outcomes = [f.result() for f in futures]
    else:
        outcomes = [
            _run_start(i, w, ctx, cfg, kernel_basis, all_records[i])
            for i, w in enumerate(starts)
        ]
    records = [rec for recs in all_records for rec in recs]

    finished = [(i, o) for i, o in enumerate(outcomes) if o is not None]
    if not finished:
        raise NoCoerciveDirectionError("no coercive direction detected: all starts diverged")

    def rank(item):
        _, o = item
        res = residual_dual_norm(phi_gradient(o["saddle"].m_hat, ctx))
        return (o["saddle"].psi, res)

    best_i, best = min(finished, key=rank)
    u_star = best["saddle"].m_hat
    energy = phi_eval(u_star, ctx)
    residual = residual_dual_norm(phi_gradient(u_star, ctx))
    converged = best["converged"]
    message = "converged" if converged else "max_outer reached or stalled; best iterate returned"
    from .energy import quadrature_refinement_gap

    return GroundStateResult(
        u_star=u_star,
        energy=energy,
        residual=residual,
        s_w=best["saddle"].s_w,
        converged=converged,
        message=message,
        history=records,
        kernel_report=kernel_report,
        dropped_kernel=dropped,
        quadrature_gap=quadrature_refinement_gap(u_star, ctx),
    )
