"""Weighted nonlinear least squares for interferogram data.

Fits the five-parameter measurement model (visibility, envelope width,
beat frequency, linear drift) to probability or count data.  Count data
are normalized to a probability scale by twice the mean of the tail
samples; Poisson weights sigma = sqrt(counts) are applied on the same
scale, and the covariance includes the propagated uncertainty of that
normalization (which rescales V and a and shifts b).  The minimizer is
a damped (Levenberg-style) normal-equations loop with diagonal
equilibration, needed because the parameter curvatures span ~40 orders
of magnitude between delta_tau (~1e-11 s) and mu (~1e12 rad/s).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateFitError, FitNonConvergenceError
from .hom import HomFitParams, Interferogram

PARAM_NAMES = ("V", "delta_tau", "mu", "a", "b")

_MIN_POINTS = 10
# fraction of samples on each end treated as baseline tails
_TAIL_FRACTION = 0.1


def _usable_columns(diag: np.ndarray) -> np.ndarray:
    """Identifiable parameter directions: a column is unusable only when
    the model is exactly insensitive to it (zero Jacobian column, e.g.
    mu and delta_tau at V = 0).  Relative thresholds are wrong here —
    healthy curvatures legitimately span ~44 decades across parameters.
    """
    return np.isfinite(diag) & (diag > 0.0)


@dataclass(frozen=True)
class FitResult:
    """Outcome of a damped least-squares fit.

    ``covariance`` rows/columns follow PARAM_NAMES; fixed parameters get
    zero rows, degenerate (unidentifiable) parameters infinite variance.
    ``cost_history`` lists the objective after every accepted step.
    """

    params: HomFitParams
    covariance: np.ndarray
    reduced_chi2: float
    iterations: int
    converged: bool
    degenerate: tuple[str, ...] = ()
    cost_history: np.ndarray = None

    def stderr(self) -> dict[str, float]:
        """Standard errors sqrt(diag(covariance)) keyed by parameter name."""
        diag = np.diag(self.covariance)
        return {
            name: float(np.sqrt(d)) if d >= 0.0 else float("nan")
            for name, d in zip(PARAM_NAMES, diag)
        }


def _model_and_jacobian(tau: np.ndarray, x: np.ndarray):
    v, dtau, mu, a, b = x
    env = np.exp(-(tau**2) / (2.0 * dtau**2))
    cos = np.cos(mu * tau)
    sin = np.sin(mu * tau)
    f = 0.5 * (1.0 - v * env * cos) + a * tau + b
    jac = np.empty((tau.size, 5))
    jac[:, 0] = -0.5 * env * cos
    jac[:, 1] = -0.5 * v * env * cos * tau**2 / dtau**3
    jac[:, 2] = 0.5 * v * env * sin * tau
    jac[:, 3] = tau
    jac[:, 4] = 1.0
    return f, jac


def _tail_indices(n: int) -> np.ndarray:
    k = max(2, int(round(_TAIL_FRACTION * n)))
    return np.concatenate([np.arange(k), np.arange(n - k, n)])


def _prepare(data: Interferogram):
    """Delays, probability-scale values, sigmas, and the relative
    uncertainty of the count-to-probability normalization (0 when the
    data are already probabilities)."""
    tau = data.delays
    scale_rel = 0.0
    if data.kind == "counts":
        tails = _tail_indices(tau.size)
        baseline = 2.0 * float(data.values[tails].mean())
        if baseline <= 0.0:
            raise DegenerateFitError("count data has zero tail baseline")
        y = data.values / baseline
        if data.errors is not None:
            sigma = data.errors / baseline
            tail_var = float(np.sum(data.errors[tails] ** 2))
        else:
            sigma = np.sqrt(np.maximum(data.values, 1.0)) / baseline
            tail_var = float(np.sum(np.maximum(data.values[tails], 1.0)))
        # the baseline is itself estimated from the tail samples; its
        # relative std rescales every fitted amplitude-like parameter
        scale_rel = 2.0 * np.sqrt(tail_var) / (tails.size * baseline)
    else:
        y = data.values
        sigma = data.errors if data.errors is not None else np.ones_like(y)
    if np.any(sigma <= 0.0):
        raise DegenerateFitError("all weights must be positive")
    return tau, y, sigma, scale_rel


def _project(x: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    return np.minimum(np.maximum(x, lo), hi)


def initial_guess(data: Interferogram) -> HomFitParams:
    """Heuristic starting point: drift from the tails, visibility from
    the central peak-to-trough contrast, envelope width from the second
    moment of the deviation, beat frequency from the dominant discrete
    spectral peak.  A mu guess below 2*pi/span means no oscillation was
    resolved."""
    if data.delays.size < 4:
        raise DegenerateFitError("initial guess needs at least 4 points")
    tau, y, _, _ = _prepare(data)
    span = float(tau[-1] - tau[0])

    tails = _tail_indices(tau.size)
    slope, intercept = np.polyfit(tau[tails], y[tails], 1)
    detr = y - (slope * tau + intercept) + 0.5

    central = np.abs(tau - 0.0) <= span / 6.0
    if np.count_nonzero(central) < 3:
        central = slice(tau.size // 3, max(tau.size // 3 + 3, 2 * tau.size // 3))
    seg = detr[central]
    top, bot = float(seg.max()), float(seg.min())
    v0 = (top - bot) / (top + bot) if top + bot > 0.0 else 0.0
    v0 = min(max(v0, 0.0), 1.0)

    dev2 = (detr - 0.5) ** 2
    total = float(dev2.sum())
    if total > 0.0:
        mean_t2 = float((dev2 * tau**2).sum()) / total
        dtau0 = np.sqrt(2.0 * mean_t2) if mean_t2 > 0.0 else span / 4.0
    else:
        dtau0 = span / 4.0
    dtau0 = max(dtau0, span / tau.size)

    # dominant non-constant spectral component; resample if non-uniform
    steps = np.diff(tau)
    if np.allclose(steps, steps[0], rtol=1e-6):
        grid_t, grid_y = tau, detr
    else:
        grid_t = np.linspace(tau[0], tau[-1], tau.size)
        grid_y = np.interp(grid_t, tau, detr)
    spec = np.abs(np.fft.rfft(grid_y - grid_y.mean())) ** 2
    freqs = 2.0 * np.pi * np.fft.rfftfreq(grid_t.size, grid_t[1] - grid_t[0])
    k = int(np.argmax(spec[1:])) + 1
    mu0 = freqs[k]
    if 1 <= k < spec.size - 1:  # parabolic peak refinement
        denom = spec[k - 1] - 2.0 * spec[k] + spec[k + 1]
        if denom < 0.0:
            shift = 0.5 * (spec[k - 1] - spec[k + 1]) / denom
            mu0 = freqs[k] + shift * (freqs[1] - freqs[0])
    mu0 = max(mu0, 0.0)

    return HomFitParams(V=v0, delta_tau=float(dtau0), mu=float(mu0),
                        a=float(slope), b=float(intercept - 0.5))


def fit_hom_interferogram(
    data: Interferogram,
    init: HomFitParams | None = None,
    *,
    fixed: tuple[str, ...] = (),
    max_iter: int = 500,
    rel_obj_tol: float = 1e-10,
    grad_tol: float = 1e-8,
) -> FitResult:
    """Fit the measurement model to an interferogram.

    ``fixed`` names parameters held at their initial values.  Bounds
    (V in [0,1], delta_tau > 0, mu >= 0) are enforced by projection.
    Raises FitNonConvergenceError (carrying the best-so-far result) when
    the iteration cap is reached, and DegenerateFitError when the data
    cannot constrain any free parameter.
    """
    tau, y, sigma, scale_rel = _prepare(data)
    if tau.size < _MIN_POINTS:
        raise DegenerateFitError(f"fit needs at least {_MIN_POINTS} points")
    unknown = set(fixed) - set(PARAM_NAMES)
    if unknown:
        raise ValueError(f"unknown fixed parameter names: {sorted(unknown)}")
    if init is None:
        init = initial_guess(data)

    dt_min = float(np.min(np.diff(tau)))
    lo = np.array([0.0, 1e-3 * dt_min, 0.0, -np.inf, -np.inf])
    hi = np.array([1.0, np.inf, np.pi / dt_min, np.inf, np.inf])
    x = _project(init.as_array(), lo, hi)
    free = np.array([name not in fixed for name in PARAM_NAMES])
    if not free.any():
        raise ValueError("at least one parameter must be free")

    inv_sigma = 1.0 / sigma

    def cost_of(xv: np.ndarray):
        f, jac = _model_and_jacobian(tau, xv)
        r = (f - y) * inv_sigma
        return float(r @ r), r, jac * inv_sigma[:, None]

    cost, r, jac = cost_of(x)
    history = [cost]
    lam = 1e-3
    # below this the weighted residuals are rounding noise: data that the
    # model reproduces exactly would otherwise never trigger the relative
    # convergence tests (both are 0/0 at the floor)
    cost_floor = tau.size * (64.0 * np.finfo(float).eps) ** 2
    converged = cost <= cost_floor
    iterations = 0
    rejected_in_a_row = 0

    while not converged and iterations < max_iter:
        iterations += 1
        j_free = jac[:, free]
        g = j_free.T @ r
        jtj = j_free.T @ j_free
        diag = np.diag(jtj).copy()
        max_diag = diag.max() if diag.size else 0.0
        if max_diag <= 0.0:
            # no free direction carries any information at this point
            converged = True
            break
        usable = _usable_columns(diag)

        # equilibrated damped step on the identifiable directions
        s = 1.0 / np.sqrt(diag[usable])
        m = jtj[np.ix_(usable, usable)] * np.outer(s, s)
        rhs = -g[usable] * s
        try:
            z = np.linalg.solve(m + lam * np.eye(m.shape[0]), rhs)
        except np.linalg.LinAlgError:
            lam = min(lam * 10.0, 1e12)
            continue
        step = np.zeros(x.size)
        step_free = np.zeros(free.sum())
        step_free[usable] = z * s
        step[free] = step_free

        trial = _project(x + step, lo, hi)
        trial_cost, trial_r, trial_jac = cost_of(trial)
        gnorm = float(np.max(np.abs(g[usable] * s))) / (np.sqrt(cost) + 1e-300)
        if trial_cost < cost:
            drop = (cost - trial_cost) / max(cost, 1e-300)
            x, r, jac = trial, trial_r, trial_jac
            cost = trial_cost
            history.append(cost)
            lam = max(lam / 3.0, 1e-14)
            rejected_in_a_row = 0
            if drop < rel_obj_tol or cost <= cost_floor or gnorm < grad_tol:
                converged = True
        else:
            lam = min(lam * 4.0, 1e12)
            rejected_in_a_row += 1
            # no descent direction improves the objective at working
            # precision: the iterate sits on the numerical minimum
            if (
                cost <= cost_floor
                or gnorm < grad_tol
                or (rejected_in_a_row >= 25 and lam >= 1e12)
            ):
                converged = True

    result = _assemble(x, tau, y, inv_sigma, free, cost, history,
                       iterations, converged, scale_rel)
    if not converged:
        raise FitNonConvergenceError(
            f"no convergence after {iterations} iterations "
            f"(objective {cost:.6e})", best=result
        )
    return result


def _assemble(x, tau, y, inv_sigma, free, cost, history,
              iterations, converged, scale_rel=0.0) -> FitResult:
    _, jac = _model_and_jacobian(tau, x)
    jac = jac * inv_sigma[:, None]
    cov = np.zeros((5, 5))
    j_free = jac[:, free]
    jtj = j_free.T @ j_free
    diag = np.diag(jtj)
    # a parameter is unidentifiable exactly when its column carries no
    # information at the solution; relative thresholds are meaningless
    # here because legitimate curvatures span tens of decades
    usable = _usable_columns(diag)
    degenerate = set(np.array(PARAM_NAMES)[free][~usable])
    idx = np.flatnonzero(free)[usable]
    if idx.size:
        # invert in equilibrated units: raw curvatures span too many
        # decades for pinv's relative cutoff to keep the weak directions
        s = 1.0 / np.sqrt(diag[usable])
        m = jtj[np.ix_(usable, usable)] * np.outer(s, s)
        cov[np.ix_(idx, idx)] = np.linalg.pinv(m) * np.outer(s, s)
    if scale_rel > 0.0:
        # normalization-gauge direction: rescaling the estimated
        # baseline by (1 + delta) moves the exact minimizer along
        # (V, a) -> (1 - delta)(V, a), b -> b - delta (b + 1/2)
        d = np.array([x[0], 0.0, 0.0, x[3], x[4] + 0.5]) * free
        cov += (scale_rel**2) * np.outer(d, d)
    for i in np.flatnonzero(free)[~usable]:
        cov[i, i] = np.inf
    n_eff = tau.size - idx.size
    red_chi2 = cost / n_eff if n_eff > 0 else float("nan")
    return FitResult(
        params=HomFitParams(V=x[0], delta_tau=x[1], mu=x[2], a=x[3], b=x[4]),
        covariance=cov,
        reduced_chi2=red_chi2,
        iterations=iterations,
        converged=converged,
        degenerate=tuple(sorted(degenerate)),
        cost_history=np.array(history),
    )
