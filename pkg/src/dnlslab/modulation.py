"""
Modulation decomposition near one or two traveling waves.

A field u is written as R(omega, c, x0, gamma) + eps with eps orthogonal,
in the Re int sense, to

    R,   i R_x + 1/2 |R|^2 R,   R_x,   i R.

The four (or eight, for two waves) parameters are found by damped Newton
iteration with a finite-difference Jacobian.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.optimize as sopt

from .errors import (NoConvergence, RegimeLost, RegimeUnsupported, SeparationTooSmall,
                     TrackingFailed)
from .numerics import Field, GridSpec, diff, h1_norm, l2_norm, quad
from .waves import TWO_PI, Regime, WaveParams, classify_regime, fd_step, wave_values

FIT_TOL = 1e-10
MAX_ITER = 50
MAX_HALVINGS = 8
MIN_SEPARATION = 10.0


def directions(R: np.ndarray, grid: GridSpec):
    Rx = diff(R, grid, 1)
    return (R, 1j * Rx + 0.5 * np.abs(R) ** 2 * R, Rx, 1j * R)


def _pairings(R, eps, grid):
    return np.array([quad(np.real(Y * np.conj(eps)), grid) for Y in directions(R, grid)])


def residuals_single(p: WaveParams, u: Field) -> np.ndarray:
    """(rho1, rho2, rho3, rho4) for eps = u - R(p)."""
    if classify_regime(p.omega, p.c) is not Regime.SUBCRITICAL:
        raise RegimeUnsupported(f"({p.omega}, {p.c}) is not subcritical")
    R = wave_values(p, u.grid)
    return _pairings(R, u.values - R, u.grid)


@dataclass
class ModulationState:
    params: tuple  # one or two WaveParams
    epsilon: Field
    residual_norm: float
    eps_l2: float
    eps_h1: float
    iterations: int = 0
    jacobian: np.ndarray | None = field(default=None, repr=False)
    # gamma values without the mod 2 pi reduction (tracking keeps them continuous)
    gammas: tuple = ()

    @property
    def single(self) -> WaveParams:
        return self.params[0]


def _vector(params) -> np.ndarray:
    return np.concatenate([np.array(p.as_tuple(), dtype=float) for p in params])


def _params(vec: np.ndarray):
    return tuple(WaveParams(*vec[4 * k:4 * k + 4]) for k in range(len(vec) // 4))


def _all_sub(vec) -> bool:
    return all(classify_regime(vec[4 * k], vec[4 * k + 1]) is Regime.SUBCRITICAL
               for k in range(len(vec) // 4))


def _residual_vector(vec, u: np.ndarray, grid: GridSpec) -> np.ndarray:
    waves = [wave_values(p, grid) for p in _params(vec)]
    eps = u - sum(waves)
    return np.concatenate([_pairings(R, eps, grid) for R in waves])


def fd_jacobian(vec, u: np.ndarray, grid: GridSpec, rel: float = 1e-5) -> np.ndarray:
    """Central-difference Jacobian of the residual vector in the parameters."""
    n = len(vec)
    jac = np.empty((n, n))
    for j in range(n):
        h = fd_step(vec[j], rel)
        up = vec.copy()
        dn = vec.copy()
        up[j] += h
        dn[j] -= h
        if not (_all_sub(up) and _all_sub(dn)):
            raise RegimeLost("finite-difference stencil leaves the subcritical region")
        jac[:, j] = (_residual_vector(up, u, grid) - _residual_vector(dn, u, grid)) / (2 * h)
    return jac


def _newton(vec0, u: np.ndarray, grid: GridSpec, tol=FIT_TOL, max_iter=MAX_ITER):
    vec = np.array(vec0, dtype=float)
    if not _all_sub(vec):
        raise RegimeLost("initial guess is not subcritical")
    res = _residual_vector(vec, u, grid)
    rnorm = float(np.linalg.norm(res))
    history = [rnorm]
    jac = None
    it = 0
    while rnorm >= tol:
        if it >= max_iter:
            raise NoConvergence(f"residual {rnorm:.3e} after {max_iter} iterations")
        it += 1
        jac = fd_jacobian(vec, u, grid)
        try:
            delta = -np.linalg.solve(jac, res)
        except np.linalg.LinAlgError as exc:
            raise NoConvergence(f"singular Jacobian: {exc}") from exc
        lam = 1.0
        accepted = False
        saw_sub = False
        for _ in range(MAX_HALVINGS + 1):
            trial = vec + lam * delta
            if _all_sub(trial):
                saw_sub = True
                tres = _residual_vector(trial, u, grid)
                tnorm = float(np.linalg.norm(tres))
                if tnorm < rnorm:
                    vec, res, rnorm = trial, tres, tnorm
                    accepted = True
                    break
            lam *= 0.5
        if not accepted:
            if not saw_sub:
                raise RegimeLost("Newton iterates left the subcritical region")
            raise NoConvergence(f"no decrease after {MAX_HALVINGS} halvings (residual {rnorm:.3e})")
        history.append(rnorm)
    if jac is None:
        jac = fd_jacobian(vec, u, grid)
    return vec, rnorm, it, jac, history


def _align(vec0, u: np.ndarray, grid: GridSpec) -> np.ndarray:
    """
    Least-squares fit of positions and phases only, (omega, c) frozen.
    Used to rescue Newton when the starting positions are poor.
    """
    vec = np.array(vec0, dtype=float)
    n = len(vec) // 4
    free = [4 * k + j for k in range(n) for j in (2, 3)]

    def misfit(z):
        v = vec.copy()
        v[free] = z
        r = u - sum(wave_values(p, grid) for p in _params(v))
        return np.sqrt(grid.spacing) * np.concatenate([r.real, r.imag])

    sol = sopt.least_squares(misfit, vec[free], method="lm", xtol=1e-12, ftol=1e-12)
    vec[free] = sol.x
    return vec


def _solve(vec0, u: np.ndarray, grid: GridSpec, tol=FIT_TOL, max_iter=MAX_ITER):
    """Newton from vec0; on failure, align positions and phases and retry once."""
    try:
        return _newton(vec0, u, grid, tol, max_iter)
    except (RegimeLost, NoConvergence):
        return _newton(_align(vec0, u, grid), u, grid, tol, max_iter)


def _state(vec, u: Field, rnorm, it, jac, gammas=None) -> ModulationState:
    params = _params(vec)
    eps = u.values - sum(wave_values(p, u.grid) for p in params)
    if gammas is None:
        gammas = tuple(vec[4 * k + 3] for k in range(len(params)))
    return ModulationState(params, Field(u.grid, eps), rnorm, l2_norm(eps, u.grid),
                           h1_norm(eps, u.grid), it, jac, tuple(gammas))


def fit_single(u: Field, guess: WaveParams, tol: float = FIT_TOL,
               max_iter: int = MAX_ITER) -> ModulationState:
    vec, rnorm, it, jac, _ = _solve(_vector([guess]), u.values, u.grid, tol, max_iter)
    return _state(vec, u, rnorm, it, jac)


def jacobian_single(p: WaveParams, u: Field) -> np.ndarray:
    return fd_jacobian(_vector([p]), u.values, u.grid)


def jacobian_det_formula(omega: float, c: float, grid: GridSpec) -> float:
    """-|phi'|^2 |phi|^2 det d''(omega, c)."""
    from .functionals import d_second
    from .waves import phi_profile
    phi = phi_profile(omega, c, grid).values.real
    dphi = diff(phi, grid, 1)
    return -quad(dphi**2, grid) * quad(phi**2, grid) * d_second(omega, c, grid).det


# ---------------------------------------------------------------------------
# Two waves

@dataclass(frozen=True)
class SpeedReport:
    cond_a: bool
    cond_b: bool
    cond_c: bool
    sigma: float
    sigma_plus0: float
    sigma_minus0: float
    sigma_0plus: float
    sigma_0minus: float
    theta1: float
    theta2: float
    theta3: float
    theta0: float

    @property
    def all_pass(self) -> bool:
        return self.cond_a and self.cond_b and self.cond_c

    def as_dict(self) -> dict:
        d = {k: getattr(self, k) for k in self.__dataclass_fields__}
        d["all_pass"] = self.all_pass
        return d


@dataclass(frozen=True)
class PairParams:
    p1: WaveParams
    p2: WaveParams

    @property
    def separation(self) -> float:
        return self.p2.x0 - self.p1.x0

    @property
    def sigma(self) -> float:
        dc = self.p2.c - self.p1.c
        if dc == 0:
            raise ValueError("sigma is undefined for equal speeds")
        return 2.0 * (self.p2.omega - self.p1.omega) / dc

    def line_speeds(self) -> dict:
        s = self.sigma
        plus = 0.5 * (s + self.p2.c)
        minus = 0.5 * (s + max(self.p1.c, 0.0))
        return {"center": s, "+0": plus, "-0": minus, "0+": minus, "0-": plus}

    def thetas(self):
        w1 = math.sqrt(max(4 * self.p1.omega - self.p1.c**2, 0.0))
        w2 = math.sqrt(max(4 * self.p2.omega - self.p2.c**2, 0.0))
        c1, c2 = self.p1.c, self.p2.c
        th1 = 0.25 * min(w1, w2, c2 - c1)
        s = self.sigma
        th2 = min(s - c1, c2 - s, w1 / 4, w2 / 4) / 16.0
        speeds = self.line_speeds()
        th3 = min(min(v - c1, c2 - v, w1 / 4, w2 / 4) for v in (speeds["+0"], speeds["-0"])) / 16.0
        return th1, th2, th3, min(th1, th2, th3)

    def waves(self):
        return (self.p1, self.p2)


def check_speed_conditions(pp: PairParams) -> SpeedReport:
    a = all(classify_regime(p.omega, p.c) is Regime.SUBCRITICAL for p in pp.waves())
    c1, c2 = pp.p1.c, pp.p2.c
    b = 0 < c1 < c2
    s = pp.sigma
    c = max(c1, 0.0) < s < c2
    sp = pp.line_speeds()
    th = pp.thetas()
    return SpeedReport(a, b, c, s, sp["+0"], sp["-0"], sp["0+"], sp["0-"], *th)


def residuals_pair(pp: PairParams, u: Field) -> np.ndarray:
    return _residual_vector(_vector(pp.waves()), u.values, u.grid)


def fit_pair(u: Field, guesses, tol: float = FIT_TOL, max_iter: int = MAX_ITER) -> ModulationState:
    g = guesses.waves() if isinstance(guesses, PairParams) else tuple(guesses)
    if g[1].x0 - g[0].x0 < MIN_SEPARATION:
        raise SeparationTooSmall(f"separation {g[1].x0 - g[0].x0:.3f} < {MIN_SEPARATION}")
    vec, rnorm, it, jac, _ = _solve(_vector(g), u.values, u.grid, tol, max_iter)
    return _state(vec, u, rnorm, it, jac)


def cross_block_norm(jac: np.ndarray) -> float:
    """Largest entry of the off-diagonal 4x4 blocks of an 8x8 Jacobian."""
    return float(max(np.abs(jac[:4, 4:]).max(), np.abs(jac[4:, :4]).max()))


# ---------------------------------------------------------------------------
# Tracking

def _unwrap_near(value: float, reference: float) -> float:
    return reference + ((value - reference + math.pi) % TWO_PI - math.pi)


@dataclass
class ModulationTrack:
    n_waves: int
    times: list = field(default_factory=list)
    params: list = field(default_factory=list)  # rows of length 4 n_waves, gamma unwrapped
    eps_l2: list = field(default_factory=list)
    eps_h1: list = field(default_factory=list)
    residual_norm: list = field(default_factory=list)
    states: list = field(default_factory=list)

    def array(self) -> np.ndarray:
        return np.array(self.params, dtype=float)

    def series(self, k: int, name: str) -> np.ndarray:
        idx = {"omega": 0, "c": 1, "x": 2, "gamma": 3}[name]
        return self.array()[:, 4 * k + idx]

    def rates(self, k: int):
        """|x_k' - c_k| and |gamma_k' - omega_k| from centered differences."""
        t = np.array(self.times)
        if len(t) < 2:
            z = np.zeros(len(t))
            return z, z
        xdot = np.gradient(self.series(k, "x"), t)
        gdot = np.gradient(self.series(k, "gamma"), t)
        return np.abs(xdot - self.series(k, "c")), np.abs(gdot - self.series(k, "omega"))

    def parameter_drift(self, k: int = None) -> float:
        """max_t sum over waves of |omega_k(t) - omega_k(0)| + |c_k(t) - c_k(0)|."""
        arr = self.array()
        ks = range(self.n_waves) if k is None else [k]
        total = np.zeros(len(arr))
        for j in ks:
            total += np.abs(arr[:, 4 * j] - arr[0, 4 * j]) + np.abs(arr[:, 4 * j + 1] - arr[0, 4 * j + 1])
        return float(total.max())

    def columns(self):
        cols = ["t"]
        for k in range(1, self.n_waves + 1):
            cols += [f"omega{k}", f"c{k}", f"x{k}", f"gamma{k}", f"xdot_minus_c{k}",
                     f"gammadot_minus_omega{k}"]
        return cols + ["eps_l2", "eps_h1", "residual_norm"]

    def rows(self):
        arr = self.array()
        rates = [self.rates(k) for k in range(self.n_waves)]
        out = []
        for i, t in enumerate(self.times):
            row = {"t": t}
            for k in range(self.n_waves):
                j = k + 1
                row.update({f"omega{j}": arr[i, 4 * k], f"c{j}": arr[i, 4 * k + 1],
                            f"x{j}": arr[i, 4 * k + 2], f"gamma{j}": arr[i, 4 * k + 3],
                            f"xdot_minus_c{j}": rates[k][0][i],
                            f"gammadot_minus_omega{j}": rates[k][1][i]})
            row.update(eps_l2=self.eps_l2[i], eps_h1=self.eps_h1[i],
                       residual_norm=self.residual_norm[i])
            out.append(row)
        return out


class Tracker:
    """
    Warm-started refits at successive times. Usable directly as an evolve
    observer (it returns the per-frame columns) or through ``track``.
    """

    def __init__(self, initial, keep_states: bool = False):
        if isinstance(initial, ModulationState):
            params = initial.params
            gammas = initial.gammas or tuple(p.gamma for p in params)
        else:
            params = initial.waves() if isinstance(initial, PairParams) else tuple(initial)
            gammas = tuple(p.gamma for p in params)
        self.n = len(params)
        self.vec = _vector(params)
        for k in range(self.n):
            self.vec[4 * k + 3] = gammas[k]
        self.t_prev = None
        self.track = ModulationTrack(self.n)
        self.keep_states = keep_states

    def __call__(self, t, u, grid):
        guess = self.vec.copy()
        if self.t_prev is not None:
            dt = t - self.t_prev
            for k in range(self.n):
                guess[4 * k + 2] += guess[4 * k + 1] * dt
                guess[4 * k + 3] += guess[4 * k] * dt
        start = guess.copy()
        start[3::4] = np.mod(start[3::4], TWO_PI)
        try:
            vec, rnorm, it, jac, _ = _solve(start, u, grid)
        except (NoConvergence, RegimeLost) as exc:
            raise TrackingFailed(f"fit failed at t = {t}: {exc}", t=t) from exc
        gam = [_unwrap_near(vec[4 * k + 3], guess[4 * k + 3]) for k in range(self.n)]
        full = vec.copy()
        full[3::4] = gam
        self.vec = full
        self.t_prev = t
        state = _state(vec, Field(grid, u), rnorm, it, jac, gammas=gam)
        tr = self.track
        tr.times.append(t)
        tr.params.append(full.copy())
        tr.eps_l2.append(state.eps_l2)
        tr.eps_h1.append(state.eps_h1)
        tr.residual_norm.append(rnorm)
        if self.keep_states:
            tr.states.append(state)
        out = {"eps_l2": state.eps_l2, "eps_h1": state.eps_h1, "residual_norm": rnorm}
        for k in range(self.n):
            j = k + 1
            out.update({f"omega{j}": full[4 * k], f"c{j}": full[4 * k + 1],
                        f"x{j}": full[4 * k + 2], f"gamma{j}": full[4 * k + 3]})
        return out


def track(trajectory, initial, keep_states: bool = False) -> ModulationTrack:
    """Fit every stored frame of ``trajectory`` starting from ``initial``."""
    tracker = Tracker(initial, keep_states)
    for t, u in zip(trajectory.times, trajectory.snapshots):
        tracker(t, u, trajectory.grid)
    return tracker.track


# ---------------------------------------------------------------------------
# Distances to the orbit and to the two-wave family

def _h1_weights(grid: GridSpec):
    w = 1.0 + grid.k**2
    w[grid.n_points // 2] = 1.0  # the first derivative drops the Nyquist mode
    return w


def orbit_distance(u: Field, omega: float, c: float) -> float:
    """
    Upper bound for inf over (y, gamma) of |u - R(omega, c, y, gamma)|_{H^1}.

    For fixed y the best phase is explicit, leaving the maximization of
    |<u, R(. - y)>_{H^1}|. That correlation is evaluated at every grid shift
    with one FFT, then refined between neighbouring nodes by maximizing
    its Fourier interpolant.
    """
    grid = u.grid
    if classify_regime(omega, c) is not Regime.SUBCRITICAL:
        raise RegimeUnsupported(f"({omega}, {c}) is not subcritical")
    R = wave_values(WaveParams(omega, c), grid)
    n = grid.n_points
    w = _h1_weights(grid)
    uh = np.fft.fft(u.values)
    rh = np.fft.fft(R)
    coef = w * uh * np.conj(rh) * grid.spacing / n  # <u, R_y> = sum coef e^{i k y}
    corr = np.fft.ifft(coef) * n  # values at y = m dx
    norm_u2 = float(np.sum(w * np.abs(uh) ** 2) * grid.spacing / n)
    norm_r2 = float(np.sum(w * np.abs(rh) ** 2) * grid.spacing / n)
    m = int(np.argmax(np.abs(corr)))
    y0 = m * grid.spacing
    k = grid.k

    def neg_abs(y):
        return -abs(np.sum(coef * np.exp(1j * k * y)))

    res = sopt.minimize_scalar(neg_abs, bounds=(y0 - grid.spacing, y0 + grid.spacing),
                               method="bounded", options={"xatol": 1e-12})
    best = max(abs(corr[m]), -res.fun)
    return float(math.sqrt(max(norm_u2 + norm_r2 - 2.0 * best, 0.0)))


def pair_family_distance(u: Field, pair0: PairParams, start=None) -> float:
    """
    Upper bound for inf over (x1, x2, gamma1, gamma2) of
    |u - R(omega1, c1, x1, gamma1) - R(omega2, c2, x2, gamma2)|_{H^1}
    with (omega_k, c_k) frozen at ``pair0``; positions and phases are refined
    locally from ``start`` (default: those of pair0).
    """
    grid = u.grid
    base = pair0.waves()
    init = np.array([q.x0 for q in (start or base)] + [q.gamma for q in (start or base)])

    def dist(v):
        w = [WaveParams(base[k].omega, base[k].c, v[k], v[2 + k]) for k in range(2)]
        return h1_norm(u.values - wave_values(w[0], grid) - wave_values(w[1], grid), grid)

    d0 = dist(init)
    res = sopt.minimize(dist, init, method="Nelder-Mead",
                        options={"xatol": 1e-9, "fatol": 1e-13, "maxiter": 2000})
    return float(min(d0, res.fun))


def perturbed_fit_constant(eps_h1: float, delta: float) -> float:
    """Ratio |eps|_{H^1} / delta used as the measured surrogate of C_I."""
    return eps_h1 / delta if delta > 0 else float("nan")
