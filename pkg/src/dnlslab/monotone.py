"""
Cutoff, moving-line weights and the localized functionals used to separate
the dynamics of two waves.

With x_bar = (x1(0) + x2(0))/2, a = L^2/64 and a line speed s, the weights
are hw(t, x) = h((x - x_bar - s t) / sqrt(t + a)) and gw = 1 - hw, where h is
the septic smootherstep mapped onto [-1, 1].
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .functionals import conserved_values, momentum_density
from .numerics import Field, GridSpec, diff, quad


def _t_of(x):
    return np.clip((np.asarray(x, dtype=float) + 1.0) / 2.0, 0.0, 1.0)


def cutoff_h(x) -> np.ndarray:
    """0 for x <= -1, 1 for x >= 1, s((x+1)/2) between, s = 35t^4 - 84t^5 + 70t^6 - 20t^7."""
    t = _t_of(x)
    return t**4 * (35.0 - 84.0 * t + 70.0 * t * t - 20.0 * t**3)


def cutoff_dh(x) -> np.ndarray:
    t = _t_of(x)
    return 70.0 * t**3 * (1.0 - t) ** 3  # s'(t)/2 with s' = 140 t^3 (1-t)^3


def cutoff_d2h(x) -> np.ndarray:
    t = _t_of(x)
    return 105.0 * t * t * (1.0 - t) ** 2 * (1.0 - 2.0 * t)  # s''(t)/4


def cutoff_audit(n: int = 100_000, edge: float = 1e-6):
    """Suprema of (h')^2/h and (h'')^2/h' sampled on the open support."""
    x = np.linspace(-1.0 + edge, 1.0 - edge, n)
    h = cutoff_h(x)
    dh = cutoff_dh(x)
    d2h = cutoff_d2h(x)
    return float(np.max(dh * dh / h)), float(np.max(d2h * d2h / dh))


def partition(grid: GridSpec, x1: float, x2: float, L: float):
    """
    (g, h) with g = 1 for x <= x1 + L/8, g = 0 for x >= x2 - L/8, smooth
    monotone in between, and h = 1 - g.
    """
    left, right = x1 + L / 8.0, x2 - L / 8.0
    if right <= left:
        raise ValueError("waves too close for the partition")
    mid, half = 0.5 * (left + right), 0.5 * (right - left)
    h = cutoff_h((grid.x - mid) / half)
    return 1.0 - h, h


@dataclass(frozen=True)
class MonotoneLineSpec:
    xbar0: float
    sigma: float
    a: float
    variant: str = "center"

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError("a must be positive")

    @classmethod
    def from_pair(cls, pair0, L: float, variant: str = "center") -> "MonotoneLineSpec":
        speeds = pair0.line_speeds()
        return cls(0.5 * (pair0.p1.x0 + pair0.p2.x0), speeds[variant], L * L / 64.0, variant)

    def with_variant(self, pair0, variant: str) -> "MonotoneLineSpec":
        return MonotoneLineSpec(self.xbar0, pair0.line_speeds()[variant], self.a, variant)

    def center(self, t: float) -> float:
        return self.xbar0 + self.sigma * t

    def width(self, t: float) -> float:
        return math.sqrt(t + self.a)


def line_weights(t: float, spec: MonotoneLineSpec, grid: GridSpec):
    if t < 0:
        raise ValueError("t must be nonnegative")
    hw = cutoff_h((grid.x - spec.center(t)) / spec.width(t))
    return Field(grid, 1.0 - hw), Field(grid, hw)


LINE_VARIANTS = ("+0", "-0", "0+", "0-")
MONOTONE_COLUMNS = ("t", "Q", "Q_plus0", "Q_minus0", "Q_0plus", "Q_0minus", "Eloc",
                    "local_mass", "bound")


def localized_functionals(t: float, u, pair0, spec: MonotoneLineSpec) -> dict:
    """
    F, Q, the four line functionals and E_loc = E + F at time t, with the
    frozen initial parameters of ``pair0``.
    """
    if not isinstance(u, Field):
        raise TypeError("pass a Field so the grid is known")
    vals, grid = u.values, u.grid
    w1, c1 = pair0.p1.omega, pair0.p1.c
    w2, c2 = pair0.p2.omega, pair0.p2.c
    if c1 == c2 or w1 == w2:
        raise ValueError("equal initial speeds or frequencies leave the prefactors undefined")
    ux = diff(vals, grid, 1)
    half_mass = 0.5 * np.abs(vals) ** 2
    p = momentum_density(vals, ux)
    _, hw = line_weights(t, spec, grid)
    hw = hw.values.real
    gw = 1.0 - hw
    F = (w1 * quad(half_mass * gw, grid) + c1 * quad(p * gw, grid)
         + w2 * quad(half_mass * hw, grid) + c2 * quad(p * hw, grid))
    triple = conserved_values(vals, grid, ux)
    out = {"F": float(F), "Q": float(F - w1 * triple.mass - c1 * triple.momentum)}
    speeds = pair0.line_speeds()
    for name, key in (("+0", "Q_plus0"), ("-0", "Q_minus0")):
        s = speeds[name]
        hv = cutoff_h((grid.x - spec.xbar0 - s * t) / spec.width(t))
        out[key] = float((c2 - c1) * (0.5 * s * quad(half_mass * hv, grid) + quad(p * hv, grid)))
    for name, key in (("0+", "Q_0plus"), ("0-", "Q_0minus")):
        s = speeds[name]
        hv = cutoff_h((grid.x - spec.xbar0 - s * t) / spec.width(t))
        out[key] = float((w2 - w1) * (quad(half_mass * hv, grid) + 2.0 / s * quad(p * hv, grid)))
    out["E_loc"] = float(triple.energy + F)
    return out


def local_mass_window(t: float, u: Field, spec: MonotoneLineSpec) -> float:
    """Integral of |u|^2 over |x - x_bar - sigma t| < sqrt(t + a)."""
    grid = u.grid
    inside = np.abs(grid.x - spec.center(t)) < spec.width(t)
    return float(quad(np.abs(u.values[inside]) ** 2, grid))


@dataclass(frozen=True)
class QuarticReport:
    lhs_quartic: float
    rhs_quartic: float
    lhs_sup: float
    rhs_sup: float

    @property
    def passed(self) -> bool:
        ok1 = self.lhs_quartic <= self.rhs_quartic * (1 + 1e-10) + 1e-300
        ok2 = self.lhs_sup <= self.rhs_sup * (1 + 1e-10) + 1e-300
        return ok1 and ok2


def quartic_inequality_audit(w: Field, hfield: Field, hx=None) -> QuarticReport:
    """
    Both sides of
        int |w|^4 h <= sup(|w|^2 h) * int_{supp h} |w|^2,
        sup(|w|^2 h) <= 2 (int |w_x|^2 h)^(1/2) (int |w|^2 h)^(1/2) + int |w|^2 |h_x|.
    ``hx`` may carry the exact derivative of h; otherwise it is spectral.
    """
    grid = w.grid
    v = w.values
    h = hfield.values.real
    if hx is None:
        hx = diff(h, grid, 1)
    hx = np.real(_vals(hx))
    a = np.abs(v) ** 2
    sup = float(np.max(a * h)) if a.size else 0.0
    supp = h > 0
    lhs1 = float(quad(a * a * h, grid))
    rhs1 = sup * float(quad(a[supp], grid))
    vx = diff(v, grid, 1)
    rhs2 = (2.0 * math.sqrt(max(quad(np.abs(vx) ** 2 * h, grid), 0.0))
            * math.sqrt(max(quad(a * h, grid), 0.0)) + float(quad(a * np.abs(hx), grid)))
    return QuarticReport(lhs1, rhs1, sup, float(rhs2))


def _vals(f):
    return f.values if isinstance(f, Field) else np.asarray(f)


def fit_constant(increments, scales) -> float:
    """Smallest C with increments <= C * scales at every frame."""
    inc = np.asarray(increments, dtype=float)
    sc = np.asarray(scales, dtype=float)
    ratios = np.where(inc > 0, inc / sc, 0.0)
    return float(np.max(ratios)) if ratios.size else 0.0


def almost_monotone_series(track, trajectory, pair0, L: float, constant=None,
                           theta=None) -> dict:
    """
    Increments of Q and the line functionals along a tracked two-wave run,
    with the bound (C/L) sup_{s<=t} int |eps|^2 + C exp(-theta L).

    ``constant`` freezes C; when omitted it is fitted on this run as the
    smallest value that makes the bound hold for Q and all four lines.
    """
    spec = MonotoneLineSpec.from_pair(pair0, L)
    _, th2, th3, _ = pair0.thetas()
    theta2 = th2 if theta is None else theta
    rows = []
    for t, u in zip(trajectory.times, trajectory.snapshots):
        f = Field(trajectory.grid, u)
        vals = localized_functionals(t, f, pair0, spec)
        vals["local_mass"] = local_mass_window(t, f, spec)
        vals["t"] = t
        rows.append(vals)
    eps_sq = np.array(track.eps_l2) ** 2
    sup_eps = np.maximum.accumulate(eps_sq)
    keys = ("Q", "Q_plus0", "Q_minus0", "Q_0plus", "Q_0minus")
    inc = {k: np.array([r[k] for r in rows]) - rows[0][k] for k in keys}
    scale_q = sup_eps / L + math.exp(-theta2 * L)
    scale_line = sup_eps / L + math.exp(-th3 * L)
    if constant is None:
        constant = max([fit_constant(inc["Q"], scale_q)]
                       + [fit_constant(inc[k], scale_line) for k in keys[1:]])
    bound_q = constant * scale_q
    bound_line = constant * scale_line
    ok = bool(np.all(inc["Q"] <= bound_q)
              and all(np.all(inc[k] <= bound_line) for k in keys[1:]))
    e_loc = np.array([r["E_loc"] for r in rows])
    exchange = np.abs((e_loc - e_loc[0]) - inc["Q"])
    return {
        "t": np.array([r["t"] for r in rows]),
        "increments": inc,
        "bound": bound_q,
        "bound_line": bound_line,
        "constant": constant,
        "holds": ok,
        "exchange_defect": float(exchange.max()),
        "rows": rows,
        "eps_sq": eps_sq,
    }


def local_mass_bound(rows, eps_sq, theta2: float, L: float, constant=None):
    """
    Check window mass <= 2 int |eps|^2 + K exp(-theta2 (L + theta2 t)).
    K is fitted when not given. Returns (K, holds, margins).
    """
    t = np.array([r["t"] for r in rows])
    mass = np.array([r["local_mass"] for r in rows])
    decay = np.exp(-theta2 * (L + theta2 * t))
    excess = mass - 2.0 * np.asarray(eps_sq)
    if constant is None:
        constant = float(max(np.max(excess / decay), 0.0))
    margin = 2.0 * np.asarray(eps_sq) + constant * decay - mass
    return constant, bool(np.all(margin >= 0)), margin
