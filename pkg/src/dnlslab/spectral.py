"""
Linearized operators around a traveling wave and the quadratic forms built
from them.

For real eta,

    L+ eta = -1/2 eta'' + 1/2 (omega - c^2/4) eta + 3c/4 phi^2 eta - 15/32 phi^4 eta
    L- eta = -1/2 eta'' + 1/2 (omega - c^2/4) eta +  c/4 phi^2 eta -  3/32 phi^4 eta

Dense matrices use the Fourier second-derivative matrix, so L+ and L- are
symmetric and the grid inner product is dx times the Euclidean one.

Complex quadratic forms are handled through ``QuadraticForm``, which stores
the weights of

    int 1/2 s |e_x|^2 + m |e|^2 + q Im(conj(e) e_x) + sum_j w_j (Re(conj(R_j) e))^2

and can evaluate the form directly or assemble it as a real symmetric
matrix acting on (Re e, Im e). Coercivity constants are measured exactly on
the grid as the bottom generalized eigenvalue of that matrix against the
H^1 Gram matrix, restricted to the constraint complement.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.linalg as sla

from .errors import RankDeficient, RegimeUnsupported
from .numerics import Field, GridSpec, diff, quad
from .waves import (Regime, WaveParams, classify_regime, phi_line, phi_profile,
                    wave_values)

NEG_TOL = -1e-8
ZERO_BAND = 1e-6


@lru_cache(maxsize=8)
def _diff_matrices(grid: GridSpec):
    """Dense real first- and second-derivative matrices (spectral)."""
    eye = np.eye(grid.n_points)
    d1 = np.real(np.fft.ifft(_ik(grid)[:, None] * np.fft.fft(eye, axis=0), axis=0))
    d2 = np.real(np.fft.ifft(-(grid.k**2)[:, None] * np.fft.fft(eye, axis=0), axis=0))
    d1 = 0.5 * (d1 - d1.T)
    d2 = 0.5 * (d2 + d2.T)
    d1.flags.writeable = False
    d2.flags.writeable = False
    return d1, d2


def _ik(grid: GridSpec):
    ik = 1j * np.asarray(grid.k)
    ik[grid.n_points // 2] = 0.0
    return ik


def derivative_matrix(grid: GridSpec, order: int = 1) -> np.ndarray:
    d1, d2 = _diff_matrices(grid)
    return d1 if order == 1 else d2


@dataclass(frozen=True, eq=False)
class LinOp:
    matrix: np.ndarray
    grid: GridSpec
    omega: float
    c: float
    potential: np.ndarray
    name: str = ""

    def apply(self, eta: np.ndarray) -> np.ndarray:
        """Matrix-free action; agrees with ``matrix @ eta``."""
        eta = np.asarray(eta, dtype=float)
        return -0.5 * diff(eta, self.grid, 2) + self.potential * eta

    def form(self, eta: np.ndarray) -> float:
        eta = np.real(np.asarray(eta))
        return float(quad(eta * self.apply(eta), self.grid))

    @property
    def symmetry_defect(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.T)))


def _require_sub(omega, c):
    if classify_regime(omega, c) is not Regime.SUBCRITICAL:
        raise RegimeUnsupported(f"({omega}, {c}) is not subcritical")


def potentials(omega: float, c: float, phi: np.ndarray):
    base = 0.5 * (omega - 0.25 * c * c)
    p2 = phi * phi
    v_plus = base + 0.75 * c * p2 - 15.0 / 32.0 * p2 * p2
    v_minus = base + 0.25 * c * p2 - 3.0 / 32.0 * p2 * p2
    return v_plus, v_minus


def linearized_ops(omega: float, c: float, grid: GridSpec):
    _require_sub(omega, c)
    phi = phi_profile(omega, c, grid).values.real
    _, d2 = _diff_matrices(grid)
    v_plus, v_minus = potentials(omega, c, phi)
    ops = []
    for v, name in ((v_plus, "L+"), (v_minus, "L-")):
        a = -0.5 * d2 + np.diag(v)
        ops.append(LinOp(a, grid, omega, c, v, name))
    return tuple(ops)


def eigen_bottom(op: LinOp, k: int = 2):
    """k smallest eigenpairs; eigenvectors normalized in the grid L^2."""
    if not 1 <= k <= 20:
        raise ValueError("k must be between 1 and 20")
    vals, vecs = sla.eigh(op.matrix, subset_by_index=[0, k - 1])
    vecs = vecs / np.sqrt(op.grid.spacing)
    return vals, vecs


def neg_count(op: LinOp, tol: float = NEG_TOL, k: int = 20) -> int:
    vals, _ = eigen_bottom(op, k)
    return int(np.sum(vals < tol))


def _complement_basis(constraints: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the Euclidean complement of the columns."""
    n, m = constraints.shape
    if m == 0:
        return np.eye(n)
    q, r = sla.qr(constraints, mode="full")
    diag = np.abs(np.diag(r[:m, :m]))
    scale = np.linalg.norm(constraints, axis=0).max()
    if scale == 0 or diag.min() < 1e-10 * scale:
        raise RankDeficient("constraint directions are linearly dependent on the grid")
    return q[:, m:]


def constrained_min(op: LinOp, constraints=()) -> float:
    """
    Smallest eigenvalue of the operator restricted to the L^2 complement of
    the constraint fields (inf of <A psi, psi>/<psi, psi> there).
    """
    cols = [np.real(_as_array(f)) for f in constraints]
    cmat = np.column_stack(cols) if cols else np.zeros((op.grid.n_points, 0))
    z = _complement_basis(cmat)
    small = z.T @ op.matrix @ z
    return float(sla.eigh(small, eigvals_only=True, subset_by_index=[0, 0])[0])


def _as_array(f):
    return f.values if isinstance(f, Field) else np.asarray(f)


# ---------------------------------------------------------------------------
# Spectral report

def phi_param_derivs(omega: float, c: float, grid: GridSpec, rel: float = 1e-5):
    """Central-difference d phi/d omega and d phi/d c (real profiles)."""
    hw = rel * max(1.0, abs(omega))
    hc = rel * max(1.0, abs(c))
    pw = (phi_profile(omega + hw, c, grid).values.real
          - phi_profile(omega - hw, c, grid).values.real) / (2 * hw)
    pc = (phi_profile(omega, c + hc, grid).values.real
          - phi_profile(omega, c - hc, grid).values.real) / (2 * hc)
    return pw, pc


def structure_relations(omega: float, c: float, grid: GridSpec, factor: float = 1.0):
    """
    Relative residuals of
        L+ d_c phi     = factor * (c/2 phi - 1/2 phi^3)
        L+ d_omega phi = -factor * phi.
    Differentiating the profile equation gives factor = 1/2 for the L+
    defined above; factor = 1 is the form stated alongside the operators.
    """
    lp, _ = linearized_ops(omega, c, grid)
    phi = phi_profile(omega, c, grid).values.real
    pw, pc = phi_param_derivs(omega, c, grid)
    target_c = factor * (0.5 * c * phi - 0.5 * phi**3)
    target_w = -factor * phi
    res_c = np.linalg.norm(lp.apply(pc) - target_c) / np.linalg.norm(target_c)
    res_w = np.linalg.norm(lp.apply(pw) - target_w) / np.linalg.norm(target_w)
    return float(res_c), float(res_w)


@dataclass
class SpectralReport:
    omega: float
    c: float
    lambda1_sq: float
    chi: np.ndarray = field(repr=False)
    lambda2: float
    neg_count_plus: int
    neg_count_minus: int
    kernel_residuals: dict
    mu_minus: float
    mu_plus: float
    ess_floor: float
    structure_literal: tuple = (np.nan, np.nan)
    structure_derived: tuple = (np.nan, np.nan)

    @property
    def neg_count(self) -> int:
        return self.neg_count_plus

    def row(self) -> dict:
        return {
            "omega": self.omega, "c": self.c, "lambda1_sq": self.lambda1_sq,
            "lambda2": self.lambda2, "neg_count_Lplus": self.neg_count_plus,
            "neg_count_Lminus": self.neg_count_minus, "mu_Lminus": self.mu_minus,
            "mu_Lplus": self.mu_plus, "ess_floor": self.ess_floor,
        }


SPECTRAL_COLUMNS = ("omega", "c", "lambda1_sq", "lambda2", "neg_count_Lplus",
                    "neg_count_Lminus", "mu_Lminus", "mu_Lplus", "ess_floor")


def spectral_report(omega: float, c: float, grid: GridSpec) -> SpectralReport:
    lp, lm = linearized_ops(omega, c, grid)
    phi = phi_profile(omega, c, grid).values.real
    dphi = diff(phi, grid, 1)
    vals_p, vecs_p = eigen_bottom(lp, 20)
    vals_m, _ = eigen_bottom(lm, 20)
    kernel = {
        "Lplus_dphi": float(np.linalg.norm(lp.apply(dphi)) / np.linalg.norm(dphi)),
        "Lminus_phi": float(np.linalg.norm(lm.apply(phi)) / np.linalg.norm(phi)),
    }
    chi = vecs_p[:, 0]
    return SpectralReport(
        omega=omega, c=c,
        lambda1_sq=float(-vals_p[0]), chi=chi, lambda2=float(vals_p[1]),
        neg_count_plus=int(np.sum(vals_p < NEG_TOL)),
        neg_count_minus=int(np.sum(vals_m < NEG_TOL)),
        kernel_residuals=kernel,
        mu_minus=constrained_min(lm, [phi]),
        mu_plus=constrained_min(lp, [phi, phi**3, dphi]),
        ess_floor=0.5 * (omega - 0.25 * c * c),
        structure_literal=structure_relations(omega, c, grid, 1.0),
        structure_derived=structure_relations(omega, c, grid, 0.5),
    )


# ---------------------------------------------------------------------------
# Complex quadratic forms

@dataclass(eq=False)
class QuadraticForm:
    grid: GridSpec
    mass: np.ndarray
    im_weight: np.ndarray
    grad_weight: np.ndarray
    pairs: list  # [(w, R)] for w (Re(conj(R) e))^2

    def value(self, eps) -> float:
        e = _as_array(eps).astype(complex)
        ex = diff(e, self.grid, 1)
        dens = (0.5 * self.grad_weight * np.abs(ex) ** 2 + self.mass * np.abs(e) ** 2
                + self.im_weight * np.imag(np.conj(e) * ex))
        for w, R in self.pairs:
            dens = dens + w * np.real(np.conj(R) * e) ** 2
        return float(quad(dens, self.grid))

    def matrix(self) -> np.ndarray:
        """Real symmetric 2N x 2N matrix A with value(e) = dx * z.A.z, z = (Re e, Im e)."""
        n = self.grid.n_points
        d1 = derivative_matrix(self.grid, 1)
        a = np.zeros((2 * n, 2 * n))
        grad = 0.5 * d1.T @ (self.grad_weight[:, None] * d1)
        a[:n, :n] += grad
        a[n:, n:] += grad
        idx = np.arange(n)
        a[idx, idx] += self.mass
        a[idx + n, idx + n] += self.mass
        # q Im(conj(e) e_x) = q (a b_x - b a_x) = a.(QD + DQ).b with D antisymmetric
        qd = self.im_weight[:, None] * d1
        cross = 0.5 * (qd - qd.T)
        a[:n, n:] += cross
        a[n:, :n] += cross.T
        for w, R in self.pairs:
            rr, ri = R.real, R.imag
            a[idx, idx] += w * rr * rr
            a[idx + n, idx + n] += w * ri * ri
            a[idx, idx + n] += w * rr * ri
            a[idx + n, idx] += w * rr * ri
        return 0.5 * (a + a.T)

    def scaled(self, weight: np.ndarray) -> "QuadraticForm":
        """Same form with every integrand multiplied by ``weight``."""
        return QuadraticForm(self.grid, self.mass * weight, self.im_weight * weight,
                             self.grad_weight * weight,
                             [(w * weight, R) for w, R in self.pairs])


def h1_gram(grid: GridSpec, weight: np.ndarray | None = None) -> np.ndarray:
    """Matrix G with int (|e_x|^2 + |e|^2) weight = dx * z.G.z."""
    n = grid.n_points
    w = np.ones(n) if weight is None else weight
    d1 = derivative_matrix(grid, 1)
    g = d1.T @ (w[:, None] * d1) + np.diag(w)
    out = np.zeros((2 * n, 2 * n))
    out[:n, :n] = g
    out[n:, n:] = g
    return 0.5 * (out + out.T)


def real_direction(Y: np.ndarray) -> np.ndarray:
    """Vector y with Re int Y conj(e) = dx * y.z."""
    return np.concatenate([Y.real, Y.imag])


def _single_terms(omega, c, R):
    a = np.abs(R) ** 2
    mass = 0.5 * omega - 3.0 / 32.0 * a * a + 0.25 * c * a
    pair_w = -3.0 / 8.0 * a + 0.5 * c
    return mass, pair_w


def form_H_terms(p: WaveParams, grid: GridSpec) -> QuadraticForm:
    _require_sub(p.omega, p.c)
    R = wave_values(p, grid)
    mass, pair_w = _single_terms(p.omega, p.c, R)
    n = grid.n_points
    return QuadraticForm(grid, mass, np.full(n, -0.5 * p.c), np.ones(n), [(pair_w, R)])


def form_H(p: WaveParams, eps) -> float:
    """
    Moving-frame quadratic form around R = R(p):
    int 1/2|e_x|^2 - 3/32|R|^4|e|^2 - 3/8|R|^2 (Re conj(R) e)^2 + omega/2 |e|^2
        - c/2 Im(conj(e) e_x) + c/4 |R|^2 |e|^2 + c/2 (Re conj(R) e)^2.
    """
    grid = eps.grid
    return form_H_terms(p, grid).value(eps)


def form_Htilde(omega: float, c: float, eta: Field) -> float:
    """Integral form of <L+ eta1, eta1> + <L- eta2, eta2> for eta = eta1 + i eta2."""
    _require_sub(omega, c)
    grid = eta.grid
    phi = phi_profile(omega, c, grid).values.real
    e = eta.values
    ex = diff(e, grid, 1)
    p2 = phi * phi
    e1sq = e.real**2
    esq = np.abs(e) ** 2
    dens = (0.5 * np.abs(ex) ** 2 + 0.5 * (omega - 0.25 * c * c) * esq
            - 3.0 / 32.0 * p2 * p2 * esq - 3.0 / 8.0 * p2 * p2 * e1sq
            + 0.25 * c * p2 * esq + 0.5 * c * p2 * e1sq)
    return float(quad(dens, grid))


def form_Htilde_operator(omega: float, c: float, eta: Field) -> float:
    lp, lm = linearized_ops(omega, c, eta.grid)
    return lp.form(eta.values.real) + lm.form(eta.values.imag)


def pair_form_terms(p1: WaveParams, p2: WaveParams, grid: GridSpec,
                    g: np.ndarray, h: np.ndarray) -> QuadraticForm:
    """Two-wave form with the left/right partition g + h = 1."""
    R1 = wave_values(p1, grid)
    R2 = wave_values(p2, grid)
    m1, w1 = _single_terms(0.0, p1.c, R1)
    m2, w2 = _single_terms(0.0, p2.c, R2)
    mass = m1 + m2 + 0.5 * p1.omega * g + 0.5 * p2.omega * h
    im_w = -0.5 * p1.c * g - 0.5 * p2.c * h
    return QuadraticForm(grid, mass, im_w, np.ones(grid.n_points), [(w1, R1), (w2, R2)])


def localized_forms(pair, eps, cut=None, weight=None) -> float:
    """
    Localized quadratic forms. With ``cut = (g, h)`` and a pair of waves this
    is the two-wave form; with ``weight`` (a positive field) and a single
    wave it is the single-wave form with every integrand multiplied by the
    weight.
    """
    grid = eps.grid
    if cut is not None:
        p1, p2 = _pair_members(pair)
        g, h = (np.real(_as_array(f)) for f in cut)
        return pair_form_terms(p1, p2, grid, g, h).value(eps)
    if weight is not None:
        p = pair if isinstance(pair, WaveParams) else _pair_members(pair)[0]
        return form_H_terms(p, grid).scaled(np.real(_as_array(weight))).value(eps)
    raise ValueError("give either cut=(g, h) or weight")


def _pair_members(pair):
    if hasattr(pair, "p1"):
        return pair.p1, pair.p2
    return tuple(pair)


def single_directions(p: WaveParams, grid: GridSpec):
    """The four orthogonality directions R, iR_x + |R|^2 R/2, R_x, iR."""
    R = wave_values(p, grid)
    Rx = diff(R, grid, 1)
    return [R, 1j * Rx + 0.5 * np.abs(R) ** 2 * R, Rx, 1j * R]


def measured_coercivity(form: QuadraticForm, directions, gram: np.ndarray | None = None):
    """
    Exact grid minimum of form(e) / |e|^2_{H^1} over e orthogonal (in the
    Re int sense) to every direction. Returns (constant, minimizer values).
    """
    grid = form.grid
    a = form.matrix()
    g = h1_gram(grid) if gram is None else gram
    cmat = np.column_stack([real_direction(np.asarray(Y)) for Y in directions])
    z = _complement_basis(cmat)
    az = z.T @ a @ z
    gz = z.T @ g @ z
    vals, vecs = sla.eigh(az, gz, subset_by_index=[0, 0])
    y = z @ vecs[:, 0]
    n = grid.n_points
    return float(vals[0]), y[:n] + 1j * y[n:]


def project_out(values: np.ndarray, directions, grid: GridSpec) -> np.ndarray:
    """Remove from ``values`` its components along the directions (Re-L^2 sense)."""
    cmat = np.column_stack([real_direction(np.asarray(Y)) for Y in directions])
    q, _ = np.linalg.qr(cmat)
    z = real_direction(values)
    z = z - q @ (q.T @ z)
    n = grid.n_points
    return z[:n] + 1j * z[n:]


def weight_profile(x) -> np.ndarray:
    """
    An even C^2 weight equal to 1 on |x| <= 1 and to exp(-|x|) for |x| >= 3/2,
    nonincreasing in |x|, with exp(-|x|) <= weight <= 3 exp(-|x|) between:
    weight = exp(-psi(|x|)), psi(r) = r S((r - 1)/tau) with the quintic
    smoothstep S and tau = 1/2.
    """
    r = np.abs(np.asarray(x, dtype=float))
    tau = 0.5
    u = np.clip((r - 1.0) / tau, 0.0, 1.0)
    s = u**3 * (10.0 - 15.0 * u + 6.0 * u * u)
    return np.exp(-r * s)


def localized_weight(grid: GridSpec, B: float, y0: float) -> np.ndarray:
    return weight_profile((grid.x - y0) / B)
