"""Gaussian variational formulae for the minimal energy and chemical potential.

The trial family is phi_k(xi) = (2k/pi)^(1/4) exp(-k xi^2). For each lam the
width k(lam) minimizing the trial energy is the largest root of

    k^(3/2) (k^(1/2) + lam / (4 sqrt(pi))) + (v0 alpha^2 / 4) exp(-alpha^2 / (2k)) = 1/4,

and the approximations follow by integrating the L4 norm of the trial curve:

    E_app(lam)  = E_min(0)  + 1/(2 sqrt(pi)) int_0^lam sqrt(k(s)) ds
    mu_app(lam) = mu_min(0) + 1/(2 sqrt(pi)) (lam sqrt(k(lam)) + int_0^lam sqrt(k(s)) ds)
"""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import integrate, optimize

from .core import Grid, Params, WaveFunction, gaussian, hermite_ground

SQRT_PI = math.sqrt(math.pi)
SQRT_2PI = math.sqrt(2.0 * math.pi)
PI = math.pi

# quadratic coefficient of mu_app at lam = 0, i.e. -3 / (64 pi)
MU_QUADRATIC_EPS = 3.0 / (64.0 * PI)
# quadratic coefficient of the perturbative chemical potential it is compared with
PERTURBATIVE_EPS = 0.016553


class NoRootFound(RuntimeError):
    pass


class QuadratureError(RuntimeError):
    pass


def trial_energy(kappa: float, p: Params) -> float:
    if not kappa > 0:
        raise ValueError(f"kappa must be positive, got {kappa}")
    lattice = 0.0
    if p.v0 != 0.0:
        lattice = -0.5 * p.v0 * (-math.expm1(-p.alpha**2 / (2.0 * kappa)))
    return kappa + 0.25 / kappa + p.lam * math.sqrt(kappa) / (2.0 * SQRT_PI) + lattice


def kappa_equation(kappa: float, lam: float, v0: float = 0.0, alpha: float = 0.0) -> float:
    """Left minus right side of the stationarity condition for the trial width."""
    lhs = kappa**1.5 * (math.sqrt(kappa) + lam / (4.0 * SQRT_PI))
    if v0 != 0.0 and alpha != 0.0:
        lhs += 0.25 * v0 * alpha**2 * math.exp(-(alpha**2) / (2.0 * kappa))
    return lhs - 0.25


def _largest_root(f, lo: float, hi: float, n_scan: int, tol: float) -> float:
    grid = np.geomspace(lo, hi, n_scan)
    vals = np.array([f(x) for x in grid])
    for _ in range(60):
        if vals[-1] <= 0:
            # stationarity residual ~ kappa^2 for large kappa, so it turns positive
            hi *= 4.0
            grid = np.geomspace(lo, hi, n_scan)
            vals = np.array([f(x) for x in grid])
        else:
            break
    neg = np.nonzero(vals < 0)[0]
    if neg.size == 0 or vals[-1] <= 0:
        raise NoRootFound(f"no sign change of the width equation on [{lo:g}, {hi:g}]")
    # topmost bracket: f < 0 at a, f > 0 on (a, b]; refine to isolate the top root
    j = neg[-1]
    a, b = grid[j], grid[j + 1]
    for _ in range(3):
        sub = np.geomspace(a, b, 17)
        sv = np.array([f(x) for x in sub])
        jj = np.nonzero(sv < 0)[0][-1]
        a, b = sub[jj], sub[jj + 1]
    return optimize.brentq(f, a, b, xtol=tol * 1e-3, rtol=4 * np.finfo(float).eps, maxiter=500)


def solve_kappa(lam: float, p: Params | None = None, tol: float = 1e-12) -> float:
    """Optimal trial width: the largest root of the stationarity equation."""
    v0 = 0.0 if p is None else p.v0
    alpha = 0.0 if p is None else p.alpha
    f = lambda k: kappa_equation(k, lam, v0, alpha)  # noqa: E731
    hi = max(4.0, lam * lam / (4.0 * PI))
    kappa = _largest_root(f, 1e-6, hi, 64, tol)
    if abs(f(kappa)) > tol * max(1.0, kappa * kappa):
        raise NoRootFound(f"width equation residual {f(kappa):.3e} above tolerance")
    return kappa


def sigma(lam: float) -> float:
    """Positive root of s^4 + lam/(4 sqrt(pi)) s^3 = 1/4 (the v0 = 0 width, sqrt(kappa))."""
    c = lam / (4.0 * SQRT_PI)
    roots = np.roots([1.0, c, 0.0, 0.0, -0.25])
    real = roots[np.abs(roots.imag) <= 1e-8 * np.maximum(1.0, np.abs(roots))].real
    s = float(real[real > 0].max())
    for _ in range(50):  # polish with Newton
        g = s**4 + c * s**3 - 0.25
        dg = 4.0 * s**3 + 3.0 * c * s**2
        step = g / dg
        s -= step
        if abs(step) <= 1e-16 * s:
            break
    return s


def sigma_derivatives_at_zero() -> np.ndarray:
    """sigma and its first four derivatives at lam = 0."""
    sqrt2 = math.sqrt(2.0)
    return np.array(
        [
            sqrt2 / 2.0,
            -1.0 / (16.0 * SQRT_PI),
            3.0 / (128.0 * PI * sqrt2),
            -3.0 / (512.0 * PI * SQRT_PI),
            45.0 / (16384.0 * PI**2 * sqrt2),
        ]
    )


def _adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, depth):
    m = 0.5 * (a + b)
    lm = 0.5 * (a + m)
    rm = 0.5 * (m + b)
    flm, frm = f(lm), f(rm)
    left = (m - a) * (fa + 4.0 * flm + fm) / 6.0
    right = (b - m) * (fm + 4.0 * frm + fb) / 6.0
    delta = left + right - whole
    if abs(delta) <= 15.0 * tol:
        return left + right + delta / 15.0
    if depth <= 0:
        raise QuadratureError(f"adaptive Simpson did not converge on [{a}, {b}]")
    return _adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + _adaptive_simpson(
        f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1
    )


@dataclass
class VariationalCurve:
    """k(lam) for fixed (v0, alpha), with cached roots and integrals of sqrt(k).

    The integral from 0 is accumulated between cached anchor points so that a
    sweep over lam reuses all previous work.
    """

    params: Params = field(default_factory=Params)
    kappa_solver_tol: float = 1e-12
    quad_tol: float = 1e-10
    cached_nodes: dict = field(default_factory=dict, repr=False)
    _anchors: dict = field(default_factory=lambda: {0.0: 0.0}, repr=False)
    _lock: threading.RLock = field(default_factory=threading.RLock, repr=False, compare=False)

    def kappa(self, lam: float) -> float:
        lam = float(lam)
        k = self.cached_nodes.get(lam)
        if k is None:
            with self._lock:
                k = self.cached_nodes.get(lam)
                if k is None:
                    k = solve_kappa(lam, self.params, self.kappa_solver_tol)
                    self.cached_nodes[lam] = k
        return k

    def sqrt_kappa(self, lam: float) -> float:
        return math.sqrt(self.kappa(lam))

    def _segment(self, a: float, b: float) -> float:
        if a == b:
            return 0.0
        f = self.sqrt_kappa
        fa, fb = f(a), f(b)
        fm = f(0.5 * (a + b))
        whole = (b - a) * (fa + 4.0 * fm + fb) / 6.0
        # absolute tolerance, relaxed relative to large integrals where 1e-10 is below rounding
        tol = max(self.quad_tol, 1e-14 * abs(whole))
        return _adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, 50)

    def integral(self, lam: float) -> float:
        """int_0^lam sqrt(k(s)) ds."""
        lam = float(lam)
        value = self._anchors.get(lam)
        if value is not None:
            return value
        with self._lock:
            same_side = [x for x in self._anchors if (x >= 0) == (lam >= 0) and abs(x) <= abs(lam)]
            start = max(same_side, key=abs) if same_side else 0.0
            value = self._anchors[start] + self._segment(start, lam)
            self._anchors[lam] = value
        return value

    def e_min_0(self) -> float:
        if self.params.v0 == 0.0:
            return 1.0
        raise ValueError("E_min(0) with a lattice must be supplied from the numerical solver")

    def e_app(self, lam: float, e_min_0: float | None = None) -> float:
        e0 = self.e_min_0() if e_min_0 is None else e_min_0
        if lam == 0:
            return e0
        return e0 + self.integral(lam) / (2.0 * SQRT_PI)

    def mu_app(self, lam: float, mu_min_0: float | None = None) -> float:
        m0 = self.e_min_0() if mu_min_0 is None else mu_min_0
        if lam == 0:
            return m0
        return m0 + (lam * self.sqrt_kappa(lam) + self.integral(lam)) / (2.0 * SQRT_PI)

    def trial_energy_at_optimum(self, lam: float) -> float:
        return trial_energy(self.kappa(lam), self.params.with_lambda(lam))


@lru_cache(maxsize=32)
def curve_for(v0: float = 0.0, alpha: float = 0.0) -> VariationalCurve:
    return VariationalCurve(Params(0.0, v0, alpha))


def e_app(lam: float, p: Params | None = None, e_min_0: float | None = None) -> float:
    p = p or Params()
    return curve_for(p.v0, p.alpha).e_app(lam, e_min_0)


def mu_app(lam: float, p: Params | None = None, mu_min_0: float | None = None) -> float:
    p = p or Params()
    return curve_for(p.v0, p.alpha).mu_app(lam, mu_min_0)


# Taylor coefficients at lam = 0 (v0 = 0), written out independently for E and mu
_E_COEFFS = (
    1.0,
    1.0 / (2.0 * SQRT_2PI),
    -1.0 / (64.0 * PI),
    1.0 / (512.0 * PI * SQRT_2PI),
    -1.0 / (8192.0 * PI**2),
    9.0 / (786432.0 * PI**2 * SQRT_2PI),
)
_MU_COEFFS = (
    1.0,
    1.0 / SQRT_2PI,
    -3.0 / (64.0 * PI),
    4.0 / (512.0 * PI * SQRT_2PI),
    -5.0 / (8192.0 * PI**2),
    54.0 / (786432.0 * PI**2 * SQRT_2PI),
)


@dataclass(frozen=True)
class TaylorSeries:
    coefficients: np.ndarray
    center: float = 0.0

    def __call__(self, lam):
        x = np.asarray(lam, dtype=float) - self.center
        return np.polynomial.polynomial.polyval(x, self.coefficients)

    @property
    def order(self) -> int:
        return len(self.coefficients) - 1

    def truncated(self, order: int) -> "TaylorSeries":
        return TaylorSeries(self.coefficients[: order + 1], self.center)


def taylor_e_mu() -> tuple[TaylorSeries, TaylorSeries]:
    e = np.array(_E_COEFFS)
    mu = np.array(_MU_COEFFS)
    n = np.arange(len(e))
    if not np.allclose(mu, (n + 1) * e, rtol=1e-15, atol=0.0):
        raise AssertionError("Taylor tables violate mu_n = (n+1) E_n")
    return TaylorSeries(e), TaylorSeries(mu)


def mu_quadratic(lam, eps: float = MU_QUADRATIC_EPS):
    """Second-order chemical potential model 1 + lam/sqrt(2 pi) - eps lam^2."""
    lam = np.asarray(lam, dtype=float)
    return 1.0 + lam / SQRT_2PI - eps * lam**2


def mu_perturbative(lam):
    return mu_quadratic(lam, PERTURBATIVE_EPS)


def approx_ground_state(lam: float, grid: Grid) -> WaveFunction:
    """The optimal trial Gaussian phi_{k(lam)} (v0 = 0)."""
    return gaussian(grid, sigma(lam) ** 2)


def truncated_coefficients(lam: float, exact_second_order: bool = False) -> tuple[float, float]:
    """(amplitude factor, width k) of the second-order expansion of phi_{k(lam)}.

    With ``exact_second_order`` the lam^2 terms come from the exact expansion
    k = 1/2 - lam/(8 sqrt(2 pi)) + lam^2/(64 pi) and amplitude 5 lam^2/(1024 pi).
    The default keeps lam^2/(128 pi) in k and lam^2/(1024 pi) in the amplitude,
    which agree with the exact curve through first order only.
    """
    if exact_second_order:
        amp = 1.0 - math.sqrt(2.0) * lam / (32.0 * SQRT_PI) + 5.0 * lam**2 / (1024.0 * PI)
        kappa = 0.5 - lam / (8.0 * SQRT_2PI) + lam**2 / (64.0 * PI)
    else:
        amp = 1.0 - math.sqrt(2.0) * lam / (32.0 * SQRT_PI) + lam**2 / (1024.0 * PI)
        kappa = 0.5 - lam / (8.0 * SQRT_2PI) + lam**2 / (128.0 * PI)
    return amp, kappa


def approx_ground_state_truncated(
    lam: float, grid: Grid, exact_second_order: bool = False
) -> WaveFunction:
    amp, kappa = truncated_coefficients(lam, exact_second_order)
    xi = grid.nodes
    return WaveFunction(grid, amp * PI**-0.25 * np.exp(-kappa * xi**2))


def _cited_integrand(z: float, xi2: np.ndarray, guard: float) -> np.ndarray:
    one_minus = 1.0 - z * z
    if abs(1.0 - z) < guard:
        # removable singularity at z = 1: limit of the quotient is (1 - 2 xi^2) / 2
        return 0.5 - xi2
    return (np.exp(-xi2 * one_minus / (z * z)) - z) / one_minus


def cited_integral(xi: np.ndarray, guard: float = 1e-6) -> np.ndarray:
    """int_1^{sqrt(2)/2} (exp(-xi^2 (1 - z^2) / z^2) - z) / (1 - z^2) dz, per node."""
    xi2 = np.asarray(xi, dtype=float) ** 2
    # oriented from 1 down to sqrt(2)/2, hence the sign flip
    value, err = integrate.quad_vec(
        lambda z: _cited_integrand(z, xi2, guard), math.sqrt(2.0) / 2.0, 1.0, epsabs=1e-13, epsrel=1e-12
    )
    if not np.all(np.isfinite(value)):
        raise QuadratureError("cited order parameter integral is not finite")
    return -value


def cited_order_parameter(lam: float, grid: Grid, coupling_factor: float = 1.0) -> WaveFunction:
    """Closed-form first-order order parameter from the perturbative literature (not normalized).

    ``coupling_factor`` rescales lam inside the bracket. The formula as printed
    (factor 1) deviates from the numerical ground state at first order; factor
    1/2 makes it first-order exact, consistent with a coupling convention that
    differs by two.
    """
    phi0 = hermite_ground(grid).values.real
    bracket = 1.0 + coupling_factor * lam / SQRT_2PI * cited_integral(grid.nodes)
    return WaveFunction(grid, phi0 * bracket)
