"""Conformal welding on the circle by Nystrom discretization of (I+K) w = e^{i theta}.

The kernel is the cotangent-difference kernel built from the inverse lift of
the diffeomorphism; its two principal-value singularities cancel, leaving a
smooth kernel whose diagonal value is the Taylor limit derived below.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from functools import cached_property

import numpy as np
import scipy.linalg

from .diffeo import CircleField, Diffeo, schwarzian_on_circle
from .errors import FredholmError, ParameterError, WeldingAccuracyError
from .spectral import PeriodicGrid, evaluate_fourier_series, fourier_coefficients, periodic_integral

DEFAULT_RESIDUAL_TOL = 1e-7


@dataclass(frozen=True)
class WeldingSolution:
    """Boundary data of the outer welding map and its Schwarzian along the circle."""

    grid: PeriodicGrid
    w_minus: np.ndarray
    schwarzian: np.ndarray
    junction_residual: float
    flow_time: float = 0.0

    @property
    def n_points(self) -> int:
        return self.grid.n_points

    @cached_property
    def coeffs(self) -> np.ndarray:
        return fourier_coefficients(self.w_minus)

    @property
    def leading_coeff(self) -> complex:
        """Coefficient of e^{i theta}; ~1 for the normalization used here."""
        return complex(self.coeffs[1])

    def winding_number(self) -> int:
        """Winding of the image Jordan curve around the origin."""
        ang = np.unwrap(np.angle(self.w_minus))
        return int(round((ang[-1] - ang[0] + np.angle(self.w_minus[0] / self.w_minus[-1]) + 0.0) / (2 * np.pi))) \
            if False else int(round((np.diff(np.unwrap(np.angle(np.append(self.w_minus, self.w_minus[0])))).sum()) / (2 * np.pi)))

    def spectral_tail(self) -> float:
        """Relative top-octave Fourier content of w_minus, a resolution indicator."""
        c = np.abs(self.coeffs)
        n = self.grid.n_points
        k = np.abs(np.fft.fftfreq(n, d=1.0 / n).astype(int))
        return float(c[k >= n // 4].max() / max(c.max(), 1e-300))


def kernel_bracket(theta, theta_p, g, g_p, gprime_p):
    """Off-diagonal bracket cot((theta-theta')/2) - g'(theta') cot((g-g')/2)."""
    return 1.0 / np.tan(0.5 * (theta - theta_p)) - gprime_p / np.tan(0.5 * (g - g_p))


def kernel_diagonal(gprime, gsecond):
    """Limit of the bracket as theta' -> theta.

    Expanding both cotangents to second order around the coincidence point,
    the 2/(theta-theta') poles cancel and the finite part is g''/g' evaluated
    at theta, with g the inverse lift.
    """
    return gsecond / gprime


def assemble_kernel(rho: Diffeo, grid: PeriodicGrid | None = None) -> np.ndarray:
    """Dense Nystrom matrix of K with trapezoid weights 2*pi/N * i/(4*pi)."""
    grid = grid or rho.grid
    if grid.n_points != rho.grid.n_points:
        raise ParameterError("grid does not match the diffeomorphism")
    theta = grid.theta
    g = rho.inv_lift
    gp = rho.inv_deriv
    if rho.is_real and np.min(gp) <= 0:
        raise FredholmError("inverse lift is not monotone; cannot assemble kernel")
    n = grid.n_points
    dt = theta[:, None] - theta[None, :]
    dg = g[:, None] - g[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        bracket = 1.0 / np.tan(0.5 * dt) - gp[None, :] / np.tan(0.5 * dg)
    idx = np.arange(n)
    bracket[idx, idx] = kernel_diagonal(gp, rho.inv_deriv2)
    return (1j / (2.0 * n)) * bracket


def solve_welding(rho: Diffeo, tol: float = DEFAULT_RESIDUAL_TOL,
                  raise_on_residual: bool = True) -> WeldingSolution:
    """Solve (I+K) w = e^{i theta}, form the Schwarzian, certify the junction.

    The Fredholm solve pins w only up to an additive constant (K annihilates
    constants and the right-hand side was derived for a constant-free outer
    map, while the normalized welding generally has one); the constant is
    restored by forcing the mean of w o rho to vanish, i.e. the inner map to
    fix the origin.  The junction residual is then the sup-norm of the part
    of w_minus(rho(.)) outside the Hardy class z*H2 of the disk; it vanishes
    for an exact welding.
    """
    grid = rho.grid
    n = grid.n_points
    k_mat = assemble_kernel(rho)
    rhs = np.exp(1j * grid.theta)
    a = k_mat
    a[np.arange(n), np.arange(n)] += 1.0
    try:
        w_minus = scipy.linalg.solve(a, rhs)
    except scipy.linalg.LinAlgError as exc:  # pragma: no cover - defensive
        raise FredholmError(f"welding system singular: {exc}") from exc
    if rho.is_real:
        composed = evaluate_fourier_series(fourier_coefficients(w_minus), rho.lift,
                                           drop_below=1e-18)
        w_minus = w_minus - composed.mean()
        residual = junction_residual(w_minus, rho)
        if raise_on_residual and residual > tol:
            raise WeldingAccuracyError(
                f"junction residual {residual:.3e} exceeds tolerance {tol:.1e}",
                residual=residual,
            )
    else:
        # series evaluation at a complex lift amplifies the coefficient noise
        # floor exponentially; the additive constant is irrelevant for the
        # Schwarzian, so continuations skip normalization and certification.
        residual = float("nan")
    schw = schwarzian_on_circle(w_minus, grid)
    return WeldingSolution(grid, w_minus, schw, residual,
                           flow_time=getattr(rho, "t", 0.0))


def junction_residual(w_minus, rho: Diffeo) -> float:
    """Sup-norm of the non-Hardy content of w_minus composed with the diffeo."""
    coeffs = fourier_coefficients(w_minus)
    w_plus = evaluate_fourier_series(coeffs, rho.lift, drop_below=1e-18)
    plus_coeffs = fourier_coefficients(w_plus)
    n = plus_coeffs.shape[0]
    k = np.fft.fftfreq(n, d=1.0 / n).astype(int)
    bad = plus_coeffs.copy()
    bad[k >= 1] = 0.0
    defect = np.fft.ifft(bad * n)
    return float(np.max(np.abs(defect)))


def closed_welding_sine_mode(n: int, t: float, grid: PeriodicGrid) -> WeldingSolution:
    """Exact welding for the flow of the n-th sine-mode field at flow time t.

    w_minus(z) = z (1 - z^{-n} tanh(t/2))^{1/n} with the principal branch,
    valid since |tanh(t/2)| < 1 keeps the bracket off the cut; n = 1 is the
    Moebius case w_minus(z) = z - tanh(t/2) with vanishing Schwarzian.
    """
    if n < 1:
        raise ParameterError("mode number must be >= 1")
    tau = math.tanh(0.5 * t)
    z = np.exp(1j * grid.theta)
    if n == 1:
        w_minus = z - tau
        schw = np.zeros_like(z)
    else:
        w_minus = z * (1.0 - tau * z ** (-n)) ** (1.0 / n)
        schw = (n * n - 1.0) / (2.0 * z * z) * (-1.0 + (1.0 - tau * z ** (-n)) ** (-2.0))
    return WeldingSolution(grid, w_minus, schw, 0.0, flow_time=t)


def closed_wplus_sine_mode(n: int, t: float, grid: PeriodicGrid) -> np.ndarray:
    """Boundary values of the inner map of the closed-form welding pair."""
    tau = math.tanh(0.5 * t)
    z = np.exp(1j * grid.theta)
    if n == 1:
        sech2 = 1.0 - tau * tau
        return z * sech2 / (1.0 + tau * z)
    return z * math.cosh(0.5 * t) ** (-2.0 / n) * (1.0 + tau * z ** n) ** (-1.0 / n)


def pair_field_schwarzian(f: CircleField, ws: WeldingSolution):
    """Contour pairing (2*pi*i)^{-1} * oint f(z) S(z) dz in angular samples.

    With the angular field convention this is i * int e^{2 i theta} f(theta)
    S(e^{i theta}) dtheta; real for every worked closed-form case (checked
    empirically by callers, not assumed).
    """
    if f.grid.n_points != ws.grid.n_points:
        raise ParameterError("field and welding solution grids differ")
    integrand = np.exp(2j * ws.grid.theta) * f.values * ws.schwarzian
    return 1j * periodic_integral(integrand)


def pair_field_log_deriv_sq(f: CircleField, ws: WeldingSolution):
    """Pairing (2*pi*i)^{-1} * oint f(z) (d log w_minus / dz)^2 dz.

    Used by the highest-weight characteristic function; requires w_minus to
    be bounded away from zero on the circle.
    """
    from .errors import CriticalPointError
    from .spectral import periodic_derivative

    w = ws.w_minus
    if np.min(np.abs(w)) < 1e-10:
        raise CriticalPointError("w_minus vanishes on the grid; log derivative undefined")
    d_theta = periodic_derivative(w, 1)
    integrand = -1j * f.values * (d_theta / w) ** 2
    return periodic_integral(integrand)
