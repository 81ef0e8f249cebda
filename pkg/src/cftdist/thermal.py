"""Gibbs-state moment machinery on the circle.

All kernel pairings run in Fourier space, where the +i0 prescription is
exact for smooth test functions.  In the theta-convention used here, with
f(theta) = sum_k fhat_k e^{i k theta} and T(f) = 2 pi sum_k fhat_k L_k, the
Gibbs trace algebra (cyclicity plus L_k exp(-beta L_0) = exp(-beta k)
exp(-beta L_0) L_k) gives the exact moment recursion with:

  Phi[f]            = (c/12) (2 pi)^2 sum_{k != 0} k (k^2-1) c_k fhat_k fhat_{-k}
  (f *_beta f)_l    = 2 pi sum_{k != 0} c_k (2k - l) fhat_k fhat_{l-k}
                      - pi l fhat_0 fhat_l
  d beta / d lambda = - int f dtheta

with the Bose weights c_k = 1/(1 - e^{-beta k}).  The second term of the
star is an imaginary circle rotation acting trivially on every Gibbs
correlator; including it keeps real fields real along the flow.  These
forms are validated against exact truncated-Fock-space traces in the test
suite; the moment generating function is then

  M_beta[mu f] = exp[ mu <T(f)>_beta
                      + int_0^mu (mu - lam) <T(f_lam)^2>^C_{beta_lam} dlam ].
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field as dc_field

import numpy as np

from .charfun import cumulative_simpson
from .diffeo import CircleField
from .errors import (
    AccuracyWarning,
    ParameterError,
    ThermalCollapseError,
)
from .spectral import PeriodicGrid

__all__ = [
    "EllipticKernel", "ModeField", "mode_field", "phi_pair", "star_beta",
    "thermal_flow", "ThermalFlowState", "VacuumCharacter",
    "SpectrumPartitionFunction", "mean_t", "connected_t2", "thermal_mgf",
]


def bose_weight(k, beta: float):
    """c_k = 1/(1 - exp(-beta k)) for k != 0; c_k + c_{-k} = 1."""
    k = np.asarray(k, dtype=float)
    with np.errstate(divide="ignore", over="ignore"):
        out = 1.0 / (1.0 - np.exp(-beta * k))
    return np.where(k == 0, 0.0, out)


# ---------------------------------------------------------------------------
# elliptic kernel: Fourier series as the defining object, theta form as check


@dataclass(frozen=True)
class EllipticKernel:
    """phi(theta) = sum_{n != 0} e^{i n theta} / (1 - e^{-beta n}), truncated."""

    beta: float
    n_max: int = 128

    def __post_init__(self):
        if self.beta <= 0:
            raise ParameterError("beta must be positive")
        if self.n_max < 8:
            raise ParameterError("n_max must be at least 8")

    def coefficient(self, n):
        return bose_weight(n, self.beta)

    def smooth_part(self, theta):
        """phi(theta) + 1/2 - (i/2) cot(theta/2) = 2i sum_{n>0} sin(n theta)/(e^{beta n}-1).

        Rapidly convergent; smooth across theta = 0.
        """
        theta = np.asarray(theta, dtype=float)
        out = np.zeros_like(theta, dtype=complex)
        for n in range(1, self.n_max + 1):
            term = 1.0 / math.expm1(self.beta * n)
            if term < 1e-18:
                break
            out += 2j * term * np.sin(n * theta)
        return out

    def smooth_part_theta_form(self, theta):
        """Same smooth part via Jacobi theta functions with nome q = e^{-beta/2}:

        phi(theta) = (i/2) theta1'(theta/2, q)/theta1(theta/2, q) - 1/2.
        """
        theta = np.asarray(theta, dtype=float)
        q = math.exp(-0.5 * self.beta)
        v = 0.5 * theta
        th, dth = _theta1_with_deriv(v, q)
        return 0.5j * (dth / th - 1.0 / np.tan(v))

    def mode_defect(self, n_check: int = 24, grid_size: int = 4096) -> float:
        """Max |mode_n(theta form) - c_n| over 0 < |n| <= n_check.

        The theta-form modes are the FFT of the smooth part plus the exact
        modes 1_{n >= 1} of the singular part.
        """
        grid = PeriodicGrid(grid_size)
        smooth = self.smooth_part_theta_form(grid.theta + math.pi / grid_size)
        # evaluate at midpoints to stay off the removable endpoint, then
        # translate the phases back
        coeffs = np.fft.fft(smooth) / grid_size
        k = np.fft.fftfreq(grid_size, d=1.0 / grid_size).astype(int)
        coeffs = coeffs * np.exp(-1j * k * math.pi / grid_size)
        defect = 0.0
        for n in range(-n_check, n_check + 1):
            if n == 0:
                continue
            val = coeffs[n % grid_size] + (1.0 if n >= 1 else 0.0)
            defect = max(defect, abs(val - complex(bose_weight(n, self.beta))))
        return float(defect)


def _theta1_with_deriv(v, q: float):
    """theta1(v, q) and d theta1/dv by the rapidly convergent sine series."""
    v = np.asarray(v, dtype=float)
    th = np.zeros_like(v)
    dth = np.zeros_like(v)
    for k in range(64):
        coeff = (-1.0) ** k * q ** ((k + 0.5) ** 2)
        if coeff == 0.0 or abs(coeff) < 1e-20:
            break
        m = 2 * k + 1
        th += 2.0 * coeff * np.sin(m * v)
        dth += 2.0 * coeff * m * np.cos(m * v)
    return th, dth


# ---------------------------------------------------------------------------
# mode-space fields


@dataclass(frozen=True)
class ModeField:
    """Circle field as Fourier coefficients fhat_k, k = -n_max..n_max."""

    coeffs: np.ndarray          # length 2*n_max + 1, index k + n_max
    n_max: int

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.shape != (2 * self.n_max + 1,):
            raise ParameterError("coefficient array must have length 2*n_max + 1")
        object.__setattr__(self, "coeffs", c)

    def mode(self, k: int) -> complex:
        if abs(k) > self.n_max:
            return 0.0 + 0.0j
        return complex(self.coeffs[k + self.n_max])

    @property
    def modes(self) -> np.ndarray:
        return np.arange(-self.n_max, self.n_max + 1)

    def integral(self) -> complex:
        """int_0^{2 pi} f dtheta = 2 pi fhat_0."""
        return 2.0 * np.pi * self.mode(0)

    def is_real(self, tol: float = 1e-12) -> bool:
        c = self.coeffs
        return bool(np.max(np.abs(c - np.conj(c[::-1]))) <= tol * max(1.0, np.max(np.abs(c))))

    def values(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        return np.exp(1j * np.multiply.outer(theta, self.modes)) @ self.coeffs

    def pad_to(self, n_max: int) -> "ModeField":
        if n_max < self.n_max:
            raise ParameterError("pad_to cannot shrink the band")
        out = np.zeros(2 * n_max + 1, dtype=complex)
        out[n_max - self.n_max: n_max + self.n_max + 1] = self.coeffs
        return ModeField(out, n_max)

    def tail_fraction(self) -> float:
        c = np.abs(self.coeffs)
        scale = max(c.max(), 1e-300)
        octave = self.n_max - max(self.n_max // 4, 1)
        k = np.abs(self.modes)
        return float(c[k >= octave].max() / scale)


def mode_field(f, n_max: int = 64) -> ModeField:
    """ModeField from a CircleField, a coefficient dict {k: value}, or ModeField."""
    if isinstance(f, ModeField):
        return f.pad_to(n_max) if n_max > f.n_max else f
    if isinstance(f, CircleField):
        out = np.zeros(2 * n_max + 1, dtype=complex)
        for k in range(-n_max, n_max + 1):
            out[k + n_max] = f.mode(k)
        return ModeField(out, n_max)
    if isinstance(f, dict):
        out = np.zeros(2 * n_max + 1, dtype=complex)
        for k, v in f.items():
            if abs(k) > n_max:
                raise ParameterError(f"mode {k} outside the band {n_max}")
            out[k + n_max] = v
        return ModeField(out, n_max)
    raise ParameterError("unsupported field description")


def _check_band(f: ModeField, n_max_kernel: int):
    if f.tail_fraction() > 1e-10:
        warnings.warn("mode truncation tail above 1e-10 of the peak",
                      AccuracyWarning)
    if f.n_max > n_max_kernel:
        raise ParameterError("kernel truncation below the field band")


# ---------------------------------------------------------------------------
# pairings and the thermal star product


def phi_pair(f, g, beta: float, derivative_order: int = 0,
             n_max: int = 128) -> complex:
    """int int phi^(d)(theta1 - theta2 + i0) f(theta1) g(theta2) dtheta1 dtheta2.

    Fourier-mode evaluation (2 pi)^2 sum_{n != 0} (i n)^d c_n fhat_{-n} ghat_n,
    exact for band-limited smooth f, g.
    """
    if derivative_order not in (0, 1, 3):
        raise ParameterError("derivative order must be 0, 1 or 3")
    fm = mode_field(f, n_max)
    gm = mode_field(g, n_max)
    _check_band(fm, n_max)
    _check_band(gm, n_max)
    band = min(n_max, max(fm.n_max, gm.n_max))
    total = 0.0 + 0.0j
    for n in range(-band, band + 1):
        if n == 0:
            continue
        cn = float(bose_weight(n, beta))
        total += (1j * n) ** derivative_order * cn * fm.mode(-n) * gm.mode(n)
    return complex((2.0 * np.pi) ** 2 * total)


def quadratic_energy(f, beta: float, c: float, n_max: int = 128) -> float:
    """Phi[f] = (c/12)(2 pi)^2 sum_{k != 0} k (k^2 - 1) c_k fhat_k fhat_{-k}.

    Equals (i c/12) [phi_pair(f, f, d=3) + phi_pair(f, f, d=1)]; real for
    real f (asserted to 1e-10).
    """
    val = 1j * (c / 12.0) * (phi_pair(f, f, beta, 3, n_max)
                             + phi_pair(f, f, beta, 1, n_max))
    fm = mode_field(f, n_max)
    if fm.is_real() and abs(val.imag) > 1e-10 * max(1.0, abs(val)):
        raise AssertionError(f"Phi[f] acquired imaginary part {val.imag:.2e}")
    return float(val.real) if fm.is_real() else val


def star_beta(f, beta: float, n_max: int | None = None) -> ModeField:
    """Thermal star product in mode space.

    (f *_beta f)_l = 2 pi sum_{k != 0} c_k (2k - l) fhat_k fhat_{l-k}
                     - pi l fhat_0 fhat_l.
    The output band is 1.5x the input band (quadratic spreading), capped by
    n_max when given; real input gives real output.
    """
    fm = f if isinstance(f, ModeField) else mode_field(f, n_max or 64)
    m = fm.n_max
    out_m = min(n_max, 2 * m) if n_max else int(1.5 * m) + 1
    k = fm.modes
    cw = bose_weight(k, beta)
    a = cw * fm.coeffs                       # c_k fhat_k (zero at k = 0)
    b = k * cw * fm.coeffs                   # k c_k fhat_k
    conv_a = np.convolve(a, fm.coeffs)       # index l + 2m over l = -2m..2m
    conv_b = np.convolve(b, fm.coeffs)
    out = np.zeros(2 * out_m + 1, dtype=complex)
    f0 = fm.mode(0)
    for l in range(-out_m, out_m + 1):
        val = 0.0 + 0.0j
        if abs(l) <= 2 * m:
            val = 2.0 * np.pi * (2.0 * conv_b[l + 2 * m] - l * conv_a[l + 2 * m])
        val -= np.pi * l * f0 * fm.mode(l)
        out[l + out_m] = val
    return ModeField(out, out_m)


# ---------------------------------------------------------------------------
# partition functions


class VacuumCharacter:
    """Trivial character: only the weight-0 state, Z(beta) = 1."""

    def log_z(self, beta: float) -> float:
        return 0.0

    def dlog_z(self, beta: float) -> float:
        return 0.0

    def d2log_z(self, beta: float) -> float:
        return 0.0

    def d3log_z(self, beta: float) -> float:
        return 0.0


class SpectrumPartitionFunction:
    """Z(beta) = sum_i m_i exp(-beta h_i) from a spectrum list [(h_i, m_i)].

    Log-derivatives are the cumulants of the level distribution; the first
    is -<L0> <= 0 and the second is Var(L0) >= 0, matching the positivity
    invariants of the type.
    """

    def __init__(self, levels):
        levels = [(float(h), float(m)) for h, m in levels]
        if not levels:
            raise ParameterError("spectrum list must be nonempty")
        if any(h < 0 or m <= 0 for h, m in levels):
            raise ParameterError("levels need h >= 0 and multiplicity > 0")
        self.levels = levels

    def _moments(self, beta: float):
        h = np.array([lv[0] for lv in self.levels])
        m = np.array([lv[1] for lv in self.levels])
        w = m * np.exp(-beta * (h - h.min()))
        z = w.sum()
        p = w / z
        mom = [float((p * h ** k).sum()) for k in range(4)]
        return math.log(z) - beta * h.min(), mom

    def log_z(self, beta: float) -> float:
        return self._moments(beta)[0]

    def dlog_z(self, beta: float) -> float:
        return -self._moments(beta)[1][1]

    def d2log_z(self, beta: float) -> float:
        _, mom = self._moments(beta)
        return mom[2] - mom[1] ** 2

    def d3log_z(self, beta: float) -> float:
        _, mom = self._moments(beta)
        return -(mom[3] - 3.0 * mom[2] * mom[1] + 2.0 * mom[1] ** 3)


# ---------------------------------------------------------------------------
# thermal observables and the coupled flow


def mean_t(f, beta: float, z) -> float:
    """<T(f)>_beta = (int f dtheta) * (-d log Z / d beta)."""
    fm = f if isinstance(f, ModeField) else mode_field(f)
    return float(np.real(fm.integral() * (-z.dlog_z(beta))))


def connected_t2(f, beta: float, z, c: float, n_max: int = 128):
    """<T(f)^2>^C_beta assembled from the kernel pairing and log Z derivatives:

    Phi[f] + (int f)^2 d2logZ - (int f *_beta f) dlogZ.
    """
    fm = f if isinstance(f, ModeField) else mode_field(f, n_max)
    phi_val = quadratic_energy(fm, beta, c, n_max=max(n_max, fm.n_max))
    intf = fm.integral()
    star_int = star_beta(fm, beta).integral()
    val = phi_val + intf ** 2 * z.d2log_z(beta) - star_int * z.dlog_z(beta)
    return float(np.real(val)) if fm.is_real() else complex(val)


@dataclass(frozen=True)
class ThermalFlowState:
    lam: float
    field: ModeField
    beta: float


def thermal_flow(f, beta: float, lambda_max: float, steps: int = 64,
                 n_max: int = 128, keep_every: int = 1):
    """Coupled RK4 for df/dlam = f *_beta f, dbeta/dlam = -int f dtheta.

    Returns the trajectory as a list of ThermalFlowState.  beta <= 0 along
    the integration raises with the last safe lambda attached.
    """
    fm = mode_field(f, n_max) if not isinstance(f, ModeField) else f
    n_max = max(n_max, fm.n_max)
    fm = fm.pad_to(n_max)
    if beta <= 0:
        raise ParameterError("beta must be positive")
    h = lambda_max / steps

    def rhs(coeffs, bet):
        field = ModeField(coeffs, n_max)
        ds = star_beta(field, bet, n_max=n_max)
        return ds.pad_to(n_max).coeffs, -float(np.real(field.integral()))

    coeffs = fm.coeffs.copy()
    bet = beta
    out = [ThermalFlowState(0.0, ModeField(coeffs.copy(), n_max), bet)]
    for k in range(steps):
        k1c, k1b = rhs(coeffs, bet)
        k2c, k2b = rhs(coeffs + 0.5 * h * k1c, bet + 0.5 * h * k1b)
        k3c, k3b = rhs(coeffs + 0.5 * h * k2c, bet + 0.5 * h * k2b)
        k4c, k4b = rhs(coeffs + h * k3c, bet + h * k3b)
        coeffs = coeffs + (h / 6.0) * (k1c + 2 * k2c + 2 * k3c + k4c)
        bet = bet + (h / 6.0) * (k1b + 2 * k2b + 2 * k3b + k4b)
        if bet <= 0:
            raise ThermalCollapseError(
                f"beta reached {bet:.3e} at lambda = {(k + 1) * h:.6g}",
                last_safe=k * h,
            )
        if (k + 1) % keep_every == 0 or k == steps - 1:
            out.append(ThermalFlowState((k + 1) * h, ModeField(coeffs.copy(), n_max), bet))
    return out


def thermal_mgf(f, beta: float, z, c: float, mu_grid, steps: int = 64,
                n_max: int = 128):
    """M_beta[mu f] on mu_grid (mu >= 0) via the coupled flow.

    log M = mu <T(f)>_beta + int_0^mu (mu - lam) <T(f_lam)^2>^C_{beta_lam};
    the trajectory is shared across all mu values.
    """
    mu_grid = np.asarray(mu_grid, dtype=float)
    if np.any(mu_grid < 0):
        raise ParameterError("thermal_mgf expects mu >= 0 (run -f for negative)")
    mu_max = float(mu_grid.max())
    fm = mode_field(f, n_max) if not isinstance(f, ModeField) else f
    n_max = max(n_max, fm.n_max)
    fm = fm.pad_to(n_max)
    mean = mean_t(fm, beta, z)
    if mu_max == 0.0:
        return np.ones_like(mu_grid), []
    traj = thermal_flow(fm, beta, mu_max, steps=steps, n_max=n_max)
    lam = np.array([s.lam for s in traj])
    var = np.array([complex(connected_t2(s.field, s.beta, z, c, n_max=n_max))
                    for s in traj])
    out = np.empty(mu_grid.shape, dtype=complex)
    for j, mu in enumerate(mu_grid):
        if mu == 0.0:
            out[j] = 1.0
            continue
        mask = lam <= mu + 1e-15
        w = cumulative_simpson((mu - lam[mask]) * var[mask], x=lam[mask])[-1]
        out[j] = np.exp(mu * mean + w)
    if np.max(np.abs(out.imag)) < 1e-10 * np.max(np.abs(out)):
        out = out.real
    return out, traj
