"""Test functions on circle and line, circle flows, and coordinate changes.

A circle field is stored by its real angular component f(theta); the smeared
stress operator it defines is T(f) = int_0^{2pi} T(theta) f(theta) dtheta in
the theta-convention used throughout, and the vector field it generates is
2*pi*f(theta) d/dtheta.  A line field g(u) generates g(u) d/du.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from functools import cached_property

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.special import gamma as real_gamma

from .errors import (
    CriticalPointError,
    FieldError,
    FlowDegeneracyError,
    GridError,
    ParameterError,
)
from .spectral import (
    LineGrid,
    PeriodicGrid,
    evaluate_fourier_series,
    fourier_coefficients,
    periodic_derivative,
    periodic_integral,
)

_REALITY_TOL = 1e-12
_SMOOTHNESS_TOL = 1e-10


# ---------------------------------------------------------------------------
# field containers


@dataclass(frozen=True)
class CircleField:
    """Real test function on the circle, sampled in the angular convention.

    `func`/`dfunc`/`d2func`, when given, are vectorized callables for the
    angular component and its first two derivatives at arbitrary (possibly
    complex) angles; flows prefer them over trigonometric interpolation.
    """

    grid: PeriodicGrid
    values: np.ndarray
    func: object = None
    dfunc: object = None
    d2func: object = None

    def __post_init__(self):
        values = np.asarray(self.values)
        if values.shape != (self.grid.n_points,):
            raise FieldError("sample count does not match the grid")
        if np.iscomplexobj(values):
            if np.max(np.abs(values.imag)) > _REALITY_TOL * max(1.0, np.max(np.abs(values))):
                raise FieldError("circle field violates the reality condition")
            values = values.real
        object.__setattr__(self, "values", values.astype(float))

    @cached_property
    def coeffs(self) -> np.ndarray:
        return fourier_coefficients(self.values)

    @cached_property
    def resolved(self) -> bool:
        """Smoothness proxy: top-octave Fourier content below 1e-10 of the peak."""
        c = np.abs(self.coeffs)
        scale = max(c.max(), 1e-300)
        n = self.grid.n_points
        k = np.abs(self.grid.modes)
        tail = c[k >= n // 4]
        return bool(tail.max() <= _SMOOTHNESS_TOL * scale)

    def _series(self, x, order=0):
        coeffs = self.coeffs
        if order:
            k = self.grid.modes
            coeffs = coeffs * (1j * k) ** order
        out = evaluate_fourier_series(coeffs, x, drop_below=1e-16)
        return out.real if np.isrealobj(np.asarray(x)) else out

    def eval_angular(self, x):
        """Angular component at arbitrary angles (complex allowed with `func`)."""
        if self.func is not None:
            return self.func(x)
        return self._series(x)

    def eval_angular_deriv(self, x, order: int = 1):
        if order == 1 and self.dfunc is not None:
            return self.dfunc(x)
        if order == 2 and self.d2func is not None:
            return self.d2func(x)
        return self._series(x, order)

    def integral(self) -> float:
        return float(periodic_integral(self.values))

    def mode(self, k: int) -> complex:
        """Fourier coefficient of exp(i k theta)."""
        return complex(self.coeffs[k % self.grid.n_points])


@dataclass(frozen=True)
class LineField:
    """Real test function on the light ray, compactly supported in the grid."""

    grid: LineGrid
    values: np.ndarray
    func: object = None
    dfunc: object = None
    d2func: object = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != (self.grid.n_points,):
            raise FieldError("sample count does not match the grid")
        object.__setattr__(self, "values", values)

    @cached_property
    def support(self) -> tuple:
        """Smallest node interval outside which |f| < 1e-14 * max|f|."""
        v = np.abs(self.values)
        scale = max(v.max(), 1e-300)
        idx = np.nonzero(v > 1e-14 * scale)[0]
        if idx.size == 0:
            return (0.0, 0.0)
        u = self.grid.nodes
        return (float(u[idx[0]]), float(u[idx[-1]]))

    @cached_property
    def decayed_at_ends(self) -> bool:
        v = np.abs(self.values)
        scale = max(v.max(), 1e-300)
        return bool(max(v[0], v[-1]) <= 1e-12 * scale)

    def eval(self, u):
        if self.func is not None:
            return self.func(u)
        u = np.asarray(u, dtype=float)
        out = np.interp(u, self.grid.nodes, self.values, left=0.0, right=0.0)
        return out

    def integral(self) -> float:
        return float(self.grid.spacing * self.values.sum())


# ---------------------------------------------------------------------------
# built-in families


def _zeros_like_input(x):
    x = np.asarray(x)
    return np.zeros(x.shape, dtype=complex if np.iscomplexobj(x) else float)


def zero_circle_field(grid: PeriodicGrid) -> CircleField:
    return CircleField(grid, np.zeros(grid.n_points), func=_zeros_like_input,
                       dfunc=_zeros_like_input, d2func=_zeros_like_input)


def resample_circle_field(f: CircleField, grid: PeriodicGrid) -> CircleField:
    """Same field sampled on another grid (callables carry over)."""
    if grid.n_points == f.grid.n_points:
        return f
    return CircleField(grid, f.eval_angular(grid.theta),
                       func=f.func, dfunc=f.dfunc, d2func=f.d2func)


def sine_mode_field(n: int, grid: PeriodicGrid) -> CircleField:
    """Angular component -sin(n*theta)/(2*pi*n); generates -(1/n) sin(n theta) d/dtheta."""
    if n < 1:
        raise ParameterError(f"mode number must be >= 1, got {n}")
    two_pi = 2.0 * np.pi
    return CircleField(
        grid, -np.sin(n * grid.theta) / (two_pi * n),
        func=lambda x: -np.sin(n * x) / (two_pi * n),
        dfunc=lambda x: -np.cos(n * x) / two_pi,
        d2func=lambda x: n * np.sin(n * x) / two_pi,
    )


def cosine_mode_field(n: int, grid: PeriodicGrid) -> CircleField:
    """Angular component cos(n*theta)/(2*pi*n); the quarter-turn of sine_mode_field."""
    if n < 1:
        raise ParameterError(f"mode number must be >= 1, got {n}")
    two_pi = 2.0 * np.pi
    return CircleField(
        grid, np.cos(n * grid.theta) / (two_pi * n),
        func=lambda x: np.cos(n * x) / (two_pi * n),
        dfunc=lambda x: -np.sin(n * x) / two_pi,
        d2func=lambda x: -n * np.cos(n * x) / two_pi,
    )


def gaussian_line_field(tau: float, grid: LineGrid, center: float = 0.0,
                        mass: float = 1.0) -> LineField:
    """Normalized Gaussian mass * exp(-((u-center)/tau)^2) / (tau sqrt(pi))."""
    if tau <= 0:
        raise ParameterError("tau must be positive")
    norm = mass / (tau * math.sqrt(math.pi))

    def func(u):
        return norm * np.exp(-(((u - center) / tau) ** 2))

    def dfunc(u):
        return -2.0 * (u - center) / tau ** 2 * func(u)

    def d2func(u):
        s = (u - center) / tau
        return (4.0 * s * s - 2.0) / tau ** 2 * func(u)

    return LineField(grid, func(grid.nodes), func=func, dfunc=dfunc, d2func=d2func)


def kappa_n(n) -> float:
    """kappa_n = Gamma(n - 1/2) / (Gamma(n) sqrt(pi)) = (1/pi) int (1+x^2)^-n dx."""
    n = float(n)
    if n <= 0.5:
        raise ParameterError("kappa_n needs n > 1/2")
    return float(real_gamma(n - 0.5) / (real_gamma(n) * math.sqrt(math.pi)))


def lorentzian_line_field(n: int, b0: float, grid: LineGrid) -> LineField:
    """Unit-mass power of a Lorentzian, a/(b0^2+u^2)^n with a = b0^(2n-1)/(pi kappa_n)."""
    if n < 1 or b0 <= 0:
        raise ParameterError("need integer n >= 1 and b0 > 0")
    a = b0 ** (2 * n - 1) / (math.pi * kappa_n(n))

    def func(u):
        return a / (b0 ** 2 + u ** 2) ** n

    def dfunc(u):
        return -2.0 * n * u * func(u) / (b0 ** 2 + u ** 2)

    def d2func(u):
        q = b0 ** 2 + u ** 2
        return func(u) * (4.0 * n * (n + 1) * u ** 2 / q ** 2 - 2.0 * n / q)

    return LineField(grid, func(grid.nodes), func=func, dfunc=dfunc, d2func=d2func)


def invgamma_line_field(gamma_: float, b0: float, grid: LineGrid,
                        mu0: float | None = None) -> LineField:
    """Unit-mass inverse-Gamma profile a exp(-b0/(u-mu0)) / (u-mu0)^gamma on u > mu0.

    The flow-compatible tie b0 = gamma*mu0 is applied when mu0 is omitted.
    """
    if gamma_ <= 1 or b0 <= 0:
        raise ParameterError("need gamma > 1 and b0 > 0")
    if mu0 is None:
        mu0 = b0 / gamma_
    a = b0 ** (gamma_ - 1) / real_gamma(gamma_ - 1)

    def _with_s(u, fn):
        u = np.asarray(u, dtype=float)
        s = u - mu0
        out = np.zeros_like(s)
        pos = s > 1e-300
        sp = s[pos]
        base = a * np.exp(-b0 / sp) / sp ** gamma_
        out[pos] = fn(base, sp)
        return out

    func = lambda u: _with_s(u, lambda f, s: f)  # noqa: E731
    dfunc = lambda u: _with_s(u, lambda f, s: f * (b0 / s ** 2 - gamma_ / s))  # noqa: E731
    d2func = lambda u: _with_s(  # noqa: E731
        u, lambda f, s: f * ((b0 / s ** 2 - gamma_ / s) ** 2 - 2.0 * b0 / s ** 3 + gamma_ / s ** 2))
    return LineField(grid, func(grid.nodes), func=func, dfunc=dfunc, d2func=d2func)


def gamma_picture_field(gamma_: float, b0: float, grid: LineGrid) -> LineField:
    """Image of the mu0=0 inverse-Gamma profile under u -> -1/u.

    Equals theta(-u) * a * (-u)^(gamma+2) * exp(b0*u) with the same a;
    decays exponentially to the left, vanishes to order gamma+2 at 0-.
    """
    if gamma_ <= 1 or b0 <= 0:
        raise ParameterError("need gamma > 1 and b0 > 0")
    a = b0 ** (gamma_ - 1) / real_gamma(gamma_ - 1)
    p = gamma_ + 2.0

    def _with_u(u, fn):
        u = np.asarray(u, dtype=float)
        out = np.zeros_like(u)
        neg = u < -1e-300
        un = u[neg]
        base = a * (-un) ** p * np.exp(b0 * un)
        out[neg] = fn(base, un)
        return out

    func = lambda u: _with_u(u, lambda f, v: f)  # noqa: E731
    dfunc = lambda u: _with_u(u, lambda f, v: f * (b0 + p / v))  # noqa: E731
    d2func = lambda u: _with_u(u, lambda f, v: f * ((b0 + p / v) ** 2 - p / v ** 2))  # noqa: E731
    return LineField(grid, func(grid.nodes), func=func, dfunc=dfunc, d2func=d2func)


# ---------------------------------------------------------------------------
# Moebius maps


@dataclass(frozen=True)
class LineMobius:
    """Real Moebius map u -> (a u + b)/(c u + d) with a d - b c > 0."""

    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        if self.a * self.d - self.b * self.c <= 0:
            raise ParameterError("line Moebius map must be orientation preserving")

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        return (self.a * u + self.b) / (self.c * u + self.d)

    def inverse(self) -> "LineMobius":
        return LineMobius(self.d, -self.b, -self.c, self.a)

    def deriv(self, u):
        u = np.asarray(u, dtype=float)
        det = self.a * self.d - self.b * self.c
        return det / (self.c * u + self.d) ** 2


@dataclass(frozen=True)
class CircleMobius:
    """Circle Moebius map z -> (a z + b)/(conj(b) z + conj(a)), |a|^2 - |b|^2 = 1."""

    a: complex
    b: complex

    def __post_init__(self):
        if not abs(abs(self.a) ** 2 - abs(self.b) ** 2 - 1.0) < 1e-12:
            raise ParameterError("circle Moebius parameters need |a|^2 - |b|^2 = 1")

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        return (self.a * z + self.b) / (np.conj(self.b) * z + np.conj(self.a))

    def inverse(self) -> "CircleMobius":
        return CircleMobius(np.conj(self.a), -self.b)

    def deriv(self, z):
        z = np.asarray(z, dtype=complex)
        return 1.0 / (np.conj(self.b) * z + np.conj(self.a)) ** 2

    def lift(self, theta):
        """Continuous lift chi with chi(0) in (-pi, pi]."""
        theta = np.asarray(theta, dtype=float)
        w = self(np.exp(1j * theta))
        raw = np.angle(w)
        # unwrap against the increasing reference theta
        return theta + np.angle(w * np.exp(-1j * theta))


# ---------------------------------------------------------------------------
# diffeomorphisms of the circle


@dataclass(frozen=True)
class Diffeo:
    """Orientation-preserving circle diffeomorphism via its lift on a grid.

    Stores the lift chi(theta_k), its derivatives, the inverse lift and the
    inverse derivatives needed by the welding kernel.  All arrays are real
    for genuine diffeomorphisms; imaginary-time continuations carry complex
    arrays with is_real=False (monotonicity is then not enforced).
    """

    grid: PeriodicGrid
    lift: np.ndarray
    lift_deriv: np.ndarray
    lift_deriv2: np.ndarray
    inv_lift: np.ndarray
    inv_deriv: np.ndarray
    inv_deriv2: np.ndarray
    t: float = 0.0
    is_real: bool = True

    @cached_property
    def _periodic_coeffs(self):
        return fourier_coefficients(self.lift - self.grid.theta)

    @cached_property
    def _deriv_coeffs(self):
        return fourier_coefficients(self.lift_deriv)

    @cached_property
    def _deriv2_coeffs(self):
        return fourier_coefficients(self.lift_deriv2)

    def eval_lift(self, x):
        return x + evaluate_fourier_series(self._periodic_coeffs, x, drop_below=1e-17)

    def eval_lift_deriv(self, x):
        return evaluate_fourier_series(self._deriv_coeffs, x, drop_below=1e-17)

    def eval_lift_deriv2(self, x):
        return evaluate_fourier_series(self._deriv2_coeffs, x, drop_below=1e-17)

    def compose(self, other: "Diffeo") -> "Diffeo":
        """Pointwise composition self o other on the shared grid."""
        if self.grid.n_points != other.grid.n_points:
            raise GridError("composition needs a shared grid")
        lift = self.eval_lift(other.lift)
        if self.is_real and other.is_real:
            lift = lift.real
        return diffeo_from_lift(self.grid, lift, t=self.t + other.t)

    def max_inverse_residual(self) -> float:
        """max_k |chi(chi^{-1}(theta_k)) - theta_k|, a self-consistency check."""
        return float(np.max(np.abs(self.eval_lift(self.inv_lift) - self.grid.theta)))


def _invert_lift(grid: PeriodicGrid, lift, eval_lift, eval_lift_deriv, newton_iters=4):
    theta = grid.theta
    two_pi = 2.0 * np.pi
    if np.isrealobj(lift):
        # monotone cubic first guess through one wrapped period, then Newton
        base = np.concatenate([lift - two_pi, lift, lift + two_pi, [lift[0] + 2 * two_pi]])
        args = np.concatenate([theta - two_pi, theta, theta + two_pi, [theta[0] + 2 * two_pi]])
        interp = PchipInterpolator(base, args, extrapolate=True)
        eta = interp(theta)
    else:
        eta = theta.astype(complex)
    for _ in range(newton_iters):
        eta = eta - (eval_lift(eta) - theta) / eval_lift_deriv(eta)
    return eta


def diffeo_from_lift(grid: PeriodicGrid, lift, t: float = 0.0) -> Diffeo:
    """Build the full Diffeo record (derivatives + inverse data) from lift samples."""
    lift = np.asarray(lift)
    is_real = bool(np.isrealobj(lift))
    periodic = lift - grid.theta
    d1 = periodic_derivative(periodic, 1) + 1.0
    d2 = periodic_derivative(periodic, 2)
    if is_real and np.min(d1) <= 0.0:
        raise FlowDegeneracyError(
            f"lift derivative reached {np.min(d1):.3e}; flow step too large or field too strong"
        )
    shell = Diffeo(grid, lift, d1, d2, lift, d1, d2, t=t, is_real=is_real)
    inv = _invert_lift(grid, lift, shell.eval_lift, shell.eval_lift_deriv)
    inv_d1 = 1.0 / shell.eval_lift_deriv(inv)
    inv_d2 = -shell.eval_lift_deriv2(inv) * inv_d1 ** 3
    if is_real:
        inv, inv_d1, inv_d2 = inv.real, inv_d1.real, inv_d2.real
    return Diffeo(grid, lift, d1, d2, inv, inv_d1, inv_d2, t=t, is_real=is_real)


def identity_diffeo(grid: PeriodicGrid) -> Diffeo:
    theta = grid.theta
    one = np.ones_like(theta)
    zero = np.zeros_like(theta)
    return Diffeo(grid, theta, one, zero, theta, one, zero, t=0.0)


def mobius_diffeo(m: CircleMobius, grid: PeriodicGrid) -> Diffeo:
    return diffeo_from_lift(grid, m.lift(grid.theta))


def _flow_with_jet(field: CircleField, t, steps: int, grid: PeriodicGrid):
    """RK4 for the node flow together with its first and second variations.

    State per node: (chi, chi', chi'') with
        chi_dot   = 2*pi*f(chi)
        chi'_dot  = 2*pi*f'(chi) * chi'
        chi''_dot = 2*pi*f''(chi) * chi'^2 + 2*pi*f'(chi) * chi''
    This avoids spectral differentiation of the lift, which loses resolution
    for strongly compressing flows.
    """
    two_pi = 2.0 * np.pi
    complex_time = bool(np.iscomplexobj(np.asarray(t)))
    dtype = complex if complex_time else float
    state = np.zeros((3, grid.n_points), dtype=dtype)
    state[0] = grid.theta
    state[1] = 1.0

    def rhs(s):
        f0 = field.eval_angular(s[0])
        f1 = field.eval_angular_deriv(s[0], 1)
        f2 = field.eval_angular_deriv(s[0], 2)
        out = np.empty_like(s)
        out[0] = two_pi * f0
        out[1] = two_pi * f1 * s[1]
        out[2] = two_pi * (f2 * s[1] ** 2 + f1 * s[2])
        return out

    h = t / steps
    for _ in range(steps):
        k1 = rhs(state)
        k2 = rhs(state + 0.5 * h * k1)
        k3 = rhs(state + 0.5 * h * k2)
        k4 = rhs(state + h * k3)
        state = state + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return state


def flow(field: CircleField, t, steps: int | None = None,
         grid: PeriodicGrid | None = None) -> Diffeo:
    """Integrate d chi/dt = 2*pi*f(chi) per grid node with fixed-step RK4.

    Derivatives of the lift come from the variational equations integrated
    alongside the flow; the inverse lift and its derivatives come from the
    backward flow (the flow is a one-parameter group).  `t` may be complex
    (imaginary flow-time analytic continuation), in which case the field
    must supply an analytic callable and the Diffeo carries complex data.
    """
    grid = grid or field.grid
    complex_time = bool(np.iscomplexobj(np.asarray(t)))
    if complex_time and field.func is None:
        raise FieldError("complex flow time needs a field with an analytic callable")
    if t == 0:
        return identity_diffeo(grid)
    if steps is None:
        steps = max(256, int(math.ceil(512 * abs(t))))
    if steps < 32:
        raise ParameterError("flow needs at least 32 steps")

    fwd = _flow_with_jet(field, t, steps, grid)
    bwd = _flow_with_jet(field, -t, steps, grid)
    if not complex_time and np.min(fwd[1].real) <= 0.0:
        raise FlowDegeneracyError(
            f"flow derivative reached {np.min(fwd[1].real):.3e}; "
            "step size too large or field too strong"
        )
    return Diffeo(
        grid,
        lift=fwd[0], lift_deriv=fwd[1], lift_deriv2=fwd[2],
        inv_lift=bwd[0], inv_deriv=bwd[1], inv_deriv2=bwd[2],
        t=t if not complex_time else 0.0,
        is_real=not complex_time,
    )


def closed_flow_sine_mode(n: int, t: float, grid: PeriodicGrid) -> Diffeo:
    """Exact flow of the sine-mode field: tan(n chi/2) = exp(-t) tan(n theta/2).

    All lift and inverse data are closed forms, so this stays exact for
    arbitrarily strong compression (the inverse is the flow at -t).
    """
    theta = grid.theta

    def lift_of(theta_arr, s):
        phi = n * theta_arr
        k = np.round(phi / (2.0 * np.pi))
        core = phi - 2.0 * np.pi * k
        flowed = 2.0 * np.arctan(np.exp(-s) * np.tan(core / 2.0))
        edge = np.isclose(np.abs(core), np.pi)
        flowed[edge] = core[edge]
        return (flowed + 2.0 * np.pi * k) / n

    def deriv_of(theta_arr, s):
        x = n * theta_arr / 2.0
        return np.exp(-s) / (np.cos(x) ** 2 + np.exp(-2.0 * s) * np.sin(x) ** 2)

    def deriv2_of(theta_arr, s):
        x = n * theta_arr / 2.0
        d = np.cos(x) ** 2 + np.exp(-2.0 * s) * np.sin(x) ** 2
        return n * np.exp(-s) * (1.0 - np.exp(-2.0 * s)) * np.sin(n * theta_arr) / (2.0 * d * d)

    return Diffeo(
        grid,
        lift=lift_of(theta, t), lift_deriv=deriv_of(theta, t), lift_deriv2=deriv2_of(theta, t),
        inv_lift=lift_of(theta, -t), inv_deriv=deriv_of(theta, -t),
        inv_deriv2=deriv2_of(theta, -t),
        t=t,
    )


# ---------------------------------------------------------------------------
# coordinate changes

_CAYLEY_GUARD = 1e-13


def cayley_pull(g: LineField, grid: PeriodicGrid) -> CircleField:
    """Circle field with T(f) = Theta(g), sampled via u = tan(theta/2).

    The angular component is f(theta) = cos^2(theta/2) g(tan(theta/2)) / pi,
    evaluated analytically when g carries a callable (never by interpolating
    mapped line samples).  g must be compactly supported away from the
    line-grid ends.
    """
    if not g.decayed_at_ends:
        raise FieldError("cayley_pull needs g supported away from the grid boundary")
    lo, hi = g.support

    def _masked(x, formula):
        """Evaluate `formula(half, u)` where finite; zero beyond the support image."""
        x = np.asarray(x)
        half = 0.5 * x
        if np.iscomplexobj(x):
            return formula(half, np.tan(half))
        out = np.zeros_like(x, dtype=float)
        c = np.cos(half)
        safe = np.abs(c) > _CAYLEY_GUARD
        u = np.tan(half[safe])
        inside = (u >= lo - 1.0) & (u <= hi + 1.0)
        vals = formula(half[safe][inside], u[inside])
        buf = np.zeros(u.shape, dtype=float)
        buf[inside] = vals
        out[safe] = buf
        return out

    func = lambda x: _masked(x, lambda h, u: np.cos(h) ** 2 * g.eval(u) / np.pi)  # noqa: E731
    dfunc = d2func = None
    if g.dfunc is not None:
        dfunc = lambda x: _masked(  # noqa: E731
            x, lambda h, u: (-np.sin(2.0 * h) / 2.0 * g.eval(u) + g.dfunc(u) / 2.0) / np.pi)
    if g.dfunc is not None and g.d2func is not None:
        d2func = lambda x: _masked(  # noqa: E731
            x, lambda h, u: (-np.cos(2.0 * h) / 2.0 * g.eval(u)
                             - np.sin(2.0 * h) * g.dfunc(u) / (4.0 * np.cos(h) ** 2)
                             + g.d2func(u) / (4.0 * np.cos(h) ** 2)) / np.pi)

    values = func(grid.theta)
    return CircleField(grid, values,
                       func=func if g.func is not None else None,
                       dfunc=dfunc, d2func=d2func)


def cayley_push(f: CircleField, grid: LineGrid) -> LineField:
    """Inverse of cayley_pull: g(u) = pi (1 + u^2) f(2 arctan u)."""
    def func(u):
        u = np.asarray(u, dtype=float)
        return np.pi * (1.0 + u ** 2) * f.eval_angular(2.0 * np.arctan(u))

    return LineField(grid, func(grid.nodes), func=func if f.func is not None else None)


def kms_pull(g: LineField, beta: float, n_points: int = 2048,
             pad: float = 0.5) -> LineField:
    """Vacuum-equivalent field g_beta(u) = (2 pi u / beta) g((beta/2 pi) log u).

    Sampled on a fresh grid covering the image of g's support under
    u = exp(2 pi s / beta), padded by `pad` on each side.
    """
    if beta <= 0:
        raise ParameterError("beta must be positive")
    lo, hi = g.support
    u_lo = math.exp(2.0 * math.pi * lo / beta)
    u_hi = math.exp(2.0 * math.pi * hi / beta)
    width = u_hi - u_lo
    grid = LineGrid(n_points, max(u_lo - pad * width, u_lo * 0.5),
                    u_hi + pad * width)

    def func(u):
        u = np.asarray(u, dtype=float)
        out = np.zeros_like(u)
        pos = u > 0
        out[pos] = (2.0 * np.pi * u[pos] / beta) * g.eval(beta * np.log(u[pos]) / (2.0 * np.pi))
        return out

    return LineField(grid, func(grid.nodes), func=func if g.func is not None else None)


def mobius_push_line(f: LineField, rho: LineMobius, grid: LineGrid) -> LineField:
    """Transformed field f_rho(u) = f(rho^{-1}(u)) rho'(rho^{-1}(u)) on `grid`."""
    inv = rho.inverse()

    def func(u):
        v = inv(u)
        return f.eval(v) * rho.deriv(v)

    return LineField(grid, func(grid.nodes), func=func if f.func is not None else None)


def mobius_push_circle(f: CircleField, m: CircleMobius,
                       grid: PeriodicGrid | None = None) -> CircleField:
    """Vector-field push of a circle field along a circle Moebius map."""
    grid = grid or f.grid
    dif = mobius_diffeo(m, grid)
    eta = dif.inv_lift
    values = f.eval_angular(eta) * dif.eval_lift_deriv(eta).real
    return CircleField(grid, values)


# ---------------------------------------------------------------------------
# Schwarzian derivative on the circle


def schwarzian_theta(w, grid: PeriodicGrid, denoise: float = 1e-14):
    """Schwarzian of theta |-> w(theta) for 2*pi-periodic samples w.

    Coefficients below denoise * max|coeff| are zeroed before applying the
    k**3 multiplier, which otherwise amplifies the FFT rounding floor.
    """
    w = np.asarray(w, dtype=complex)
    n = w.shape[-1]
    coeffs = np.fft.fft(w)
    if denoise > 0.0:
        floor = denoise * np.max(np.abs(coeffs))
        coeffs = np.where(np.abs(coeffs) < floor, 0.0, coeffs)
    k = np.fft.fftfreq(n, d=1.0 / n)
    mult1 = 1j * k
    mult1[n // 2] = 0.0
    mult3 = (1j * k) ** 3
    mult3[n // 2] = 0.0
    d1 = np.fft.ifft(coeffs * mult1)
    if np.min(np.abs(d1)) < 1e-10:
        raise CriticalPointError("map derivative vanishes on the grid")
    d2 = np.fft.ifft(coeffs * (1j * k) ** 2)
    d3 = np.fft.ifft(coeffs * mult3)
    return d3 / d1 - 1.5 * (d2 / d1) ** 2


def schwarzian_on_circle(w, grid: PeriodicGrid):
    """Schwarzian of w with respect to z = exp(i theta), from boundary samples.

    Chain rule with g(theta) = exp(i theta), Sg = 1/2:
    S_z w (e^{i theta}) = (S_theta w - 1/2) / (i e^{i theta})^2.
    """
    w = np.asarray(w, dtype=complex)
    s_theta = schwarzian_theta(w, grid)
    return np.exp(-2j * grid.theta) * (0.5 - s_theta)


# ---------------------------------------------------------------------------
# JSON field descriptors (external interface)


def field_from_spec(spec: dict, circle_grid: PeriodicGrid | None = None,
                    line_grid: LineGrid | None = None):
    """Build a field from the JSON descriptor used by the CLI.

    {"kind": "builtin", "name": "gaussian|lorentzian|invgamma|fn", "params": {...}}
    or {"kind": "samples", "grid": {...}, "values": [...]}.
    """
    kind = spec.get("kind")
    if kind == "builtin":
        name = spec.get("name")
        params = spec.get("params", {})
        if name == "fn":
            grid = circle_grid or PeriodicGrid(int(params.get("n_points", 512)))
            return sine_mode_field(int(params["n"]), grid)
        if name == "gaussian":
            grid = line_grid or LineGrid(int(params.get("n_points", 1024)), -16.0, 16.0)
            return gaussian_line_field(float(params.get("tau", 1.0)), grid,
                                       center=float(params.get("center", 0.0)))
        if name == "lorentzian":
            grid = line_grid or LineGrid(int(params.get("n_points", 4096)), -120.0, 120.0)
            return lorentzian_line_field(int(params.get("n", 1)), float(params.get("b0", 1.0)), grid)
        if name == "invgamma":
            grid = line_grid or LineGrid(int(params.get("n_points", 4096)), -1.0, 80.0)
            return invgamma_line_field(float(params.get("gamma", 2.0)),
                                       float(params.get("b0", 1.0)), grid)
        raise ParameterError(f"unknown builtin field {name!r}")
    if kind == "samples":
        gspec = spec["grid"]
        values = np.asarray(spec["values"], dtype=float)
        if gspec.get("type") == "circle":
            grid = PeriodicGrid(int(gspec["n_points"]))
            return CircleField(grid, values)
        grid = LineGrid(int(gspec["n_points"]), float(gspec["u_min"]), float(gspec["u_max"]))
        return LineField(grid, values)
    raise ParameterError(f"unknown field kind {kind!r}")
