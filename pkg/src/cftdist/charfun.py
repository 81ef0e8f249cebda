"""Characteristic functions of smeared stress-tensor distributions.

The vacuum route: for each node t' of a uniform grid on [0, t_max], flow the
field to time t', solve the welding problem, pair the field with the
Schwarzian of the outer map, accumulate the cumulant by cumulative Simpson,
and exponentiate.  Negative t follows by Hermitian symmetry.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field as dc_field
from functools import cached_property

import numpy as np
from scipy.integrate import cumulative_simpson as _cumulative_simpson_real


def cumulative_simpson(y, x, initial=0.0):
    """Complex-safe wrapper around scipy's cumulative Simpson rule."""
    y = np.asarray(y)
    if np.iscomplexobj(y):
        return (_cumulative_simpson_real(y.real, x=x, initial=initial)
                + 1j * _cumulative_simpson_real(y.imag, x=x, initial=initial))
    return _cumulative_simpson_real(y, x=x, initial=initial)

from .diffeo import (
    CircleField,
    LineField,
    LineMobius,
    cayley_pull,
    flow,
    kms_pull,
    mobius_push_line,
    resample_circle_field,
)
from .errors import AccuracyWarning, ParameterError
from .spectral import LineGrid, PeriodicGrid
from .welding import (
    pair_field_log_deriv_sq,
    pair_field_schwarzian,
    solve_welding,
)

_PAIRING_REAL_TOL = 1e-8


@dataclass(frozen=True)
class CharFunSamples:
    """t |-> <exp(i t T(f))> on a symmetric grid, with provenance metadata."""

    t: np.ndarray
    values: np.ndarray
    central_charge: float
    variant: str
    meta: dict = dc_field(default_factory=dict)

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        values = np.asarray(self.values, dtype=complex)
        if t.shape != values.shape:
            raise ParameterError("t grid and values differ in shape")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "values", values)

    @cached_property
    def hermitian_defect(self) -> float:
        v = self.values
        return float(np.max(np.abs(v - np.conj(v[::-1]))))

    @cached_property
    def max_modulus(self) -> float:
        return float(np.max(np.abs(self.values)))

    def second_moment(self) -> float:
        """-phi''(0) by the central 5-point stencil on the sample grid."""
        i0 = int(np.argmin(np.abs(self.t)))
        if not (2 <= i0 <= self.t.size - 3):
            raise ParameterError("grid too short for the 5-point stencil")
        h = self.t[i0 + 1] - self.t[i0]
        v = self.values
        d2 = (-v[i0 + 2] + 16 * v[i0 + 1] - 30 * v[i0] + 16 * v[i0 - 1] - v[i0 - 2]) / (12 * h * h)
        return float(-d2.real)


def _symmetric(t_pos, phi_pos, c, variant, meta) -> CharFunSamples:
    """Assemble the full symmetric grid from t >= 0 data by conjugation."""
    t = np.concatenate([-t_pos[:0:-1], t_pos])
    values = np.concatenate([np.conj(phi_pos[:0:-1]), phi_pos])
    return CharFunSamples(t, values, c, variant, meta)


def _auto_points(t: float, n_points: int | None, n_max: int) -> int:
    if n_points is not None:
        return n_points
    # resolution demand grows with compression; start moderate, cap at n_max
    if t <= 1.5:
        return 256
    if t <= 3.0:
        return 512
    return 1024


def pairing_profile(f: CircleField, t_nodes, c: float, h: float = 0.0,
                    n_points: int | None = None, n_max: int = 4096,
                    pair_tol: float = 2e-6, steps_per_unit: int = 512):
    """The cumulant integrand I(t') over the node grid, with adaptive resolution.

    For each t' the welding is re-solved on doubling grids until the pairing
    changes by less than pair_tol (or n_max is reached, which raises an
    accuracy warning).  Returns (values, diagnostics).
    """
    t_nodes = np.asarray(t_nodes, dtype=float)
    out = np.empty(t_nodes.shape, dtype=complex)
    diags = []
    for i, tp in enumerate(t_nodes):
        if tp == 0.0:
            out[i] = 0.0
            diags.append({"t": 0.0, "n_points": 0, "residual": 0.0})
            continue
        n = _auto_points(tp, n_points, n_max)
        prev = None
        while True:
            grid = PeriodicGrid(n)
            fg = resample_circle_field(f, grid)
            steps = max(256, int(math.ceil(steps_per_unit * abs(tp))))
            rho = flow(fg, tp, steps=steps, grid=grid)
            ws = solve_welding(rho, raise_on_residual=False)
            val = (c / 12.0) * pair_field_schwarzian(fg, ws)
            if h != 0.0:
                val = val + h * pair_field_log_deriv_sq(fg, ws)
            if n_points is not None or (prev is not None and abs(val - prev) < pair_tol) \
                    or n >= n_max:
                if n_points is None and n >= n_max and prev is not None \
                        and abs(val - prev) >= pair_tol:
                    warnings.warn(
                        f"pairing at t'={tp:.3f} not converged at N={n} "
                        f"(last change {abs(val - prev):.2e})", AccuracyWarning)
                diags.append({"t": float(tp), "n_points": n,
                              "residual": ws.junction_residual})
                break
            prev = val
            n *= 2
        out[i] = val
    return out, diags


def _charfun_from_profile(f, c, t_max, n_t, variant, h=0.0, meta=None, **kw):
    if n_t < 5 or n_t % 2 == 0:
        raise ParameterError("n_t must be an odd integer >= 5 (Simpson nodes)")
    t_pos = np.linspace(0.0, t_max, n_t)
    integrand, diags = pairing_profile(f, t_pos, c, h=h, **kw)
    # The pairing is real for the symmetric mode families but genuinely
    # complex for skewed distributions; record, do not assume.
    imag_part = float(np.max(np.abs(integrand.imag)))
    cum = cumulative_simpson(integrand, x=t_pos, initial=0.0)
    phi_pos = np.exp(cum)
    meta = dict(meta or {})
    meta.update({"welding_nodes": diags, "pairing_imag": imag_part})
    return _symmetric(t_pos, phi_pos, c, variant, meta)


def vacuum_charfun(f: CircleField, c: float, t_max: float, n_t: int = 33,
                   **kw) -> CharFunSamples:
    """Vacuum characteristic function of T(f) for central charge c."""
    if c <= 0:
        raise ParameterError("central charge must be positive")
    return _charfun_from_profile(f, c, t_max, n_t, "vacuum", **kw)


def hw_charfun(f: CircleField, c: float, h: float, t_max: float,
               n_t: int = 33, **kw) -> CharFunSamples:
    """Characteristic function of T(f) in a highest-weight state of weight h.

    Same pipeline as the vacuum with the integrand augmented by h times the
    squared logarithmic derivative of the outer welding map.
    """
    if c <= 0:
        raise ParameterError("central charge must be positive")
    if h < 0:
        raise ParameterError("highest weight must be nonnegative")
    return _charfun_from_profile(f, c, t_max, n_t, "highest-weight",
                                 h=h, meta={"h": h}, **kw)


def lightray_charfun(g: LineField, c: float, t_max: float, n_t: int = 33,
                     circle_points: int = 512, **kw) -> CharFunSamples:
    """Vacuum characteristic function of the light-ray observable Theta(g)."""
    f = cayley_pull(g, PeriodicGrid(circle_points))
    cf = _charfun_from_profile(f, c, t_max, n_t, "lightray", **kw)
    return CharFunSamples(cf.t, cf.values, c, "lightray", cf.meta)


def recentered(g: LineField, n_points: int = 1024, half_width: float = 4.0) -> LineField:
    """Affine Moebius push moving g's support to an O(1) window around 0.

    Affine maps leave the vacuum distribution invariant, so pipelines may
    recentre freely; essential for the nearly-singular fields produced by
    kms_pull at large beta.
    """
    lo, hi = g.support
    mid = 0.5 * (lo + hi)
    scale = max(0.25 * (hi - lo), 1e-12)
    rho = LineMobius(1.0 / scale, -mid / scale, 0.0, 1.0)
    grid = LineGrid(n_points, -2.0 * half_width, 2.0 * half_width)
    return mobius_push_line(g, rho, grid)


def kms_charfun(g: LineField, beta: float, c: float, t_max: float,
                n_t: int = 33, circle_points: int = 512, **kw) -> CharFunSamples:
    """Thermal (KMS) characteristic function of Theta(g) at inverse temperature beta.

    Uses the vacuum pipeline on the pulled-back field g_beta, recentred by an
    affine Moebius map so the support stays resolvable for any beta.
    """
    gb = recentered(kms_pull(g, beta))
    cf = lightray_charfun(gb, c, t_max, n_t=n_t, circle_points=circle_points, **kw)
    meta = dict(cf.meta)
    meta["beta"] = beta
    return CharFunSamples(cf.t, cf.values, c, "thermal", meta)


def welding_mgf(f: CircleField, c: float, mu_grid, n_t: int = 17,
                h: float = 0.0, grid: PeriodicGrid | None = None):
    """M(mu) = phi(-i mu) by analytic continuation of the welding construction.

    The flow runs at imaginary flow time, the Fredholm solve proceeds with
    the complex lift, and the cumulant integral is taken along the imaginary
    axis: log M(mu) = -i int_0^mu I(-i s) ds.  Valid while the continued
    family stays invertible (|mu| below the vacuum-distribution growth
    bound); each sign of mu is integrated along its own ray.
    """
    mu_grid = np.asarray(mu_grid, dtype=float)
    out = np.empty(mu_grid.shape, dtype=complex)
    for sign in (1.0, -1.0):
        sel = mu_grid > 0 if sign > 0 else mu_grid < 0
        if not np.any(sel):
            continue
        mu_max = float(np.max(np.abs(mu_grid[sel])))
        s_nodes = np.linspace(0.0, mu_max, n_t)
        vals = np.zeros(s_nodes.shape, dtype=complex)
        for i, s in enumerate(s_nodes[1:], start=1):
            rho = flow(f, -1j * sign * s, grid=grid or f.grid,
                       steps=max(256, int(math.ceil(256 * s))))
            ws = solve_welding(rho, raise_on_residual=False)
            term = (c / 12.0) * pair_field_schwarzian(f, ws)
            if h != 0.0:
                term = term + h * pair_field_log_deriv_sq(f, ws)
            vals[i] = term
        cum = cumulative_simpson(-1j * sign * vals, x=s_nodes, initial=0.0)
        a = np.abs(mu_grid[sel])
        out[sel] = np.interp(a, s_nodes, cum.real) + 1j * np.interp(a, s_nodes, cum.imag)
    out[mu_grid == 0.0] = 0.0
    out = np.exp(out)
    if np.max(np.abs(out.imag)) < 1e-8 * np.max(np.abs(out)):
        return out.real
    warnings.warn("continued welding MGF retains an imaginary part", AccuracyWarning)
    return out
