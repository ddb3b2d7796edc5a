"""Power-type nonlinearities f(x,t), their primitives, and dealiased evaluation.

Shipped families are |t|^{p-1} t and a(x) |t|^{p-1} t with a periodic strictly
positive modulation a.  Both satisfy the structural hypotheses (periodicity,
continuity, superlinearity at infinity with Ambrosetti-Rabinowitz exponent
mu <= p+1, sign condition t f >= 0); verify_hypotheses samples them and
reports the fitted growth constants.

Pointwise products of band-limited fields are evaluated on a zero-padded grid
so that, for integer p, the projection of f(x,u) back to the retained band is
alias-free.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from itertools import product
from typing import Optional

import numpy as np

from .errors import DomainError, HypothesisViolated, ValidationError
from .grids import (
    Field,
    FracParams,
    Spectrum,
    TorusGrid,
    _symmetrize_nyquist,
    field_to_json,
    forward_transform,
)


@dataclass(frozen=True)
class NonlinearitySpec:
    """Parameters of one shipped nonlinearity family."""

    kind: str  # "pure_power" | "modulated_power"
    p: float
    mu: float = 0.0  # defaults to p + 1
    r0: float = 1.0
    a: Optional[Field] = None

    def __post_init__(self):
        if self.kind not in ("pure_power", "modulated_power"):
            raise ValidationError(f"unknown nonlinearity kind {self.kind!r}")
        if self.p <= 1:
            raise ValidationError(f"growth exponent p must exceed 1, got {self.p}")
        if self.mu == 0.0:
            object.__setattr__(self, "mu", self.p + 1.0)
        if not (2.0 < self.mu <= self.p + 1.0):
            raise ValidationError(
                f"AR exponent must satisfy 2 < mu <= p+1, got mu={self.mu}, p={self.p}"
            )
        if self.r0 <= 0:
            raise ValidationError(f"AR threshold r0 must be positive, got {self.r0}")
        if self.kind == "modulated_power":
            if self.a is None:
                raise ValidationError("modulated_power requires a coefficient field")
            if np.min(self.a.values) <= 0:
                raise HypothesisViolated(
                    "f6",
                    witness=float(np.min(self.a.values)),
                    message="modulation changes sign: t f(x,t) >= 0 fails",
                )
        elif self.a is not None:
            raise ValidationError("pure_power takes no coefficient field")

    def check_growth(self, params: FracParams, grid: TorusGrid):
        """Subcritical growth p < 2 Sharp_s - 1 on the attached grid."""
        limit = params.critical_exponent(grid.N) - 1.0
        if not self.p < limit:
            raise ValidationError(
                f"p={self.p} must be < critical growth {limit} (N={grid.N}, s={params.s})"
            )

    @property
    def integer_degree(self) -> Optional[int]:
        p = self.p
        return int(round(p)) if abs(p - round(p)) < 1e-12 else None

    def coefficient(self, grid: TorusGrid) -> np.ndarray:
        if self.kind == "pure_power":
            return np.ones(grid.shape)
        if self.a.grid != grid:
            raise ValidationError("coefficient field lives on a different grid")
        return self.a.values

    # AR lower-bound witnesses F >= a3 |t|^mu - a4 (tight for mu = p+1).
    def ar_constants(self, grid: TorusGrid):
        a_min = float(np.min(self.coefficient(grid)))
        if self.mu == self.p + 1.0:
            return a_min / (self.p + 1.0), 0.0
        # for mu < p+1: |t|^{p+1} >= |t|^mu - 1 pointwise
        a3 = a_min / (self.p + 1.0)
        return a3, a3


def f_eval(spec: NonlinearitySpec, coeff: np.ndarray, t: np.ndarray) -> np.ndarray:
    """f(x,t) sampled on the grid; coeff is spec.coefficient(grid)."""
    return coeff * np.abs(t) ** (spec.p - 1.0) * t


def F_eval(spec: NonlinearitySpec, coeff: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Primitive F(x,t) = int_0^t f; nonnegative."""
    return coeff * np.abs(t) ** (spec.p + 1.0) / (spec.p + 1.0)


def fprime_eval(spec: NonlinearitySpec, coeff: np.ndarray, t: np.ndarray) -> np.ndarray:
    """d f / d t, used by Newton refinement."""
    return coeff * spec.p * np.abs(t) ** (spec.p - 1.0)


# ---------------------------------------------------------------------------
# dealiased pseudospectral evaluation

def padded_size(n: int, spec: Optional[NonlinearitySpec]) -> int:
    """Grid size making products up to the working degree alias-free.

    Odd integer p: |t|^{p-1} t = t^p is polynomial and degree p+1 enters
    through the primitive, so pad to (p_int+2)/2 * n (one extra n/2 when a
    modulation is present).  Even or fractional p is not polynomial (the |t|
    kink survives), so no finite padding is exact; the 3/2 rule keeps the
    residual alias error spectrally small.
    """
    if spec is None:
        return n
    deg = spec.integer_degree
    if deg is None or deg % 2 == 0:
        factor = 1.5
    else:
        factor = (deg + 2) / 2.0 + (0.5 if spec.kind == "modulated_power" else 0.0)
    m = int(math.ceil(n * factor))
    return m + (m % 2)


def _band_blocks(n: int, m: int):
    """Per-axis (coarse, fine) slice pairs mapping the retained band into a
    length-m FFT layout: nonnegative modes 0..n/2 then negatives -n/2+1..-1."""
    return [
        (slice(0, n // 2 + 1), slice(0, n // 2 + 1)),
        (slice(n // 2 + 1, n), slice(m - n // 2 + 1, m)),
    ]


def pad_coeffs(coeffs: np.ndarray, grid: TorusGrid, m: int) -> np.ndarray:
    """Real samples on the refined m-point grid; leading axes are batched.

    The coarse Nyquist coefficient represents the cosine pair; on the fine
    grid it is split evenly onto +-n/2 so the interpolant stays real.
    """
    g = grid
    lead = coeffs.shape[: coeffs.ndim - g.N]
    if m == g.n:
        big = coeffs
    else:
        big = np.zeros(lead + (m,) * g.N, dtype=complex)
        blocks = _band_blocks(g.n, m)
        for combo in product(blocks, repeat=g.N):
            csl = (Ellipsis,) + tuple(c for c, _ in combo)
            fsl = (Ellipsis,) + tuple(f for _, f in combo)
            big[fsl] = coeffs[csl]
        ny = g.n // 2
        for ax in range(g.N):
            src = [slice(None)] * g.N
            src[ax] = ny % m
            dst = [slice(None)] * g.N
            dst[ax] = (-ny) % m
            plane = 0.5 * big[(Ellipsis,) + tuple(src)]
            big[(Ellipsis,) + tuple(src)] = plane
            big[(Ellipsis,) + tuple(dst)] += plane
    axes = tuple(range(-g.N, 0))
    vals = np.fft.ifftn(big, axes=axes) * (m**g.N / g.T ** (g.N / 2.0))
    return vals.real


def restrict_values(values: np.ndarray, grid: TorusGrid) -> np.ndarray:
    """Band-projected coefficients of refined-grid samples (batched)."""
    g = grid
    m = values.shape[-1]
    axes = tuple(range(-g.N, 0))
    big = np.fft.fftn(values, axes=axes) * (g.T ** (g.N / 2.0) / m**g.N)
    if m == g.n:
        coeffs = big
    else:
        ny = g.n // 2
        for ax in range(g.N):
            src = [slice(None)] * g.N
            src[ax] = (-ny) % m
            dst = [slice(None)] * g.N
            dst[ax] = ny % m
            big[(Ellipsis,) + tuple(dst)] += big[(Ellipsis,) + tuple(src)]
        lead = values.shape[: values.ndim - g.N]
        coeffs = np.zeros(lead + g.shape, dtype=complex)
        blocks = _band_blocks(g.n, m)
        for combo in product(blocks, repeat=g.N):
            csl = (Ellipsis,) + tuple(c for c, _ in combo)
            fsl = (Ellipsis,) + tuple(f for _, f in combo)
            coeffs[csl] = big[fsl]
    return _symmetrize_nyquist_batch(grid, coeffs)


def _symmetrize_nyquist_batch(grid: TorusGrid, coeffs: np.ndarray) -> np.ndarray:
    coeffs = coeffs.copy()
    ny = grid.n // 2
    for ax in range(grid.N):
        sl = [slice(None)] * grid.N
        sl[ax] = ny
        sl = (Ellipsis,) + tuple(sl)
        coeffs[sl] = coeffs[sl].real
    return coeffs


def pad_to_grid(S: Spectrum, m: int) -> np.ndarray:
    return pad_coeffs(S.coeffs, S.grid, m)


def restrict_to_grid(values: np.ndarray, grid: TorusGrid) -> Spectrum:
    return Spectrum(grid, restrict_values(values, grid))


def field_on_padded_grid(u: Spectrum, spec: Optional[NonlinearitySpec]):
    m = padded_size(u.grid.n, spec)
    return m, pad_to_grid(u, m)


def _coefficient_padded(spec: NonlinearitySpec, grid: TorusGrid, m: int) -> np.ndarray:
    if spec.kind == "pure_power":
        return np.ones((m,) * grid.N)
    return pad_to_grid(forward_transform(spec.a), m)


def nonlinear_energy(spec: NonlinearitySpec, u: Spectrum) -> float:
    """int F(x, u(x)) dx by the trapezoid rule on the dealiased grid."""
    g = u.grid
    m, vals = field_on_padded_grid(u, spec)
    coeff = _coefficient_padded(spec, g, m)
    return float(np.sum(F_eval(spec, coeff, vals)) * (g.T / m) ** g.N)


def nonlinear_gradient(spec: NonlinearitySpec, u: Spectrum) -> Spectrum:
    """Band-limited spectrum of f(x, u(x)), dealiased by zero padding."""
    g = u.grid
    m, vals = field_on_padded_grid(u, spec)
    coeff = _coefficient_padded(spec, g, m)
    return restrict_to_grid(f_eval(spec, coeff, vals), g)


def nonlinear_jacobian_apply(spec: NonlinearitySpec, u: Spectrum, w: Spectrum) -> Spectrum:
    """Band-limited spectrum of f_t(x,u) w (Gateaux derivative of the gradient)."""
    g = u.grid
    m, vals = field_on_padded_grid(u, spec)
    wvals = pad_to_grid(w, m)
    coeff = _coefficient_padded(spec, g, m)
    return restrict_to_grid(fprime_eval(spec, coeff, vals) * wvals, g)


# ---------------------------------------------------------------------------
# hypothesis verification

@dataclass(frozen=True)
class HypothesisReport:
    passed: dict
    details: dict = dc_field(default_factory=dict)

    @property
    def all_pass(self) -> bool:
        return all(self.passed.values())


def verify_hypotheses(
    spec: NonlinearitySpec,
    grid: TorusGrid,
    t_samples=None,
    x_samples=None,
) -> HypothesisReport:
    """Sampled verification of the structural hypotheses (f1)-(f6).

    Raises HypothesisViolated on the first failing hypothesis; otherwise
    returns a report with the fitted growth constants, including the epsilon
    split |f| <= 2 eps |t| + (p+1) C_eps |t|^p for eps in {1, 0.1}.
    """
    r0 = spec.r0
    if t_samples is None:
        t_samples = np.concatenate(
            [np.linspace(-10 * r0, 10 * r0, 401), [-r0, r0]]
        )
    t = np.asarray(t_samples, dtype=float)
    coeff = spec.coefficient(grid)
    if x_samples is None:
        flat = coeff.ravel()
        x_idx = np.linspace(0, flat.size - 1, min(16, flat.size)).astype(int)
    else:
        flat = coeff.ravel()
        x_idx = np.asarray(x_samples, dtype=int)
    a_vals = flat[x_idx]

    passed, details = {}, {}
    # (f1) periodicity: exact by construction (coefficient lives on the grid).
    passed["f1_periodic"] = True
    # (f2) continuity: max jump of f in t on a refined grid.
    tt = np.linspace(t.min(), t.max(), 4001)
    fv = np.abs(a_vals[:, None]) * np.abs(tt) ** (spec.p - 1.0) * tt
    jump = float(np.max(np.abs(np.diff(fv, axis=1))))
    passed["f2_continuous"] = jump < 10.0 * np.max(np.abs(fv)) * (tt[1] - tt[0]) ** min(
        1.0, spec.p - 1.0
    ) + 1e-12
    details["f2_max_jump"] = jump
    # (f3) f(x,t) = o(t): |f/t| = a |t|^{p-1} -> 0.
    small = np.logspace(-6, -2, 20)
    ratio = float(np.max(np.abs(a_vals[:, None]) * small ** (spec.p - 1.0)))
    passed["f3_small_o"] = ratio < 1e-2
    details["f3_max_ratio_small_t"] = ratio
    # (f4) growth |f| <= C (1 + |t|^p): fitted C.
    fmax = np.abs(a_vals[:, None]) * np.abs(t) ** spec.p
    C_fit = float(np.max(fmax / (1.0 + np.abs(t) ** spec.p)))
    passed["f4_growth"] = np.isfinite(C_fit)
    details["f4_C"] = C_fit
    # (f5) AR: 0 < mu F <= t f on |t| >= r0.
    big = t[np.abs(t) >= r0]
    lhs = spec.mu * np.abs(a_vals[:, None]) * np.abs(big) ** (spec.p + 1) / (spec.p + 1)
    rhs = np.abs(a_vals[:, None]) * np.abs(big) ** (spec.p + 1)
    ok = np.all(lhs > 0) and np.all(lhs <= rhs * (1 + 1e-12))
    if not ok:
        bad = np.unravel_index(int(np.argmax(lhs - rhs)), lhs.shape)
        raise HypothesisViolated("f5", witness=(float(a_vals[bad[0]]), float(big[bad[1]])))
    passed["f5_ambrosetti_rabinowitz"] = True
    details["f5_equality"] = bool(spec.mu == spec.p + 1.0)
    # (f6) sign: t f(x,t) >= 0 needs a >= 0 (construction rejects sign changes,
    # re-checked here on the samples).
    tf = a_vals[:, None] * np.abs(t) ** (spec.p + 1)
    if np.min(tf) < 0:
        bad = np.unravel_index(int(np.argmin(tf)), tf.shape)
        raise HypothesisViolated("f6", witness=(int(x_idx[bad[0]]), float(t[bad[1]])))
    passed["f6_sign"] = True
    # epsilon-split growth bounds with reported C_eps.
    amax = float(np.max(np.abs(a_vals)))
    for eps in (1.0, 0.1):
        # f: a|t|^p <= 2 eps |t| + (p+1) C_eps |t|^p;
        # F: a|t|^{p+1}/(p+1) <= eps t^2 + C_eps |t|^{p+1}
        with np.errstate(divide="ignore", invalid="ignore"):
            need_f = (amax * np.abs(t) ** spec.p - 2 * eps * np.abs(t)) / (
                (spec.p + 1) * np.abs(t) ** spec.p
            )
            need_F = (amax * np.abs(t) ** (spec.p + 1) / (spec.p + 1) - eps * t**2) / (
                np.abs(t) ** (spec.p + 1)
            )
        C_eps = float(max(np.nanmax(need_f), np.nanmax(need_F), 0.0))
        details[f"C_eps_{eps}"] = C_eps
        fin = t[t != 0]
        lhs_f = amax * np.abs(fin) ** spec.p
        rhs_f = 2 * eps * np.abs(fin) + (spec.p + 1) * C_eps * np.abs(fin) ** spec.p
        lhs_F = amax * np.abs(fin) ** (spec.p + 1) / (spec.p + 1)
        rhs_F = eps * fin**2 + C_eps * np.abs(fin) ** (spec.p + 1)
        passed[f"growth_split_eps_{eps}"] = bool(
            np.all(lhs_f <= rhs_f * (1 + 1e-9)) and np.all(lhs_F <= rhs_F * (1 + 1e-9))
        )
    a3, a4 = spec.ar_constants(grid)
    details["a3"], details["a4"] = a3, a4
    Fv = np.abs(a_vals[:, None]) * np.abs(t) ** (spec.p + 1) / (spec.p + 1)
    passed["F_superquadratic_bound"] = bool(
        np.all(Fv >= a3 * np.abs(t) ** spec.mu - a4 - 1e-12)
    )
    return HypothesisReport(passed=passed, details=details)


def spec_to_json(spec: NonlinearitySpec) -> dict:
    doc = {"kind": spec.kind, "p": spec.p, "mu": spec.mu, "r0": spec.r0}
    if spec.a is not None:
        doc["a"] = field_to_json(spec.a)
    return doc
