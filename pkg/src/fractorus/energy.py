"""Reduced trace-space functional and its gradient.

On the trace space the extension energy collapses to a multiplier sum, so the
working functional is

    I(u) = 1/2 sum_k [(omega^2|k|^2+m^2)^s - m^{2s}] |c_k|^2 - int F(x,u) dx,

the kappa(s)-normalized restriction of the cylinder functional to minimal
extensions.  Critical points of I are exactly the discrete solutions of
[(-Lap+m^2)^s - m^{2s}] u = f(x,u).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DomainError
from .grids import FracParams, Spectrum, hs_norm, multiplier, project_zero_mean
from .nonlinearity import (
    NonlinearitySpec,
    nonlinear_energy,
    nonlinear_gradient,
)


@dataclass(frozen=True)
class EnergyReport:
    value: float
    quad: float
    nl: float
    grad_norm: float

    def to_json(self) -> dict:
        return {
            "value": self.value,
            "quad": self.quad,
            "nl": self.nl,
            "grad_norm": self.grad_norm,
        }


def quadratic_part(u: Spectrum, p: FracParams) -> float:
    mult = multiplier(u.grid, p, shifted=True)
    return 0.5 * float(np.sum(mult * np.abs(u.coeffs) ** 2))


def evaluate(
    u: Spectrum, p: FracParams, spec: Optional[NonlinearitySpec]
) -> EnergyReport:
    """Energy report; spec=None suppresses the nonlinear term (probe mode)."""
    quad = quadratic_part(u, p)
    nl = nonlinear_energy(spec, u) if spec is not None else 0.0
    g = gradient(u, p, spec, metric="L2")
    return EnergyReport(value=quad - nl, quad=quad, nl=nl, grad_norm=g.l2_norm())


def gradient(
    u: Spectrum,
    p: FracParams,
    spec: Optional[NonlinearitySpec],
    metric: str = "L2",
) -> Spectrum:
    """Residual spectrum of the Euler-Lagrange equation.

    L2: R_k = [(omega^2|k|^2+m^2)^s - m^{2s}] c_k - (f(.,u))_k.
    X:  the Sobolev-preconditioned R_k / (omega^2|k|^2+m^2)^s; at m = 0 the
    singular k=0 component stays in the L2 metric.
    """
    mult = multiplier(u.grid, p, shifted=True)
    R = mult * u.coeffs
    if spec is not None:
        R = R - nonlinear_gradient(spec, u).coeffs
    if metric == "L2":
        return Spectrum(u.grid, R)
    if metric != "X":
        raise DomainError(f"unknown metric {metric!r}")
    precond = multiplier(u.grid, p)
    zero = precond == 0.0
    out = np.empty_like(R)
    np.divide(R, precond, out=out, where=~zero)
    out[zero] = R[zero]
    return Spectrum(u.grid, out)


def quadratic_gap(u: Spectrum, p: FracParams) -> float:
    """Coercivity ratio quad(u)/|u|_{H^s}^2 on the zero-mean subspace.

    Bounded below by 1 - m^{2s}/(omega^2+m^2)^s, the exact minimum of the
    discrete multiplier ratio, attained at |k| = 1.
    """
    if abs(u.mean_coeff) > 1e-12 * max(u.l2_norm(), 1e-300):
        raise DomainError("quadratic_gap requires a zero-mean spectrum")
    h = hs_norm(u, p)
    if h == 0.0:
        raise DomainError("quadratic_gap undefined at u = 0")
    return 2.0 * quadratic_part(u, p) / h**2


def coercivity_constant(grid, p: FracParams) -> float:
    """1 - m^{2s}/(omega^2+m^2)^s, the sharp discrete Z-space constant."""
    return 1.0 - p.m ** (2.0 * p.s) / (grid.omega**2 + p.m**2) ** p.s


def decompose(u: Spectrum, p: FracParams):
    """Split u into its mean-mode component and the zero-mean remainder."""
    z = project_zero_mean(u)
    y = Spectrum(u.grid, u.coeffs - z.coeffs)
    return y, z
