"""The extension profile theta(y) = (2/Gamma(s)) (y/2)^s K_s(y).

theta is the minimal-energy decay profile of every Fourier mode of the
half-cylinder extension.  It solves

    theta'' + ((1-2s)/y) theta' - theta = 0,   theta(0)=1,  theta(inf)=0,

and carries the constant kappa(s) = 2^{1-2s} Gamma(1-s)/Gamma(s), which shows
up three independent ways: as a Gamma-function formula, as the weighted energy
integral of the profile, and as -lim_{y->0} y^{1-2s} theta'(y).

Derivatives come from the modified-Bessel recurrences, never from finite
differences.  With K_nu' = (nu/y) K_nu - K_{nu+1} one gets the closed forms

    theta'(y)  = -(2/Gamma(s)) (y/2)^s K_{1-s}(y)
    theta''(y) = -(2/Gamma(s)) (y/2)^s [ K_{1-s}(y)/y - K_{2-s}(y) ]

so the ODE residual probes the numerical consistency of the K evaluations at
three distinct orders rather than being an algebraic identity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np
from scipy.special import kv, kve, roots_jacobi

from .errors import DomainError, ExtrapolationDiverged

# Beyond this argument kv underflows; switch to the exponentially scaled form.
_KV_LARGE = 600.0


def kappa(s: float) -> float:
    """2^{1-2s} Gamma(1-s)/Gamma(s); satisfies kappa(s)*kappa(1-s) = 1."""
    if not (0.0 < s < 1.0):
        raise DomainError(f"kappa requires s in (0,1), got {s}")
    return 2.0 ** (1.0 - 2.0 * s) * math.gamma(1.0 - s) / math.gamma(s)


def _kv_safe(order: float, y: np.ndarray) -> np.ndarray:
    """K_order(y) elementwise, falling back to the scaled form for large y."""
    y = np.asarray(y, dtype=float)
    small = y <= _KV_LARGE
    out = np.empty_like(y)
    out[small] = kv(order, y[small])
    if np.any(~small):
        out[~small] = kve(order, y[~small]) * np.exp(-y[~small])
    return out


@dataclass(frozen=True)
class ThetaProfile:
    """Evaluator for theta, theta', theta'' at a fixed exponent s."""

    s: float
    _pref: float = dc_field(init=False, repr=False)

    def __post_init__(self):
        if not (0.0 < self.s < 1.0):
            raise DomainError(f"s must lie in (0,1), got {self.s}")
        object.__setattr__(self, "_pref", 2.0 / math.gamma(self.s))

    def _check(self, y):
        y = np.asarray(y, dtype=float)
        if np.any(y <= 0.0):
            raise DomainError("theta requires y > 0")
        return y

    def _envelope(self, y: np.ndarray) -> np.ndarray:
        return self._pref * (y / 2.0) ** self.s

    def theta(self, y):
        y = self._check(y)
        out = self._envelope(y) * _kv_safe(self.s, y)
        return out if out.ndim else float(out)

    def theta_prime(self, y):
        y = self._check(y)
        out = -self._envelope(y) * _kv_safe(1.0 - self.s, y)
        return out if out.ndim else float(out)

    def theta_second(self, y):
        y = self._check(y)
        out = -self._envelope(y) * (_kv_safe(1.0 - self.s, y) / y - _kv_safe(2.0 - self.s, y))
        return out if out.ndim else float(out)

    def ode_residual(self, y):
        """|theta'' + ((1-2s)/y) theta' - theta| with recurrence derivatives."""
        y = self._check(y)
        res = np.abs(
            self.theta_second(y)
            + (1.0 - 2.0 * self.s) / y * self.theta_prime(y)
            - self.theta(y)
        )
        return res if res.ndim else float(res)

    def conormal_integrand(self, y):
        """-y^{1-2s} theta'(y); tends to kappa(s) as y -> 0."""
        y = self._check(y)
        out = -(y ** (1.0 - 2.0 * self.s)) * self.theta_prime(y)
        return out if out.ndim else float(out)

    def conormal_limit_check(self, y_list) -> float:
        """Extrapolated y->0 limit of -y^{1-2s} theta'(y)."""
        y = np.asarray(y_list, dtype=float)
        if y.size < 2 or np.any(np.diff(y) >= 0) or np.any(y <= 0):
            raise DomainError("y_list must be decreasing positive reals")
        q = self.conormal_integrand(y)
        return float(extrapolate_to_zero(y, q[:, None], small_y_exponents(self.s))[0].real)

    def bound_witnesses(self, y_samples=None) -> dict:
        """Empirical sup of theta and of -y^{1-2s} theta' (the A_s, B_s bounds)."""
        if y_samples is None:
            y_samples = np.logspace(-6, 2, 400)
        y = np.asarray(y_samples, dtype=float)
        return {
            "theta_sup": float(np.max(self.theta(y))),
            "conormal_sup": float(np.max(self.conormal_integrand(y))),
        }


def small_y_exponents(s: float) -> list[float]:
    """Leading correction exponents of -y^{1-2s} theta'(y) near 0."""
    return sorted({2.0 - 2.0 * s, 2.0, 4.0 - 2.0 * s, 4.0})


def extrapolate_to_zero(y: np.ndarray, Q: np.ndarray, exponents) -> np.ndarray:
    """Fit Q(y_i) ~ L + sum_j a_j y_i^{b_j} columnwise; return the limits L.

    Q has shape (len(y), ncols).  The number of correction exponents is capped
    at len(y)-1 so the fit is never underdetermined.
    """
    y = np.asarray(y, dtype=float)
    exps = list(exponents)[: max(1, len(y) - 1)]
    A = np.column_stack([np.ones_like(y)] + [y**b for b in exps])
    sol, *_ = np.linalg.lstsq(A, Q, rcond=None)
    limits = sol[0]
    # Cauchy guard: increments of the raw values must shrink toward y = 0 and
    # the fitted limit must stay near the settling tail.
    steps = np.abs(np.diff(Q, axis=0))
    if len(y) >= 3:
        scale = np.max(np.abs(Q), axis=0) + 1e-300
        growing = steps[-1] > 2.0 * steps[-2] + 1e-12 * scale
        if np.any(growing):
            raise ExtrapolationDiverged("raw values diverge as y decreases")
    drift = np.abs(Q[-1] - limits)
    bad = drift > 10.0 * (steps[-1] + np.abs(limits) * 1e-9 + 1e-300)
    if np.any(bad & (np.abs(limits) > 0)):
        raise ExtrapolationDiverged("successive limit estimates are not Cauchy")
    return limits


# ---------------------------------------------------------------------------
# weighted half-line quadrature

@dataclass(frozen=True)
class HalflineRule:
    """Rule for integrals int_0^inf y^beta h(y) dy with h bounded and decaying.

    Built from Gauss-Jacobi nodes for the endpoint weight t^beta composed with
    the substitution y = -log(1-t), which handles both the algebraic endpoint
    behavior at 0 and the exponential decay at infinity.
    """

    beta: float
    nodes: int
    y: np.ndarray = dc_field(repr=False)
    w: np.ndarray = dc_field(repr=False)

    def integrate(self, h) -> float:
        return float(np.sum(self.w * h(self.y)))


def halfline_rule(beta: float, nodes: int = 400) -> HalflineRule:
    if beta <= -1.0:
        raise DomainError(f"weight exponent must exceed -1, got {beta}")
    x, wj = roots_jacobi(nodes, 0.0, beta)
    t = (x + 1.0) / 2.0
    wj = wj / 2.0 ** (beta + 1.0)  # now sum wj h(t) ~ int_0^1 t^beta h dt
    y = -np.log1p(-t)
    # residual factor (y/t)^beta from the substitution, plus the Jacobian
    w = wj * (y / t) ** beta / (1.0 - t)
    return HalflineRule(beta=beta, nodes=nodes, y=y, w=w)


def profile_energy_integral(s: float, nodes: int = 400) -> float:
    """int_0^inf y^{1-2s} (theta'(y)^2 + theta(y)^2) dy.

    The theta'^2 part is rewritten as int y^{2s-1} (y^{1-2s} theta')^2 dy so
    each piece sees a bounded integrand under its matching Jacobi weight; the
    raw theta'^2 blows up like y^{4s-2} at the origin for s < 1/2.
    """
    prof = ThetaProfile(s)
    rule_a = halfline_rule(1.0 - 2.0 * s, nodes)
    rule_b = halfline_rule(2.0 * s - 1.0, nodes)
    part_theta = rule_a.integrate(lambda y: prof.theta(y) ** 2)
    part_grad = rule_b.integrate(lambda y: prof.conormal_integrand(y) ** 2)
    return part_theta + part_grad
