"""Diffusion nonlinearities a(u) and the primitives the functionals need.

Four families are supported:

    inverse_u          a(u) = 1/u            (singular at 0)
    inverse_one_plus_u a(u) = 1/(1+u)
    power_one_plus_u   a(u) = (1+u)^p
    power_u            a(u) = u^p            (singular at 0 for p < 0)

Primitives are normalized at the base point 1:

    A(u)  = int_1^u a(r) dr
    At(u) = int_1^u a(r)/r dr

so A(1) = At(1) = 0.  b(u) = u*a(u) is the source weight appearing in
the energy balance; it equals 1 for inverse_u and u/(1+u) for
inverse_one_plus_u.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

KINDS = ("inverse_u", "inverse_one_plus_u", "power_one_plus_u", "power_u")

# power_one_plus_u criticality in 1d: p > -1 subcritical, p = -1 critical,
# p < -1 supercritical
CRITICAL_P = -1.0


class DomainError(ValueError):
    """Raised when a(u) is evaluated outside its admissible range."""


@dataclass(frozen=True)
class DiffusionSpec:
    """The nonlinearity a(u), selected by kind string and exponent p."""

    kind: str
    p: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown diffusion kind {self.kind!r}")

    @property
    def singular_at_zero(self) -> bool:
        if self.kind == "inverse_u":
            return True
        if self.kind == "power_u":
            return self.p < 0
        return False

    @property
    def criticality(self) -> str:
        """Classification of the exponent: subcritical/critical/supercritical."""
        if self.kind in ("inverse_u", "inverse_one_plus_u"):
            return "critical"
        if self.p > CRITICAL_P:
            return "subcritical"
        if self.p == CRITICAL_P:
            return "critical"
        return "supercritical"

    def _check(self, u):
        u = np.asarray(u, dtype=float)
        if self.singular_at_zero:
            if np.any(u <= 0.0):
                raise DomainError(f"{self.kind} requires u > 0")
        elif np.any(u < 0.0):
            raise DomainError(f"{self.kind} requires u >= 0")
        return u

    def a(self, u):
        """Evaluate a(u); strictly positive on the admissible range."""
        u = self._check(u)
        if self.kind == "inverse_u":
            return 1.0 / u
        if self.kind == "inverse_one_plus_u":
            return 1.0 / (1.0 + u)
        if self.kind == "power_one_plus_u":
            return (1.0 + u) ** self.p
        return u**self.p

    def a_prime(self, u):
        """Analytic derivative a'(u)."""
        u = self._check(u)
        if self.kind == "inverse_u":
            return -1.0 / u**2
        if self.kind == "inverse_one_plus_u":
            return -1.0 / (1.0 + u) ** 2
        if self.kind == "power_one_plus_u":
            return self.p * (1.0 + u) ** (self.p - 1.0)
        return self.p * u ** (self.p - 1.0)

    def A(self, u):
        """Primitive A(u) = int_1^u a(r) dr, A(1) = 0."""
        u = self._check(u)
        if self.kind == "inverse_u":
            return np.log(u)
        if self.kind == "inverse_one_plus_u":
            return np.log((1.0 + u) / 2.0)
        if self.kind == "power_one_plus_u":
            if self.p == -1.0:
                return np.log((1.0 + u) / 2.0)
            q = self.p + 1.0
            return ((1.0 + u) ** q - 2.0**q) / q
        if self.p == -1.0:
            return np.log(u)
        q = self.p + 1.0
        return (u**q - 1.0) / q

    def A_tilde(self, u):
        """Primitive int_1^u a(r)/r dr, zero at u = 1.

        Closed forms where elementary; the power_one_plus_u family falls
        back to adaptive quadrature.
        """
        u = self._check(u)
        if np.any(u == 0.0):
            raise DomainError("A_tilde requires u > 0")
        if self.kind == "inverse_u":
            return 1.0 - 1.0 / u
        if self.kind == "inverse_one_plus_u":
            return np.log(2.0 * u / (1.0 + u))
        if self.kind == "power_u":
            if self.p == 0.0:
                return np.log(u)
            return (u**self.p - 1.0) / self.p
        if self.p == -1.0:
            return np.log(2.0 * u / (1.0 + u))
        # (1+r)^p / r has no elementary primitive for general p
        integrand = lambda r: (1.0 + r) ** self.p / r
        if u.ndim == 0:
            return quad(integrand, 1.0, float(u))[0]
        return np.array([quad(integrand, 1.0, ui)[0] for ui in u.ravel()]).reshape(u.shape)

    def b(self, u):
        """Source weight b(u) = u*a(u) of the energy balance."""
        u = self._check(u)
        if self.kind == "inverse_u":
            return np.ones_like(u)
        if self.kind == "inverse_one_plus_u":
            return u / (1.0 + u)
        return u * self.a(u)
