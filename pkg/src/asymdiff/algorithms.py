"""
Asymmetric-cost diffusion LMS filters in adapt-then-combine form.

Every algorithm here adapts with an update of the form::

    phi_n = W_n + mu * g(e_n) * X_n

and differs only in the scalar error nonlinearity ``g``:

=========  ==============================================
DLMS       ``e``
DSELMS     ``sign(e)``
DLLAD      ``e / (1 + |e|)``
DLLCLMS    ``a*sign(e)`` if ``e > 0`` else ``b*sign(e)``
DQQCLMS    ``a*e`` if ``e > 0`` else ``b*e``
DLECLMS    ``a*b*(exp(a*e) - 1)``
=========  ==============================================

After adaptation each node averages its neighbors' intermediates with the
combination matrix, ``W_n = sum_l c[l, n] * phi_l``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .signals import estimation_error

ALGORITHMS = ("DLMS", "DSELMS", "DLLAD", "DLLCLMS", "DQQCLMS", "DLECLMS")
PROPOSED = ("DLLCLMS", "DQQCLMS", "DLECLMS")
BASELINES = ("DLMS", "DSELMS", "DLLAD")

DEFAULT_EXP_CLAMP = 50.0

# (mu, a, b) used when a config leaves them out
DEFAULT_PARAMETERS = {
    "DLMS": (0.35, 1.0, 1.0),
    "DSELMS": (0.35, 1.0, 1.0),
    "DLLAD": (0.35, 1.0, 1.0),
    "DLLCLMS": (0.4, 0.8, 4.0),
    "DQQCLMS": (0.4, 0.8, 6.0),
    "DLECLMS": (0.4, 0.32, 6.0),
}


class DivergenceError(ArithmeticError):
    """An estimate became non-finite."""


@dataclass(frozen=True)
class AlgorithmSpec:
    name: str
    mu: float
    a: float = 1.0
    b: float = 1.0

    def __post_init__(self):
        if self.name not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.name!r}; expected one of {ALGORITHMS}")
        if not self.mu > 0:
            raise ValueError("mu must be positive")
        if not self.a > 0:
            raise ValueError("a must be positive")
        if not self.b > 0:
            raise ValueError("b must be positive")

    @classmethod
    def default(cls, name):
        mu, a, b = DEFAULT_PARAMETERS[name]
        return cls(name, mu, a, b)


# -- cost functions ---------------------------------------------------------


def cost_llc(e, a, b):
    """Linear-linear cost: ``a|e|`` for positive errors, ``b|e|`` otherwise."""
    e = np.asarray(e, dtype=float)
    return np.where(e > 0, a, b) * np.abs(e)


def cost_qqc(e, a, b):
    e = np.asarray(e, dtype=float)
    return 0.5 * np.where(e > 0, a, b) * e * e


def cost_lec(e, a, b, clamp=DEFAULT_EXP_CLAMP):
    """Linear-exponential cost ``b(exp(ae) - ae - 1)``.

    ``a*e`` is clipped to ``[-clamp, clamp]`` before evaluation.
    """
    ae = np.clip(a * np.asarray(e, dtype=float), -clamp, clamp)
    return b * (np.expm1(ae) - ae)


def lec_linearization_error(e, a):
    """Gap between the LEC update factor ``exp(ae) - 1`` and its linear term ``ae``."""
    ae = a * np.asarray(e, dtype=float)
    return np.expm1(ae) - ae


# -- error nonlinearities ---------------------------------------------------


def _dlms(e, a, b, clamp):
    return e


def _dselms(e, a, b, clamp):
    return np.sign(e)


def _dllad(e, a, b, clamp):
    return e / (1.0 + np.abs(e))


def _dllclms(e, a, b, clamp):
    return np.where(e > 0, a, b) * np.sign(e)


def _dqqclms(e, a, b, clamp):
    return np.where(e > 0, a, b) * e


def _dleclms(e, a, b, clamp):
    return a * b * np.expm1(np.clip(a * e, -clamp, clamp))


_NONLINEARITY = {
    "DLMS": _dlms,
    "DSELMS": _dselms,
    "DLLAD": _dllad,
    "DLLCLMS": _dllclms,
    "DQQCLMS": _dqqclms,
    "DLECLMS": _dleclms,
}


def error_nonlinearity(spec: AlgorithmSpec, e, clamp=DEFAULT_EXP_CLAMP):
    """Scalar factor ``g(e)`` so that the increment is ``mu * g(e) * X``."""
    return _NONLINEARITY[spec.name](np.asarray(e, dtype=float), spec.a, spec.b, clamp)


def clamp_events(spec: AlgorithmSpec, e, clamp=DEFAULT_EXP_CLAMP):
    """Number of errors whose exponent would be clipped (DLECLMS only)."""
    if spec.name != "DLECLMS":
        return 0
    return int(np.count_nonzero(np.abs(spec.a * np.asarray(e)) > clamp))


# -- adaptation -------------------------------------------------------------


def adapt(weights, regressors, desired, spec: AlgorithmSpec, clamp=DEFAULT_EXP_CLAMP):
    """Adaptation step for one node or a stack of nodes.

    Parameters
    ----------
    weights, regressors : ndarray, shape (..., M)
    desired : float or ndarray, shape (...)

    Returns
    -------
    phi : ndarray, shape (..., M)
        Intermediate estimates.
    e : ndarray, shape (...)
        A-priori errors ``d - WᵀX``.
    """
    w = np.asarray(weights, dtype=float)
    x = np.asarray(regressors, dtype=float)
    e = estimation_error(w, x, desired)
    g = error_nonlinearity(spec, e, clamp)
    phi = w + (spec.mu * g)[..., None] * x
    return phi, e


def _adapt_named(name):
    def adapt_one(weights, regressor, desired, spec, clamp=DEFAULT_EXP_CLAMP):
        if spec.name != name:
            raise ValueError(f"expected a {name} spec, got {spec.name}")
        phi, _ = adapt(weights, regressor, desired, spec, clamp)
        if not np.all(np.isfinite(phi)):
            raise DivergenceError(f"{name} produced a non-finite estimate")
        return phi

    adapt_one.__name__ = f"adapt_{name.lower()}"
    adapt_one.__doc__ = f"{name} adaptation; returns the intermediate estimate."
    return adapt_one


adapt_dlms = _adapt_named("DLMS")
adapt_dselms = _adapt_named("DSELMS")
adapt_dllad = _adapt_named("DLLAD")
adapt_dllclms = _adapt_named("DLLCLMS")
adapt_dqqclms = _adapt_named("DQQCLMS")
adapt_dleclms = _adapt_named("DLECLMS")


def combine(intermediates, weights):
    """``W_n = sum_l c[l, n] * phi_l`` for every node.

    ``intermediates`` is ``(..., N, M)``; leading axes are batched.
    """
    phi = np.asarray(intermediates, dtype=float)
    c = np.asarray(weights, dtype=float)
    if c.ndim != 2 or c.shape[0] != c.shape[1] or phi.shape[-2] != c.shape[0]:
        raise ValueError(f"dimension mismatch: weights {c.shape}, intermediates {phi.shape}")
    # centred on node 0: identical intermediates combine to themselves exactly
    ref = phi[..., :1, :]
    return c.T @ (phi - ref) + ref


def atc_iteration(estimates, weights, spec, regressors, desired, clamp=DEFAULT_EXP_CLAMP):
    """One adapt-then-combine step over the whole network.

    Parameters
    ----------
    estimates : ndarray, shape (N, M)
        ``W_n(i-1)`` for every node.
    weights : ndarray, shape (N, N)
        Combination matrix.
    regressors : ndarray, shape (N, M)
    desired : ndarray, shape (N,)

    Returns
    -------
    next_estimates : ndarray, shape (N, M)
    errors : ndarray, shape (N,)
        Pre-adaptation errors ``e_n(i)``.
    """
    phi, e = adapt(estimates, regressors, desired, spec, clamp)
    return combine(phi, weights), e


# -- mean-stability bounds --------------------------------------------------


@dataclass(frozen=True)
class StabilityBound:
    """Upper limits on ``mu`` for stability of the mean weight error.

    ``mu_max_positive_branch`` applies while ``e > 0`` and
    ``mu_max_negative_branch`` while ``e <= 0``. Both are None when no bound
    exists for the algorithm.
    """

    algorithm: str
    rho_max: float
    chi_v: Optional[float]
    mu_max_positive_branch: Optional[float]
    mu_max_negative_branch: Optional[float]

    @property
    def provided(self):
        return self.mu_max_positive_branch is not None

    @property
    def mu_max(self):
        if not self.provided:
            return None
        return min(self.mu_max_positive_branch, self.mu_max_negative_branch)

    def violations(self, mu):
        """Names of the branches whose limit ``mu`` reaches or exceeds."""
        if not self.provided:
            return []
        out = []
        if mu >= self.mu_max_positive_branch:
            out.append("positive")
        if mu >= self.mu_max_negative_branch:
            out.append("negative")
        return out


def sign_error_factor(sigma_g, impulse_probability=0.0, impulse_strength=1.0):
    """Upper bound of the sign-error gain ``X_v`` for Bernoulli-Gaussian noise.

    ``sqrt(2/pi) * ((1 - P_r)/sigma_g + P_r/sigma_Im)`` with
    ``sigma_Im = sqrt(I_n) * sigma_g``, maximized over nodes. The
    ``Tr[R_ww R_xx]`` term of the error variance is dropped (steady state).
    """
    sigma = np.atleast_1d(np.asarray(sigma_g, dtype=float))
    strength = np.broadcast_to(np.asarray(impulse_strength, dtype=float), sigma.shape)
    if np.any(sigma <= 0):
        raise ValueError("sigma_g must be positive to bound the sign-error gain")
    sigma_im = np.sqrt(strength) * sigma
    chi = math.sqrt(2.0 / math.pi) * (
        (1.0 - impulse_probability) / sigma + impulse_probability / sigma_im
    )
    return float(chi.max())


def step_bound(spec: AlgorithmSpec, rho_max, chi_v=None) -> StabilityBound:
    """Mean-stability step-size limits for ``spec`` given ``rho_max(R_xx)``.

    DLMS is treated as DQQCLMS with ``a = b = 1``. DSELMS and DLLAD get no
    bound.
    """
    if not rho_max > 0:
        raise ValueError("rho_max must be positive")
    name, a, b = spec.name, spec.a, spec.b
    pos = neg = None
    if name == "DLLCLMS":
        if chi_v is None:
            raise ValueError("DLLCLMS bound needs the sign-error factor chi_v")
        if not chi_v > 0:
            raise ValueError("chi_v must be positive")
        pos = 2.0 / (a * chi_v * rho_max)
        neg = 2.0 / (b * chi_v * rho_max)
    elif name == "DQQCLMS":
        pos = 2.0 / (a * rho_max)
        neg = 2.0 / (b * rho_max)
    elif name == "DLECLMS":
        pos = neg = 2.0 / (a * a * b * rho_max)
    elif name == "DLMS":
        pos = neg = 2.0 / rho_max
    return StabilityBound(name, float(rho_max), chi_v if name == "DLLCLMS" else None, pos, neg)
