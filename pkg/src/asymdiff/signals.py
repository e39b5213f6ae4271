"""
Regressor streams and the linear measurement model ``d = W°ᵀX + v``.

Regressors are zero-mean Gaussian, white in time and independent across
nodes, with a diagonal covariance per node. A covariance profile stores that
diagonal as an ``(N, M)`` array of variances.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

PROFILE_KINDS = ("uniform_scalar", "per_node_scalar", "per_tap_diagonal")


@dataclass(frozen=True, eq=False)
class UnknownSystem:
    taps: np.ndarray

    def __post_init__(self):
        taps = np.array(self.taps, dtype=float)
        if taps.ndim != 1 or taps.size < 1:
            raise ValueError("taps must be a non-empty vector")
        if not np.all(np.isfinite(taps)):
            raise ValueError("taps must be finite")
        taps.setflags(write=False)
        object.__setattr__(self, "taps", taps)

    @property
    def length(self):
        return self.taps.size


def random_system(length, rng, low=-1.0, high=1.0):
    """Taps drawn i.i.d. uniform on ``[low, high]``."""
    return UnknownSystem(rng.uniform(low, high, length))


@dataclass(frozen=True, eq=False)
class CovarianceProfile:
    """Diagonal regressor covariance for every node.

    Attributes
    ----------
    kind : str
        One of ``uniform_scalar``, ``per_node_scalar``, ``per_tap_diagonal``.
    variances : ndarray, shape (N, M)
        Diagonal of ``R_xx,n`` for each node ``n``.
    """

    kind: str
    variances: np.ndarray

    def __post_init__(self):
        if self.kind not in PROFILE_KINDS:
            raise ValueError(f"unknown profile kind {self.kind!r}")
        var = np.array(self.variances, dtype=float)
        if var.ndim != 2:
            raise ValueError("variances must have shape (N, M)")
        if not np.all(var > 0) or not np.all(np.isfinite(var)):
            raise ValueError("variances must be positive and finite")
        var.setflags(write=False)
        object.__setattr__(self, "variances", var)

    @property
    def node_count(self):
        return self.variances.shape[0]

    @property
    def taps(self):
        return self.variances.shape[1]

    def rho_max(self, node=None):
        """Largest eigenvalue of ``R_xx,n``; the network maximum if ``node`` is None."""
        if node is None:
            return float(self.variances.max())
        return float(self.variances[node].max())

    @classmethod
    def uniform_scalar(cls, variance, nodes, taps):
        return cls("uniform_scalar", np.full((nodes, taps), float(variance)))

    @classmethod
    def per_node_scalar(cls, variances, taps):
        var = np.asarray(variances, dtype=float)
        return cls("per_node_scalar", np.repeat(var[:, None], taps, axis=1))

    @classmethod
    def per_tap_diagonal(cls, diagonals):
        """``diagonals`` is ``(N, M)``, or a length-M vector shared by all nodes."""
        return cls("per_tap_diagonal", np.atleast_2d(np.asarray(diagonals, dtype=float)))


def random_profile(kind, nodes, taps, rng, low=0.5, high=1.5):
    """Draw per-node (or per-node, per-tap) variances uniform on ``[low, high]``."""
    if kind == "uniform_scalar":
        return CovarianceProfile.uniform_scalar(1.0, nodes, taps)
    if kind == "per_node_scalar":
        return CovarianceProfile.per_node_scalar(rng.uniform(low, high, nodes), taps)
    if kind == "per_tap_diagonal":
        return CovarianceProfile.per_tap_diagonal(rng.uniform(low, high, (nodes, taps)))
    raise ValueError(f"unknown profile kind {kind!r}")


def generate_regressor(profile: CovarianceProfile, node, rng):
    """One fresh regressor for ``node``."""
    return np.sqrt(profile.variances[node]) * rng.standard_normal(profile.taps)


def regressor_block(profile: CovarianceProfile, node, iterations, rng):
    """``(iterations, M)`` regressors; row ``i`` equals the ``i``-th call of
    :func:`generate_regressor` on the same stream."""
    return np.sqrt(profile.variances[node]) * rng.standard_normal((iterations, profile.taps))


def _check_lengths(w, x):
    if np.shape(w)[-1] != np.shape(x)[-1]:
        raise ValueError(f"length mismatch: {np.shape(w)[-1]} vs {np.shape(x)[-1]}")


def measure(system, regressor, noise_sample):
    """Desired signal ``W°ᵀX + v``. Works row-wise on stacked regressors."""
    taps = system.taps if isinstance(system, UnknownSystem) else np.asarray(system)
    x = np.asarray(regressor, dtype=float)
    _check_lengths(taps, x)
    return x @ taps + noise_sample


def estimation_error(weights, regressor, desired):
    """``d - WᵀX``; broadcasts over leading dimensions."""
    w = np.asarray(weights, dtype=float)
    x = np.asarray(regressor, dtype=float)
    _check_lengths(w, x)
    return desired - np.einsum("...m,...m->...", w, x)
