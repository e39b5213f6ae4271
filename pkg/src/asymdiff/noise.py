"""
Measurement noise generators.

Three models are supported:

* white Gaussian noise with a per-node standard deviation,
* Bernoulli-Gaussian impulsive noise ``g + B*G`` where ``B`` gates a Gaussian
  impulse whose variance is ``I_n`` times the background variance,
* Levy alpha-stable noise, sampled with the Chambers-Mallows-Stuck transform.

Draw order for impulsive noise is fixed: ``g`` comes from the noise stream,
then ``B`` and (only when ``B = 1``) ``G`` come from the gate stream. With a
separate gate stream and ``P_r = 0`` the output is bit-identical to the
Gaussian sampler fed the same noise stream.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


def _per_node(value, name):
    arr = np.atleast_1d(np.asarray(value, dtype=float))
    if arr.ndim != 1:
        raise ValueError(f"{name} must be a scalar or a 1-D sequence")
    return arr


def _node_value(arr, node):
    return float(arr[0] if arr.size == 1 else arr[node])


@dataclass(frozen=True)
class GaussianNoiseParams:
    """Per-node background standard deviation ``sigma_g`` (scalar means shared)."""

    sigma_g: object = 0.1

    def __post_init__(self):
        sig = _per_node(self.sigma_g, "sigma_g")
        if np.any(sig < 0) or not np.all(np.isfinite(sig)):
            raise ValueError("sigma_g must be finite and nonnegative")
        object.__setattr__(self, "sigma_g", sig)

    def sigma(self, node):
        return _node_value(self.sigma_g, node)


@dataclass(frozen=True)
class ImpulsiveNoiseParams:
    gaussian: GaussianNoiseParams
    impulse_probability: float = 0.1
    impulse_strength: object = 100.0

    def __post_init__(self):
        if not 0.0 <= self.impulse_probability <= 1.0:
            raise ValueError("impulse_probability must lie in [0, 1]")
        strength = _per_node(self.impulse_strength, "impulse_strength")
        if np.any(strength < 1):
            raise ValueError("impulse_strength must be >= 1")
        object.__setattr__(self, "impulse_strength", strength)

    def strength(self, node):
        return _node_value(self.impulse_strength, node)


@dataclass(frozen=True)
class AlphaStableParams:
    """Stable law S(alpha, beta, scale, location), 1-parameterization."""

    alpha: float = 1.6
    beta: float = 0.05
    scale: float = 2000.0
    location: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.alpha <= 2.0:
            raise ValueError("alpha must lie in (0, 2]")
        if not -1.0 <= self.beta <= 1.0:
            raise ValueError("beta must lie in [-1, 1]")
        if not self.scale > 0:
            raise ValueError("scale must be positive")
        if not math.isfinite(self.location):
            raise ValueError("location must be finite")


def sample_gaussian(params: GaussianNoiseParams, node, rng):
    return params.sigma(node) * rng.standard_normal()


def sample_impulsive(params: ImpulsiveNoiseParams, node, rng, gate_rng=None, return_gate=False):
    """One draw of ``g + B*G``.

    ``gate_rng`` defaults to ``rng``; pass a separate stream to keep the
    background sequence independent of the impulse draws.
    """
    gate_rng = rng if gate_rng is None else gate_rng
    sigma = params.gaussian.sigma(node)
    v = sigma * rng.standard_normal()
    gate = gate_rng.random() < params.impulse_probability
    if gate:
        v += math.sqrt(params.strength(node)) * sigma * gate_rng.standard_normal()
    return (v, gate) if return_gate else v


def gaussian_block(params: GaussianNoiseParams, node, size, rng):
    return params.sigma(node) * rng.standard_normal(size)


def impulsive_block(params: ImpulsiveNoiseParams, node, size, rng, gate_rng):
    """Vectorized impulsive draws; returns ``(noise, gates)``.

    All ``size`` gates are drawn first, then one impulse per open gate.
    """
    sigma = params.gaussian.sigma(node)
    v = sigma * rng.standard_normal(size)
    gates = gate_rng.random(size) < params.impulse_probability
    k = int(np.count_nonzero(gates))
    if k:
        v[gates] += math.sqrt(params.strength(node)) * sigma * gate_rng.standard_normal(k)
    return v, gates


def _cms_standard(alpha, beta, u, w):
    """Chambers-Mallows-Stuck transform of ``U ~ Unif(-pi/2, pi/2)``, ``W ~ Exp(1)``.

    Returns standard (scale 1, location 0) draws in the 1-parameterization.
    """
    if alpha == 1.0:
        half_pi = 0.5 * np.pi
        bu = half_pi + beta * u
        return (bu * np.tan(u) - beta * np.log(half_pi * w * np.cos(u) / bu)) / half_pi
    t = beta * math.tan(0.5 * np.pi * alpha)
    shift = math.atan(t) / alpha
    factor = (1.0 + t * t) ** (0.5 / alpha)
    arg = alpha * (u + shift)
    return (
        factor
        * np.sin(arg)
        / np.cos(u) ** (1.0 / alpha)
        * (np.cos(u - arg) / w) ** ((1.0 - alpha) / alpha)
    )


def alpha_stable_block(params: AlphaStableParams, size, rng):
    """``size`` stable draws: all uniforms are drawn first, then all exponentials."""
    u = rng.uniform(-0.5 * np.pi, 0.5 * np.pi, size)
    w = rng.standard_exponential(size)
    x = _cms_standard(params.alpha, params.beta, u, w)
    y = params.scale * x + params.location
    if params.alpha == 1.0:
        y = y + (2.0 / np.pi) * params.beta * params.scale * math.log(params.scale)
    return y


def sample_alpha_stable(params: AlphaStableParams, rng):
    return float(alpha_stable_block(params, 1, rng)[0])


def hill_tail_index(samples, fraction=0.01):
    """Hill estimator of the tail exponent from the top ``fraction`` of |x|."""
    x = np.sort(np.abs(np.asarray(samples, dtype=float)))[::-1]
    k = max(int(fraction * x.size), 2)
    logs = np.log(x[: k + 1])
    return 1.0 / np.mean(logs[:k] - logs[k])
