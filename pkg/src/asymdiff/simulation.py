"""
Monte-Carlo experiment runner.

All configured algorithms of a run see the same per-trial regressors and
noise: the data for a trial is generated once and the filters are iterated
side by side as a batch, one slice per algorithm.
"""
from __future__ import annotations

import csv
import hashlib
import math
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional

import numpy as np

from . import __version__
from .algorithms import PROPOSED, AlgorithmSpec, combine, error_nonlinearity, sign_error_factor, step_bound
from .config import AlgorithmEntry, ExperimentConfig, format_config
from .metrics import MsdCurve, network_msd, steady_state, to_db
from .noise import alpha_stable_block, gaussian_block, impulsive_block
from .signals import CovarianceProfile, UnknownSystem, random_profile, random_system, regressor_block
from .streams import Purpose, substream
from .topology import NetworkTopology, build_probability_graph, build_radius_graph, uniform_combination


def build_topology(config: ExperimentConfig, trial=0) -> NetworkTopology:
    """Topology for ``trial``; trial 0 is used for every trial unless redrawing."""
    net = config.network
    key = trial if config.run.topology_per_trial == "redraw" else 0
    rng = substream(config.run.master_seed, Purpose.TOPOLOGY, key)
    if net.rule == "probability":
        return build_probability_graph(net.nodes, net.param, rng, net.max_retries)
    return build_radius_graph(net.nodes, net.param, rng, net.max_retries)


def build_system(config: ExperimentConfig) -> UnknownSystem:
    sysc = config.system
    if sysc.seed is not None:
        rng = np.random.default_rng(sysc.seed)
    else:
        rng = substream(config.run.master_seed, Purpose.SYSTEM)
    return random_system(sysc.taps, rng, sysc.low, sysc.high)


def build_profile(config: ExperimentConfig) -> CovarianceProfile:
    sig, nodes, taps = config.signal, config.network.nodes, config.system.taps
    if sig.profile == "uniform_scalar":
        return CovarianceProfile.uniform_scalar(sig.variance, nodes, taps)
    if sig.profile == "per_tap_diagonal" and sig.diagonal is not None:
        return CovarianceProfile.per_tap_diagonal(np.tile(sig.diagonal, (nodes, 1)))
    rng = substream(config.run.master_seed, Purpose.VARIANCES)
    return random_profile(sig.profile, nodes, taps, rng, sig.low, sig.high)


@dataclass
class TrialData:
    regressors: np.ndarray  # (iterations, N, M)
    noise: np.ndarray  # (iterations, N)
    desired: np.ndarray  # (iterations, N)
    gates: Optional[np.ndarray] = None  # impulse indicators, impulsive noise only

    def checksum(self):
        h = hashlib.sha256()
        h.update(np.ascontiguousarray(self.regressors).tobytes())
        h.update(np.ascontiguousarray(self.noise).tobytes())
        return h.hexdigest()[:16]


def noise_block(config: ExperimentConfig, node, size, rng, gate_rng):
    noise = config.noise
    if noise.kind == "alpha_stable":
        return alpha_stable_block(noise.stable_params(), size, rng), None
    if noise.kind == "impulsive":
        return impulsive_block(noise.impulsive_params(), node, size, rng, gate_rng)
    return gaussian_block(noise.gaussian_params(), node, size, rng), None


def trial_data(config: ExperimentConfig, system: UnknownSystem, profile: CovarianceProfile, trial) -> TrialData:
    """Regressors, noise and desired signals for one trial, node by node."""
    seed, iters = config.run.master_seed, config.run.iterations
    nodes, taps = config.network.nodes, config.system.taps
    x = np.empty((iters, nodes, taps))
    v = np.empty((iters, nodes))
    gates = np.zeros((iters, nodes), dtype=bool) if config.noise.kind == "impulsive" else None
    for n in range(nodes):
        x[:, n, :] = regressor_block(profile, n, iters, substream(seed, Purpose.REGRESSOR, trial, n))
        v[:, n], g = noise_block(config, n, iters, substream(seed, Purpose.NOISE, trial, n),
                                 substream(seed, Purpose.IMPULSE_GATE, trial, n))
        if gates is not None:
            gates[:, n] = g
    d = x @ system.taps + v
    return TrialData(x, v, d, gates)


@dataclass
class TrialResult:
    msd: np.ndarray  # (algorithms, iterations); NaN after divergence
    diverged: np.ndarray  # (algorithms,)
    clamp_events: np.ndarray  # (algorithms,)
    initial_msd: float
    trajectory: Optional[np.ndarray] = None  # (iterations, algorithms, N, M)
    errors: Optional[np.ndarray] = None  # (iterations, algorithms, N)


def simulate(specs: List[AlgorithmSpec], combination, data: TrialData, truth, initial=None,
             clamp=50.0, divergence_db=100.0, record=False) -> TrialResult:
    """Iterate every algorithm in ``specs`` over the same trial data.

    ``initial`` is the starting estimate shared by all nodes (zeros if None).
    A slice whose estimates turn non-finite or whose MSD exceeds
    ``divergence_db`` is marked diverged and frozen at zero.
    """
    iters, nodes, taps = data.regressors.shape
    n_alg = len(specs)
    truth = np.asarray(truth, dtype=float)
    start = np.zeros(taps) if initial is None else np.asarray(initial, dtype=float)
    w = np.broadcast_to(start, (n_alg, nodes, taps)).copy()
    c = np.asarray(combination, dtype=float)
    mus = np.array([s.mu for s in specs])
    limit = 10.0 ** (divergence_db / 10.0)

    msd = np.full((n_alg, iters), np.nan)
    diverged = np.zeros(n_alg, dtype=bool)
    clamps = np.zeros(n_alg, dtype=np.int64)
    traj = np.empty((iters, n_alg, nodes, taps)) if record else None
    errs = np.empty((iters, n_alg, nodes)) if record else None
    g = np.empty((n_alg, nodes))
    clamp_a = np.array([s.a if s.name == "DLECLMS" else np.inf for s in specs])

    with np.errstate(over="ignore", invalid="ignore"):
        for i in range(iters):
            x = data.regressors[i]
            # d - WᵀX written as (W° - W)ᵀX + v, exact zero at the fixed point
            e = data.noise[i] + np.einsum("anm,nm->an", truth - w, x)
            for k, spec in enumerate(specs):
                g[k] = error_nonlinearity(spec, e[k], clamp)
            clamps += np.count_nonzero(np.abs(clamp_a[:, None] * e) > clamp, axis=1)
            phi = w + (mus[:, None] * g)[..., None] * x
            w = combine(phi, c)
            m = network_msd(w, truth)
            bad = ~diverged & ~(m <= limit)
            if bad.any():
                diverged |= bad
                w[bad] = 0.0
            m[diverged] = np.nan
            msd[:, i] = m
            if record:
                traj[i] = w
                errs[i] = e
    return TrialResult(msd, diverged, clamps, float(network_msd(start[None, :], truth)), traj, errs)


@dataclass
class RunResult:
    config: ExperimentConfig
    labels: List[str]
    trial_msd: np.ndarray  # (algorithms, trials, iterations)
    diverged: np.ndarray  # (algorithms, trials)
    clamp_events: np.ndarray  # (algorithms,)
    initial_msd: float
    curves: Dict[str, MsdCurve]
    manifest: dict = field(default_factory=dict)

    def steady_state_db(self, label):
        """Per-trial steady-state MSD in dB; diverged trials are +inf."""
        k = self.labels.index(label)
        ss = steady_state(self.trial_msd[k], self.config.run.steady_fraction)
        ss = np.where(self.diverged[k], np.inf, ss)
        return np.where(np.isinf(ss), np.inf, to_db(ss))

    def median_steady_state_db(self, label):
        return float(np.median(self.steady_state_db(label)))

    @property
    def all_diverged(self):
        return [lab for lab in self.labels if lab not in self.curves]


def run_experiment(config: ExperimentConfig, progress=None) -> RunResult:
    """Monte-Carlo run of every configured algorithm on paired data."""
    run = config.run
    system = build_system(config)
    profile = build_profile(config)
    specs = config.specs
    labels = config.labels
    start = system.taps if run.init == "truth" else None

    trial_msd = np.empty((len(specs), run.monte_carlo, run.iterations))
    diverged = np.zeros((len(specs), run.monte_carlo), dtype=bool)
    clamps = np.zeros(len(specs), dtype=np.int64)
    checksums = []
    topologies = []
    initial = math.nan
    topology = None
    for t in range(run.monte_carlo):
        if topology is None or run.topology_per_trial == "redraw":
            topology = build_topology(config, t)
            combination = uniform_combination(topology)
            topologies.append(topology)
        data = trial_data(config, system, profile, t)
        checksums.append(data.checksum())
        res = simulate(specs, combination, data, system.taps, start, run.lec_clamp, run.divergence_db)
        trial_msd[:, t] = res.msd
        diverged[:, t] = res.diverged
        clamps += res.clamp_events
        initial = res.initial_msd
        if progress is not None:
            progress(t)

    curves = {}
    for k, label in enumerate(labels):
        if diverged[k].all():
            continue
        curves[label] = MsdCurve.from_trials(label, trial_msd[k], diverged[k], initial)

    result = RunResult(config, labels, trial_msd, diverged, clamps, initial, curves)
    result.manifest = build_manifest(config, system, profile, topologies, result, checksums)
    return result


def monte_carlo(config: ExperimentConfig, spec: AlgorithmSpec, label=None) -> MsdCurve:
    """Averaged learning curve of a single algorithm under ``config``."""
    label = label or spec.name
    single = replace(config, algorithms=(AlgorithmEntry(label, spec),))
    result = run_experiment(single)
    if label not in result.curves:
        raise RuntimeError(f"all {config.run.monte_carlo} trials of {label} diverged")
    return result.curves[label]


def _topology_record(topology):
    rec = {"nodes": topology.node_count, "edges": [list(e) for e in topology.edges()]}
    if topology.coordinates is not None:
        rec["coordinates"] = topology.coordinates.tolist()
    return rec


def build_manifest(config, system, profile, topologies, result, checksums):
    return {
        "software": {"package": "asymdiff", "version": __version__},
        "config": format_config(config),
        "unknown_system": system.taps.tolist(),
        "regressor_variances": profile.variances.tolist(),
        "topologies": [_topology_record(t) for t in topologies],
        "algorithms": {
            label: {
                "diverged_trials": int(result.diverged[k].sum()),
                "status": "all_diverged" if result.diverged[k].all() else "ok",
                "clamp_events": int(result.clamp_events[k]),
            }
            for k, label in enumerate(result.labels)
        },
        "stream_checksums": checksums,
    }


SWEEP_PARAMETERS = ("a", "b", "mu")


def sweep_config(config: ExperimentConfig, param, value) -> ExperimentConfig:
    """Copy of ``config`` with ``param`` set to ``value`` wherever it applies.

    ``mu`` applies to every algorithm; ``a`` and ``b`` only to the
    asymmetric-cost filters.
    """
    if param not in SWEEP_PARAMETERS:
        raise ValueError(f"cannot sweep {param!r}; choose one of {SWEEP_PARAMETERS}")
    entries = []
    for entry in config.algorithms:
        spec = entry.spec
        if param == "mu" or spec.name in PROPOSED:
            spec = replace(spec, **{param: float(value)})
        entries.append(AlgorithmEntry(entry.label, spec))
    return replace(config, algorithms=tuple(entries))


def sweep(config: ExperimentConfig, param, values):
    """Run ``config`` once per value; every run reuses the same data streams."""
    values = list(values)
    if not values:
        raise ValueError("empty value list")
    if param in ("a", "b") and not any(s.name in PROPOSED for s in config.specs):
        raise ValueError(f"parameter {param!r} does not apply to any configured algorithm")
    return [(v, run_experiment(sweep_config(config, param, v))) for v in values]


def write_sweep_summary(results, stream):
    """CSV ``value,algorithm,final_msd_db``; all-diverged algorithms get ``inf``."""
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["value", "algorithm", "final_msd_db"])
    for value, result in results:
        for label in result.labels:
            curve = result.curves.get(label)
            final = curve.final_db(result.config.run.steady_fraction) if curve else math.inf
            writer.writerow([repr(float(value)), label, repr(float(final))])


def chi_v_for(config: ExperimentConfig):
    """Sign-error gain for the DLLCLMS bound, or None for alpha-stable noise."""
    noise = config.noise
    if noise.kind == "gaussian":
        return sign_error_factor(noise.sigma_g)
    if noise.kind == "impulsive":
        return sign_error_factor(noise.sigma_g, noise.impulse_probability, noise.impulse_strength)
    return None


def bounds_report(config: ExperimentConfig) -> str:
    """Plain-text mean-stability limits for every configured algorithm."""
    profile = build_profile(config)
    rho = profile.rho_max()
    chi = chi_v_for(config)
    lines = [f"rho_max = {rho:.6g} (largest regressor variance over nodes and taps)"]
    if chi is not None:
        lines.append(f"chi_v = {chi:.6g}")
    for entry in config.algorithms:
        spec = entry.spec
        head = f"{entry.label} [{spec.name}] mu={spec.mu:g} a={spec.a:g} b={spec.b:g}:"
        if spec.name in ("DSELMS", "DLLAD"):
            lines.append(f"{head} bound: not provided")
            continue
        if spec.name == "DLLCLMS" and chi is None:
            lines.append(f"{head} bound: needs gaussian or impulsive noise parameters for chi_v")
            continue
        bound = step_bound(spec, rho, chi)
        text = (f"{head} mu_max positive={bound.mu_max_positive_branch:.6g} "
                f"negative={bound.mu_max_negative_branch:.6g}")
        bad = bound.violations(spec.mu)
        if bad:
            text += f"  VIOLATION ({', '.join(bad)} branch)"
        lines.append(text)
    return "\n".join(lines) + "\n"
