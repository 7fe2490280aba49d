"""Monte Carlo integration of the delayed platoon dynamics.

Euler-Maruyama with a ring buffer for the constant delay: positions
advance with the current velocity, velocities with the graph-coupled
drift evaluated one delay in the past plus white acceleration noise.
Used to estimate the steady-state distance covariance independently of
the analytic route.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .covariance import NoiseParams, PlatoonParams
from .errors import (DivergenceError, InvalidParameterError,
                     UnstablePlatoonError)
from .graph import WeightedGraph, laplacian, spectrum
from .stability import check_platoon

_NOISE_CHUNK = 4096


@dataclass(frozen=True)
class SimConfig:
    """Integration controls. burn_in and sample_interval default to
    values derived from the dynamics (see resolve within run): burn_in
    max(10 tau, 20/(beta lambda_2)), sample_interval 20 tau."""

    dt: float = 1e-3
    burn_in: float | None = None
    sample_interval: float | None = None
    samples_per_trial: int = 200
    trials: int = 64
    seed: int = 0

    def __post_init__(self):
        if not (math.isfinite(self.dt) and self.dt > 0.0):
            raise InvalidParameterError(f"dt={self.dt!r} must be positive")
        if self.burn_in is not None and not (
                math.isfinite(self.burn_in) and self.burn_in > 0.0):
            raise InvalidParameterError(
                f"burn_in={self.burn_in!r} must be positive")
        if self.sample_interval is not None and not (
                math.isfinite(self.sample_interval) and self.sample_interval > 0.0):
            raise InvalidParameterError(
                f"sample_interval={self.sample_interval!r} must be positive")
        if self.samples_per_trial < 1:
            raise InvalidParameterError(
                f"samples_per_trial={self.samples_per_trial} must be >= 1")
        if self.trials < 1:
            raise InvalidParameterError(f"trials={self.trials} must be >= 1")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise InvalidParameterError(
                f"seed={self.seed!r} must be a 64-bit unsigned integer")


def delay_steps(tau: float, dt: float) -> int:
    """Delay expressed in steps; the delay must be an integer multiple
    of dt to within 1e-9 relative."""
    k = int(round(tau / dt))
    if k < 1:
        raise InvalidParameterError(
            f"dt={dt!r} exceeds the delay tau={tau!r}")
    if abs(k * dt - tau) > 1e-9 * tau:
        raise InvalidParameterError(
            f"tau={tau!r} is not an integer multiple of dt={dt!r}")
    return k


def _drift(x_delayed, v_delayed, targets, L, beta):
    # Symmetric L, so right-multiplication works for single states and
    # (trials, n) batches alike.
    return -(v_delayed @ L) - beta * ((x_delayed - targets) @ L)


@dataclass(frozen=True)
class SimState:
    """One trajectory's state: current x and v plus ring buffers holding
    the last delay_steps+1 states. Slot (step_index+1) mod buffer length
    always holds the state one delay ago."""

    x: np.ndarray
    v: np.ndarray
    hx: np.ndarray
    hv: np.ndarray
    targets: np.ndarray
    step_index: int = 0

    def __post_init__(self):
        n = self.x.shape[0]
        if self.v.shape != (n,) or self.targets.shape != (n,):
            raise InvalidParameterError("state vector shapes disagree")
        if self.hx.shape != self.hv.shape or self.hx.shape[1:] != (n,):
            raise InvalidParameterError("history buffer shapes disagree")
        for name in ("x", "v", "hx", "hv", "targets"):
            a = np.array(getattr(self, name), dtype=float)
            a.setflags(write=False)
            object.__setattr__(self, name, a)


def initial_state(params: PlatoonParams, noise: NoiseParams,
                  dt: float) -> SimState:
    """Constant history at the target configuration: x on target, v = 0
    over the whole delay window."""
    k = delay_steps(noise.tau, dt)
    r = params.targets
    return SimState(
        x=r.copy(), v=np.zeros(params.n),
        hx=np.repeat(r[None, :], k + 1, axis=0),
        hv=np.zeros((k + 1, params.n)), targets=r)


def step(state: SimState, noise: NoiseParams, L: np.ndarray,
         xi: np.ndarray, dt: float) -> SimState:
    """One Euler-Maruyama step: x += v dt with the pre-update velocity,
    v += delayed drift dt + g sqrt(dt) xi."""
    xi = np.asarray(xi, dtype=float)
    if xi.shape != state.x.shape:
        raise InvalidParameterError(
            f"noise shape {xi.shape} does not match state {state.x.shape}")
    dslot = (state.step_index + 1) % state.hx.shape[0]
    # Overflow ends in a DivergenceError below; suppress the warning.
    with np.errstate(over="ignore", invalid="ignore"):
        dv = (_drift(state.hx[dslot], state.hv[dslot], state.targets, L,
                     noise.beta) * dt + noise.g * math.sqrt(dt) * xi)
        x_new = state.x + state.v * dt
        v_new = state.v + dv
    if not (np.all(np.isfinite(x_new)) and np.all(np.isfinite(v_new))):
        raise DivergenceError(
            f"state became non-finite at step {state.step_index + 1}",
            step=state.step_index + 1)
    hx = np.array(state.hx)
    hv = np.array(state.hv)
    hx[dslot] = x_new
    hv[dslot] = v_new
    return SimState(x_new, v_new, hx, hv, state.targets,
                    state.step_index + 1)


@dataclass(frozen=True)
class EmpiricalCovariance:
    """Pooled distance mean/covariance across all retained samples, with
    per-entry standard errors from the between-trial spread."""

    mean: np.ndarray
    cov: np.ndarray
    standard_errors: np.ndarray
    sample_count: int
    mean_standard_errors: np.ndarray

    def __post_init__(self):
        m = self.mean.shape[0]
        if self.cov.shape != (m, m) or self.standard_errors.shape != (m, m):
            raise InvalidParameterError("covariance shapes disagree")
        if self.mean_standard_errors.shape != (m,):
            raise InvalidParameterError("mean SE shape disagrees")
        for name in ("mean", "cov", "standard_errors", "mean_standard_errors"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise InvalidParameterError(f"{name} contains non-finite values")
        if np.abs(self.cov - self.cov.T).max() > 1e-12 * np.abs(self.cov).max():
            raise InvalidParameterError("empirical covariance must be symmetric")
        if self.sample_count < 2:
            raise InvalidParameterError("need at least 2 samples")
        for name in ("mean", "cov", "standard_errors", "mean_standard_errors"):
            a = np.array(getattr(self, name), dtype=float)
            a.setflags(write=False)
            object.__setattr__(self, name, a)


def run(graph: WeightedGraph, params: PlatoonParams, noise: NoiseParams,
        sim: SimConfig, return_samples: bool = False):
    """Simulate `trials` independent trajectories, thin each after
    burn-in, and pool the inter-vehicle distances.

    Per-trial noise streams are spawned from (seed, trial index), so a
    given trial's trajectory does not depend on how many trials run.
    Returns EmpiricalCovariance, or (EmpiricalCovariance, samples) with
    samples shaped (samples_per_trial, trials, n-1) when requested.
    """
    if params.n != graph.n:
        raise InvalidParameterError(
            f"platoon n={params.n} does not match graph n={graph.n}")
    L = laplacian(graph)
    spec = spectrum(L)
    report = check_platoon(spec, noise.tau, noise.beta)
    if not report.stable:
        worst = report.worst_mode()
        raise UnstablePlatoonError(
            f"refusing to simulate an unstable platoon: mode "
            f"(s1, s2) = ({worst.s1:.6g}, {worst.s2:.6g}) outside the "
            f"stability region", report)

    n = graph.n
    dt = sim.dt
    k = delay_steps(noise.tau, dt)
    burn_in = sim.burn_in
    if burn_in is None:
        burn_in = max(10.0 * noise.tau,
                      20.0 / (noise.beta * spec.eigenvalues[1]))
    if burn_in < 10.0 * noise.tau * (1.0 - 1e-12):
        raise InvalidParameterError(
            f"burn_in={burn_in!r} shorter than 10 tau = {10 * noise.tau!r}")
    interval = sim.sample_interval
    if interval is None:
        interval = 20.0 * noise.tau
    int_steps = max(1, int(round(interval / dt)))
    burn_steps = int(math.ceil(burn_in / dt - 1e-9))

    trials = sim.trials
    n_samples = sim.samples_per_trial
    if trials < 2 or n_samples < 2:
        raise InvalidParameterError(
            "standard errors need at least 2 trials and 2 samples per trial")
    total_steps = burn_steps + (n_samples - 1) * int_steps
    rngs = [np.random.default_rng(np.random.SeedSequence(
        entropy=int(sim.seed), spawn_key=(t,))) for t in range(trials)]

    r = params.targets
    x = np.repeat(r[None, :], trials, axis=0)
    v = np.zeros((trials, n))
    hx = np.repeat(x[None, :, :], k + 1, axis=0)
    hv = np.zeros((k + 1, trials, n))
    samples = np.empty((n_samples, trials, n - 1))

    g_sqdt = noise.g * math.sqrt(dt)
    beta = noise.beta
    s_idx = 0
    buf = None
    pos = 0
    for t in range(total_steps):
        tn = t + 1
        if buf is None or pos == buf.shape[0]:
            csz = min(_NOISE_CHUNK, total_steps - t)
            buf = np.stack(
                [rg.standard_normal((csz, n)) for rg in rngs], axis=1)
            pos = 0
        xi = buf[pos]
        pos += 1
        dslot = tn % (k + 1)
        with np.errstate(over="ignore", invalid="ignore"):
            dv = _drift(hx[dslot], hv[dslot], r, L, beta) * dt + g_sqdt * xi
            x = x + v * dt
            v = v + dv
        finite = np.isfinite(x).all(axis=1) & np.isfinite(v).all(axis=1)
        if not finite.all():
            bad = int(np.argmax(~finite))
            raise DivergenceError(
                f"trial {bad} diverged at step {tn} "
                f"(t = {tn * dt:.6g} s); reduce dt or check stability margins",
                step=tn)
        hx[dslot] = x
        hv[dslot] = v
        if tn >= burn_steps and (tn - burn_steps) % int_steps == 0 \
                and s_idx < n_samples:
            samples[s_idx] = np.diff(x, axis=1)
            s_idx += 1
    assert s_idx == n_samples

    # On marginal EM instability the samples can be finite yet huge;
    # squaring then overflows and the finiteness check in
    # EmpiricalCovariance rejects the estimate without warning spam.
    with np.errstate(over="ignore", invalid="ignore"):
        flat = samples.reshape(n_samples * trials, n - 1)
        mean = flat.mean(axis=0)
        dev = flat - mean
        cov = dev.T @ dev / (flat.shape[0] - 1)
        cov = 0.5 * (cov + cov.T)

        trial_means = np.empty((trials, n - 1))
        trial_covs = np.empty((trials, n - 1, n - 1))
        for b in range(trials):
            xb = samples[:, b, :]
            mb = xb.mean(axis=0)
            db = xb - mb
            trial_means[b] = mb
            trial_covs[b] = db.T @ db / (n_samples - 1)
        se_cov = trial_covs.std(axis=0, ddof=1) / math.sqrt(trials)
        se_cov = 0.5 * (se_cov + se_cov.transpose())
        se_mean = trial_means.std(axis=0, ddof=1) / math.sqrt(trials)

    result = EmpiricalCovariance(mean, cov, se_cov,
                                 n_samples * trials, se_mean)
    if return_samples:
        return result, samples
    return result
