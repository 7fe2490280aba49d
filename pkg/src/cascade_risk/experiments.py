"""Row producers behind the CLI subcommands.

Each function returns plain row tuples (ints, floats, None for empty
cells, strings for tags) ready for CSV serialization, so the sweep
policies (aggregation of infinities, pattern enumeration, sampling
fallback) live here and are unit-testable without going through the
command line.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .covariance import (CovarianceMatrix, NoiseParams, PlatoonParams,
                         steady_state_covariance)
from .errors import (InvalidParameterError, InvalidQueryError,
                     NumericalError)
from .graph import WeightedGraph, add_pair_edges, laplacian, spectrum
from .risk import (FailureScenario, condition, naive_risk, risk_profile,
                   var_risk)
from .simulate import EmpiricalCovariance
from .stability import StabilityReport, check_platoon


def stability_rows(report: StabilityReport):
    """(mode index, eigenvalue, s1, s2, bound, margin) per oscillatory
    mode; the bound is NaN when s1 already falls outside (0, pi/2)."""
    rows = []
    for k, mode in enumerate(report.modes, start=2):
        rows.append((k, mode.eigenvalue, mode.s1, mode.s2, mode.bound,
                     mode.margin))
    return rows, [f"stable={1 if report.stable else 0}"]


def covariance_rows(sigma: CovarianceMatrix):
    rows = []
    for i in range(1, sigma.dim + 1):
        for j in range(1, sigma.dim + 1):
            rows.append((i, j, float(sigma.values[i - 1, j - 1])))
    return rows


def profile_rows(entries, marginal_stds, d: float, c: float, epsilon: float):
    """Profile entries plus the per-pair no-failure baseline column."""
    rows = []
    for entry, sj in zip(entries, marginal_stds):
        naive = naive_risk(float(sj), d, c, epsilon).value
        if entry.error is not None:
            rows.append((entry.j, None, "error", None, None, 0, naive))
            continue
        rows.append((entry.j, entry.risk.value, entry.risk.branch,
                     entry.mu_tilde, entry.sigma_tilde,
                     1 if entry.failed else 0, naive))
    return rows


def sweep_scale_rows(sigma: CovarianceMatrix, d: float, c: float,
                     epsilon: float, max_m: int, state_value: float):
    """Failures {1..m} at the head of the platoon for m = 0..max_m;
    m = 0 is the no-failure baseline."""
    if not 1 <= max_m <= sigma.dim - 1:
        raise InvalidQueryError(
            f"max_m={max_m} must lie in 1..{sigma.dim - 1}")
    rows = []
    for j in range(1, sigma.dim + 1):
        rows.append((0, j, naive_risk(sigma.marginal_std(j), d, c,
                                      epsilon).value))
    for m in range(1, max_m + 1):
        scenario = FailureScenario(tuple(range(1, m + 1)),
                                   (state_value,) * m)
        for entry in risk_profile(sigma, scenario, d, c, epsilon):
            value = None if entry.error is not None else entry.risk.value
            rows.append((m, entry.j, value))
    return rows


@dataclass(frozen=True)
class SparsityPattern:
    """Failure arrangement over its span: chi[k] = 1 marks a failed
    pair. The span is maximal, so chi starts and ends with 1; sparsity
    counts the zeros."""

    chi: tuple

    def __post_init__(self):
        chi = tuple(int(b) for b in self.chi)
        if not chi or chi[0] != 1 or chi[-1] != 1:
            raise InvalidParameterError(
                f"pattern span must start and end with a failure, got {chi}")
        if any(b not in (0, 1) for b in chi):
            raise InvalidParameterError(f"pattern must be binary, got {chi}")
        object.__setattr__(self, "chi", chi)

    @property
    def m(self) -> int:
        return sum(self.chi)

    @property
    def sparsity(self) -> int:
        return len(self.chi) - self.m

    def indices(self, offset: int) -> tuple:
        """1-based failed-pair indices when the span starts at pair
        offset+1."""
        return tuple(offset + k + 1 for k, b in enumerate(self.chi) if b)


def _pattern_count(m: int, s: int) -> int:
    """Patterns of m failures with s interior gaps: both span ends are
    fixed failures, the remaining m-2 distribute over the s+m-2
    interior slots."""
    if m == 1:
        return 1 if s == 0 else 0
    return math.comb(s + m - 2, m - 2)


def _iter_patterns(m: int, s: int):
    span = m + s
    if m == 1:
        yield SparsityPattern((1,))
        return
    for interior in itertools.combinations(range(1, span - 1), m - 2):
        chi = [0] * span
        chi[0] = chi[-1] = 1
        for p in interior:
            chi[p] = 1
        yield SparsityPattern(tuple(chi))


def _sample_pattern(rng, m: int, s: int) -> SparsityPattern:
    span = m + s
    chi = [0] * span
    chi[0] = chi[-1] = 1
    if m > 2:
        for p in rng.choice(span - 2, size=m - 2, replace=False):
            chi[int(p) + 1] = 1
    return SparsityPattern(tuple(chi))


def _pattern_risk(sigma, scenario, d, c, epsilon):
    """One pattern's aggregate: infinite as soon as any surviving pair
    is at infinite risk, else the mean over surviving pairs. Errored
    entries are left out; returns None if nothing was usable."""
    values = []
    for entry in risk_profile(sigma, scenario, d, c, epsilon):
        if entry.failed or entry.risk is None:
            continue
        if entry.risk.branch == "infinite":
            return math.inf
        values.append(entry.risk.value)
    if not values:
        return None
    return sum(values) / len(values)


def sweep_sparsity_rows(sigma: CovarianceMatrix, d: float, c: float,
                        epsilon: float, m: int, state_value: float,
                        seed: int, enum_cap: int = 100_000,
                        sample_count: int = 10_000):
    """Average profile risk by sparsity level for m failures.

    A level is enumerated exactly when its pattern-placement count fits
    under enum_cap, otherwise sample_count placements are drawn
    uniformly (with replacement) from a per-level substream of seed.
    avg_risk averages the finite patterns; the infinite fraction is
    reported separately.
    """
    n_pairs = sigma.dim
    if not 1 <= m <= n_pairs - 1:
        raise InvalidQueryError(f"m={m} must lie in 1..{n_pairs - 1}")
    rows = []
    for s in range(0, n_pairs - m + 1):
        span = m + s
        placements = n_pairs - span + 1
        total = _pattern_count(m, s) * placements
        if total == 0:
            continue
        exact = total <= enum_cap
        if exact:
            cases = ((pat, off) for pat in _iter_patterns(m, s)
                     for off in range(placements))
            n_eval = total
        else:
            rng = np.random.default_rng(
                np.random.SeedSequence(entropy=int(seed), spawn_key=(s,)))
            cases = ((_sample_pattern(rng, m, s),
                      int(rng.integers(0, placements)))
                     for _ in range(sample_count))
            n_eval = sample_count
        finite_sum = 0.0
        finite_count = 0
        inf_count = 0
        skipped = 0
        for pattern, offset in cases:
            scenario = FailureScenario(pattern.indices(offset),
                                       (state_value,) * m)
            value = _pattern_risk(sigma, scenario, d, c, epsilon)
            if value is None:
                skipped += 1
            elif math.isinf(value):
                inf_count += 1
            else:
                finite_sum += value
                finite_count += 1
        counted = n_eval - skipped
        if counted == 0:
            continue
        avg = finite_sum / finite_count if finite_count else math.inf
        rows.append((s, avg, inf_count / counted, counted,
                     1 if exact else 0))
    return rows


def add_edge_rows(graph: WeightedGraph, platoon: PlatoonParams,
                  noise: NoiseParams, epsilon: float, c: float,
                  scenario: FailureScenario, j: int):
    """Risk of pair j when both of its vehicles gain a unit-weight link
    to each candidate target vehicle. Row target=0 is the unmodified
    baseline; rows for destabilizing targets carry an empty risk."""
    base_sigma = steady_state_covariance(spectrum(laplacian(graph)), noise)
    base = var_risk(condition(base_sigma, platoon.d, j, scenario),
                    platoon.d, c, epsilon)
    rows = [(0, base.value, 1)]
    for target in range(1, graph.n + 1):
        if target in (j, j + 1):
            continue
        augmented = add_pair_edges(graph, j, target)
        spec = spectrum(laplacian(augmented))
        report = check_platoon(spec, noise.tau, noise.beta)
        if not report.stable:
            rows.append((target, None, 0))
            continue
        try:
            sig = steady_state_covariance(spec, noise)
            value = var_risk(condition(sig, platoon.d, j, scenario),
                             platoon.d, c, epsilon).value
        except NumericalError:
            value = None
        rows.append((target, value, 1))
    return rows


def simulate_rows(analytic: CovarianceMatrix, empirical: EmpiricalCovariance):
    """Upper-triangle comparison of analytic vs empirical covariance with
    the per-entry z-score (difference over standard error)."""
    if analytic.dim != empirical.cov.shape[0]:
        raise InvalidParameterError(
            f"analytic dimension {analytic.dim} does not match empirical "
            f"{empirical.cov.shape[0]}")
    rows = []
    max_abs_z = 0.0
    for i in range(analytic.dim):
        for j in range(i, analytic.dim):
            sa = float(analytic.values[i, j])
            se_ = float(empirical.cov[i, j])
            err = float(empirical.standard_errors[i, j])
            if err > 0.0:
                z = (se_ - sa) / err
            else:
                z = 0.0 if se_ == sa else math.inf
            max_abs_z = max(max_abs_z, abs(z))
            rows.append((i + 1, j + 1, sa, se_, err, z))
    return rows, [f"max_abs_z={max_abs_z:.17g}"]
