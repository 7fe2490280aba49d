"""Command-line front end.

Every subcommand reads a sectioned config file, runs one analysis, and
emits a versioned CSV to stdout or --out. Exit codes: 0 success, 1
validation or configuration error, 2 numerical failure (near-boundary
quadrature, ill-conditioned scenario, diverging simulation).
"""
from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from . import __version__
from .closed_form import complete_profile
from .config import (RawConfig, build_graph, build_noise, build_platoon,
                     build_query, build_scenario, build_sim,
                     experiment_option, load_config, resolve_seed,
                     scenario_state_values)
from .covariance import (complete_graph_sigma_c, steady_state_covariance)
from .errors import CascadeRiskError, InvalidQueryError, NumericalError
from .experiments import (add_edge_rows, covariance_rows, profile_rows,
                          simulate_rows, stability_rows, sweep_scale_rows,
                          sweep_sparsity_rows)
from .graph import build_complete, laplacian, spectrum
from .risk import risk_profile
from .simulate import run
from .stability import check_platoon

_SCHEMAS = {
    "stability": ("k", "lambda", "s1", "s2", "bound", "margin"),
    "covariance": ("i", "j", "sigma_ij"),
    "risk_profile": ("j", "risk", "branch", "mu_tilde", "sigma_tilde",
                     "is_failed", "naive_risk"),
    "simulate": ("i", "j", "analytic_sigma", "empirical_sigma", "se",
                 "z_score"),
    "sweep_scale": ("m", "j", "risk"),
    "sweep_sparsity": ("s", "avg_risk", "inf_fraction", "n_patterns",
                       "exact"),
    "add_edge": ("target", "risk", "stable"),
}


def _format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return "%.17g" % float(value)


def render_csv(schema: str, rows, trailers=()) -> str:
    lines = [f"# schema={schema}/v1", ",".join(_SCHEMAS[schema])]
    for row in rows:
        lines.append(",".join(_format_cell(cell) for cell in row))
    for trailer in trailers:
        lines.append(f"# {trailer}")
    return "\n".join(lines) + "\n"


def _emit(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _spectrum_of(cfg: RawConfig):
    graph = build_graph(cfg)
    return graph, spectrum(laplacian(graph))


def cmd_stability(cfg: RawConfig, args) -> str:
    _, spec = _spectrum_of(cfg)
    noise = build_noise(cfg)
    rows, trailers = stability_rows(check_platoon(spec, noise.tau, noise.beta))
    return render_csv("stability", rows, trailers)


def cmd_covariance(cfg: RawConfig, args) -> str:
    _, spec = _spectrum_of(cfg)
    sigma = steady_state_covariance(spec, build_noise(cfg))
    return render_csv("covariance", covariance_rows(sigma))


def _is_complete(graph) -> bool:
    return np.array_equal(graph.weights, build_complete(graph.n).weights)


def cmd_risk_profile(cfg: RawConfig, args) -> str:
    graph = build_graph(cfg)
    noise = build_noise(cfg)
    platoon = build_platoon(cfg)
    epsilon, c = build_query(cfg)
    scenario = build_scenario(cfg)
    if args.method == "closed-form":
        if not _is_complete(graph):
            raise InvalidQueryError(
                "--method closed-form applies only to the complete graph; "
                "use --method generic for this topology")
        sigma_c = complete_graph_sigma_c(graph.n, noise)
        entries = complete_profile(graph.n, scenario, sigma_c, platoon.d,
                                   c, epsilon)
        stds = [math.sqrt(sigma_c)] * (graph.n - 1)
    else:
        sigma = steady_state_covariance(spectrum(laplacian(graph)), noise)
        entries = risk_profile(sigma, scenario, platoon.d, c, epsilon)
        stds = np.sqrt(np.diag(sigma.values))
    rows = profile_rows(entries, stds, platoon.d, c, epsilon)
    return render_csv("risk_profile", rows)


def cmd_simulate(cfg: RawConfig, args) -> str:
    graph, spec = _spectrum_of(cfg)
    noise = build_noise(cfg)
    platoon = build_platoon(cfg)
    analytic = steady_state_covariance(spec, noise)
    empirical = run(graph, platoon, noise, build_sim(cfg, args.seed))
    rows, trailers = simulate_rows(analytic, empirical)
    return render_csv("simulate", rows, trailers)


def cmd_sweep_scale(cfg: RawConfig, args) -> str:
    _, spec = _spectrum_of(cfg)
    noise = build_noise(cfg)
    platoon = build_platoon(cfg)
    epsilon, c = build_query(cfg)
    state = scenario_state_values(cfg, 1)[0]
    sigma = steady_state_covariance(spec, noise)
    rows = sweep_scale_rows(sigma, platoon.d, c, epsilon, args.max_m, state)
    return render_csv("sweep_scale", rows)


def cmd_sweep_sparsity(cfg: RawConfig, args) -> str:
    _, spec = _spectrum_of(cfg)
    noise = build_noise(cfg)
    platoon = build_platoon(cfg)
    epsilon, c = build_query(cfg)
    state = scenario_state_values(cfg, 1)[0]
    sigma = steady_state_covariance(spec, noise)
    rows = sweep_sparsity_rows(
        sigma, platoon.d, c, epsilon, args.m, state,
        seed=resolve_seed(cfg, args.seed),
        enum_cap=experiment_option(cfg, "enum_cap", 100_000),
        sample_count=experiment_option(cfg, "sample_count", 10_000))
    return render_csv("sweep_sparsity", rows)


def cmd_add_edge(cfg: RawConfig, args) -> str:
    graph = build_graph(cfg)
    noise = build_noise(cfg)
    platoon = build_platoon(cfg)
    epsilon, c = build_query(cfg)
    scenario = build_scenario(cfg)
    rows = add_edge_rows(graph, platoon, noise, epsilon, c, scenario,
                         args.pair)
    return render_csv("add_edge", rows)


_COMMANDS = {
    "stability": cmd_stability,
    "covariance": cmd_covariance,
    "risk-profile": cmd_risk_profile,
    "simulate": cmd_simulate,
    "sweep-scale": cmd_sweep_scale,
    "sweep-sparsity": cmd_sweep_sparsity,
    "add-edge": cmd_add_edge,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cascade-risk",
        description="Cascading-collision risk analysis for noisy, "
                    "time-delayed vehicle platoons.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True,
                       help="path to the run configuration file")
        p.add_argument("--out", default=None,
                       help="output CSV path (default: stdout)")
        p.add_argument("--seed", type=int, default=None,
                       help="override the seed from [sim]")

    common(sub.add_parser("stability",
                          help="per-mode stability report"))
    common(sub.add_parser("covariance",
                          help="steady-state distance covariance"))
    p = sub.add_parser("risk-profile",
                       help="risk of every pair under the scenario")
    common(p)
    p.add_argument("--method", choices=("generic", "closed-form"),
                   default="generic",
                   help="conditioning route (closed-form requires the "
                        "complete graph)")
    common(sub.add_parser("simulate",
                          help="Monte Carlo check of the analytic covariance"))
    p = sub.add_parser("sweep-scale",
                       help="risk vs number of leading failures")
    common(p)
    p.add_argument("--max-m", type=int, required=True, dest="max_m",
                   help="largest failure count (failures occupy pairs 1..m)")
    p = sub.add_parser("sweep-sparsity",
                       help="average risk vs failure-pattern sparsity")
    common(p)
    p.add_argument("--m", type=int, required=True,
                   help="number of failed pairs in every pattern")
    p = sub.add_parser("add-edge",
                       help="risk of one pair after linking it to each "
                            "candidate vehicle")
    common(p)
    p.add_argument("--pair", type=int, required=True,
                   help="queried pair index")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        text = _COMMANDS[args.command](cfg, args)
        _emit(text, args.out)
    except NumericalError as exc:
        print(f"cascade-risk: numerical error: {exc}", file=sys.stderr)
        return 2
    except CascadeRiskError as exc:
        print(f"cascade-risk: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"cascade-risk: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
