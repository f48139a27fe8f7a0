"""Command-line front end.

Subcommands compute the library's tables and figure data as CSV (default) or
JSON, with a JSON metadata sidecar recording the exact configuration, its
hash, the seed and the library version.  Outputs are deterministic: the same
configuration and seed produce byte-identical files.

Exit codes: 0 success, 2 configuration error, 3 budget exceeded, 4 numeric
validity error.  Failures print a machine-readable JSON object to stderr.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from typing import Sequence

from . import __version__
from .binning import BinningProblem, binning_error_exact, binning_error_mc
from .bounds import GaussianParams, R_upper_quantile, achievability_iid, approx_Rstar, converse_iid
from .budgets import default_budgets
from .dispersion import dispersion_estimate, normalized_dispersion
from .errors import (
    BudgetExceededError,
    CompLimitsError,
    ConfigurationError,
    ConvergenceError,
    DistributionError,
    StructuralError,
    UnsupportedSpectrumError,
)
from .optcode import R_star, Rbar, epsilon_star, length_distribution, prefix_R, prefix_epsilon
from .sources import (
    CountableDistribution,
    MarkovSource,
    as_finite,
    bernoulli,
    binomial_distribution,
    entropy,
    geometric_distribution,
    load_source,
    poisson_distribution,
)
from .spectrum import InformationSpectrum, iid_spectrum, markov_spectrum_exact, markov_spectrum_mc

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_BUDGET = 3
EXIT_NUMERIC = 4


class _CliParser(argparse.ArgumentParser):
    def error(self, message):  # noqa: D102 - argparse hook
        raise ConfigurationError(message)


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(float(value))  # shortest round-trip, plain across numpy scalars
    return str(value)


def _load_source_arg(raw: str):
    if raw.lstrip().startswith("{"):
        return load_source(raw)
    try:
        with open(raw, "r", encoding="utf-8") as fh:
            return load_source(json.load(fh))
    except OSError as exc:
        raise ConfigurationError(f"cannot read source file {raw!r}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"source file {raw!r} is not valid JSON: {exc}") from exc


def _spectrum_for(source, n: int, mc_samples: int, seed: int) -> InformationSpectrum:
    if isinstance(source, MarkovSource):
        if mc_samples > 0:
            return markov_spectrum_mc(source, n, mc_samples, seed)
        return markov_spectrum_exact(source, n, default_budgets())
    dist = as_finite(source)
    return iid_spectrum(dist, n, default_budgets())


def _write_output(args, headers: Sequence[str], rows: list[tuple], meta_extra: dict) -> None:
    config = {k: v for k, v in sorted(vars(args).items()) if k not in {"func", "output"}}
    canonical = json.dumps(config, sort_keys=True, default=str)
    meta = {
        "command": args.command,
        "config": json.loads(canonical),
        "config_sha256": hashlib.sha256(canonical.encode()).hexdigest(),
        "version": __version__,
        "seed": getattr(args, "seed", None),
        "columns": list(headers),
    }
    meta.update(meta_extra)
    if args.format == "json":
        payload = {"columns": list(headers), "rows": [[_cell(v) for v in row] for row in rows], "meta": meta}
        text = json.dumps(payload, sort_keys=True, indent=2) + "\n"
    else:
        lines = [",".join(headers)]
        lines += [",".join(_fmt(v) for v in row) for row in rows]
        text = "\n".join(lines) + "\n"
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
        with open(f"{args.output}.meta.json", "w", encoding="utf-8") as fh:
            json.dump(meta, fh, sort_keys=True, indent=2)
            fh.write("\n")
    else:
        sys.stdout.write(text)


def _cell(value):
    if isinstance(value, float):
        return float(value)
    if isinstance(value, int) and abs(value) < 2**53:
        return value
    return str(value)


def _parse_int_range(args) -> range:
    if args.n_max < args.n_min:
        raise ConfigurationError("--n-max must be at least --n-min")
    return range(args.n_min, args.n_max + 1, args.n_step)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def _cmd_spectrum(args) -> None:
    source = _load_source_arg(args.source)
    spec = _spectrum_for(source, args.n, args.mc_samples, args.seed)
    headers = ("info_value_bits", "probability", "count")
    rows = [(float(i), float(p), c) for i, p, c in zip(spec.infos, spec.probs, spec.counts)]
    _write_output(args, headers, rows, {"n": spec.n, "exact": spec.exact, "sample_size": spec.sample_size})


def _cmd_limits(args) -> None:
    source = _load_source_arg(args.source)
    eps_list = args.eps
    headers = ["n", "k", "epsilon_star_probability", "prefix_epsilon_kplus1_probability",
               "Rbar_bits_per_symbol"]
    headers += [f"R_star_bits_per_symbol_eps_{e}" for e in eps_list]
    headers += [f"prefix_R_bits_per_symbol_eps_{e}" for e in eps_list]
    rows = []
    marker = {}
    for n in _parse_int_range(args):
        try:
            spec = _spectrum_for(source, n, 0, args.seed)
        except BudgetExceededError as exc:
            marker = {"truncated_at_n": n, "budget_note": str(exc)}
            break
        rbar = Rbar(spec)
        r_vals = [R_star(spec, e) for e in eps_list]
        rp_vals = [prefix_R(spec, e) for e in eps_list]
        kmax = spec.total_count.bit_length()
        for k in range(kmax + 1):
            rows.append(
                (n, k, epsilon_star(spec, k), prefix_epsilon(spec, k + 1), rbar, *r_vals, *rp_vals)
            )
    if not rows:
        raise BudgetExceededError(marker.get("budget_note", "no blocklength fits the budget"))
    _write_output(args, headers, rows, marker)


def _cmd_bounds(args) -> None:
    source = _load_source_arg(args.source)
    dist = as_finite(source)
    params = GaussianParams.from_distribution(dist)
    eps = args.eps[0] if isinstance(args.eps, list) else args.eps
    headers = (
        "n",
        "exact_R_star_bits_per_symbol",
        "approx_bits_per_symbol",
        "achievability_bits_per_symbol",
        "converse_bits_per_symbol",
        "upper_quantile_bits_per_symbol",
        "achievability_valid",
        "converse_valid",
    )
    rows = []
    marker = {}
    for n in _parse_int_range(args):
        try:
            spec = iid_spectrum(dist, n, default_budgets())
        except BudgetExceededError as exc:
            marker = {"truncated_at_n": n, "budget_note": str(exc)}
            break
        ach = achievability_iid(params, n, eps)
        conv = converse_iid(params, n, eps)
        rows.append(
            (
                n,
                R_star(spec, eps),
                approx_Rstar(params, n, eps),
                ach.value,
                conv.value,
                R_upper_quantile(spec, eps).value,
                int(ach.valid),
                int(conv.valid),
            )
        )
    if not rows:
        raise BudgetExceededError(marker.get("budget_note", "no blocklength fits the budget"))
    _write_output(args, headers, rows, {"eps": eps, **marker})


def _cmd_binning(args) -> None:
    source = _load_source_arg(args.source)
    dist = as_finite(source)
    headers = ("n_bins", "exact_error_probability", "mc_estimate_probability", "mc_stderr_probability")
    rows = []
    for i, n_bins in enumerate(args.bins):
        problem = BinningProblem(dist, n_bins)
        exact = binning_error_exact(problem)
        est, err = binning_error_mc(problem, args.trials, args.seed + i)
        rows.append((n_bins, exact, est, err))
    _write_output(args, headers, rows, {"trials": args.trials})


def _cmd_dispersion(args) -> None:
    source = _load_source_arg(args.source)
    if isinstance(source, CountableDistribution):
        source = source.truncate()
    trace = dispersion_estimate(source, list(_parse_int_range(args)))
    headers = ("n", "var_len_over_n_bits2", "var_info_over_n_bits2", "gap2_bits2", "sigma2_ref_bits2")
    rows = [
        (n, vl, vi, g, trace.sigma2_ref)
        for n, vl, vi, g in zip(trace.n_list, trace.var_len, trace.var_info, trace.gap2)
    ]
    _write_output(args, headers, rows, {"complete": trace.complete})


def _cmd_figure1(args) -> None:
    dist = binomial_distribution(10_000, 0.5)
    spec = iid_spectrum(dist, 1, default_budgets())
    lengths = length_distribution(spec)
    headers = ("series", "x_bits", "cdf_probability")
    rows = []
    cum = 0.0
    for l, p in zip(lengths.lengths, lengths.probs):
        cum += p
        rows.append(("codelength", float(l), min(cum, 1.0)))
    for i in range(len(spec)):
        rows.append(("information", float(spec.infos[i]), float(spec.cum_probs[i])))
    meta = {
        "entropy_bits": entropy(dist),
        "expected_codelength_bits": lengths.mean(),
    }
    _write_output(args, headers, rows, meta)


def _figure_rate_sweep(args, n_lo: int, n_hi: int) -> None:
    dist = bernoulli(args.bias)
    params = GaussianParams.from_distribution(dist)
    headers = (
        "n",
        "exact_R_star_bits_per_symbol",
        "approx_bits_per_symbol",
        "upper_quantile_bits_per_symbol",
    )
    rows = []
    for n in range(n_lo, n_hi + 1):
        spec = iid_spectrum(dist, n, default_budgets())
        rows.append(
            (
                n,
                R_star(spec, args.eps),
                approx_Rstar(params, n, args.eps),
                R_upper_quantile(spec, args.eps).value,
            )
        )
    _write_output(args, headers, rows, {"eps": args.eps, "bias": args.bias})


def _cmd_figure2(args) -> None:
    _figure_rate_sweep(args, args.n_min, args.n_max)


def _cmd_figure3(args) -> None:
    _figure_rate_sweep(args, args.n_min, args.n_max)


def _cmd_figure4(args) -> None:
    headers = ("family", "param", "entropy_bits", "normalized_dispersion")
    rows = []
    for p in [i / 200 for i in range(2, 100)]:
        d = bernoulli(p)
        rows.append(("bernoulli", p, entropy(d), normalized_dispersion(d)))
    for q in [i / 200 for i in range(2, 199)]:
        g = geometric_distribution(q)
        rows.append(("geometric", q, entropy(g.truncate()), normalized_dispersion(g)))
    for lam10 in range(1, 101):
        lam = lam10 / 10
        pois = poisson_distribution(lam)
        rows.append(("poisson", lam, entropy(pois.truncate()), normalized_dispersion(pois)))
    _write_output(args, headers, rows, {})


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _CliParser(prog="complimits", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, source=True, n_range=False):
        if source:
            p.add_argument("--source", required=True, help="source JSON (inline or file path)")
        if n_range:
            p.add_argument("--n-min", type=int, default=10)
            p.add_argument("--n-max", type=int, default=200)
            p.add_argument("--n-step", type=int, default=1)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--output", "-o", default=None, help="output file (default: stdout)")
        p.add_argument("--format", choices=("csv", "json"), default="csv")

    p = sub.add_parser("spectrum", help="information spectrum masses")
    common(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--mc-samples", type=int, default=0, help="0 = exact")
    p.set_defaults(func=_cmd_spectrum)

    p = sub.add_parser("limits", help="exact limits per (n, k)")
    common(p, n_range=True)
    p.add_argument("--eps", type=float, nargs="+", default=[0.1])
    p.set_defaults(func=_cmd_limits)

    p = sub.add_parser("bounds", help="exact limit vs bounds over n")
    common(p, n_range=True)
    p.add_argument("--eps", type=float, default=0.1)
    p.set_defaults(func=_cmd_bounds)

    p = sub.add_parser("binning", help="random binning error")
    common(p)
    p.add_argument("--bins", type=int, nargs="+", required=True)
    p.add_argument("--trials", type=int, default=100_000)
    p.set_defaults(func=_cmd_binning)

    p = sub.add_parser("dispersion", help="dispersion trace over n")
    common(p, n_range=True)
    p.set_defaults(func=_cmd_dispersion)

    p = sub.add_parser("figure1", help="codelength and information CDFs, binomial(10^4, 1/2)")
    common(p, source=False)
    p.set_defaults(func=_cmd_figure1)

    p = sub.add_parser("figure2", help="exact rate vs approximations, long blocklengths")
    common(p, source=False, n_range=True)
    p.set_defaults(func=_cmd_figure2, n_min=10, n_max=2000)
    p.add_argument("--eps", type=float, default=0.1)
    p.add_argument("--bias", type=float, default=0.11)

    p = sub.add_parser("figure3", help="exact rate vs approximation, short blocklengths")
    common(p, source=False, n_range=True)
    p.set_defaults(func=_cmd_figure3, n_min=10, n_max=200)
    p.add_argument("--eps", type=float, default=0.1)
    p.add_argument("--bias", type=float, default=0.11)

    p = sub.add_parser("figure4", help="normalized dispersion vs entropy for three families")
    common(p, source=False)
    p.set_defaults(func=_cmd_figure4)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        args.func(args)
        return EXIT_OK
    except (ConfigurationError, DistributionError, StructuralError) as exc:
        _emit_error(exc, EXIT_CONFIG)
        return EXIT_CONFIG
    except BudgetExceededError as exc:
        _emit_error(exc, EXIT_BUDGET)
        return EXIT_BUDGET
    except (UnsupportedSpectrumError, ConvergenceError, ValueError) as exc:
        _emit_error(exc, EXIT_NUMERIC)
        return EXIT_NUMERIC
    except CompLimitsError as exc:
        _emit_error(exc, EXIT_NUMERIC)
        return EXIT_NUMERIC


def _emit_error(exc: Exception, code: int) -> None:
    payload = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    suggestion = getattr(exc, "suggestion", None)
    if suggestion:
        payload["suggestion"] = suggestion
    sys.stderr.write(json.dumps(payload, sort_keys=True) + "\n")


if __name__ == "__main__":
    raise SystemExit(main())
