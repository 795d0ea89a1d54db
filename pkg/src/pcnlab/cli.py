"""Command-line interface.

Subcommands mirror the pipeline stages so every intermediate artifact can be
produced (and re-consumed) independently:

  generate       synthetic claims -> claims CSV
  build          claims CSV -> PCN edge lists (optionally DOT files)
  metrics        PCNs (edge list and/or claims) -> metrics CSV
  regress        metrics CSV -> regression report CSV
  ergm fit       one PCN -> fit JSON
  ergm simulate  forward simulation -> statistics CSV
  compare        two fit reports -> t-test JSON
  report         full pipeline (all of the above in order)

Exit codes: 0 success, 1 stage/input failure, 2 usage error. ``PCNLAB_SEED``
provides the seed when no --seed flag is given.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys

from . import __version__
from . import centrality as centrality_mod
from . import ergm as ergm_mod
from . import network as network_mod
from .claims import build_admissions, hospital_outcomes, parse_claims, write_claims_csv
from .generator import GeneratorConfig, generate_synthetic_claims
from .pipeline import PipelineConfig, PipelineError, run_pipeline
from .stats import (
    CollinearityError,
    ols_moderation,
    ols_simple,
    regression_report_rows,
    two_sample_ttest,
    write_regression_report,
)

logger = logging.getLogger(__name__)


def _resolve_seed(value: int | None) -> int:
    if value is not None:
        return value
    env = os.environ.get("PCNLAB_SEED", "").strip()
    return int(env) if env else 0


def _parse_params(text: str) -> ergm_mod.ErgParams:
    """Parse 'edge=-1.2,triangle=0.5' into model parameters."""
    values: dict[str, float] = {}
    if text.strip():
        for chunk in text.split(","):
            name, _, raw = chunk.partition("=")
            if not raw:
                raise ValueError(f"bad parameter assignment {chunk!r}")
            canonical = ergm_mod.normalize_terms([name])[0]
            values[canonical] = float(raw)
    return ergm_mod.ErgParams.from_mapping(values)


def cmd_generate(args: argparse.Namespace) -> int:
    config = GeneratorConfig.from_json(args.config)
    if args.seed is not None or os.environ.get("PCNLAB_SEED"):
        config.seed = _resolve_seed(args.seed)
    claims = generate_synthetic_claims(config)
    write_claims_csv(claims, args.out)
    print(f"wrote {len(claims)} claims to {args.out}")
    return 0


def cmd_build(args: argparse.Namespace) -> int:
    claims = parse_claims(args.input)
    pcns = network_mod.partition_pcns(claims)
    network_mod.write_edge_lists(pcns, args.out)
    if args.dot_dir:
        os.makedirs(args.dot_dir, exist_ok=True)
        for hospital_id in sorted(pcns):
            with open(
                os.path.join(args.dot_dir, f"{hospital_id}.dot"), "w", encoding="utf-8"
            ) as fh:
                fh.write(network_mod.to_dot(pcns[hospital_id]))
    print(f"wrote {len(pcns)} PCNs to {args.out}")
    return 0


def cmd_metrics(args: argparse.Namespace) -> int:
    if not args.edges and not args.input:
        raise ValueError("metrics needs --edges and/or --input")
    claims = parse_claims(args.input) if args.input else None
    if args.edges:
        pcns = network_mod.read_edge_lists(args.edges)
    else:
        pcns = network_mod.partition_pcns(claims)
    outcomes = None
    if claims is not None:
        outcomes = hospital_outcomes(
            build_admissions(claims, args.readmission_window)
        )
    reports = {h: centrality_mod.centralization_report(p) for h, p in pcns.items()}
    centrality_mod.write_metrics_csv(reports, outcomes, args.out)
    print(f"wrote {len(reports)} metric rows to {args.out}")
    return 0


def cmd_regress(args: argparse.Namespace) -> int:
    rows = centrality_mod.read_metrics_csv(args.input)
    usable = [r for r in rows if r["mean_cost"] is not None]
    if len(usable) < 3:
        raise ValueError(f"need at least 3 rows with outcomes, have {len(usable)}")
    cost = [r["mean_cost"] for r in usable]
    age = [r["mean_patient_age"] for r in usable]
    measures = {
        "degree_centralization": [r["degree_centralization"] for r in usable],
        "betweenness_centralization": [r["betweenness_centralization"] for r in usable],
    }
    report_rows: list[dict] = []
    for model_number, (name, values) in enumerate(measures.items(), start=1):
        try:
            fit = ols_simple(cost, values)
        except CollinearityError:
            logger.warning("%s is constant; simple model skipped", name)
            continue
        report_rows.extend(
            regression_report_rows(model_number, "mean_cost", {"x": name}, fit)
        )
    for model_number, (name, values) in enumerate(measures.items(), start=1):
        if any(a is None for a in age):
            logger.warning("missing ages; moderation models skipped")
            break
        try:
            fit = ols_moderation(
                cost, values, age, include_moderator_main_effect=args.full_moderation
            )
        except CollinearityError as exc:
            logger.warning("moderation for %s skipped (%s)", name, exc)
            continue
        labels = {"x": name, "x_moderator": f"{name}*age"}
        if args.full_moderation:
            labels["moderator"] = "age"
        report_rows.extend(
            regression_report_rows(model_number, "mean_cost", labels, fit)
        )
    write_regression_report(report_rows, args.out)
    print(f"wrote {len(report_rows)} regression rows to {args.out}")
    return 0


def cmd_ergm_fit(args: argparse.Namespace) -> int:
    pcns = network_mod.read_edge_lists(args.edges)
    if args.hospital:
        if args.hospital not in pcns:
            raise ValueError(f"hospital {args.hospital!r} not in {args.edges}")
        selected = [args.hospital]
    elif len(pcns) == 1:
        selected = list(pcns)
    else:
        raise ValueError("multiple PCNs in input; pick one with --hospital")
    hospital = selected[0]
    pcn = pcns[hospital]
    terms = ergm_mod.normalize_terms(args.ergm_terms.split(","))
    cfg = ergm_mod.resolve_mcmc_config(
        pcn.node_count,
        burn_in=args.burn_in,
        thinning=args.thin,
        n_samples=args.samples,
        seed=_resolve_seed(args.seed),
        max_phase_iterations=args.max_phase_iterations,
    )
    fit = ergm_mod.estimate_parameters(pcn, terms, cfg)
    ergm_mod.write_fit_report([fit], args.out, cfg)
    status = "converged" if fit.converged else "NOT converged"
    print(f"fit for {hospital} ({status}) written to {args.out}")
    return 0


def cmd_ergm_simulate(args: argparse.Namespace) -> int:
    params = _parse_params(args.params)
    cfg = ergm_mod.McmcConfig(
        burn_in=args.burn_in if args.burn_in is not None else 3000,
        thinning=args.thin if args.thin is not None else max(1, args.nodes),
        n_samples=args.samples if args.samples is not None else 10000,
        seed=_resolve_seed(args.seed),
    )
    samples = ergm_mod.sample_statistics(params, args.nodes, cfg)
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["sample", "edges", "two_stars", "three_stars", "triangles"])
        for index, stats in enumerate(samples):
            writer.writerow(
                [index, stats.edges, stats.two_stars, stats.three_stars, stats.triangles]
            )
    print(f"wrote {len(samples)} sampled statistics to {args.out}")
    return 0


def cmd_compare(args: argparse.Namespace) -> int:
    fits_a = ergm_mod.read_fit_report(args.fits_a)
    fits_b = ergm_mod.read_fit_report(args.fits_b)
    result = ergm_mod.compare_parameter_groups(
        fits_a, fits_b, args.parameter, welch=args.welch
    )
    payload = {
        "parameter": ergm_mod.normalize_terms([args.parameter])[0],
        "t_value": result.t_value,
        "degrees_of_freedom": result.degrees_of_freedom,
        "p_value": result.p_value,
        "group_means": list(result.group_means),
        "group_standard_errors": list(result.group_standard_errors),
    }
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    sys.stdout.write(text)
    return 0


def cmd_report(args: argparse.Namespace) -> int:
    file_config: dict = {}
    if args.config:
        with open(args.config, "r", encoding="utf-8") as fh:
            file_config = json.load(fh)

    generator = None
    generator_value = file_config.get("generator")
    if isinstance(generator_value, str):
        generator = GeneratorConfig.from_json(generator_value)
    elif isinstance(generator_value, dict):
        generator = GeneratorConfig.from_dict(generator_value)

    def pick(flag_value, key, default):
        if flag_value is not None:
            return flag_value
        return file_config.get(key, default)

    seed = args.seed
    if seed is None:
        seed = file_config.get("seed")
    seed = _resolve_seed(seed)
    if generator is not None and "seed" not in (generator_value or {}):
        generator.seed = seed

    terms_text = pick(args.ergm_terms, "ergm_terms", None)
    if isinstance(terms_text, str):
        terms = ergm_mod.normalize_terms(terms_text.split(","))
    elif isinstance(terms_text, (list, tuple)):
        terms = ergm_mod.normalize_terms(terms_text)
    else:
        terms = ergm_mod.TERMS

    config = PipelineConfig(
        out_dir=args.out_dir,
        input_claims=pick(args.input, "input", None),
        generator=generator,
        readmission_window=pick(args.readmission_window, "readmission_window", 28),
        ergm_terms=terms,
        burn_in=pick(args.burn_in, "burn_in", None),
        thinning=pick(args.thin, "thinning", None),
        n_samples=pick(args.samples, "n_samples", None),
        max_phase_iterations=pick(None, "max_phase_iterations", None),
        group_size=pick(args.group_size, "group_size", 5),
        seed=seed,
        compare_parameter=pick(None, "compare_parameter", "triangle"),
        welch=args.welch or file_config.get("welch", False),
        full_moderation=args.full_moderation or file_config.get("full_moderation", False),
    )
    result = run_pipeline(config)
    for stage in result.stages:
        print(f"{stage['name']:<12} {stage['status']:<8} {stage['detail']}")
    print(f"report written to {result.artifacts['report']}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pcnlab",
        description="Physician collaboration network analytics from insurance claims",
    )
    parser.add_argument("--version", action="version", version=f"pcnlab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="generate synthetic claims CSV")
    p.add_argument("--config", required=True, help="generator config JSON")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True, help="output claims CSV path")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("build", help="build PCN edge lists from claims")
    p.add_argument("--input", required=True, help="claims CSV path")
    p.add_argument("--out", required=True, help="output edge-list CSV path")
    p.add_argument("--dot-dir", default=None, help="also write DOT files here")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("metrics", help="centrality/centralization metrics CSV")
    p.add_argument("--edges", default=None, help="PCN edge-list CSV")
    p.add_argument("--input", default=None, help="claims CSV (for outcomes)")
    p.add_argument("--readmission-window", type=int, default=28)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("regress", help="regression report from metrics CSV")
    p.add_argument("--input", required=True, help="metrics CSV path")
    p.add_argument("--full-moderation", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_regress)

    p = sub.add_parser("ergm", help="ERG model fitting and simulation")
    ergm_sub = p.add_subparsers(dest="ergm_command", required=True)

    pf = ergm_sub.add_parser("fit", help="fit one PCN")
    pf.add_argument("--edges", required=True, help="PCN edge-list CSV")
    pf.add_argument("--hospital", default=None)
    pf.add_argument("--ergm-terms", default="edge,two_star,three_star,triangle")
    pf.add_argument("--burn-in", type=int, default=None)
    pf.add_argument("--thin", type=int, default=None)
    pf.add_argument("--samples", type=int, default=None)
    pf.add_argument("--max-phase-iterations", type=int, default=None)
    pf.add_argument("--seed", type=int, default=None)
    pf.add_argument("--out", required=True)
    pf.set_defaults(func=cmd_ergm_fit)

    ps = ergm_sub.add_parser("simulate", help="forward-simulate statistics")
    ps.add_argument("--nodes", type=int, required=True)
    ps.add_argument("--params", default="", help="e.g. edge=-1.2,triangle=0.5")
    ps.add_argument("--burn-in", type=int, default=None)
    ps.add_argument("--thin", type=int, default=None)
    ps.add_argument("--samples", type=int, default=None)
    ps.add_argument("--seed", type=int, default=None)
    ps.add_argument("--out", required=True)
    ps.set_defaults(func=cmd_ergm_simulate)

    p = sub.add_parser("compare", help="t-test between two fit reports")
    p.add_argument("--fits-a", required=True)
    p.add_argument("--fits-b", required=True)
    p.add_argument("--parameter", default="triangle")
    p.add_argument("--welch", action="store_true")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("report", help="run the full pipeline")
    p.add_argument("--input", default=None, help="claims CSV path")
    p.add_argument("--config", default=None, help="pipeline config JSON")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--readmission-window", type=int, default=None)
    p.add_argument("--group-size", type=int, default=None)
    p.add_argument("--ergm-terms", default=None)
    p.add_argument("--burn-in", type=int, default=None)
    p.add_argument("--thin", type=int, default=None)
    p.add_argument("--samples", type=int, default=None)
    p.add_argument("--welch", action="store_true")
    p.add_argument("--full-moderation", action="store_true")
    p.set_defaults(func=cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(
        level=logging.INFO, format="%(levelname)s %(name)s: %(message)s"
    )
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except PipelineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
