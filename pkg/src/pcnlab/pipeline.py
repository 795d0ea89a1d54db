"""End-to-end analysis pipeline: claims in, framework report out.

Stage order: ingest (or generate) claims -> admissions -> per-hospital
outcomes -> collaboration networks -> centrality/centralization metrics ->
outcome regressions (simple and age-moderated) -> readmission-ranked group
ERG fits -> triangle-parameter group comparison -> report assembly.

Every stage writes its artifact as plain CSV/JSON in the output directory, so
each CLI subcommand run over the intermediate files reproduces the report's
byte content exactly. Reports carry no timestamps; identical input bytes,
config and seed give identical output bytes.
"""

from __future__ import annotations

import json
import logging
import os
import zlib
from dataclasses import dataclass, field

from . import centrality as centrality_mod
from . import ergm as ergm_mod
from . import network as network_mod
from .claims import (
    AdmissionRecord,
    HospitalOutcomes,
    build_admissions,
    hospital_outcomes,
    parse_claims,
    write_claims_csv,
)
from .generator import GeneratorConfig, generate_synthetic_claims
from .stats import (
    CollinearityError,
    ols_moderation,
    ols_simple,
    regression_report_rows,
    two_sample_ttest,
    write_regression_report,
)

logger = logging.getLogger(__name__)

REPORT_SCHEMA_VERSION = 1
SIGNIFICANCE_LEVEL = 0.05

NETWORK_MEASURES = ("degree_centralization", "betweenness_centralization")


class PipelineError(RuntimeError):
    """A pipeline stage failed; the manifest records which one."""

    def __init__(self, stage: str, cause: Exception):
        self.stage = stage
        self.cause = cause
        super().__init__(f"stage '{stage}' failed: {cause}")


@dataclass
class PipelineConfig:
    """Everything a full pipeline run depends on."""

    out_dir: str
    input_claims: str | None = None
    generator: GeneratorConfig | None = None
    readmission_window: int = 28
    ergm_terms: tuple[str, ...] = ergm_mod.TERMS
    burn_in: int | None = None
    thinning: int | None = None
    n_samples: int | None = None
    max_phase_iterations: int | None = None
    group_size: int = 5
    seed: int = 0
    compare_parameter: str = "triangle"
    welch: bool = False
    full_moderation: bool = False

    def validate(self) -> None:
        if (self.input_claims is None) == (self.generator is None):
            raise ValueError("provide exactly one of input_claims or generator config")
        if self.group_size < 2:
            raise ValueError("group_size must be >= 2")
        self.ergm_terms = ergm_mod.normalize_terms(self.ergm_terms)
        self.compare_parameter = ergm_mod.normalize_terms([self.compare_parameter])[0]
        if self.compare_parameter not in self.ergm_terms:
            raise ValueError(
                f"compare parameter {self.compare_parameter!r} is not among the "
                f"model terms {self.ergm_terms}"
            )
        if self.readmission_window < 0:
            raise ValueError("readmission_window must be >= 0")


@dataclass
class FrameworkReport:
    """In-memory pipeline result plus where its artifacts were written."""

    report: dict
    artifacts: dict[str, str]
    stages: list[dict] = field(default_factory=list)


def derive_fit_seed(base_seed: int, hospital_id: str) -> int:
    """Stable per-hospital chain seed (same rule the CLI documents)."""
    return (base_seed * 1000003 + zlib.crc32(hospital_id.encode("utf-8"))) % 2**32


def _write_json(payload: dict, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def feature_label(beta: float, p_value: float) -> str:
    """Classify a measure's association with a cost-style outcome.

    Lower outcome is better, so a significantly negative coefficient marks a
    performance-positive network feature.
    """
    if p_value >= SIGNIFICANCE_LEVEL:
        return "inconclusive"
    return "positive" if beta < 0 else "negative"


def fit_network_group(
    pcns: dict[str, network_mod.PCN],
    hospital_ids: list[str],
    config: PipelineConfig,
    notices: list[str],
) -> tuple[list[ergm_mod.ErgFit], list[ergm_mod.McmcConfig]]:
    """Fit the configured ERG model per hospital, reducing boundary terms.

    Terms whose observed count is zero cannot be estimated; they are dropped
    with a notice. Empty or complete networks are skipped entirely.
    """
    fits: list[ergm_mod.ErgFit] = []
    cfgs: list[ergm_mod.McmcConfig] = []
    for hospital_id in hospital_ids:
        pcn = pcns[hospital_id]
        cfg = ergm_mod.resolve_mcmc_config(
            pcn.node_count,
            burn_in=config.burn_in,
            thinning=config.thinning,
            n_samples=config.n_samples,
            seed=derive_fit_seed(config.seed, hospital_id),
            max_phase_iterations=config.max_phase_iterations,
        )
        terms = list(config.ergm_terms)
        while True:
            try:
                fit = ergm_mod.estimate_parameters(pcn, terms, cfg)
            except ergm_mod.BoundaryStatisticError:
                observed = ergm_mod.count_statistics(pcn)
                n_dyads = pcn.node_count * (pcn.node_count - 1) // 2
                if observed.edges == 0 or observed.edges == n_dyads:
                    notices.append(
                        f"ergm: skipped {hospital_id} (empty or complete network)"
                    )
                    fit = None
                    break
                kept = [
                    t
                    for t, v in zip(terms, observed.as_vector(terms))
                    if v > 0
                ]
                if not kept or kept == terms:
                    notices.append(
                        f"ergm: skipped {hospital_id} (no estimable terms)"
                    )
                    fit = None
                    break
                dropped = sorted(set(terms) - set(kept))
                notices.append(
                    f"ergm: {hospital_id} dropped boundary terms {dropped}"
                )
                terms = kept
                continue
            except ValueError as exc:
                notices.append(f"ergm: skipped {hospital_id} ({exc})")
                fit = None
                break
            break
        if fit is not None:
            if not fit.converged:
                notices.append(
                    f"ergm: fit for {hospital_id} did not converge "
                    f"(max |ratio| = {max(abs(r) for r in fit.convergence_ratios.values()):.3f})"
                )
            fits.append(fit)
            cfgs.append(cfg)
    return fits, cfgs


def run_pipeline(config: PipelineConfig) -> FrameworkReport:
    """Execute every stage and write all artifacts under config.out_dir.

    Raises PipelineError on a stage failure after persisting a manifest that
    names the failed stage; artifacts written before the failure are kept.
    """
    config.validate()
    os.makedirs(config.out_dir, exist_ok=True)
    artifacts: dict[str, str] = {}
    stages: list[dict] = []
    notices: list[str] = []

    def path(name: str) -> str:
        return os.path.join(config.out_dir, name)

    def finish_manifest(ok: bool) -> None:
        _write_json(
            {"schema_version": REPORT_SCHEMA_VERSION, "ok": ok, "stages": stages},
            path("manifest.json"),
        )

    current_stage = "ingest"
    try:
        # Stage: ingest or generate claims.
        if config.generator is not None:
            claims_path = path("claims.csv")
            write_claims_csv(generate_synthetic_claims(config.generator), claims_path)
            artifacts["claims"] = claims_path
        else:
            claims_path = config.input_claims
            artifacts["claims"] = claims_path
        claims = parse_claims(claims_path)
        stages.append({"name": "ingest", "status": "ok", "detail": f"{len(claims)} claims"})

        current_stage = "admissions"
        admissions = build_admissions(claims, config.readmission_window)
        stages.append(
            {"name": "admissions", "status": "ok", "detail": f"{len(admissions)} admissions"}
        )

        current_stage = "outcomes"
        outcomes = hospital_outcomes(admissions)
        stages.append(
            {"name": "outcomes", "status": "ok", "detail": f"{len(outcomes)} hospitals"}
        )

        current_stage = "networks"
        pcns = network_mod.partition_pcns(claims)
        edges_path = path("pcn_edges.csv")
        network_mod.write_edge_lists(pcns, edges_path)
        artifacts["pcn_edges"] = edges_path
        dot_dir = path("dot")
        os.makedirs(dot_dir, exist_ok=True)
        for hospital_id in sorted(pcns):
            dot_path = os.path.join(dot_dir, f"{hospital_id}.dot")
            with open(dot_path, "w", encoding="utf-8") as fh:
                fh.write(network_mod.to_dot(pcns[hospital_id]))
        artifacts["dot_dir"] = dot_dir
        stages.append({"name": "networks", "status": "ok", "detail": f"{len(pcns)} PCNs"})

        current_stage = "metrics"
        reports = {h: centrality_mod.centralization_report(p) for h, p in pcns.items()}
        metrics_path = path("metrics.csv")
        centrality_mod.write_metrics_csv(reports, outcomes, metrics_path)
        artifacts["metrics"] = metrics_path
        stages.append({"name": "metrics", "status": "ok", "detail": f"{len(reports)} rows"})

        current_stage = "regression"
        regression_rows, regression_payload = _regression_stage(
            reports, outcomes, config, notices
        )
        regression_path = path("regression.csv")
        write_regression_report(regression_rows, regression_path)
        artifacts["regression"] = regression_path
        stages.append(
            {
                "name": "regression",
                "status": "ok" if regression_rows else "skipped",
                "detail": f"{len(regression_rows)} rows",
            }
        )

        current_stage = "ergm"
        ergm_payload, group_fits = _ergm_stage(pcns, outcomes, config, notices, path, artifacts)
        stages.append(
            {
                "name": "ergm",
                "status": "ok" if group_fits else "skipped",
                "detail": f"{sum(len(g) for g in group_fits.values())} fits"
                if group_fits
                else "insufficient PCNs for group comparison",
            }
        )

        current_stage = "report"
        network_rows = _network_rows(reports, outcomes, pcns)
        report = {
            "schema_version": REPORT_SCHEMA_VERSION,
            "seed": config.seed,
            "readmission_window": config.readmission_window,
            "group_size": config.group_size,
            "n_hospitals": len(pcns),
            "networks": network_rows,
            "regressions": regression_payload,
            "feature_summary": _feature_summary(regression_payload),
            "ergm": ergm_payload,
            "notices": notices,
        }
        report_path = path("report.json")
        _write_json(report, report_path)
        artifacts["report"] = report_path
        stages.append({"name": "report", "status": "ok", "detail": report_path})
        finish_manifest(ok=True)
    except Exception as exc:
        stages.append({"name": current_stage, "status": "failed", "detail": str(exc)})
        finish_manifest(ok=False)
        raise PipelineError(current_stage, exc) from exc

    return FrameworkReport(report=report, artifacts=artifacts, stages=stages)


def _network_rows(
    reports: dict[str, centrality_mod.CentralizationReport],
    outcomes: dict[str, HospitalOutcomes],
    pcns: dict[str, network_mod.PCN],
) -> list[dict]:
    rows = []
    for hospital_id in sorted(reports):
        rep = reports[hospital_id]
        outcome = outcomes.get(hospital_id)
        row = {
            "hospital_id": hospital_id,
            "N": rep.node_count,
            "density": rep.density,
            "degree_centralization": rep.degree_centralization,
            "betweenness_centralization": rep.betweenness_centralization,
        }
        if outcome is not None:
            row.update(
                {
                    "n_admissions": outcome.n_admissions,
                    "mean_cost": outcome.mean_cost,
                    "mean_los": outcome.mean_los,
                    "readmission_rate": outcome.readmission_rate,
                    "mean_patient_age": outcome.mean_patient_age,
                }
            )
        rows.append(row)
    return rows


def _regression_stage(
    reports: dict[str, centrality_mod.CentralizationReport],
    outcomes: dict[str, HospitalOutcomes],
    config: PipelineConfig,
    notices: list[str],
) -> tuple[list[dict], dict]:
    hospitals = sorted(h for h in reports if h in outcomes)
    cost = [outcomes[h].mean_cost for h in hospitals]
    age = [outcomes[h].mean_patient_age for h in hospitals]
    measures = {
        "degree_centralization": [reports[h].degree_centralization for h in hospitals],
        "betweenness_centralization": [
            reports[h].betweenness_centralization for h in hospitals
        ],
    }

    rows: list[dict] = []
    payload: dict = {"simple": [], "moderation": []}
    for model_number, (name, values) in enumerate(measures.items(), start=1):
        if len(hospitals) >= 3:
            try:
                fit = ols_simple(cost, values)
            except CollinearityError:
                notices.append(f"regression: {name} is constant; simple model skipped")
            else:
                rows.extend(
                    regression_report_rows(model_number, "mean_cost", {"x": name}, fit)
                )
                payload["simple"].append(
                    {
                        "model": model_number,
                        "dependent": "mean_cost",
                        "measure": name,
                        "r_squared": fit.r_squared,
                        "beta": fit.coefficients["x"],
                        "constant": fit.coefficients["intercept"],
                        "p_value": fit.p_values["x"],
                        "n": fit.n_observations,
                    }
                )
        else:
            notices.append("regression: fewer than 3 PCNs; simple models skipped")
            break

    for model_number, (name, values) in enumerate(measures.items(), start=1):
        min_rows = 5 if config.full_moderation else 4
        if len(hospitals) < min_rows:
            notices.append("regression: too few PCNs; moderation models skipped")
            break
        try:
            fit = ols_moderation(
                cost, values, age, include_moderator_main_effect=config.full_moderation
            )
        except CollinearityError as exc:
            notices.append(f"regression: moderation for {name} skipped ({exc})")
            continue
        labels = {"x": name, "x_moderator": f"{name}*age"}
        if config.full_moderation:
            labels["moderator"] = "age"
        rows.extend(
            regression_report_rows(model_number, "mean_cost", labels, fit)
        )
        payload["moderation"].append(
            {
                "model": model_number,
                "dependent": "mean_cost",
                "measure": name,
                "r_squared": fit.r_squared,
                "constant": fit.coefficients["intercept"],
                "beta_measure": fit.coefficients["x"],
                "p_measure": fit.p_values["x"],
                "beta_interaction": fit.coefficients["x_moderator"],
                "p_interaction": fit.p_values["x_moderator"],
                "moderation_significant": fit.p_values["x_moderator"]
                < SIGNIFICANCE_LEVEL,
                "n": fit.n_observations,
            }
        )
    return rows, payload


def _feature_summary(regression_payload: dict) -> list[dict]:
    summary = []
    for entry in regression_payload["simple"]:
        summary.append(
            {
                "measure": entry["measure"],
                "outcome": entry["dependent"],
                "beta": entry["beta"],
                "p_value": entry["p_value"],
                "label": feature_label(entry["beta"], entry["p_value"]),
            }
        )
    return summary


def _ergm_stage(
    pcns: dict[str, network_mod.PCN],
    outcomes: dict[str, HospitalOutcomes],
    config: PipelineConfig,
    notices: list[str],
    path,
    artifacts: dict[str, str],
) -> tuple[dict, dict]:
    eligible = sorted(
        h for h in pcns if h in outcomes and outcomes[h].n_admissions > 0
    )
    k = config.group_size
    payload: dict = {
        "group_size": k,
        "parameter": config.compare_parameter,
        "high_readmission": None,
        "low_readmission": None,
        "comparison": None,
    }
    if len(eligible) < 2 * k:
        notices.append(
            f"ergm: group comparison skipped; need at least {2 * k} PCNs with "
            f"admissions, have {len(eligible)}"
        )
        return payload, {}

    ranked = sorted(eligible, key=lambda h: (outcomes[h].readmission_rate, h))
    low_ids = ranked[:k]
    high_ids = list(reversed(ranked[-k:]))

    groups: dict[str, list[ergm_mod.ErgFit]] = {}
    for label, ids in (("high_readmission", high_ids), ("low_readmission", low_ids)):
        fits, cfgs = fit_network_group(pcns, ids, config, notices)
        groups[label] = fits
        report_path = path(f"ergm_fits_{label.split('_')[0]}.json")
        with open(report_path, "w", encoding="utf-8") as fh:
            fh.write(_fits_report_text(fits, cfgs))
        artifacts[f"ergm_fits_{label}"] = report_path
        payload[label] = {
            "hospital_ids": ids,
            "readmission_rates": [outcomes[h].readmission_rate for h in ids],
            "fits": [ergm_mod.fit_to_dict(f, c) for f, c in zip(fits, cfgs)],
        }

    parameter = config.compare_parameter
    usable = {
        label: [f for f in fits if f.converged and parameter in f.terms]
        for label, fits in groups.items()
    }
    dropped = {
        label: len(groups[label]) - len(usable[label]) for label in groups
    }
    for label, n_dropped in dropped.items():
        if n_dropped:
            notices.append(
                f"ergm: {n_dropped} {label} fit(s) excluded from comparison "
                "(not converged or parameter not fitted)"
            )
    if min(len(v) for v in usable.values()) < 2:
        notices.append("ergm: comparison skipped; fewer than 2 usable fits per group")
        return payload, groups

    result = two_sample_ttest(
        [getattr(f.estimates, parameter) for f in usable["high_readmission"]],
        [getattr(f.estimates, parameter) for f in usable["low_readmission"]],
        welch=config.welch,
    )
    payload["comparison"] = {
        "parameter": parameter,
        "t_value": result.t_value,
        "degrees_of_freedom": result.degrees_of_freedom,
        "p_value": result.p_value,
        "group_means": {
            "high_readmission": result.group_means[0],
            "low_readmission": result.group_means[1],
        },
        "group_standard_errors": {
            "high_readmission": result.group_standard_errors[0],
            "low_readmission": result.group_standard_errors[1],
        },
        "n_fits": {
            "high_readmission": len(usable["high_readmission"]),
            "low_readmission": len(usable["low_readmission"]),
        },
        "significant": result.p_value < SIGNIFICANCE_LEVEL,
    }
    return payload, groups


def _fits_report_text(
    fits: list[ergm_mod.ErgFit], cfgs: list[ergm_mod.McmcConfig]
) -> str:
    payload = {
        "schema_version": ergm_mod.FIT_SCHEMA_VERSION,
        "fits": [ergm_mod.fit_to_dict(f, c) for f, c in zip(fits, cfgs)],
    }
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"
