"""Markov random-graph (low-order ERG) modelling of collaboration networks.

The model family puts probability proportional to
``exp(theta_edge * L + theta_2star * S2 + theta_3star * S3 + theta_tri * T)``
on simple undirected graphs, where L counts edges, S2 and S3 count 2-stars
and 3-stars (S_k = sum_i C(deg_i, k)) and T counts triangles. The
normalizing constant is intractable, so everything runs through a Metropolis
single-edge-toggle chain driven by exact change statistics.

Parameter estimation is method-of-moments via Robbins-Monro stochastic
approximation: a scaling phase estimates the statistic covariance, iterative
phases step the parameters against simulated-minus-observed statistics with
a shrinking gain, and a long final simulation yields standard errors (inverse
statistic covariance) and per-parameter convergence ratios
(mean simulated minus observed, over the simulated standard deviation).
A fit counts as converged when every |ratio| < 0.10; parameters count as
significant when |estimate / standard error| >= 2.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass
from typing import IO, Sequence

import numpy as np

from .network import PCN

TERMS = ("edge", "two_star", "three_star", "triangle")

_TERM_ALIASES = {
    "edge": "edge",
    "edges": "edge",
    "density": "edge",
    "two_star": "two_star",
    "2star": "two_star",
    "2-star": "two_star",
    "three_star": "three_star",
    "3star": "three_star",
    "3-star": "three_star",
    "triangle": "triangle",
    "triangles": "triangle",
}

CONVERGENCE_THRESHOLD = 0.10
SIGNIFICANCE_THRESHOLD = 2.0
FIT_SCHEMA_VERSION = 1

# Stochastic-approximation knobs: per-iteration gain, trust region, scaling
# regularization (near-singular statistic covariance otherwise lets the
# estimate drift along a direction the statistics barely feel).
_GAIN = 0.7
_MAX_STEP = 0.5
_PARAM_BOUND = 20.0
_RIDGE = 1e-9
_SCALING_SHRINK = 0.05
_EARLY_STOP_RATIO = 0.05
# Density drift beyond these gaps marks a chain that left the data's phase:
# a loose bound while searching, a tight one for the diagnostic run (within-
# phase density fluctuation is a few percent, nucleation drifts are > 0.2).
_SEARCH_DENSITY_GAP = 0.25
_DIAGNOSTIC_DENSITY_GAP = 0.15


class BoundaryStatisticError(ValueError):
    """Observed statistics sit on the boundary; the MLE does not exist."""


def normalize_terms(terms: Sequence[str]) -> tuple[str, ...]:
    """Canonicalize term names (accepting 2star/3star style aliases)."""
    seen: list[str] = []
    for term in terms:
        key = term.strip().lower()
        if key not in _TERM_ALIASES:
            raise ValueError(f"unknown model term {term!r}; choose from {TERMS}")
        canonical = _TERM_ALIASES[key]
        if canonical not in seen:
            seen.append(canonical)
    if not seen:
        raise ValueError("model needs at least one term")
    return tuple(t for t in TERMS if t in seen)


@dataclass(frozen=True)
class ErgStatistics:
    """Counts of the four low-order configurations in one graph."""

    edges: int
    two_stars: int
    three_stars: int
    triangles: int

    def as_vector(self, terms: Sequence[str] = TERMS) -> tuple[int, ...]:
        lookup = {
            "edge": self.edges,
            "two_star": self.two_stars,
            "three_star": self.three_stars,
            "triangle": self.triangles,
        }
        return tuple(lookup[t] for t in terms)


@dataclass(frozen=True)
class StatisticDeltas:
    """Signed statistic changes caused by toggling one dyad."""

    edges: int
    two_stars: int
    three_stars: int
    triangles: int

    def as_vector(self, terms: Sequence[str] = TERMS) -> tuple[int, ...]:
        lookup = {
            "edge": self.edges,
            "two_star": self.two_stars,
            "three_star": self.three_stars,
            "triangle": self.triangles,
        }
        return tuple(lookup[t] for t in terms)


@dataclass(frozen=True)
class ErgParams:
    """Natural parameters for the four configuration counts."""

    edge: float = 0.0
    two_star: float = 0.0
    three_star: float = 0.0
    triangle: float = 0.0

    def as_vector(self) -> tuple[float, float, float, float]:
        return (self.edge, self.two_star, self.three_star, self.triangle)

    @staticmethod
    def from_mapping(values: dict[str, float]) -> "ErgParams":
        unknown = set(values) - set(TERMS)
        if unknown:
            raise ValueError(f"unknown parameter names: {sorted(unknown)}")
        return ErgParams(**values)


@dataclass(frozen=True)
class McmcConfig:
    """Chain settings: all counts strictly positive; seed drives everything."""

    burn_in: int = 3000
    thinning: int = 100
    n_samples: int = 1500
    seed: int = 0
    max_phase_iterations: int = 60

    def __post_init__(self) -> None:
        for name in ("burn_in", "thinning", "n_samples", "max_phase_iterations"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.seed < 0:
            raise ValueError("seed must be unsigned")


def resolve_mcmc_config(
    n_nodes: int,
    burn_in: int | None = None,
    thinning: int | None = None,
    n_samples: int | None = None,
    seed: int = 0,
    max_phase_iterations: int | None = None,
) -> McmcConfig:
    """Fill unspecified chain settings with size-aware defaults.

    Thinning defaults to about one dyad sweep and burn-in to twenty sweeps,
    so mixing scales with the number of dyads.
    """
    n_dyads = max(1, n_nodes * (n_nodes - 1) // 2)
    return McmcConfig(
        burn_in=burn_in if burn_in is not None else max(3000, 20 * n_dyads),
        thinning=thinning if thinning is not None else max(100, n_dyads),
        n_samples=n_samples if n_samples is not None else 1500,
        seed=seed,
        max_phase_iterations=(
            max_phase_iterations if max_phase_iterations is not None else 60
        ),
    )


@dataclass(frozen=True)
class ErgFit:
    """Estimation result with inference and convergence diagnostics."""

    terms: tuple[str, ...]
    estimates: ErgParams
    standard_errors: dict[str, float]
    convergence_ratios: dict[str, float]
    t_statistics: dict[str, float]
    degenerate: bool
    observed: ErgStatistics
    n_nodes: int
    seed: int
    iterations_used: int
    mean_sampled_density: float
    hospital_id: str | None = None

    @property
    def converged(self) -> bool:
        return all(
            abs(r) < CONVERGENCE_THRESHOLD for r in self.convergence_ratios.values()
        )


# --- Exact configuration counting ---------------------------------------------


def count_statistics(pcn: PCN) -> ErgStatistics:
    """Exact (edges, 2-stars, 3-stars, triangles) for a simple graph."""
    degrees = [pcn.degree(node) for node in pcn.nodes]
    two_stars = sum(d * (d - 1) // 2 for d in degrees)
    three_stars = sum(d * (d - 1) * (d - 2) // 6 for d in degrees)
    triangle_incidences = sum(
        len(pcn.neighbors(a) & pcn.neighbors(b)) for a, b in pcn.edges
    )
    return ErgStatistics(
        edges=pcn.edge_count,
        two_stars=two_stars,
        three_stars=three_stars,
        triangles=triangle_incidences // 3,
    )


def change_statistics(pcn: PCN, i: str, j: str) -> StatisticDeltas:
    """Statistic deltas for toggling dyad (i, j) on this graph.

    Positive deltas when the edge is absent (toggle adds it); all signs flip
    when it is present (toggle removes it).
    """
    if i == j:
        raise ValueError(f"cannot toggle a self-loop on {i!r}")
    for node in (i, j):
        if node not in pcn._adjacency:
            raise ValueError(f"node {node!r} not in network")
    present = pcn.has_edge(i, j)
    di = pcn.degree(i) - (1 if present else 0)
    dj = pcn.degree(j) - (1 if present else 0)
    common = len(pcn.neighbors(i) & pcn.neighbors(j))
    sign = -1 if present else 1
    return StatisticDeltas(
        edges=sign,
        two_stars=sign * (di + dj),
        three_stars=sign * (di * (di - 1) // 2 + dj * (dj - 1) // 2),
        triangles=sign * common,
    )


# --- Metropolis single-toggle chain --------------------------------------------


class _Chain:
    """Mutable chain state with incrementally maintained statistics."""

    __slots__ = ("n", "n_dyads", "dyads", "adj", "deg", "params", "rng", "stats")

    def __init__(
        self,
        n: int,
        edges: Sequence[tuple[int, int]],
        params: tuple[float, float, float, float],
        rng: random.Random,
    ):
        if n < 2:
            raise ValueError("chain needs at least 2 nodes")
        self.n = n
        self.dyads = [(i, j) for i in range(n) for j in range(i + 1, n)]
        self.n_dyads = len(self.dyads)
        self.adj: list[set[int]] = [set() for _ in range(n)]
        for i, j in edges:
            self.adj[i].add(j)
            self.adj[j].add(i)
        self.deg = [len(a) for a in self.adj]
        self.params = params
        self.rng = rng
        self.stats = self._count()

    def _count(self) -> tuple[int, int, int, int]:
        edges = sum(self.deg) // 2
        two_stars = sum(d * (d - 1) // 2 for d in self.deg)
        three_stars = sum(d * (d - 1) * (d - 2) // 6 for d in self.deg)
        incidences = 0
        for i in range(self.n):
            for j in self.adj[i]:
                if j > i:
                    incidences += len(self.adj[i] & self.adj[j])
        return (edges, two_stars, three_stars, incidences // 3)

    def set_params(self, params: tuple[float, float, float, float]) -> None:
        self.params = params

    def run(self, steps: int) -> None:
        adj = self.adj
        deg = self.deg
        dyads = self.dyads
        n_dyads = self.n_dyads
        p0, p1, p2, p3 = self.params
        rand = self.rng.random
        randrange = self.rng.randrange
        exp = math.exp
        l, s2, s3, t = self.stats
        for _ in range(steps):
            i, j = dyads[randrange(n_dyads)]
            ai = adj[i]
            aj = adj[j]
            if j in ai:
                di = deg[i] - 1
                dj = deg[j] - 1
                dl = -1
                ds2 = -(di + dj)
                ds3 = -((di * (di - 1) + dj * (dj - 1)) >> 1)
                dt = -len(ai & aj)
            else:
                di = deg[i]
                dj = deg[j]
                dl = 1
                ds2 = di + dj
                ds3 = (di * (di - 1) + dj * (dj - 1)) >> 1
                dt = len(ai & aj)
            logr = p0 * dl + p1 * ds2 + p2 * ds3 + p3 * dt
            if logr >= 0.0 or rand() < exp(logr):
                if dl == 1:
                    ai.add(j)
                    aj.add(i)
                    deg[i] += 1
                    deg[j] += 1
                else:
                    ai.remove(j)
                    aj.remove(i)
                    deg[i] -= 1
                    deg[j] -= 1
                l += dl
                s2 += ds2
                s3 += ds3
                t += dt
        self.stats = (l, s2, s3, t)

    def statistics(self) -> ErgStatistics:
        return ErgStatistics(*self.stats)

    def edge_snapshot(self) -> frozenset[tuple[int, int]]:
        return frozenset(
            (i, j) for i in range(self.n) for j in self.adj[i] if j > i
        )

    def density(self) -> float:
        return self.stats[0] / self.n_dyads


def sample_statistics(
    params: ErgParams,
    n_nodes: int,
    cfg: McmcConfig,
    initial_edges: Sequence[tuple[int, int]] = (),
) -> list[ErgStatistics]:
    """Draw thinned configuration counts from the model's Metropolis chain."""
    chain = _Chain(n_nodes, initial_edges, params.as_vector(), random.Random(cfg.seed))
    chain.run(cfg.burn_in)
    samples = []
    for _ in range(cfg.n_samples):
        chain.run(cfg.thinning)
        samples.append(chain.statistics())
    return samples


def sample_graphs(
    params: ErgParams,
    n_nodes: int,
    cfg: McmcConfig,
    initial_edges: Sequence[tuple[int, int]] = (),
) -> list[frozenset[tuple[int, int]]]:
    """Draw thinned graph states (edge sets over 0..n-1) from the chain."""
    chain = _Chain(n_nodes, initial_edges, params.as_vector(), random.Random(cfg.seed))
    chain.run(cfg.burn_in)
    samples = []
    for _ in range(cfg.n_samples):
        chain.run(cfg.thinning)
        samples.append(chain.edge_snapshot())
    return samples


# --- Estimation ----------------------------------------------------------------


def _indexed_edges(pcn: PCN) -> list[tuple[int, int]]:
    index = {node: k for k, node in enumerate(pcn.nodes)}
    return [(index[a], index[b]) for a, b in pcn.edges]


def _check_boundaries(obs: ErgStatistics, n: int, terms: Sequence[str]) -> None:
    n_dyads = n * (n - 1) // 2
    if obs.edges == 0:
        raise BoundaryStatisticError("observed graph is empty; no model is estimable")
    if obs.edges == n_dyads:
        raise BoundaryStatisticError("observed graph is complete; no model is estimable")
    zero_terms = [t for t, v in zip(terms, obs.as_vector(terms)) if v == 0]
    if zero_terms:
        raise BoundaryStatisticError(
            f"observed statistic is zero for {zero_terms}; drop those terms "
            "from the model"
        )


def estimate_parameters(
    pcn: PCN,
    terms: Sequence[str] = TERMS,
    cfg: McmcConfig | None = None,
) -> ErgFit:
    """Method-of-moments fit of the chosen terms via stochastic approximation.

    Raises BoundaryStatisticError when the observed statistics cannot be
    matched by any finite parameter (empty/complete graph or a zero count for
    a modelled term). A fit that fails to bring every convergence ratio under
    0.10 within the iteration budget is returned with ``converged`` False
    (and ``degenerate`` True when the sampled graphs collapsed to near-empty
    or near-complete states).
    """
    terms = normalize_terms(terms)
    cfg = cfg if cfg is not None else resolve_mcmc_config(pcn.node_count)
    n = pcn.node_count
    if n < 3:
        raise ValueError("estimation needs at least 3 nodes")
    obs = count_statistics(pcn)
    _check_boundaries(obs, n, terms)

    n_dyads = n * (n - 1) // 2
    active = [TERMS.index(t) for t in terms]
    k = len(active)
    z_obs = np.array(obs.as_vector(terms), dtype=float)
    obs_density = obs.edges / n_dyads

    theta = np.zeros(4)
    if "edge" in terms:
        clamped = min(max(obs_density, 0.5 / n_dyads), 1.0 - 0.5 / n_dyads)
        theta[0] = math.log(clamped / (1.0 - clamped))

    rng = random.Random(cfg.seed)
    start_edges = _indexed_edges(pcn)
    eye = np.eye(k)
    iter_thin = max(10, n_dyads // 2)
    iter_burn = 2 * n_dyads

    chain = _Chain(n, start_edges, tuple(theta), rng)

    def collect(active_chain: _Chain, thin: int, count: int) -> tuple[np.ndarray, float]:
        rows = np.empty((count, k))
        density_total = 0.0
        for s in range(count):
            active_chain.run(thin)
            vec = active_chain.stats
            for c, idx in enumerate(active):
                rows[s, c] = vec[idx]
            density_total += active_chain.density()
        return rows, density_total / count

    def batch_size(iteration: int) -> int:
        return min(800, 100 + 60 * iteration)

    # Iterate theta <- theta - gain * scaling^-1 * (mean simulated - observed),
    # with the scaling matrix re-estimated from each batch's covariance.
    iterations_used = 0
    gain = _GAIN
    best_theta = theta.copy()
    best_score = math.inf
    phase3_rows: np.ndarray | None = None
    mean_density = obs_density
    ratios = np.full(k, math.inf)

    while True:
        while iterations_used < cfg.max_phase_iterations:
            iterations_used += 1
            chain.set_params(tuple(theta))
            chain.run(iter_burn)
            rows, batch_density = collect(chain, iter_thin, batch_size(iterations_used))

            # Markov models have a near-empty/near-complete phase the chain
            # can fall into and, by hysteresis, not come back from. A batch
            # whose density is far from the data's signals that collapse:
            # restart from the observed graph at the best point seen so far.
            if abs(batch_density - obs_density) > _SEARCH_DENSITY_GAP:
                theta = best_theta.copy()
                gain *= 0.5
                chain = _Chain(n, start_edges, tuple(theta), rng)
                continue

            resid = rows.mean(axis=0) - z_obs
            sd = rows.std(axis=0, ddof=1)
            score = float(np.max(np.abs(np.where(sd > 0, resid / sd, np.inf))))
            if score < best_score:
                best_score = score
                best_theta = theta.copy()
            if score < _EARLY_STOP_RATIO:
                break

            covariance = np.cov(rows.T).reshape(k, k)
            scaling = (
                covariance
                + _SCALING_SHRINK * np.diag(np.diag(covariance))
                + _RIDGE * eye
            )
            step = gain * np.linalg.solve(scaling, resid)
            np.clip(step, -_MAX_STEP, _MAX_STEP, out=step)
            for c, idx in enumerate(active):
                theta[idx] = min(
                    _PARAM_BOUND, max(-_PARAM_BOUND, theta[idx] - step[c])
                )

        theta = best_theta.copy()

        # Final phase: one long simulation at the candidate estimate, checked
        # in segments. A segment whose density collapses away from the data
        # (the degeneracy failure mode) is discarded and the chain restarts
        # from the observed graph, so one nucleation event cannot poison the
        # whole diagnostic run.
        segments = 10
        per_segment = max(10, cfg.n_samples // segments)
        kept: list[np.ndarray] = []
        collapsed = 0
        density_kept = 0.0
        seg_chain: _Chain | None = None
        for _ in range(segments):
            if seg_chain is None:
                seg_chain = _Chain(n, start_edges, tuple(theta), rng)
                seg_chain.run(cfg.burn_in)
            rows, seg_density = collect(seg_chain, cfg.thinning, per_segment)
            if abs(seg_density - obs_density) > _DIAGNOSTIC_DENSITY_GAP:
                collapsed += 1
                seg_chain = None
                continue
            kept.append(rows)
            density_kept += seg_density
        if kept:
            phase3_rows = np.concatenate(kept, axis=0)
            mean_density = density_kept / len(kept)
        else:
            phase3_rows = np.full((2, k), np.nan)
            mean_density = 1.0 if obs_density < 0.5 else 0.0
        collapse_prone = collapsed > segments // 2 or not kept

        sim_mean = phase3_rows.mean(axis=0)
        sim_sd = phase3_rows.std(axis=0, ddof=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratios = np.where(
                sim_sd > 0.0,
                (sim_mean - z_obs) / sim_sd,
                np.where(sim_mean == z_obs, 0.0, np.inf),
            )
        ratios = np.where(np.isnan(ratios), np.inf, ratios)
        if not collapse_prone and np.all(np.abs(ratios) < CONVERGENCE_THRESHOLD):
            break
        if iterations_used >= cfg.max_phase_iterations:
            break
        # Not yet inside the band: resume iterating from the current point,
        # letting the next pass pick its own best iterate.
        best_score = math.inf
        chain = _Chain(n, start_edges, tuple(theta), rng)
        gain = max(0.1, gain * 0.7)

    if np.all(np.isfinite(phase3_rows)):
        covariance = np.cov(phase3_rows.T).reshape(k, k)
        try:
            information_inv = np.linalg.inv(covariance + _RIDGE * eye)
            ses = np.sqrt(np.maximum(np.diag(information_inv), 0.0))
        except np.linalg.LinAlgError:
            ses = np.full(k, math.inf)
    else:
        ses = np.full(k, math.inf)

    degenerate = (
        collapse_prone
        or (mean_density < 0.01 and obs_density >= 0.01)
        or (mean_density > 0.99 and obs_density <= 0.99)
    )

    estimates = {t: float(theta[TERMS.index(t)]) for t in terms}
    standard_errors = {t: float(ses[c]) for c, t in enumerate(terms)}
    t_statistics = {
        t: (estimates[t] / standard_errors[t] if standard_errors[t] > 0 else math.inf)
        for t in terms
    }
    convergence_ratios = {t: float(ratios[c]) for c, t in enumerate(terms)}

    return ErgFit(
        terms=terms,
        estimates=ErgParams(**estimates),
        standard_errors=standard_errors,
        convergence_ratios=convergence_ratios,
        t_statistics=t_statistics,
        degenerate=degenerate,
        observed=obs,
        n_nodes=n,
        seed=cfg.seed,
        iterations_used=iterations_used,
        mean_sampled_density=float(mean_density),
        hospital_id=pcn.hospital_id or None,
    )


def parameter_significance(
    fit: ErgFit, threshold: float = SIGNIFICANCE_THRESHOLD
) -> dict[str, bool]:
    """Per-parameter significance: |estimate / SE| at or above the threshold."""
    if not fit.converged:
        raise ValueError("significance is only meaningful for a converged fit")
    return {t: abs(fit.t_statistics[t]) >= threshold for t in fit.terms}


def compare_parameter_groups(
    group_a: Sequence[ErgFit],
    group_b: Sequence[ErgFit],
    parameter: str,
    welch: bool = False,
):
    """Two-sample t-test on one parameter's estimates across two fit groups."""
    from .stats import two_sample_ttest

    parameter = normalize_terms([parameter])[0]
    if len(group_a) < 2 or len(group_b) < 2:
        raise ValueError("each group needs at least 2 fits")
    values_a = []
    values_b = []
    for group, values in ((group_a, values_a), (group_b, values_b)):
        for fit in group:
            if parameter not in fit.terms:
                raise ValueError(
                    f"parameter {parameter!r} not fitted for {fit.hospital_id or 'a network'}"
                )
            values.append(getattr(fit.estimates, parameter))
    return two_sample_ttest(values_a, values_b, welch=welch)


# --- Fit report serialization ----------------------------------------------------


def fit_to_dict(fit: ErgFit, cfg: McmcConfig | None = None) -> dict:
    payload = {
        "schema_version": FIT_SCHEMA_VERSION,
        "hospital_id": fit.hospital_id,
        "n_nodes": fit.n_nodes,
        "terms": list(fit.terms),
        "observed_statistics": {
            "edges": fit.observed.edges,
            "two_stars": fit.observed.two_stars,
            "three_stars": fit.observed.three_stars,
            "triangles": fit.observed.triangles,
        },
        "estimates": {t: getattr(fit.estimates, t) for t in fit.terms},
        "standard_errors": dict(fit.standard_errors),
        "convergence_ratios": dict(fit.convergence_ratios),
        "t_statistics": dict(fit.t_statistics),
        "significant": (
            {t: abs(fit.t_statistics[t]) >= SIGNIFICANCE_THRESHOLD for t in fit.terms}
        ),
        "converged": fit.converged,
        "degenerate": fit.degenerate,
        "seed": fit.seed,
        "iterations_used": fit.iterations_used,
        "mean_sampled_density": fit.mean_sampled_density,
    }
    if cfg is not None:
        payload["chain"] = {
            "burn_in": cfg.burn_in,
            "thinning": cfg.thinning,
            "n_samples": cfg.n_samples,
            "max_phase_iterations": cfg.max_phase_iterations,
        }
    return payload


def fit_from_dict(data: dict) -> ErgFit:
    if data.get("schema_version") != FIT_SCHEMA_VERSION:
        raise ValueError(
            f"unsupported fit schema version {data.get('schema_version')!r}"
        )
    terms = tuple(data["terms"])
    observed = ErgStatistics(**data["observed_statistics"])
    return ErgFit(
        terms=terms,
        estimates=ErgParams(**{t: data["estimates"][t] for t in terms}),
        standard_errors=dict(data["standard_errors"]),
        convergence_ratios=dict(data["convergence_ratios"]),
        t_statistics=dict(data["t_statistics"]),
        degenerate=data["degenerate"],
        observed=observed,
        n_nodes=data["n_nodes"],
        seed=data["seed"],
        iterations_used=data["iterations_used"],
        mean_sampled_density=data["mean_sampled_density"],
        hospital_id=data.get("hospital_id"),
    )


def write_fit_report(
    fits: Sequence[ErgFit], target: IO[str] | str, cfg: McmcConfig | None = None
) -> None:
    """Write fits as a versioned JSON report (a list of per-network fits)."""
    payload = {
        "schema_version": FIT_SCHEMA_VERSION,
        "fits": [fit_to_dict(f, cfg) for f in fits],
    }
    if isinstance(target, str):
        with open(target, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
    else:
        json.dump(payload, target, indent=2, sort_keys=True)
        target.write("\n")


def read_fit_report(source: IO[str] | str) -> list[ErgFit]:
    if isinstance(source, str):
        with open(source, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    else:
        data = json.load(source)
    if isinstance(data, dict) and "fits" in data:
        return [fit_from_dict(d) for d in data["fits"]]
    if isinstance(data, dict):
        return [fit_from_dict(data)]
    raise ValueError("unrecognized fit report payload")
