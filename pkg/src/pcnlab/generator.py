"""Synthetic claims generator calibrated to a realistic THR-style cohort.

Produces a full claims table (hospital, medical and ancillary lines) for a
configurable number of hospitals and patients. Everything is driven by one
``random.Random(seed)`` stream, so a fixed config yields a byte-identical
claim sequence.

Each hospital gets a latent *cohesion* score in [0, 1]. High-cohesion
hospitals run their admissions through a few stable physician teams, so the
same cliques of colleagues keep sharing patients and the projected
collaboration network closes into triangles; low-cohesion hospitals assign
mostly ad-hoc physician pairs, which spreads edges without closing them.
Cohesion also raises the hospital's readmission probability (scaled by
``cohesion_readmission_coupling``), planting a positive correlation between
triangle structure and readmission rate that end-to-end pipeline tests can
detect; coupling = 0 switches the planted signal off while keeping the
structural variety.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import asdict, dataclass, field
from datetime import date, timedelta

from .claims import ClaimKind, ClaimRecord, Gender


class GeneratorConfigError(ValueError):
    """Invalid or infeasible generator configuration."""


@dataclass
class GeneratorConfig:
    """Knobs for the synthetic claims population.

    Defaults target a cohort of 2352 patients in 85 hospitals with mean
    patient age ~65, mean length of stay ~10.5 days and roughly 25k hospital
    / 70k medical / 1.4k ancillary claim lines.
    """

    n_hospitals: int = 85
    n_patients: int = 2352
    physicians_per_hospital: tuple[int, int] = (8, 18)
    physician_pool_factor: float = 0.9  # pool size vs. total roster demand; <1 gives cross-hospital overlap
    seed: int = 0

    start_date: str = "2008-01-01"
    span_days: int = 1460

    female_fraction: float = 1302 / 2352
    other_gender_fraction: float = 0.0
    age_mean: float = 65.02
    age_sd: float = 12.0
    age_min: int = 18
    age_max: int = 99

    los_mean: float = 10.51
    los_dispersion: float = 3.0  # negative-binomial shape; larger = closer to Poisson

    readmission_base_rate: float = 0.15
    readmission_spread: float = 0.12
    cohesion_readmission_coupling: float = 1.0
    max_readmissions_per_patient: int = 3
    extra_admission_rate: float = 0.05  # unrelated later admissions, outside the window
    readmission_window: int = 28  # planted readmission gaps fall inside this many days

    team_size_min: int = 3
    team_size_cohesion_extra: int = 3
    team_admission_rate_base: float = 0.05
    team_admission_rate_cohesion: float = 0.85
    pair_admission_two_prob: float = 0.7
    cohesion_beta_shape: float = 0.4  # < 1 polarizes hospitals toward the extremes

    hospital_claims_per_admission_mean: float = 8.5
    medical_claims_per_physician_mean: float = 7.0
    ancillary_claims_per_admission_mean: float = 0.5

    hospital_claim_cost_mean: float = 2000.0
    medical_claim_cost_mean: float = 180.0
    ancillary_claim_cost_mean: float = 90.0
    cost_sigma: float = 0.5  # lognormal shape for all claim costs

    def validate(self) -> None:
        if self.n_hospitals <= 0 or self.n_patients <= 0:
            raise GeneratorConfigError("n_hospitals and n_patients must be > 0")
        if self.n_patients < self.n_hospitals:
            raise GeneratorConfigError(
                "need at least one patient per hospital "
                f"({self.n_patients} patients < {self.n_hospitals} hospitals)"
            )
        lo, hi = self.physicians_per_hospital
        if lo <= 0 or hi < lo:
            raise GeneratorConfigError(
                f"physicians_per_hospital range {self.physicians_per_hospital} is infeasible"
            )
        for name in (
            "female_fraction",
            "other_gender_fraction",
            "readmission_base_rate",
            "cohesion_readmission_coupling",
            "team_admission_rate_base",
            "pair_admission_two_prob",
        ):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise GeneratorConfigError(f"{name} must be in [0, 1], got {value}")
        if self.team_size_min < 3:
            raise GeneratorConfigError("team_size_min must be >= 3 (teams close triangles)")
        if self.team_size_cohesion_extra < 0:
            raise GeneratorConfigError("team_size_cohesion_extra must be >= 0")
        if self.team_size_min + self.team_size_cohesion_extra > self.physicians_per_hospital[0]:
            raise GeneratorConfigError(
                "largest team size exceeds the smallest possible hospital roster"
            )
        if not 0.0 <= self.team_admission_rate_base + self.team_admission_rate_cohesion <= 1.0:
            raise GeneratorConfigError(
                "team admission rate (base + cohesion share) must stay in [0, 1]"
            )
        if self.cohesion_beta_shape <= 0:
            raise GeneratorConfigError("cohesion_beta_shape must be positive")
        if self.female_fraction + self.other_gender_fraction > 1.0:
            raise GeneratorConfigError("gender fractions exceed 1")
        if self.span_days <= 0:
            raise GeneratorConfigError("span_days must be > 0")
        if self.los_mean < 0 or self.los_dispersion <= 0:
            raise GeneratorConfigError("invalid length-of-stay parameters")
        if self.readmission_window < 2:
            raise GeneratorConfigError("readmission_window must be >= 2")
        if self.age_min < 0 or self.age_max < self.age_min:
            raise GeneratorConfigError("invalid age bounds")
        if self.seed < 0:
            raise GeneratorConfigError("seed must be unsigned")

    @classmethod
    def from_dict(cls, data: dict) -> "GeneratorConfig":
        known = {f.name for f in cls.__dataclass_fields__.values()}  # type: ignore[attr-defined]
        unknown = set(data) - known
        if unknown:
            raise GeneratorConfigError(f"unknown generator config keys: {sorted(unknown)}")
        if "physicians_per_hospital" in data:
            data = dict(data)
            data["physicians_per_hospital"] = tuple(data["physicians_per_hospital"])
        cfg = cls(**data)
        cfg.validate()
        return cfg

    @classmethod
    def from_json(cls, path: str) -> "GeneratorConfig":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        data = asdict(self)
        data["physicians_per_hospital"] = list(self.physicians_per_hospital)
        return data


@dataclass
class _Hospital:
    hospital_id: str
    roster: list[str]
    teams: list[list[str]]
    team_admission_rate: float
    cohesion: float
    readmit_p: float
    facility_id: str = field(init=False)

    def __post_init__(self) -> None:
        self.facility_id = self.hospital_id + "F"


def _lognormal_cents(rng: random.Random, mean: float, sigma: float) -> int:
    mu = math.log(mean) - 0.5 * sigma * sigma
    return max(1, round(100.0 * math.exp(rng.gauss(mu, sigma))))


def _neg_binomial(rng: random.Random, mean: float, shape: float) -> int:
    """Gamma-Poisson mixture, rounded to whole days; allows 0."""
    if mean <= 0:
        return 0
    lam = rng.gammavariate(shape, mean / shape)
    return _poisson(rng, lam)


def _poisson(rng: random.Random, lam: float) -> int:
    if lam <= 0:
        return 0
    # Knuth's product method; lam stays small (< 40) for every use here.
    limit = math.exp(-lam)
    k = 0
    product = rng.random()
    while product > limit:
        k += 1
        product *= rng.random()
    return k


def generate_synthetic_claims(config: GeneratorConfig) -> list[ClaimRecord]:
    """Generate the full synthetic claims table for the configured cohort.

    Deterministic for a fixed config (seed included). Every hospital receives
    at least one patient, so a Table-1-scale config yields exactly
    ``n_patients`` distinct patients spread over ``n_hospitals`` hospitals.
    """
    config.validate()
    rng = random.Random(config.seed)
    start = date.fromisoformat(config.start_date)

    hospitals = _make_hospitals(config, rng)

    # Round-robin the first n_hospitals patients so no hospital is empty,
    # then spread the rest uniformly.
    patient_hospital: list[int] = [i % config.n_hospitals for i in range(config.n_hospitals)]
    patient_hospital += [
        rng.randrange(config.n_hospitals) for _ in range(config.n_patients - config.n_hospitals)
    ]

    ancillary_pool = [f"ANC{i:03d}" for i in range(1, 41)]

    claims: list[ClaimRecord] = []
    admission_counter = 0
    claim_counter = 0

    for p_index in range(config.n_patients):
        patient_id = f"P{p_index + 1:05d}"
        hospital = hospitals[patient_hospital[p_index]]

        age = round(rng.gauss(config.age_mean, config.age_sd))
        age = min(config.age_max, max(config.age_min, age))
        u = rng.random()
        if u < config.female_fraction:
            gender = Gender.FEMALE
        elif u < config.female_fraction + config.other_gender_fraction:
            gender = Gender.OTHER
        else:
            gender = Gender.MALE

        # Index stay plus a geometric chain of planted readmissions.
        admission_date = start + timedelta(days=rng.randrange(config.span_days))
        stays: list[tuple[date, date]] = []
        for _ in range(1 + config.max_readmissions_per_patient):
            los = _neg_binomial(rng, config.los_mean, config.los_dispersion)
            discharge = admission_date + timedelta(days=los)
            stays.append((admission_date, discharge))
            if len(stays) > config.max_readmissions_per_patient:
                break
            if rng.random() >= hospital.readmit_p:
                break
            gap = rng.randint(1, config.readmission_window - 1)
            admission_date = discharge + timedelta(days=gap)
        if rng.random() < config.extra_admission_rate:
            last_discharge = stays[-1][1]
            extra_start = last_discharge + timedelta(
                days=config.readmission_window + rng.randint(10, 180)
            )
            los = _neg_binomial(rng, config.los_mean, config.los_dispersion)
            stays.append((extra_start, extra_start + timedelta(days=los)))

        # One care team per patient, kept across the whole stay chain: the
        # projection links every pair of physicians sharing a patient, so
        # re-drawing teams per stay would fuse them into one big clique.
        team = _pick_team(config, rng, hospital)

        for adm_date, dis_date in stays:
            admission_counter += 1
            admission_id = f"A{admission_counter:07d}"

            def emit(kind: ClaimKind, provider_id: str, cost_cents: int) -> None:
                nonlocal claim_counter
                claim_counter += 1
                claims.append(
                    ClaimRecord(
                        claim_id=f"C{claim_counter:08d}",
                        claim_kind=kind,
                        patient_id=patient_id,
                        provider_id=provider_id,
                        hospital_id=hospital.hospital_id,
                        admission_id=admission_id,
                        admission_date=adm_date,
                        discharge_date=dis_date,
                        cost_cents=cost_cents,
                        patient_age=age,
                        patient_gender=gender,
                    )
                )

            n_hospital_claims = 1 + _poisson(rng, config.hospital_claims_per_admission_mean - 1)
            for _ in range(n_hospital_claims):
                emit(
                    ClaimKind.HOSPITAL,
                    hospital.facility_id,
                    _lognormal_cents(rng, config.hospital_claim_cost_mean, config.cost_sigma),
                )

            for physician in team:
                n_visits = 1 + _poisson(rng, config.medical_claims_per_physician_mean - 1)
                for _ in range(n_visits):
                    emit(
                        ClaimKind.MEDICAL,
                        physician,
                        _lognormal_cents(rng, config.medical_claim_cost_mean, config.cost_sigma),
                    )

            for _ in range(_poisson(rng, config.ancillary_claims_per_admission_mean)):
                emit(
                    ClaimKind.ANCILLARY,
                    ancillary_pool[rng.randrange(len(ancillary_pool))],
                    _lognormal_cents(rng, config.ancillary_claim_cost_mean, config.cost_sigma),
                )

    return claims


def _make_hospitals(config: GeneratorConfig, rng: random.Random) -> list[_Hospital]:
    lo, hi = config.physicians_per_hospital
    expected_roster_total = config.n_hospitals * (lo + hi) / 2
    pool_size = max(hi, int(round(expected_roster_total * config.physician_pool_factor)))
    pool = [f"D{i:05d}" for i in range(1, pool_size + 1)]

    hospitals: list[_Hospital] = []
    for h_index in range(config.n_hospitals):
        roster_size = rng.randint(lo, hi)
        roster = rng.sample(pool, roster_size)
        cohesion = rng.betavariate(config.cohesion_beta_shape, config.cohesion_beta_shape)

        # Stable collaboration teams: larger in cohesive hospitals, and the
        # roster is carved into disjoint teams so repeat team admissions keep
        # closing the same triangles.
        team_size = config.team_size_min + round(config.team_size_cohesion_extra * cohesion)
        shuffled = roster[:]
        rng.shuffle(shuffled)
        teams = [
            shuffled[start : start + team_size]
            for start in range(0, len(shuffled) - team_size + 1, team_size)
        ]

        readmit_p = config.readmission_base_rate + (
            config.cohesion_readmission_coupling
            * config.readmission_spread
            * (2.0 * cohesion - 1.0)
        )
        readmit_p = min(0.95, max(0.01, readmit_p))
        hospitals.append(
            _Hospital(
                hospital_id=f"H{h_index + 1:03d}",
                roster=roster,
                teams=teams,
                team_admission_rate=(
                    config.team_admission_rate_base
                    + config.team_admission_rate_cohesion * cohesion
                ),
                cohesion=cohesion,
                readmit_p=readmit_p,
            )
        )
    return hospitals


def _pick_team(config: GeneratorConfig, rng: random.Random, hospital: _Hospital) -> list[str]:
    if hospital.teams and rng.random() < hospital.team_admission_rate:
        return list(hospital.teams[rng.randrange(len(hospital.teams))])
    size = 2 if rng.random() < config.pair_admission_two_prob else 1
    return rng.sample(hospital.roster, min(size, len(hospital.roster)))
