"""Insurance-claims ingestion and per-admission / per-hospital aggregation.

Claims arrive as CSV rows (one row per claim line), get validated into
:class:`ClaimRecord` objects, rolled up into :class:`AdmissionRecord` per
hospital stay, and finally summarised per hospital as
:class:`HospitalOutcomes` (mean cost, mean length of stay, readmission rate,
mean patient age).

Money is held as integer cents internally so admission totals are exact;
CSV input/output uses decimal dollars.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from datetime import date
from enum import Enum
from typing import IO, Iterable, Sequence

logger = logging.getLogger(__name__)

CSV_COLUMNS = [
    "claim_id",
    "claim_kind",
    "patient_id",
    "provider_id",
    "hospital_id",
    "admission_id",
    "admission_date",
    "discharge_date",
    "cost",
    "patient_age",
    "patient_gender",
]

#: Days after discharge within which a new admission counts as a readmission.
#: The 28-day window is the common administrative convention; it is a
#: parameter everywhere it is used.
DEFAULT_READMISSION_WINDOW = 28


class ClaimKind(str, Enum):
    HOSPITAL = "hospital"
    MEDICAL = "medical"
    ANCILLARY = "ancillary"


class Gender(str, Enum):
    FEMALE = "female"
    MALE = "male"
    OTHER = "other"


class ClaimValidationError(ValueError):
    """A claim row failed schema or invariant validation.

    Carries the 1-based CSV line number and offending field when known.
    """

    def __init__(self, message: str, line: int | None = None, field: str | None = None):
        self.line = line
        self.field = field
        prefix = ""
        if line is not None:
            prefix += f"line {line}: "
        if field is not None:
            prefix += f"field '{field}': "
        super().__init__(prefix + message)


@dataclass(frozen=True)
class ClaimRecord:
    """One insurance claim line.

    ``provider_id`` identifies a physician for medical claims and a facility
    or ancillary provider otherwise. ``cost_cents`` is the claimed amount in
    integer cents.
    """

    claim_id: str
    claim_kind: ClaimKind
    patient_id: str
    provider_id: str
    hospital_id: str
    admission_id: str
    admission_date: date
    discharge_date: date
    cost_cents: int
    patient_age: int
    patient_gender: Gender

    def __post_init__(self) -> None:
        if self.discharge_date < self.admission_date:
            raise ClaimValidationError(
                f"discharge_date {self.discharge_date} precedes admission_date "
                f"{self.admission_date} (claim {self.claim_id})",
                field="discharge_date",
            )
        if self.cost_cents < 0:
            raise ClaimValidationError(
                f"negative cost on claim {self.claim_id}", field="cost"
            )
        if self.patient_age < 0:
            raise ClaimValidationError(
                f"negative patient_age on claim {self.claim_id}", field="patient_age"
            )

    @property
    def cost(self) -> float:
        return self.cost_cents / 100.0


@dataclass(frozen=True)
class AdmissionRecord:
    """One hospital stay, aggregated over all its claims."""

    admission_id: str
    hospital_id: str
    patient_id: str
    patient_age: int
    admission_date: date
    discharge_date: date
    length_of_stay: int
    total_cost_cents: int
    physician_set: frozenset[str]
    readmitted: bool

    @property
    def total_cost(self) -> float:
        return self.total_cost_cents / 100.0


@dataclass(frozen=True)
class HospitalOutcomes:
    """Per-hospital outcome averages over its admissions."""

    hospital_id: str
    n_admissions: int
    mean_cost: float
    mean_los: float
    readmission_rate: float
    mean_patient_age: float


def _parse_cents(text: str) -> int:
    """Parse a decimal dollar amount into integer cents, exactly."""
    text = text.strip()
    negative = text.startswith("-")
    if negative:
        raise ValueError("negative amount")
    if "." in text:
        whole, _, frac = text.partition(".")
        if len(frac) > 2 or not frac.isdigit() or (whole and not whole.isdigit()):
            raise ValueError(f"bad amount {text!r}")
        frac = frac.ljust(2, "0")
        return int(whole or "0") * 100 + int(frac)
    if not text.isdigit():
        raise ValueError(f"bad amount {text!r}")
    return int(text) * 100


def format_cents(cents: int) -> str:
    """Render integer cents as a decimal dollar string (no currency symbol)."""
    sign = "-" if cents < 0 else ""
    cents = abs(cents)
    return f"{sign}{cents // 100}.{cents % 100:02d}"


def parse_claims(source: IO[str] | str) -> list[ClaimRecord]:
    """Parse the documented claims CSV schema into validated records.

    ``source`` is an open text stream or a file path. The header row must
    contain every documented column; unknown extra columns are ignored with
    a warning. Raises :class:`ClaimValidationError` naming the line number
    and field for any malformed row.
    """
    if isinstance(source, str):
        with open(source, "r", encoding="utf-8", newline="") as fh:
            return parse_claims(fh)

    reader = csv.reader(source)
    try:
        header = next(reader)
    except StopIteration:
        raise ClaimValidationError("empty input: missing header row", line=1)

    header = [h.strip() for h in header]
    missing = [c for c in CSV_COLUMNS if c not in header]
    if missing:
        raise ClaimValidationError(f"header missing columns {missing}", line=1)
    extra = [c for c in header if c not in CSV_COLUMNS]
    if extra:
        logger.warning("ignoring unknown claims CSV columns: %s", extra)
    index = {c: header.index(c) for c in CSV_COLUMNS}

    records: list[ClaimRecord] = []
    for line_no, row in enumerate(reader, start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) < len(header):
            raise ClaimValidationError(
                f"expected {len(header)} fields, got {len(row)}", line=line_no
            )

        def cell(name: str) -> str:
            return row[index[name]].strip()

        kind_text = cell("claim_kind")
        try:
            kind = ClaimKind(kind_text)
        except ValueError:
            raise ClaimValidationError(
                f"unknown claim_kind {kind_text!r}", line=line_no, field="claim_kind"
            )
        gender_text = cell("patient_gender")
        try:
            gender = Gender(gender_text)
        except ValueError:
            raise ClaimValidationError(
                f"unknown patient_gender {gender_text!r}",
                line=line_no,
                field="patient_gender",
            )
        dates = {}
        for field in ("admission_date", "discharge_date"):
            try:
                dates[field] = date.fromisoformat(cell(field))
            except ValueError:
                raise ClaimValidationError(
                    f"bad ISO date {cell(field)!r}", line=line_no, field=field
                )
        try:
            cost_cents = _parse_cents(cell("cost"))
        except ValueError as exc:
            raise ClaimValidationError(str(exc), line=line_no, field="cost")
        try:
            age = int(cell("patient_age"))
        except ValueError:
            raise ClaimValidationError(
                f"bad patient_age {cell('patient_age')!r}",
                line=line_no,
                field="patient_age",
            )

        try:
            record = ClaimRecord(
                claim_id=cell("claim_id"),
                claim_kind=kind,
                patient_id=cell("patient_id"),
                provider_id=cell("provider_id"),
                hospital_id=cell("hospital_id"),
                admission_id=cell("admission_id"),
                admission_date=dates["admission_date"],
                discharge_date=dates["discharge_date"],
                cost_cents=cost_cents,
                patient_age=age,
                patient_gender=gender,
            )
        except ClaimValidationError as exc:
            raise ClaimValidationError(str(exc), line=line_no, field=exc.field)
        records.append(record)
    return records


def write_claims_csv(records: Iterable[ClaimRecord], target: IO[str] | str) -> None:
    """Write claims in the documented CSV schema (inverse of parse_claims)."""
    if isinstance(target, str):
        with open(target, "w", encoding="utf-8", newline="") as fh:
            write_claims_csv(records, fh)
            return
    writer = csv.writer(target, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in records:
        writer.writerow(
            [
                r.claim_id,
                r.claim_kind.value,
                r.patient_id,
                r.provider_id,
                r.hospital_id,
                r.admission_id,
                r.admission_date.isoformat(),
                r.discharge_date.isoformat(),
                format_cents(r.cost_cents),
                str(r.patient_age),
                r.patient_gender.value,
            ]
        )


def build_admissions(
    claims: Sequence[ClaimRecord],
    readmission_window: int = DEFAULT_READMISSION_WINDOW,
) -> list[AdmissionRecord]:
    """Roll claims up into one record per admission_id.

    An admission is flagged readmitted when the same patient has another
    admission starting within ``readmission_window`` days after this one's
    discharge (0 <= gap <= window; admissions that start before discharge do
    not count). All claims of one admission must agree on patient, hospital
    and dates, otherwise :class:`ClaimValidationError` is raised.
    """
    if readmission_window < 0:
        raise ValueError("readmission_window must be >= 0")

    grouped: dict[str, list[ClaimRecord]] = {}
    order: list[str] = []
    for claim in claims:
        if claim.admission_id not in grouped:
            grouped[claim.admission_id] = []
            order.append(claim.admission_id)
        grouped[claim.admission_id].append(claim)

    partial: dict[str, dict] = {}
    by_patient: dict[str, list[str]] = {}
    for admission_id in order:
        group = grouped[admission_id]
        first = group[0]
        for claim in group[1:]:
            if (
                claim.admission_date != first.admission_date
                or claim.discharge_date != first.discharge_date
            ):
                raise ClaimValidationError(
                    f"conflicting dates for admission {admission_id}: "
                    f"{claim.admission_date}..{claim.discharge_date} vs "
                    f"{first.admission_date}..{first.discharge_date}"
                )
            if claim.patient_id != first.patient_id or claim.hospital_id != first.hospital_id:
                raise ClaimValidationError(
                    f"conflicting patient/hospital for admission {admission_id}"
                )
        physicians = frozenset(
            c.provider_id for c in group if c.claim_kind is ClaimKind.MEDICAL
        )
        partial[admission_id] = {
            "admission_id": admission_id,
            "hospital_id": first.hospital_id,
            "patient_id": first.patient_id,
            "patient_age": first.patient_age,
            "admission_date": first.admission_date,
            "discharge_date": first.discharge_date,
            "length_of_stay": (first.discharge_date - first.admission_date).days,
            "total_cost_cents": sum(c.cost_cents for c in group),
            "physician_set": physicians,
        }
        by_patient.setdefault(first.patient_id, []).append(admission_id)

    records: list[AdmissionRecord] = []
    for admission_id in order:
        info = partial[admission_id]
        readmitted = False
        for other_id in by_patient[info["patient_id"]]:
            if other_id == admission_id:
                continue
            gap = (partial[other_id]["admission_date"] - info["discharge_date"]).days
            if 0 <= gap <= readmission_window:
                readmitted = True
                break
        records.append(AdmissionRecord(readmitted=readmitted, **info))
    return records


def hospital_outcomes(
    admissions: Sequence[AdmissionRecord],
) -> dict[str, HospitalOutcomes]:
    """Average cost, LoS, age and the readmission rate per hospital."""
    grouped: dict[str, list[AdmissionRecord]] = {}
    for adm in admissions:
        grouped.setdefault(adm.hospital_id, []).append(adm)

    outcomes: dict[str, HospitalOutcomes] = {}
    for hospital_id, group in grouped.items():
        n = len(group)
        outcomes[hospital_id] = HospitalOutcomes(
            hospital_id=hospital_id,
            n_admissions=n,
            mean_cost=sum(a.total_cost_cents for a in group) / 100.0 / n,
            mean_los=sum(a.length_of_stay for a in group) / n,
            readmission_rate=sum(a.readmitted for a in group) / n,
            mean_patient_age=sum(a.patient_age for a in group) / n,
        )
    return outcomes
