"""Survey CSV parsing, categorical encoding and descriptive statistics.

A survey file is a UTF-8 CSV with a header row and one record per row.
Column roles are declared up front (:class:`ColumnSchema`): one id column,
ordered Likert factor columns, optional numeric demographic columns that
join the encoded matrix, optional categorical demographics kept only for
the summary report, and ignored columns.
"""

from __future__ import annotations

import csv
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DataError, SchemaError, UnknownTokenError

LIKERT_LEVELS = ("Never", "Rarely", "Sometimes", "Usually", "Always")

#: Likert tokens scored 1 (Never) .. 5 (Always); "Often" is an accepted
#: spelling of level 4 alongside "Usually".
DEFAULT_TOKEN_CODES = {
    "Never": 1,
    "Rarely": 2,
    "Sometimes": 3,
    "Usually": 4,
    "Often": 4,
    "Always": 5,
}


@dataclass(frozen=True)
class EncodingScheme:
    """Token-to-code map for factor columns.

    ``na_token`` encodes to 0 and counts as observed; tokens in
    ``missing_tokens`` produce a masked (to-be-imputed) entry.
    """

    tokens: dict[str, int]
    na_token: str = "NA"
    missing_tokens: frozenset[str] = frozenset({"", "NaN"})

    def __post_init__(self):
        codes = list(self.tokens.values())
        if any(c < 0 for c in codes):
            raise ValueError("token codes must be non-negative")
        if self.na_token in self.tokens:
            raise ValueError("na_token must not appear in the token map")

    def code_for(self, token: str) -> int | None:
        """Code for an observed token, or None if the token is unknown."""
        if token == self.na_token:
            return 0
        return self.tokens.get(token)

    def to_dict(self) -> dict:
        return {
            "tokens": dict(self.tokens),
            "na_token": self.na_token,
            "missing_tokens": sorted(self.missing_tokens),
        }

    @staticmethod
    def from_dict(d: dict) -> "EncodingScheme":
        return EncodingScheme(
            tokens={k: int(v) for k, v in d["tokens"].items()},
            na_token=d.get("na_token", "NA"),
            missing_tokens=frozenset(d.get("missing_tokens", ("", "NaN"))),
        )


def default_scheme() -> EncodingScheme:
    """Scheme for the five Likert levels plus NA, blanks treated as missing."""
    return EncodingScheme(tokens=dict(DEFAULT_TOKEN_CODES))


@dataclass(frozen=True)
class ColumnSchema:
    """Declared role of every survey column.

    Columns present in the file but not named here default to the factor
    role, so a bare ``ColumnSchema(id_column="id")`` handles the common
    id-plus-responses layout.
    """

    id_column: str
    factors: tuple[str, ...] = ()
    numeric: tuple[str, ...] = ()
    demographic: tuple[str, ...] = ()
    ignore: tuple[str, ...] = ()

    def __post_init__(self):
        declared = (
            [self.id_column]
            + list(self.factors)
            + list(self.numeric)
            + list(self.demographic)
            + list(self.ignore)
        )
        dupes = [name for name, cnt in Counter(declared).items() if cnt > 1]
        if dupes:
            raise SchemaError(f"columns declared with more than one role: {dupes}")

    @staticmethod
    def from_dict(d: dict) -> "ColumnSchema":
        return ColumnSchema(
            id_column=d["id"],
            factors=tuple(d.get("factors", ())),
            numeric=tuple(d.get("numeric", ())),
            demographic=tuple(d.get("demographic", ())),
            ignore=tuple(d.get("ignore", ())),
        )

    def to_dict(self) -> dict:
        return {
            "id": self.id_column,
            "factors": list(self.factors),
            "numeric": list(self.numeric),
            "demographic": list(self.demographic),
            "ignore": list(self.ignore),
        }


@dataclass
class SurveyRecord:
    record_id: str
    demographics: dict[str, str]
    responses: dict[str, str]


@dataclass
class SurveyTable:
    """Parsed survey rows with the column ordering the schema declared."""

    records: list[SurveyRecord]
    factor_names: list[str]
    numeric_names: list[str] = field(default_factory=list)
    demographic_names: list[str] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.records)


@dataclass
class EncodedMatrix:
    """Numeric record-by-variable matrix with an explicit missingness mask.

    Masked cells hold NaN and are never consumed by downstream math;
    factor cells carry codes in {0..5} (0 = NA) before imputation.
    """

    values: np.ndarray
    missing: np.ndarray
    row_ids: list[str]
    col_names: list[str]

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        self.missing = np.asarray(self.missing, dtype=bool)
        r, c = self.values.shape
        if self.missing.shape != (r, c):
            raise ValueError("values and missing mask shapes differ")
        if len(self.row_ids) != r or len(self.col_names) != c:
            raise ValueError("row_ids/col_names inconsistent with matrix shape")

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def copy(self) -> "EncodedMatrix":
        return EncodedMatrix(
            self.values.copy(), self.missing.copy(),
            list(self.row_ids), list(self.col_names),
        )


def parse_survey(path: str | Path, schema: ColumnSchema) -> SurveyTable:
    """Read a survey CSV into a validated :class:`SurveyTable`.

    Raises :class:`SchemaError` for a missing file, absent header columns,
    ragged rows, or duplicate/empty record ids; every message carries row
    or column context. Response tokens are kept verbatim so that encoding
    can report unknown values precisely.
    """
    path = Path(path)
    if not path.is_file():
        raise SchemaError(f"survey file not found: {path}")

    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: file is empty, expected a header row")

        declared = set(
            (schema.id_column,)
            + schema.factors + schema.numeric + schema.demographic + schema.ignore
        )
        absent = sorted(declared - set(header))
        if absent:
            raise SchemaError(f"{path}: declared columns missing from header: {absent}")

        # Undeclared columns default to the factor role, appended in header order.
        extra = [
            name for name in header
            if name not in declared
        ]
        factor_names = list(schema.factors) + extra
        col_index = {name: i for i, name in enumerate(header)}
        if len(col_index) != len(header):
            dupes = [n for n, c in Counter(header).items() if c > 1]
            raise SchemaError(f"{path}: duplicate header columns: {dupes}")

        records: list[SurveyRecord] = []
        seen_ids: set[str] = set()
        for row_no, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise SchemaError(
                    f"{path}: row {row_no} has {len(row)} fields, header has {len(header)}"
                )
            rid = row[col_index[schema.id_column]]
            if not rid:
                raise SchemaError(f"{path}: row {row_no} has an empty record id")
            if rid in seen_ids:
                raise SchemaError(f"{path}: duplicate record id {rid!r} at row {row_no}")
            seen_ids.add(rid)

            demographics = {
                name: row[col_index[name]]
                for name in list(schema.numeric) + list(schema.demographic)
            }
            responses = {name: row[col_index[name]] for name in factor_names}
            records.append(SurveyRecord(rid, demographics, responses))

    return SurveyTable(
        records=records,
        factor_names=factor_names,
        numeric_names=list(schema.numeric),
        demographic_names=list(schema.demographic),
    )


def encode(table: SurveyTable, scheme: EncodingScheme) -> EncodedMatrix:
    """Map responses to numeric codes, producing the matrix and its mask.

    Matrix columns are the declared factor columns followed by the declared
    numeric demographic columns; the NA token becomes an observed 0 while
    missing tokens become masked NaNs. Unknown tokens raise
    :class:`UnknownTokenError` naming record, column and token.
    """
    col_names = list(table.factor_names) + list(table.numeric_names)
    n_rows, n_cols = len(table.records), len(col_names)
    values = np.full((n_rows, n_cols), np.nan, dtype=np.float64)
    missing = np.zeros((n_rows, n_cols), dtype=bool)
    row_ids: list[str] = []

    n_factors = len(table.factor_names)
    for i, rec in enumerate(table.records):
        row_ids.append(rec.record_id)
        for j, name in enumerate(table.factor_names):
            token = rec.responses[name]
            if token in scheme.missing_tokens:
                missing[i, j] = True
                continue
            code = scheme.code_for(token)
            if code is None:
                raise UnknownTokenError(rec.record_id, name, token)
            values[i, j] = float(code)
        for j, name in enumerate(table.numeric_names):
            token = rec.demographics[name]
            if token in scheme.missing_tokens:
                missing[i, n_factors + j] = True
                continue
            try:
                values[i, n_factors + j] = float(token)
            except ValueError:
                raise DataError(
                    f"non-numeric value {token!r} in numeric column {name!r} "
                    f"of record {rec.record_id!r}"
                )
    return EncodedMatrix(values, missing, row_ids, col_names)


AGE_BINS = [(lo, lo + 10) for lo in range(0, 100, 10)]


@dataclass
class FrequencySection:
    title: str
    rows: list[tuple[str, int, float]]  # label, count, percent


@dataclass
class SummaryReport:
    sections: list[FrequencySection]

    def section(self, title: str) -> FrequencySection:
        for s in self.sections:
            if s.title == title:
                return s
        raise KeyError(title)

    def render_text(self) -> str:
        lines: list[str] = []
        for sec in self.sections:
            lines.append(sec.title)
            width = max((len(label) for label, _, _ in sec.rows), default=0)
            for label, count, pct in sec.rows:
                lines.append(f"  {label.ljust(width)}  {count:6d}  {pct:5.1f}%")
            lines.append("")
        return "\n".join(lines)

    def render_csv(self) -> str:
        out = ["section,label,count,percent"]
        for sec in self.sections:
            for label, count, pct in sec.rows:
                out.append(f"{_csv_field(sec.title)},{_csv_field(label)},{count},{pct:.4f}")
        return "\n".join(out) + "\n"


def _csv_field(text: str) -> str:
    if any(ch in text for ch in ',"\n'):
        return '"' + text.replace('"', '""') + '"'
    return text


def _frequency_rows(values: list[str]) -> list[tuple[str, int, float]]:
    total = len(values)
    counts = Counter(values)
    ordered = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return [(label or "(blank)", cnt, 100.0 * cnt / total) for label, cnt in ordered]


def _decade_rows(tokens: list[str], total: int) -> list[tuple[str, int, float]]:
    bins = {f"{lo}-{hi - 1}": 0 for lo, hi in AGE_BINS}
    out_of_range = 0
    blank = 0
    for token in tokens:
        try:
            v = float(token)
        except ValueError:
            blank += 1
            continue
        for lo, hi in AGE_BINS:
            if lo <= v < hi:
                bins[f"{lo}-{hi - 1}"] += 1
                break
        else:
            out_of_range += 1
    rows = [(label, cnt, 100.0 * cnt / total) for label, cnt in bins.items()]
    if out_of_range:
        rows.append(("out-of-range", out_of_range, 100.0 * out_of_range / total))
    if blank:
        rows.append(("(blank)", blank, 100.0 * blank / total))
    return rows


def _all_numeric(tokens: list[str]) -> bool:
    seen = False
    for t in tokens:
        if t == "":
            continue
        try:
            float(t)
        except ValueError:
            return False
        seen = True
    return seen


def summarize(table: SurveyTable) -> SummaryReport:
    """Descriptive statistics: decade-binned histograms for numeric
    demographics (declared numeric, or categorical columns whose values
    all parse as numbers), frequency tables for the rest and for every
    factor's verbatim response tokens."""
    if not table.records:
        raise DataError("cannot summarize an empty table")
    total = len(table.records)
    sections: list[FrequencySection] = []

    for name in table.numeric_names:
        tokens = [rec.demographics[name] for rec in table.records]
        sections.append(FrequencySection(f"{name} (decade bins)", _decade_rows(tokens, total)))

    for name in table.demographic_names:
        tokens = [rec.demographics[name] for rec in table.records]
        if _all_numeric(tokens):
            sections.append(FrequencySection(f"{name} (decade bins)", _decade_rows(tokens, total)))
        else:
            sections.append(FrequencySection(name, _frequency_rows(tokens)))

    for name in table.factor_names:
        values = [rec.responses[name] for rec in table.records]
        sections.append(FrequencySection(name, _frequency_rows(values)))

    return SummaryReport(sections)
