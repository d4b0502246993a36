"""Forest inventory records: domain types, CSV ingestion and validation.

Input is a long-format CSV with one row per (stand, species) pair::

    id,habitat,area_ha,function,species,cover,age,volume_m3_per_ha
    12-24-1-02-109 -f,fresh deciduous forest,3.25,Protective,pine,0.7,59,212
    12-24-1-02-109 -f,fresh deciduous forest,3.25,Protective,birch,0.3,59,66

Rows sharing an ``id`` are merged into one stand; stand order follows the
first appearance of each id.  A row with an empty ``species`` field declares
a stand without species shares.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Iterator, Mapping, Sequence

logger = logging.getLogger(__name__)

COLUMNS = ("id", "habitat", "area_ha", "function", "species", "cover", "age", "volume_m3_per_ha")
COVER_EPS = 1e-9


class Function(str, Enum):
    PROTECTIVE = "Protective"
    ECONOMIC = "Economic"

    @classmethod
    def parse(cls, text: str) -> "Function":
        key = text.strip().lower()
        for member in cls:
            if member.value.lower() == key:
                return member
        raise ValueError(f"unknown forest function {text!r}")


class StandValidationError(ValueError):
    """Base class for ingestion failures."""

    def __init__(self, message: str, *, stand_id: str | None = None,
                 line: int | None = None, column: str | None = None):
        self.stand_id = stand_id
        self.line = line
        self.column = column
        where = []
        if line is not None:
            where.append(f"line {line}")
        if column is not None:
            where.append(f"column {column!r}")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)
        self.message = message


class MalformedRow(StandValidationError):
    pass


class DuplicateStandConflict(StandValidationError):
    """Rows of one stand disagree on stand-level fields, or its covers overflow."""


class CoverSumExceeded(DuplicateStandConflict):
    pass


class EmptyDataset(StandValidationError):
    pass


@dataclass(frozen=True)
class SpeciesShare:
    species: str
    cover: float
    age: int
    standing_volume: float  # m3/ha

    def __post_init__(self):
        if not 0.0 <= self.cover <= 1.0:
            raise ValueError(f"cover {self.cover} outside [0, 1]")
        if self.age < 0:
            raise ValueError(f"negative age {self.age}")
        if not self.standing_volume >= 0.0:
            raise ValueError(f"negative standing volume {self.standing_volume}")


@dataclass(frozen=True)
class ForestStand:
    id: str
    habitat: str
    area: float  # ha
    function: Function
    shares: tuple[SpeciesShare, ...] = ()

    def __post_init__(self):
        if not self.area > 0:
            raise ValueError(f"stand {self.id!r}: area must be positive")
        total = math.fsum(s.cover for s in self.shares)
        if total > 1.0 + COVER_EPS:
            raise CoverSumExceeded(f"cover sum {total:g} exceeds 1", stand_id=self.id)

    @property
    def is_protective(self) -> bool:
        return self.function is Function.PROTECTIVE

    @property
    def cover_sum(self) -> float:
        return math.fsum(s.cover for s in self.shares)


@dataclass(frozen=True)
class Dataset:
    stands: tuple[ForestStand, ...]
    index: Mapping[str, int] = field(default=None, compare=False, repr=False)  # type: ignore[assignment]

    def __post_init__(self):
        index: dict[str, int] = {}
        for pos, stand in enumerate(self.stands):
            if stand.id in index:
                raise DuplicateStandConflict("duplicate stand id", stand_id=stand.id)
            index[stand.id] = pos
        object.__setattr__(self, "index", index)

    def __len__(self) -> int:
        return len(self.stands)

    def __iter__(self) -> Iterator[ForestStand]:
        return iter(self.stands)

    def __contains__(self, stand_id: object) -> bool:
        return stand_id in self.index

    def __getitem__(self, stand_id: str) -> ForestStand:
        return self.stands[self.index[stand_id]]

    @property
    def ids(self) -> list[str]:
        return [s.id for s in self.stands]


@dataclass(frozen=True)
class Issue:
    severity: str  # "error" | "warning"
    id: str | None
    message: str

    def to_dict(self) -> dict:
        return {"severity": self.severity, "id": self.id, "message": self.message}


def stand_volume(stand: ForestStand) -> float:
    """Total standing volume of a stand in m3 (per-hectare volumes times area)."""
    return math.fsum(s.standing_volume for s in stand.shares) * stand.area


def _is_tenth(value: float) -> bool:
    return abs(value * 10.0 - round(value * 10.0)) <= 1e-6


def _parse_float(raw: str, column: str, line: int, stand_id: str) -> float:
    try:
        value = float(raw)
    except ValueError:
        raise MalformedRow(f"not a number: {raw!r}", stand_id=stand_id, line=line, column=column) from None
    if not math.isfinite(value):
        raise MalformedRow(f"not a finite number: {raw!r}", stand_id=stand_id, line=line, column=column)
    return value


def _parse_row(row: Mapping[str, str], line: int, mode: str,
               warn: list[Issue]) -> tuple[str, str, float, Function, SpeciesShare | None]:
    stand_id = (row.get("id") or "").strip()
    if not stand_id:
        raise MalformedRow("empty stand id", line=line, column="id")
    habitat = (row.get("habitat") or "").strip().lower()
    if not habitat:
        raise MalformedRow("empty habitat", stand_id=stand_id, line=line, column="habitat")
    area = _parse_float(row.get("area_ha") or "", "area_ha", line, stand_id)
    if area <= 0:
        raise MalformedRow(f"area must be positive, got {area:g}", stand_id=stand_id, line=line, column="area_ha")
    try:
        function = Function.parse(row.get("function") or "")
    except ValueError as exc:
        raise MalformedRow(str(exc), stand_id=stand_id, line=line, column="function") from None

    species = (row.get("species") or "").strip().lower()
    if not species:
        if any((row.get(c) or "").strip() for c in ("cover", "age", "volume_m3_per_ha")):
            raise MalformedRow("share fields given without species", stand_id=stand_id, line=line, column="species")
        return stand_id, habitat, area, function, None

    cover = _parse_float(row.get("cover") or "", "cover", line, stand_id)
    if not 0.0 <= cover <= 1.0:
        raise MalformedRow(f"cover {cover:g} outside [0, 1]", stand_id=stand_id, line=line, column="cover")
    if not _is_tenth(cover):
        if mode == "strict":
            raise MalformedRow(f"cover {cover:g} is not a multiple of 0.1", stand_id=stand_id, line=line,
                               column="cover")
        warn.append(Issue("warning", stand_id, f"line {line}: cover {cover:g} is not a multiple of 0.1"))

    age_raw = (row.get("age") or "").strip()
    try:
        age = int(age_raw)
    except ValueError:
        raise MalformedRow(f"age is not an integer: {age_raw!r}", stand_id=stand_id, line=line,
                           column="age") from None
    if age < 0:
        raise MalformedRow(f"negative age {age}", stand_id=stand_id, line=line, column="age")

    volume = _parse_float(row.get("volume_m3_per_ha") or "", "volume_m3_per_ha", line, stand_id)
    if volume < 0:
        raise MalformedRow(f"negative volume {volume:g}", stand_id=stand_id, line=line, column="volume_m3_per_ha")
    return stand_id, habitat, area, function, SpeciesShare(species, cover, age, volume)


def _read(path: str | Path, mode: str) -> tuple[list[ForestStand], list[tuple[Issue, StandValidationError | None]]]:
    if mode not in ("strict", "lenient"):
        raise ValueError(f"mode must be 'strict' or 'lenient', got {mode!r}")
    issues: list[tuple[Issue, StandValidationError | None]] = []

    def error(exc: StandValidationError) -> None:
        issues.append((Issue("error", exc.stand_id, str(exc)), exc))

    heads: dict[str, tuple[str, float, Function, int]] = {}
    shares: dict[str, list[SpeciesShare]] = {}
    poisoned: set[str] = set()

    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames
        if header is None:
            exc = EmptyDataset("file has no header row")
            error(exc)
            return [], issues
        missing = [c for c in COLUMNS if c not in header]
        if missing:
            error(MalformedRow(f"missing columns {missing}", line=1, column=missing[0]))
            return [], issues
        for row in reader:
            line = reader.line_num
            warn: list[Issue] = []
            try:
                stand_id, habitat, area, function, share = _parse_row(row, line, mode, warn)
            except StandValidationError as exc:
                error(exc)
                if exc.stand_id:
                    poisoned.add(exc.stand_id)
                continue
            issues.extend((w, None) for w in warn)
            if stand_id in heads:
                h_habitat, h_area, h_function, h_line = heads[stand_id]
                for name, new, old in (("habitat", habitat, h_habitat), ("area_ha", area, h_area),
                                       ("function", function, h_function)):
                    if new != old:
                        error(DuplicateStandConflict(
                            f"{name} {new!s} conflicts with {old!s} from line {h_line}",
                            stand_id=stand_id, line=line, column=name))
                        poisoned.add(stand_id)
                        break
            else:
                heads[stand_id] = (habitat, area, function, line)
                shares[stand_id] = []
            if share is not None:
                shares[stand_id].append(share)

    stands: list[ForestStand] = []
    for stand_id, (habitat, area, function, line) in heads.items():
        total = math.fsum(s.cover for s in shares[stand_id])
        if total > 1.0 + COVER_EPS:
            error(CoverSumExceeded(f"cover sum {total:g} exceeds 1", stand_id=stand_id, line=line, column="cover"))
            continue
        if stand_id in poisoned:
            continue
        if total < 1.0 - COVER_EPS:
            issues.append((Issue("warning", stand_id, f"cover sum {total:g} is below 1"), None))
        stands.append(ForestStand(stand_id, habitat, area, function, tuple(shares[stand_id])))

    if not heads and not any(exc for _, exc in issues):
        error(EmptyDataset("no data rows"))
    return stands, issues


def validate_stands(path: str | Path, mode: str = "strict") -> list[Issue]:
    """Collect every validation issue in a stands file without raising."""
    _, issues = _read(path, mode)
    return [issue for issue, _ in issues]


def parse_stands(path: str | Path, mode: str = "strict") -> Dataset:
    """Load a stands CSV, raising the first validation error encountered."""
    stands, issues = _read(path, mode)
    for issue, exc in issues:
        if exc is not None:
            raise exc
        logger.warning("%s: %s", issue.id, issue.message)
    if not stands:
        raise EmptyDataset("no stands parsed")
    return Dataset(tuple(stands))


def _fmt(value: float) -> str:
    return repr(float(value))


def iter_rows(stands: Iterable[ForestStand]) -> Iterator[list[str]]:
    for stand in stands:
        head = [stand.id, stand.habitat, _fmt(stand.area), stand.function.value]
        if not stand.shares:
            yield head + ["", "", "", ""]
        for s in stand.shares:
            yield head + [s.species, _fmt(s.cover), str(s.age), _fmt(s.standing_volume)]


def write_stands(stands: Dataset | Sequence[ForestStand], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(COLUMNS)
        writer.writerows(iter_rows(stands))


def read_ids(path: str | Path) -> list[str]:
    """Read a harvest-set file: one stand id per line, blank lines ignored."""
    with open(path, encoding="utf-8") as fh:
        return [line.rstrip("\r\n").strip() for line in fh if line.strip()]


def write_ids(ids: Iterable[str], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for stand_id in ids:
            fh.write(f"{stand_id}\n")
