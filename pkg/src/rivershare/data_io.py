"""Dataset ingestion and the embedded Nile basin case-study data.

Datasets arrive as CSV (header ``agent,inflow[,withdrawal]``) or JSON (an
object with an ``agents`` array of ``{name, inflow, withdrawal?}``), rows
ordered upstream to downstream.  Row order is river order; there is no
reordering key.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import TextIO

from .core import (
    DimensionError,
    InflowProfile,
    ObservedAllocation,
    RiverShareError,
)


class DatasetError(RiverShareError):
    """A dataset is malformed; the message points at the offending row."""


@dataclass(frozen=True)
class BasinDataset:
    """Named agents along one river with inflows and optional withdrawals."""

    names: tuple[str, ...]
    inflows: InflowProfile
    withdrawals: tuple[float, ...] | None = None
    units: str = "km³/year"

    def __post_init__(self):
        if len(self.names) != len(self.inflows):
            raise DimensionError(
                f"{len(self.names)} names for {len(self.inflows)} inflows"
            )
        seen = set()
        for name in self.names:
            if not name:
                raise DatasetError("agent names must be non-empty")
            if name in seen:
                raise DatasetError(f"duplicate agent name {name!r}")
            seen.add(name)
        if self.withdrawals is not None:
            object.__setattr__(self, "withdrawals", tuple(float(v) for v in self.withdrawals))
            if len(self.withdrawals) != len(self.inflows):
                raise DimensionError(
                    f"{len(self.withdrawals)} withdrawals for {len(self.inflows)} inflows"
                )
            for k, v in enumerate(self.withdrawals):
                if not math.isfinite(v) or v < 0.0:
                    raise DatasetError(f"withdrawal at position {k} must be finite and >= 0, got {v}")

    def __len__(self) -> int:
        return len(self.inflows)

    @property
    def has_withdrawals(self) -> bool:
        return self.withdrawals is not None

    def normalized_withdrawals(self) -> ObservedAllocation:
        if self.withdrawals is None:
            raise DatasetError("dataset has no withdrawal column")
        return normalize_withdrawals(self.inflows, self.withdrawals)


def normalize_withdrawals(e, withdrawals) -> ObservedAllocation:
    """Rescale withdrawals proportionally so they sum to the total inflow.

    Idempotent: vectors already summing to the total inflow pass through
    with a scaling factor of one (up to float rounding).
    """
    if not isinstance(e, InflowProfile):
        e = InflowProfile(tuple(e))
    values = [float(v) for v in withdrawals]
    if len(values) != len(e):
        raise DimensionError(f"{len(values)} withdrawals for {len(e)} inflows")
    total = math.fsum(values)
    if not total > 0.0:
        raise DatasetError(f"withdrawals must have a positive total, got {total}")
    factor = e.total / total
    return ObservedAllocation(tuple(v * factor for v in values))


# ---------------------------------------------------------------------------
# parsing


def _parse_number(text, where: str, what: str) -> float:
    try:
        value = float(text)
    except (TypeError, ValueError):
        raise DatasetError(f"{where}: {what} must be a number, got {text!r}") from None
    if not math.isfinite(value):
        raise DatasetError(f"{where}: {what} must be finite, got {text!r}")
    return value


def _build_dataset(rows: list[tuple[str, str, float, float | None]]) -> BasinDataset:
    # rows: (where, name, inflow, withdrawal-or-None), already value-checked
    if len(rows) < 2:
        raise DatasetError(f"a dataset needs at least two agents, got {len(rows)}")
    names = []
    seen = {}
    inflows = []
    withdrawals = []
    with_count = 0
    for where, name, inflow, withdrawal in rows:
        if name in seen:
            raise DatasetError(f"{where}: duplicate agent name {name!r} (first at {seen[name]})")
        seen[name] = where
        names.append(name)
        if inflow < 0.0:
            raise DatasetError(f"{where}: inflow must be >= 0, got {inflow}")
        inflows.append(inflow)
        if withdrawal is not None:
            if withdrawal < 0.0:
                raise DatasetError(f"{where}: withdrawal must be >= 0, got {withdrawal}")
            with_count += 1
        withdrawals.append(withdrawal)
    if 0 < with_count < len(rows):
        missing = next(where for (where, _, _, w) in rows if w is None)
        raise DatasetError(
            f"{missing}: withdrawal missing; provide the column for every agent or none"
        )
    return BasinDataset(
        names=tuple(names),
        inflows=InflowProfile(tuple(inflows)),
        withdrawals=tuple(withdrawals) if with_count else None,
    )


def _load_csv(text: str) -> BasinDataset:
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise DatasetError("line 1: empty input, expected header agent,inflow[,withdrawal]") from None
    header = [h.strip().casefold() for h in header]
    if header not in (["agent", "inflow"], ["agent", "inflow", "withdrawal"]):
        raise DatasetError(
            f"line 1: header must be agent,inflow or agent,inflow,withdrawal, got {','.join(header)}"
        )
    has_withdrawal = len(header) == 3
    rows = []
    for line_no, row in enumerate(reader, start=2):
        if not row or all(not cell.strip() for cell in row):
            continue  # ignore blank lines
        where = f"line {line_no}"
        if len(row) != len(header):
            raise DatasetError(f"{where}: expected {len(header)} fields, got {len(row)}")
        name = row[0].strip()
        if not name:
            raise DatasetError(f"{where}: agent name must be non-empty")
        inflow = _parse_number(row[1].strip(), where, "inflow")
        withdrawal = _parse_number(row[2].strip(), where, "withdrawal") if has_withdrawal else None
        rows.append((where, name, inflow, withdrawal))
    return _build_dataset(rows)


def _reject_constant(text):
    raise DatasetError(f"non-finite JSON value {text!r} is not allowed")


def _load_json(text: str) -> BasinDataset:
    try:
        payload = json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise DatasetError(f"invalid JSON: {exc}") from None
    if not isinstance(payload, dict) or "agents" not in payload:
        raise DatasetError("top level must be an object with an 'agents' array")
    agents = payload["agents"]
    if not isinstance(agents, list):
        raise DatasetError("'agents' must be an array")
    rows = []
    for k, entry in enumerate(agents):
        where = f"agents[{k}]"
        if not isinstance(entry, dict):
            raise DatasetError(f"{where}: each agent must be an object")
        unknown = set(entry) - {"name", "inflow", "withdrawal"}
        if unknown:
            raise DatasetError(f"{where}: unknown field {sorted(unknown)[0]!r}")
        name = entry.get("name")
        if not isinstance(name, str) or not name:
            raise DatasetError(f"{where}: 'name' must be a non-empty string")
        if "inflow" not in entry:
            raise DatasetError(f"{where}: 'inflow' is required")
        if isinstance(entry["inflow"], bool) or not isinstance(entry["inflow"], (int, float)):
            raise DatasetError(f"{where}: inflow must be a number, got {entry['inflow']!r}")
        inflow = _parse_number(entry["inflow"], where, "inflow")
        withdrawal = None
        if "withdrawal" in entry:
            if isinstance(entry["withdrawal"], bool) or not isinstance(entry["withdrawal"], (int, float)):
                raise DatasetError(f"{where}: withdrawal must be a number, got {entry['withdrawal']!r}")
            withdrawal = _parse_number(entry["withdrawal"], where, "withdrawal")
        rows.append((where, name, inflow, withdrawal))
    return _build_dataset(rows)


def load_dataset(source: str | TextIO, format: str) -> BasinDataset:
    """Parse a dataset from text or a readable stream.

    `format` is "csv" or "json".  Errors carry the offending line (CSV) or
    array index (JSON).
    """
    text = source if isinstance(source, str) else source.read()
    fmt = format.strip().casefold()
    if fmt == "csv":
        return _load_csv(text)
    if fmt == "json":
        return _load_json(text)
    raise DatasetError(f"unknown dataset format {format!r}, expected csv or json")


def read_dataset(path) -> BasinDataset:
    """Load a dataset file, inferring the format from the extension."""
    p = Path(path)
    suffix = p.suffix.casefold()
    if suffix == ".csv":
        fmt = "csv"
    elif suffix == ".json":
        fmt = "json"
    else:
        raise DatasetError(f"cannot infer format from {p.name!r}; use a .csv or .json file")
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise DatasetError(f"cannot read {p}: {exc}") from None
    return load_dataset(text, fmt)


def dump_dataset(dataset: BasinDataset, format: str) -> str:
    """Serialize a dataset so that load_dataset round-trips it exactly."""
    fmt = format.strip().casefold()
    if fmt == "csv":
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        if dataset.has_withdrawals:
            writer.writerow(["agent", "inflow", "withdrawal"])
            for name, inflow, withdrawal in zip(
                dataset.names, dataset.inflows, dataset.withdrawals
            ):
                writer.writerow([name, repr(inflow), repr(withdrawal)])
        else:
            writer.writerow(["agent", "inflow"])
            for name, inflow in zip(dataset.names, dataset.inflows):
                writer.writerow([name, repr(inflow)])
        return buffer.getvalue()
    if fmt == "json":
        agents = []
        for k, name in enumerate(dataset.names):
            entry: dict = {"name": name, "inflow": dataset.inflows[k]}
            if dataset.has_withdrawals:
                entry["withdrawal"] = dataset.withdrawals[k]
            agents.append(entry)
        return json.dumps({"agents": agents}, indent=2) + "\n"
    raise DatasetError(f"unknown dataset format {format!r}, expected csv or json")


def builtin_nile() -> BasinDataset:
    """The embedded Nile basin dataset, upstream to downstream.

    Inflows are annual contributions in km³/year and withdrawals are the
    observed freshwater withdrawals of each country (AQUASTAT figures).
    Note that the five withdrawal entries sum to 111.11 km³/year; summaries
    of these figures sometimes quote 110.9.  The per-country values are
    embedded as they are, and normalization rescales them to the 115.9
    km³/year aggregate inflow.
    """
    return BasinDataset(
        names=("Tanzania", "Uganda", "South Sudan", "Sudan", "Egypt"),
        inflows=InflowProfile((16.8, 16.2, 17.6, 65.3, 0.0)),
        withdrawals=(5.18, 0.64, 0.66, 26.93, 77.7),
    )
