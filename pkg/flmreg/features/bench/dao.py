# flmreg/features/bench/dao.py
"""File access for the benchmark harness: datasets, configs and result tables"""

import csv
import json
import logging
import math
from pathlib import Path
from typing import Any, List, Optional, Sequence, Tuple

from pydantic import ValidationError

from flmreg.core.exceptions import ConfigurationError, DimensionError, EmissionError, IngestionError
from flmreg.shared.constants import CsvLayout, OutputFormat
from flmreg.features.fda_core.models import FunctionalDataset, Grid
from .schemas import ExperimentConfig, ReplicationRecord, ResultDocument, ResultMetadata

logger = logging.getLogger(__name__)

HEADER_PREFIX = "t:"


class BenchDAO:
    """Reads datasets and configs, writes result tables"""

    # Ingestion
    def _read_rows(self, path: Path) -> List[Tuple[int, List[str]]]:
        try:
            with open(path, newline="", encoding="utf-8") as handle:
                rows = [(line, row) for line, row in enumerate(csv.reader(handle), start=1)]
        except (OSError, UnicodeDecodeError, csv.Error) as exc:
            raise IngestionError(f"cannot read file: {exc}", str(path))
        rows = [(line, row) for line, row in rows if any(cell.strip() for cell in row)]
        if not rows:
            raise IngestionError("file is empty", str(path))
        return rows

    def _parse_cell(self, cell: str, path: Path, line: int, column: int) -> float:
        try:
            value = float(cell.strip())
        except ValueError:
            raise IngestionError(f"non-numeric cell {cell!r}", str(path), line, column)
        if not math.isfinite(value):
            raise IngestionError(f"non-finite cell {cell!r}", str(path), line, column)
        return value

    def _split_header(
        self, rows: List[Tuple[int, List[str]]], path: Path
    ) -> Tuple[Optional[Tuple[int, List[float]]], List[Tuple[int, List[str]]]]:
        line, first = rows[0]
        if not first[0].strip().startswith(HEADER_PREFIX):
            return None, rows
        cells = [first[0].strip()[len(HEADER_PREFIX):]] + first[1:]
        points = [self._parse_cell(cell, path, line, col) for col, cell in enumerate(cells, start=1)]
        return (line, points), rows[1:]

    def _parse_matrix(
        self, rows: List[Tuple[int, List[str]]], path: Path, min_columns: int
    ) -> List[List[float]]:
        width = len(rows[0][1])
        if width < min_columns:
            raise IngestionError(f"expected at least {min_columns} columns, found {width}", str(path), rows[0][0])
        matrix = []
        for line, row in rows:
            if len(row) != width:
                raise IngestionError(
                    f"ragged row: {len(row)} cells, expected {width}", str(path), line, min(len(row), width) + 1
                )
            matrix.append([self._parse_cell(cell, path, line, col) for col, cell in enumerate(row, start=1)])
        return matrix

    def _grid(self, header: Optional[Tuple[int, List[float]]], m: int, path: Path) -> Grid:
        if header is None:
            return Grid.midpoint(m)
        line, points = header
        if len(points) != m:
            raise IngestionError(f"header has {len(points)} grid points, rows have {m} curve values", str(path), line)
        try:
            return Grid(points)
        except DimensionError as exc:
            raise IngestionError(f"invalid grid header: {exc}", str(path), line)

    def ingest_csv(
        self,
        path: Path,
        layout: CsvLayout = CsvLayout.RESPONSE_FIRST,
        response_path: Optional[Path] = None,
    ) -> FunctionalDataset:
        """Parse a dataset file; a first row starting with "t:" lists the grid points"""
        path = Path(path)
        header, rows = self._split_header(self._read_rows(path), path)
        if not rows:
            raise IngestionError("file has no data rows", str(path))

        if layout == CsvLayout.RESPONSE_FIRST:
            matrix = self._parse_matrix(rows, path, 3)
            y = [row[0] for row in matrix]
            X = [row[1:] for row in matrix]
        else:
            if response_path is None:
                raise IngestionError("two_file layout needs a response file", str(path))
            X = self._parse_matrix(rows, path, 2)
            response_rows = self._read_rows(Path(response_path))
            y = [row[0] for row in self._parse_matrix(response_rows, Path(response_path), 1)]
            if len(y) != len(X):
                raise IngestionError(f"{len(y)} responses for {len(X)} curves", str(response_path))

        if len(y) < 2:
            raise IngestionError(f"a dataset needs n >= 2 observations, got {len(y)}", str(path))
        grid = self._grid(header, len(X[0]), path)
        logger.info("ingested %s: n=%d m=%d", path, len(y), grid.m)
        return FunctionalDataset(grid, y, X)

    def write_dataset(self, data: FunctionalDataset, path: Path) -> None:
        """Write a dataset in the response_first layout with a grid header"""
        self._write_csv(
            Path(path),
            [HEADER_PREFIX + repr(float(data.grid.points[0]))] + [repr(float(t)) for t in data.grid.points[1:]],
            ([y] + list(row) for y, row in zip(data.y.tolist(), data.X.tolist())),
        )

    # Configuration
    def load_config(self, path: Path) -> ExperimentConfig:
        try:
            document = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, ValueError) as exc:
            raise ConfigurationError(f"cannot read config {path}: {exc}")
        try:
            return ExperimentConfig.model_validate(document)
        except ValidationError as exc:
            raise ConfigurationError(f"invalid config {path}: {exc}")

    # Emission
    def _format(self, value: Any) -> str:
        if value is None:
            return ""
        if isinstance(value, bool):
            return "true" if value else "false"
        if isinstance(value, float):
            return repr(value)
        return str(value)

    def _write_csv(self, path: Path, header: Sequence[str], rows) -> None:
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            with open(path, "w", newline="", encoding="utf-8") as handle:
                writer = csv.writer(handle, lineterminator="\n")
                writer.writerow(header)
                for row in rows:
                    writer.writerow([self._format(v) for v in row])
        except OSError as exc:
            raise EmissionError(f"cannot write {path}: {exc}")

    def emit_results(
        self,
        table,
        path: Path,
        fmt: OutputFormat = OutputFormat.CSV,
        metadata: Optional[ResultMetadata] = None,
    ) -> Path:
        """Write a result table as CSV (fixed column order) or JSON (metadata + records)"""
        path = Path(path)
        records = table.records()
        if fmt == OutputFormat.CSV:
            self._write_csv(path, table.columns, ([record[c] for c in table.columns] for record in records))
        else:
            if metadata is None:
                raise EmissionError("JSON results need a metadata block")
            document = ResultDocument(metadata=metadata, records=records)
            try:
                path.parent.mkdir(parents=True, exist_ok=True)
                path.write_text(document.model_dump_json(indent=2), encoding="utf-8")
            except OSError as exc:
                raise EmissionError(f"cannot write {path}: {exc}")
        logger.info("wrote %d records to %s", len(records), path)
        return path

    def emit_replications(self, records: List[ReplicationRecord], path: Path) -> Path:
        """Per-replication values behind every emitted mean"""
        path = Path(path)
        columns = ReplicationRecord.columns
        self._write_csv(path, columns, ([getattr(r, c) for c in columns] for r in records))
        return path

    def load_results(self, path: Path) -> ResultDocument:
        try:
            return ResultDocument.model_validate_json(Path(path).read_text(encoding="utf-8"))
        except (OSError, ValidationError) as exc:
            raise IngestionError(f"cannot read results: {exc}", str(path))

