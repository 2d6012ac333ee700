"""
Output side of the experiment runner: deterministic CSV and JSON payloads,
a timestamp sidecar kept apart from them, and the raw matrix dump.
"""
import csv
import io
import json
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, Iterable, List, Sequence

import numpy as np
from she_logging import logger

from screen_bie import __version__
from screen_bie.bie.assembly import GalerkinSystem

MATRIX_DTYPE = "<c16"


def envelope(command: str, config: Dict[str, Any], result: Any) -> Dict[str, Any]:
    return {
        "version": __version__,
        "command": command,
        "config": config,
        "result": result,
    }


def to_json(document: Any) -> str:
    return json.dumps(document, sort_keys=True, indent=2, allow_nan=False) + "\n"


def to_csv(columns: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow(["" if value is None else value for value in row])
    return buffer.getvalue()


def _write(path: Path, text: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    logger.debug("Wrote output file", extra={"path": str(path), "bytes": len(text)})
    return path


def write_json(path: Path, document: Any) -> Path:
    return _write(path, to_json(document))


def write_csv(path: Path, columns: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    return _write(path, to_csv(columns, rows))


def write_meta(output_dir: Path, name: str, command: str, outputs: List[Path]) -> Path:
    """Wall-clock data lives only here, never in the compared payloads."""
    return write_json(
        output_dir / f"{name}.meta.json",
        {
            "command": command,
            "version": __version__,
            "finished_at": datetime.now(timezone.utc).isoformat(),
            "outputs": sorted(p.name for p in outputs),
        },
    )


def dump_matrix(output_dir: Path, stem: str, system: GalerkinSystem) -> List[Path]:
    """
    <stem>.bin: int64 dimension followed by the matrix as row-major
    little-endian complex128. <stem>.json describes it.
    """
    output_dir.mkdir(parents=True, exist_ok=True)
    n = system.dof_count
    binary = output_dir / f"{stem}.bin"
    with binary.open("wb") as handle:
        handle.write(np.array([n], dtype="<i8").tobytes())
        handle.write(np.ascontiguousarray(system.matrix, dtype=MATRIX_DTYPE).tobytes(order="C"))
    k = system.wavenumber.k
    metadata = write_json(
        output_dir / f"{stem}.json",
        {
            "dimension": n,
            "dtype": "complex128",
            "byte_order": "little",
            "layout": "row-major",
            "header": "int64 dimension",
            "problem": system.problem.value,
            "space": system.space.kind.value,
            "wavenumber": {"re": k.real, "im": k.imag},
            "elements": system.space.mesh.n_elements,
        },
    )
    logger.info("Dumped matrix", extra={"path": str(binary), "dimension": n})
    return [binary, metadata]


def read_matrix(path: Path) -> np.ndarray:
    raw = path.read_bytes()
    n = int(np.frombuffer(raw[:8], dtype="<i8")[0])
    return np.frombuffer(raw[8:], dtype=MATRIX_DTYPE).reshape(n, n)
