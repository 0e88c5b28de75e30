"""CSV and JSON-lines input/output.

Trajectories, filter estimates, error reports and study records are written as
CSV through pandas (17 significant digits, ``\\n`` line endings) or as JSON
lines through orjson, one flat object per row. Trajectory rows run over
k = 0..T-1; the terminal state is restored on load from the last increment.
"""

import logging
import math
from pathlib import Path
from typing import Any, Dict, Iterable, List, Literal, Optional, Sequence, Union

import numpy as np
import orjson
import pandas as pd

from ..config import settings
from ..exceptions import DomainError, TrajectoryLengthError
from ..schemas.matrix_schemas import FilterMatrix
from ..schemas.study_schemas import StudyRecord
from ..schemas.trajectory_schemas import FilterEstimates, PairedTrajectory, Trajectory

logger = logging.getLogger(__name__)

OutputFormat = Literal["csv", "json"]
PathLike = Union[str, Path]

TRAJECTORY_COLUMNS = ["k", "zeta", "d_zeta"]
PAIR_COLUMNS = ["k", "alpha", "d_alpha", "beta", "d_beta"]
ESTIMATE_COLUMNS = ["k", "alpha_hat", "d_alpha_hat"]
ERROR_REPORT_COLUMNS = ["source", "g11", "g12", "g22", "trace", "gamma_ab"]


def trajectory_frame(traj: Trajectory) -> pd.DataFrame:
    """Rows ``k, zeta, d_zeta[, w]`` for k = 0..T-1."""
    frame = pd.DataFrame(
        {
            "k": np.arange(traj.steps, dtype=np.int64),
            "zeta": traj.values[:-1],
            "d_zeta": traj.increments,
        }
    )
    if traj.has_noises:
        frame["w"] = traj.noises
    return frame


def pair_frame(pair: PairedTrajectory) -> pd.DataFrame:
    """Rows ``k, alpha, d_alpha, beta, d_beta[, w0, w]`` for k = 0..T-1."""
    frame = pd.DataFrame(
        {
            "k": np.arange(pair.steps, dtype=np.int64),
            "alpha": pair.alpha.values[:-1],
            "d_alpha": pair.alpha.increments,
            "beta": pair.beta.values[:-1],
            "d_beta": pair.beta.increments,
        }
    )
    if pair.has_noises:
        frame["w0"] = pair.alpha.noises
        frame["w"] = pair.beta.noises
    return frame


def estimates_frame(estimates: FilterEstimates) -> pd.DataFrame:
    return pd.DataFrame(
        {
            "k": np.arange(estimates.steps, dtype=np.int64),
            "alpha_hat": estimates.alpha_hat,
            "d_alpha_hat": estimates.d_alpha_hat,
        }
    )


def filter_matrix_frame(phi: FilterMatrix) -> pd.DataFrame:
    return pd.DataFrame([phi.as_dict()])


def error_report_frame(rows: Iterable[Dict[str, Any]]) -> pd.DataFrame:
    return pd.DataFrame(list(rows), columns=ERROR_REPORT_COLUMNS)


def frame_to_csv(frame: pd.DataFrame) -> str:
    return frame.to_csv(index=False, float_format=settings.float_format, lineterminator="\n")


def frame_to_jsonl(frame: pd.DataFrame) -> str:
    lines = []
    for row in frame.to_dict(orient="records"):
        clean = {key: _json_value(value) for key, value in row.items()}
        lines.append(orjson.dumps(clean, option=orjson.OPT_SORT_KEYS | orjson.OPT_SERIALIZE_NUMPY).decode())
    return "".join(line + "\n" for line in lines)


def _json_value(value: Any) -> Any:
    if isinstance(value, float) and math.isnan(value):
        return None
    return value


def render(frame: pd.DataFrame, fmt: OutputFormat = "csv") -> str:
    if fmt == "csv":
        return frame_to_csv(frame)
    if fmt == "json":
        return frame_to_jsonl(frame)
    raise DomainError(f"Unknown output format {fmt!r}")


def write_text(text: str, path: Optional[PathLike]) -> None:
    """Write ``text`` to ``path`` (parents created); nothing happens for ``None``."""
    if path is None:
        return
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(text.encode("utf-8"))
    logger.info(f"Wrote {path}")


def _read_frame(path: PathLike, required: Sequence[str]) -> pd.DataFrame:
    path = Path(path)
    if not path.is_file():
        raise DomainError(f"Input file not found: {path}")
    frame = pd.read_csv(path, float_precision="round_trip")
    missing = [column for column in required if column not in frame.columns]
    if missing:
        raise DomainError(f"{path} lacks columns: {', '.join(missing)}")
    if frame.empty:
        raise TrajectoryLengthError(f"{path} holds no rows")
    if not np.array_equal(frame["k"].to_numpy(), np.arange(len(frame))):
        raise DomainError(f"{path}: column k must run 0..T-1 in order")
    return frame


def _restore(
    path: PathLike,
    column: str,
    values: np.ndarray,
    increments: np.ndarray,
    noises: Optional[np.ndarray],
) -> Trajectory:
    """Rebuild states 0..T; each stored increment must match the next row's state."""
    mismatch = np.abs(increments[:-1] - np.diff(values))
    atol = settings.IDENTITY_ATOL * max(1.0, float(np.max(np.abs(values))))
    bad = np.flatnonzero(~(mismatch <= atol))
    if bad.size:
        k = int(bad[0])
        raise DomainError(
            f"{path}: d_{column} at k={k} is {increments[k]!r} but {column} moves by "
            f"{values[k + 1] - values[k]!r} to the next row"
        )
    states = np.append(values, values[-1] + increments[-1])
    return Trajectory(values=states, increments=increments, noises=noises)


def read_trajectory_csv(path: PathLike) -> Trajectory:
    frame = _read_frame(path, TRAJECTORY_COLUMNS)
    noises = frame["w"].to_numpy(dtype=float) if "w" in frame.columns else None
    return _restore(path, "zeta", frame["zeta"].to_numpy(dtype=float), frame["d_zeta"].to_numpy(dtype=float), noises)


def read_pair_csv(path: PathLike) -> PairedTrajectory:
    """Load a paired trajectory; noise columns are optional and must come together."""
    frame = _read_frame(path, PAIR_COLUMNS)
    has_w0, has_w = "w0" in frame.columns, "w" in frame.columns
    if has_w0 != has_w:
        raise DomainError(f"{path}: noise columns w0 and w must appear together")
    pair = PairedTrajectory(
        alpha=_restore(
            path,
            "alpha",
            frame["alpha"].to_numpy(dtype=float),
            frame["d_alpha"].to_numpy(dtype=float),
            frame["w0"].to_numpy(dtype=float) if has_w0 else None,
        ),
        beta=_restore(
            path,
            "beta",
            frame["beta"].to_numpy(dtype=float),
            frame["d_beta"].to_numpy(dtype=float),
            frame["w"].to_numpy(dtype=float) if has_w else None,
        ),
    )
    logger.info(f"Loaded paired trajectory with T={pair.steps} from {path}")
    return pair


def records_frame(records: Sequence[StudyRecord]) -> pd.DataFrame:
    columns = list(StudyRecord.model_fields)
    return pd.DataFrame([record.model_dump() for record in records], columns=columns)


def render_records(records: Sequence[StudyRecord], fmt: OutputFormat = "csv") -> str:
    ordered = sorted(records, key=lambda record: record.sort_key)
    return render(records_frame(ordered), fmt)


def write_records(records: Sequence[StudyRecord], path: PathLike, fmt: OutputFormat = "csv") -> None:
    write_text(render_records(records, fmt), path)


def read_records(path: PathLike, fmt: Optional[OutputFormat] = None) -> List[StudyRecord]:
    """Read records written by ``write_records``; the format defaults from the suffix."""
    path = Path(path)
    if not path.is_file():
        raise DomainError(f"Records file not found: {path}")
    fmt = fmt or ("json" if path.suffix in (".json", ".jsonl") else "csv")
    if fmt == "json":
        rows = [orjson.loads(line) for line in path.read_text(encoding="utf-8").splitlines() if line.strip()]
    else:
        frame = pd.read_csv(path, float_precision="round_trip", dtype={"failure_reason": object})
        frame = frame.astype(object).where(pd.notna(frame), None)
        rows = frame.to_dict(orient="records")
    return [StudyRecord.model_validate(row) for row in rows]
