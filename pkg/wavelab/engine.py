"""SimulationEngine — run-time state holder between the stepper and the CLI.

Wraps :func:`wavelab.timestepper.run`, turns stride snapshots into
:class:`DiagnosticsRecord` rows, records them as JSONL, writes checkpoints
on a cadence and on abort, and notifies registered observers.
"""

from __future__ import annotations

import io
import json
import logging
import threading
from collections import deque
from dataclasses import asdict, dataclass
from datetime import datetime
from pathlib import Path
from typing import Callable, Optional, Union

from wavelab.checkpoint import write_checkpoint
from wavelab.config import AnalysisConfig, RunConfig
from wavelab.littlewood_paley import control_norms, product_norm
from wavelab.series import DiagnosticsRecord, write_series
from wavelab.timestepper import RunResult, run
from wavelab.waterwave import WaveState, conserved, holo_defect

logger = logging.getLogger(__name__)

# ---------------------------------------------------------------------------
# Defaults
# ---------------------------------------------------------------------------

_SESSION_NAME: str = "records.jsonl"
_ACTIVITY_LOG_MAX: int = 200

# ---------------------------------------------------------------------------
# Events
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RunStarted:
    n_points: int
    scheme: str
    t_end: float


@dataclass(frozen=True)
class RecordEmitted:
    step: int
    record: DiagnosticsRecord


@dataclass(frozen=True)
class CheckpointWritten:
    path: str
    t: float


@dataclass(frozen=True)
class RunAborted:
    reason: str
    t: float


@dataclass(frozen=True)
class RunFinished:
    steps: int
    t: float


Event = Union[RunStarted, RecordEmitted, CheckpointWritten, RunAborted, RunFinished]


def diagnose(
    state: WaveState, analysis: AnalysisConfig = AnalysisConfig(), leak: float = 0.0
) -> DiagnosticsRecord:
    """Conserved quantities, 𝓗^s and Zygmund norms, control norms and leakage."""
    energy, momentum = conserved(state)
    diff = state.differentiate()
    pair = (diff.Wa, diff.R)
    big_a, big_b = control_norms(diff, analysis.zygmund_eps)
    defect = max(leak, holo_defect(state.full_W(), state.Q))
    return DiagnosticsRecord(
        t=float(state.t),
        E=energy,
        P=momentum,
        Hs=product_norm(pair, analysis.sobolev_index, "H"),
        Wr=product_norm(pair, analysis.holder_index, "W"),
        A=big_a,
        B=big_b,
        holo_defect=defect,
    )


class SimulationEngine:
    """Drives one simulation and keeps its diagnostics."""

    # ------------------------------------------------------------------
    # Initialisation
    # ------------------------------------------------------------------

    def __init__(self, config: RunConfig, out_dir: Optional[Path] = None) -> None:
        self.config = config
        self.out_dir: Path = Path(out_dir if out_dir is not None else config.output.out_dir)
        self.records: list[DiagnosticsRecord] = []
        self.activity_log: deque[tuple[datetime, str]] = deque(maxlen=_ACTIVITY_LOG_MAX)
        self.last_checkpoint: Optional[Path] = None
        self.result: Optional[RunResult] = None

        self._session_file: Optional[io.TextIOWrapper] = None
        self._session_path: Optional[Path] = None
        self._n_observed: int = 0

        self._callbacks: list[Callable[[Event], None]] = []
        self._callbacks_lock: threading.Lock = threading.Lock()

    # ------------------------------------------------------------------
    # Callback registration
    # ------------------------------------------------------------------

    def on_event(self, callback: Callable[[Event], None]) -> None:
        with self._callbacks_lock:
            self._callbacks.append(callback)

    def remove_event(self, callback: Callable[[Event], None]) -> None:
        with self._callbacks_lock:
            if callback in self._callbacks:
                self._callbacks.remove(callback)

    def _emit(self, event: Event) -> None:
        """Dispatch *event* to all registered callbacks."""
        with self._callbacks_lock:
            callbacks = list(self._callbacks)
        for cb in callbacks:
            try:
                cb(event)
            except Exception:
                logger.exception("Exception in record callback %r", cb)

    def _log(self, message: str) -> None:
        self.activity_log.append((datetime.now(), message))

    # ------------------------------------------------------------------
    # Session recording
    # ------------------------------------------------------------------

    def start_session(self, path: Optional[Path] = None) -> Path:
        """Begin recording diagnostics rows to a JSONL file."""
        path = Path(path) if path is not None else self.out_dir / _SESSION_NAME
        path.parent.mkdir(parents=True, exist_ok=True)
        self._session_path = path
        self._session_file = open(path, "w", encoding="utf-8")  # noqa: SIM115
        self._log(f"Session recording started: {path.name}")
        return path

    def stop_session(self) -> None:
        if self._session_file is not None:
            self._session_file.close()
            self._session_file = None
            name = self._session_path.name if self._session_path else "unknown"
            self._session_path = None
            self._log(f"Session recording stopped: {name}")

    @property
    def is_recording(self) -> bool:
        return self._session_file is not None

    def _record(self, record: DiagnosticsRecord) -> None:
        if self._session_file is None:
            return
        self._session_file.write(json.dumps(asdict(record)) + "\n")
        self._session_file.flush()

    # ------------------------------------------------------------------
    # Checkpoints
    # ------------------------------------------------------------------

    @property
    def checkpoint_path(self) -> Path:
        return self.out_dir / self.config.output.checkpoint_name

    def write_checkpoint(self, state: WaveState, path: Optional[Path] = None) -> Path:
        path = write_checkpoint(state, path or self.checkpoint_path)
        self.last_checkpoint = path
        self._log(f"Checkpoint at t={state.t:.6f}")
        self._emit(CheckpointWritten(path=str(path), t=float(state.t)))
        return path

    # ------------------------------------------------------------------
    # Running
    # ------------------------------------------------------------------

    def _observe(self, step: int, state: WaveState, leak: float) -> None:
        record = diagnose(state, self.config.analysis, leak)
        self.records.append(record)
        self._record(record)
        self._emit(RecordEmitted(step=step, record=record))
        self._n_observed += 1
        every = self.config.stepper.checkpoint_every
        if every and step > 0 and self._n_observed % every == 0:
            self.write_checkpoint(state)

    def run(self, initial: WaveState, checkpoint: bool = True) -> RunResult:
        """Integrate *initial* to ``stepper.t_end``.

        The final (or last good) state is checkpointed when *checkpoint* is set.
        """
        cfg = self.config.stepper
        self._n_observed = 0
        self._emit(RunStarted(initial.grid.n_points, cfg.scheme, cfg.t_end))
        self._log(f"Run started: n={initial.grid.n_points} scheme={cfg.scheme}")
        result = run(initial, cfg, self._observe)
        self.result = result
        if result.aborted:
            logger.warning("Run aborted at t=%.6f: %s", result.final.t, result.reason)
            self._emit(RunAborted(reason=result.reason, t=float(result.final.t)))
        else:
            logger.info("Run finished after %d steps at t=%.6f", result.steps, result.final.t)
            self._emit(RunFinished(steps=result.steps, t=float(result.final.t)))
        if checkpoint:
            self.write_checkpoint(result.final)
        return result

    def export_series(self, path: Optional[Path] = None) -> Path:
        fmt = self.config.output.series_format
        path = path or self.out_dir / f"series.{fmt}"
        return write_series(self.records, path, fmt)
