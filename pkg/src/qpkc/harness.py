"""Experiment drivers behind the command line: leakage table, sessions, sweeps, Monte Carlo.

Each ``cmd_*`` function takes a plain config record and returns a
:class:`Report`. Trial ``i`` always runs on ``default_rng([seed, i])``, so a
report does not depend on how trials are scheduled across workers.
"""
from __future__ import annotations

import csv
import io
import json
import math
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import gmn
from .protocol import AdversaryStrategy, SessionConfig, SessionOutcome, run_session

DEFAULT_K = (10, 20, 50, 100, 1000)

TABLE1_COLUMNS = ["K", "F", "I_AE", "I_AE_clamped", "P_e"]
SESSION_COLUMNS = [
    "trial", "aborted", "abort_stage", "decoy_err_keygen", "decoy_err_issue", "recycle_err",
    "msg_ok", "digest_ok", "eve_bit_accuracy", "mean_bell_fidelity",
]
SWEEP_COLUMNS = [
    "attack_fraction", "sessions", "completed", "abort_probability",
    "eve_mean_accuracy", "eve_decoded_fraction", "mean_decoy_error_rate",
]
ESTIMATE_COLUMNS = ["K", "F_theory", "Pe_theory", "Pe_empirical", "EveAcc_theory", "EveAcc_empirical", "trials"]


@dataclass
class Report:
    columns: list[str]
    rows: list[dict[str, Any]] = field(default_factory=list)
    round_digits: int | None = None

    def column(self, name: str) -> list[Any]:
        return [r[name] for r in self.rows]

    def __len__(self):
        return len(self.rows)


# ---------------------------------------------------------------------------
# configs


@dataclass(frozen=True)
class Table1Config:
    k_values: tuple[int, ...] = DEFAULT_K
    mode: gmn.FidelityMode = gmn.FidelityMode.APPROX
    round4: bool = False

    def __post_init__(self):
        if not self.k_values:
            raise ValueError("K list is empty")
        for k in self.k_values:
            if int(k) != k or k < 1:
                raise ValueError(f"bad K value {k!r}: must be a positive integer")
        object.__setattr__(self, "mode", gmn.FidelityMode(self.mode))


@dataclass(frozen=True)
class SessionRunConfig:
    session: SessionConfig = SessionConfig()
    adversary: AdversaryStrategy = AdversaryStrategy()
    trials: int = 100
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        _check_trials(self.trials)


@dataclass(frozen=True)
class SweepConfig:
    session: SessionConfig = SessionConfig()
    adversary: AdversaryStrategy = AdversaryStrategy("entangle")
    fractions: tuple[float, ...] = ()
    trials: int = 1000
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        if not self.fractions:
            raise ValueError("fraction grid is empty")
        for f in self.fractions:
            if not 0.0 <= f <= 1.0:
                raise ValueError(f"attack fraction {f!r} outside [0, 1]")
        _check_trials(self.trials)


@dataclass(frozen=True)
class EstimateSimConfig:
    k_values: tuple[int, ...] = (10,)
    message_length: int = 1
    resolution: int = 16
    trials: int = 100_000
    seed: int = 0
    fidelity: float | None = None
    engine: str = "vectorized"

    def __post_init__(self):
        _check_trials(self.trials)
        if self.message_length < 1:
            raise ValueError(f"message length must be >= 1, got {self.message_length}")
        if not self.k_values:
            raise ValueError("K list is empty")
        for k in self.k_values:
            if k < 1:
                raise ValueError(f"bad K value {k!r}: must be a positive integer")
        if self.fidelity is not None:
            gmn.deviation_angle(self.fidelity)


def _check_trials(trials: int) -> None:
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")


def parse_grid(text: str, kind: Callable[[str], Any] = float) -> tuple:
    """``"a,b,c"`` or inclusive ``"start:stop:step"``."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"range must be start:stop:step, got {text!r}")
        start, stop, step = (float(p) for p in parts)
        if step <= 0 or stop < start:
            raise ValueError(f"bad range {text!r}")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        values = [round(start + i * step, 12) for i in range(count)]
        return tuple(kind(v) if kind is float else kind(round(v)) for v in values)
    if not text:
        return ()
    return tuple(kind(p) for p in text.split(","))


# ---------------------------------------------------------------------------
# commands


def cmd_table1(config: Table1Config) -> Report:
    report = Report(list(TABLE1_COLUMNS), round_digits=4 if config.round4 else None)
    for row in gmn.table1_report(config.k_values, config.mode):
        report.rows.append({
            "K": row.K, "F": row.F, "I_AE": row.I_AE, "I_AE_clamped": row.I_AE_clamped, "P_e": row.P_e,
        })
    return report


def _session_trial(session: SessionConfig, adversary: AdversaryStrategy, seed: int, trial: int) -> SessionOutcome:
    return run_session(session, adversary, np.random.default_rng([seed, trial]))


def _run_trials(session, adversary, seed, trials, workers) -> list[SessionOutcome]:
    if workers <= 1:
        return [_session_trial(session, adversary, seed, t) for t in range(trials)]
    n = trials
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_session_trial, [session] * n, [adversary] * n, [seed] * n, range(trials),
                             chunksize=max(1, n // (4 * workers))))


def _mean(values) -> float | None:
    values = [v for v in values if v is not None]
    return sum(values) / len(values) if values else None


def session_row(trial, o: SessionOutcome) -> dict[str, Any]:
    return {
        "trial": trial,
        "aborted": o.aborted,
        "abort_stage": o.abort_stage,
        "decoy_err_keygen": o.decoy_error_rate_keygen,
        "decoy_err_issue": o.decoy_error_rate_issue,
        "recycle_err": o.recycle_error_rate,
        "msg_ok": o.msg_ok,
        "digest_ok": o.digest_ok,
        "eve_bit_accuracy": o.eve_bit_accuracy,
        "mean_bell_fidelity": o.mean_bell_fidelity,
    }


def cmd_session(config: SessionRunConfig) -> Report:
    outcomes = _run_trials(config.session, config.adversary, config.seed, config.trials, config.workers)
    report = Report(list(SESSION_COLUMNS))
    report.rows = [session_row(t, o) for t, o in enumerate(outcomes)]
    # summary: rates over all trials, error rates averaged where defined
    report.rows.append({
        "trial": "summary",
        "aborted": sum(o.aborted for o in outcomes) / len(outcomes),
        "abort_stage": None,
        "decoy_err_keygen": _mean(o.decoy_error_rate_keygen for o in outcomes),
        "decoy_err_issue": _mean(o.decoy_error_rate_issue for o in outcomes),
        "recycle_err": _mean(o.recycle_error_rate for o in outcomes),
        "msg_ok": sum(o.msg_ok for o in outcomes) / len(outcomes),
        "digest_ok": sum(bool(o.digest_ok) for o in outcomes) / len(outcomes),
        "eve_bit_accuracy": _mean(o.eve_bit_accuracy for o in outcomes),
        "mean_bell_fidelity": _mean(o.mean_bell_fidelity for o in outcomes),
    })
    return report


def cmd_sweep(config: SweepConfig) -> Report:
    """One row per attack fraction; every grid point reuses the same trial seeds."""
    report = Report(list(SWEEP_COLUMNS))
    base = config.adversary
    for f in config.fractions:
        adv = AdversaryStrategy(base.kind, attack_fraction=f, flip_probability=base.flip_probability, channels=base.channels)
        outcomes = _run_trials(config.session, adv, config.seed, config.trials, config.workers)
        done = [o for o in outcomes if o.completed]
        report.rows.append({
            "attack_fraction": f,
            "sessions": len(outcomes),
            "completed": len(done),
            "abort_probability": 1 - len(done) / len(outcomes),
            "eve_mean_accuracy": _mean(o.eve_bit_accuracy for o in done),
            "eve_decoded_fraction": _mean(o.eve_decoded_fraction for o in done),
            "mean_decoy_error_rate": _mean(o.decoy_error_rate_keygen for o in outcomes),
        })
    return report


def cmd_estimate_sim(config: EstimateSimConfig) -> Report:
    report = Report(list(ESTIMATE_COLUMNS))
    for i, K in enumerate(config.k_values):
        rng = np.random.default_rng([config.seed, i])
        message = [int(b) for b in rng.integers(2, size=config.message_length)]
        res = gmn.simulate_state_estimation_attack(
            config.resolution, K, message, config.trials, rng, fidelity=config.fidelity, engine=config.engine,
        )
        report.rows.append({
            "K": K,
            "F_theory": res.F,
            "Pe_theory": res.P_e,
            "Pe_empirical": res.empirical_Pe,
            "EveAcc_theory": res.F,
            "EveAcc_empirical": res.empirical_Pc,
            "trials": res.trials,
        })
    return report


# ---------------------------------------------------------------------------
# serialization

_INT_RE = re.compile(r"^-?\d+$")


def format_value(value: Any, round_digits: int | None = None) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        if round_digits is not None:
            return f"{float(value):.{round_digits}f}"
        text = format(float(value), ".17g")
        if not any(c in text for c in ".eEn"):
            text += ".0"
        return text
    return str(value)


def parse_value(text: str) -> Any:
    if text == "":
        return None
    if text in ("true", "false"):
        return text == "true"
    if _INT_RE.match(text):
        return int(text)
    try:
        return float(text)
    except ValueError:
        return text


def _json_value(value: Any, round_digits: int | None):
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return round(float(value), round_digits) if round_digits is not None else float(value)
    return value


def render_report(report: Report, fmt: str = "csv") -> str:
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(report.columns)
        for row in report.rows:
            writer.writerow([format_value(row.get(c), report.round_digits) for c in report.columns])
        return buf.getvalue()
    if fmt == "json":
        data = [{c: _json_value(row.get(c), report.round_digits) for c in report.columns} for row in report.rows]
        return json.dumps(data, indent=2) + "\n"
    raise ValueError(f"unknown format {fmt!r}; use csv or json")


def write_report(report: Report, path: str | Path, fmt: str = "csv") -> None:
    text = render_report(report, fmt)
    path = Path(path)
    try:
        with path.open("w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write report to {path}: {exc.strerror or exc}") from exc


def read_report_text(text: str, fmt: str = "csv") -> Report:
    if fmt == "json":
        rows = json.loads(text)
        columns = list(rows[0]) if rows else []
        return Report(columns, rows)
    reader = csv.reader(io.StringIO(text))
    columns = next(reader)
    rows = [{c: parse_value(v) for c, v in zip(columns, line)} for line in reader]
    return Report(columns, rows)


def read_report(path: str | Path, fmt: str = "csv") -> Report:
    return read_report_text(Path(path).read_text(encoding="utf-8"), fmt)


def fig1_grid(start: int = 10, stop: int = 1000, step: int = 10) -> tuple[int, ...]:
    return tuple(range(start, stop + 1, step))

