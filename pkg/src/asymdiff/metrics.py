"""Network MSD, Monte-Carlo aggregation and per-iteration operation counts."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

ZERO_MSD_FLOOR = 1e-300
ZERO_MSD_DB = -3000.0


def network_msd(estimates, truth):
    """``(1/N) * sum_n ||W° - W_n||^2`` for one trial at one iteration.

    ``estimates`` is ``(..., N, M)``; leading axes are batched.
    """
    w = np.asarray(estimates, dtype=float)
    w0 = np.asarray(truth, dtype=float)
    if w.shape[-1] != w0.shape[-1]:
        raise ValueError(f"dimension mismatch: estimates {w.shape}, truth {w0.shape}")
    dev = w - w0
    return np.einsum("...nm,...nm->...", dev, dev) / w.shape[-2]


def to_db(msd):
    """``10 log10`` with a -3000 dB sentinel for MSD below 1e-300."""
    msd = np.asarray(msd, dtype=float)
    with np.errstate(divide="ignore"):
        db = 10.0 * np.log10(np.maximum(msd, ZERO_MSD_FLOOR))
    return np.where(msd < ZERO_MSD_FLOOR, ZERO_MSD_DB, db)


def average_trials(trial_msd):
    """Per-iteration mean of linear MSD over trials, summed in trial order.

    ``trial_msd`` is ``(trials, iterations)``. Uses compensated summation so
    the result does not depend on how the trials were computed.
    """
    arr = np.asarray(trial_msd, dtype=float)
    if arr.ndim != 2 or arr.shape[0] == 0:
        raise ValueError("need a non-empty (trials, iterations) array")
    cols = arr.T.tolist()
    return np.array([math.fsum(col) for col in cols]) / arr.shape[0]


def steady_state(msd, fraction=0.1):
    """Mean over the last ``fraction`` of iterations (at least one sample)."""
    msd = np.asarray(msd, dtype=float)
    k = max(1, int(round(fraction * msd.shape[-1])))
    return msd[..., -k:].mean(axis=-1)


@dataclass
class MsdCurve:
    """Monte-Carlo averaged learning curve for one algorithm.

    ``values_db`` is indexed by iteration: entry ``i`` is the MSD after the
    ``i``-th adapt-then-combine step. ``initial_db`` is the MSD of the
    starting estimates.
    """

    algorithm: str
    values_db: np.ndarray
    trials: int
    diverged_trials: int
    initial_db: float

    @classmethod
    def from_trials(cls, algorithm, trial_msd, diverged, initial_msd):
        """Average the non-diverged rows of ``trial_msd``.

        Raises
        ------
        RuntimeError
            If every trial diverged.
        """
        trial_msd = np.asarray(trial_msd, dtype=float)
        diverged = np.asarray(diverged, dtype=bool)
        kept = trial_msd[~diverged]
        if kept.shape[0] == 0:
            raise RuntimeError(f"all {trial_msd.shape[0]} trials of {algorithm} diverged")
        return cls(
            algorithm=algorithm,
            values_db=to_db(average_trials(kept)),
            trials=int(kept.shape[0]),
            diverged_trials=int(diverged.sum()),
            initial_db=float(to_db(initial_msd)),
        )

    def final_db(self, fraction=0.1):
        return float(steady_state(self.values_db, fraction))


def write_msd_csv(curves, stream):
    """CSV with header ``iteration,algorithm,msd_db``; rows ordered by iteration,
    then by the order of ``curves``."""
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["iteration", "algorithm", "msd_db"])
    if not curves:
        return
    length = len(curves[0].values_db)
    for i in range(length):
        for curve in curves:
            writer.writerow([i, curve.algorithm, repr(float(curve.values_db[i]))])


def read_msd_csv(stream):
    """Parse the MSD CSV into ``{algorithm: (iterations, values_db)}`` keeping
    first-appearance order."""
    reader = csv.reader(stream)
    header = next(reader, None)
    if header != ["iteration", "algorithm", "msd_db"]:
        raise ValueError(f"unexpected CSV header {header!r}")
    series = {}
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != 3:
            raise ValueError(f"line {lineno}: expected 3 fields, got {len(row)}")
        try:
            it, value = int(row[0]), float(row[2])
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
        xs, ys = series.setdefault(row[1], ([], []))
        xs.append(it)
        ys.append(value)
    if not series:
        raise ValueError("no data rows")
    return {k: (np.array(xs), np.array(ys)) for k, (xs, ys) in series.items()}


# -- complexity -------------------------------------------------------------


@dataclass(frozen=True)
class ComplexityRow:
    algorithm: str
    recursion_label: str
    multiplications: int
    additions: int
    sign_ops: int
    exp_ops: int
    abs_ops: int
    lower_bound: bool = False  # counts are "more than" figures


def complexity_table(M, N):
    """Closed-form operation counts per iteration for every algorithm step."""
    if M < 1 or N < 1:
        raise ValueError("M and N must be >= 1")
    adds = (3 * M - 1) * N
    comb = (N * M, (N - 1) * M)

    def row(alg, label, mul, add, sign=0, exp=0, abs_=0, lower=False):
        return ComplexityRow(alg, label, mul, add, sign, exp, abs_, lower)

    return [
        row("DSELMS", "adapt", (2 * M + 1) * N + M, adds, sign=N),
        row("DSELMS", "combine", *comb),
        row("DRVSSLMS", "adapt (step size)", (3 * M + 1) * N + M, adds, lower=True),
        row("DRVSSLMS", "adapt", (3 * M + 1) * N + M, adds, sign=N, lower=True),
        row("DRVSSLMS", "combine", *comb),
        row("DLLAD", "adapt", 2 * M * N + M, adds, abs_=N),
        row("DLLAD", "combine", *comb),
        row("DLLCLMS", "adapt (e>0)", (2 * M + 2) * N + M, adds, sign=N),
        row("DLLCLMS", "adapt (e<=0)", (2 * M + 2) * N + M, adds, sign=N),
        row("DLLCLMS", "combine", *comb),
        row("DQQCLMS", "adapt (e>0)", (2 * M + 3) * N + M, adds, sign=N),
        row("DQQCLMS", "adapt (e<=0)", (2 * M + 3) * N + M, adds, sign=N),
        row("DQQCLMS", "combine", *comb),
        row("DLECLMS", "adapt", (2 * M + 5) * N + M, 3 * M * N, exp=N),
        row("DLECLMS", "combine", *comb),
    ]


_COLUMNS = ("algorithm", "recursion_label", "multiplications", "additions",
            "sign_ops", "exp_ops", "abs_ops", "lower_bound")


def format_complexity_table(rows):
    """Aligned plain-text rendering; lower-bound counts are prefixed with '>'."""
    header = ["algorithm", "step", "mul", "add", "sign", "exp", "abs"]
    body = []
    for r in rows:
        mark = ">" if r.lower_bound else ""
        body.append([r.algorithm, r.recursion_label, f"{mark}{r.multiplications}",
                     str(r.additions), str(r.sign_ops), str(r.exp_ops), str(r.abs_ops)])
    widths = [max(len(line[i]) for line in [header] + body) for i in range(len(header))]
    lines = []
    for line in [header] + body:
        cells = [c.ljust(w) if i < 2 else c.rjust(w) for i, (c, w) in enumerate(zip(line, widths))]
        lines.append("  ".join(cells).rstrip())
    return "\n".join(lines) + "\n"


def write_complexity_csv(rows, stream):
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(_COLUMNS)
    for r in rows:
        writer.writerow([getattr(r, c) for c in _COLUMNS])
