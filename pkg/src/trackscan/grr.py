"""Gage repeatability & reproducibility by two-way crossed ANOVA.

The study decomposes a complete parts x operators x trials grid into
repeatability (equipment variation), reproducibility (operator plus
operator-by-part interaction) and part variation, each reported as a
6-sigma spread. Negative variance-component estimates are clamped to zero.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np


class InsufficientTrials(Exception):
    """An R&R study needs at least 2 trials per cell."""


@dataclass
class GrrMeasurementSet:
    """Complete measurement grid shaped (parts, operators, trials)."""

    values: np.ndarray
    unit: str = "um"

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 3:
            raise ValueError("values must be a (parts, operators, trials) array")
        if min(self.values.shape) < 1:
            raise ValueError("grid must have at least one part, operator and trial")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("grid is incomplete: non-finite values present")

    @property
    def parts(self) -> int:
        return self.values.shape[0]

    @property
    def operators(self) -> int:
        return self.values.shape[1]

    @property
    def trials(self) -> int:
        return self.values.shape[2]


@dataclass
class GrrResult:
    """6-sigma spreads of the ANOVA variance components, in the input unit."""

    repeatability_ev: float
    reproducibility_av: float
    part_variation_pv: float
    total_rr: float
    total_variation: float
    percent_rr: float
    unit: str = "um"


def grr_study(data: GrrMeasurementSet) -> GrrResult:
    """Two-way crossed ANOVA with interaction (when both p > 1 and o > 1).

    EV comes from the mean-square error, AV from the operator and
    interaction components, PV from the part component. With a single
    operator reproducibility is 0 by definition; with a single part there
    is no part variation.
    """
    v = data.values
    p, o, r = v.shape
    if r < 2:
        raise InsufficientTrials(f"need at least 2 trials, got {r}")

    grand = v.mean()
    part_means = v.mean(axis=(1, 2))
    op_means = v.mean(axis=(0, 2))
    cell_means = v.mean(axis=2)

    ss_total = float(((v - grand) ** 2).sum())
    ss_part = float(o * r * ((part_means - grand) ** 2).sum())
    ss_op = float(p * r * ((op_means - grand) ** 2).sum())
    ss_cells = float(r * ((cell_means - grand) ** 2).sum())
    ss_inter = ss_cells - ss_part - ss_op
    ss_err = ss_total - ss_cells

    df_err = p * o * (r - 1)
    ms_err = ss_err / df_err

    with_interaction = p > 1 and o > 1
    if with_interaction:
        ms_inter = ss_inter / ((p - 1) * (o - 1))
        var_inter = max(0.0, (ms_inter - ms_err) / r)
        denom_ms = ms_inter
    else:
        var_inter = 0.0
        denom_ms = ms_err

    var_op = max(0.0, (ss_op / (o - 1) - denom_ms) / (p * r)) if o > 1 else 0.0
    var_part = max(0.0, (ss_part / (p - 1) - denom_ms) / (o * r)) if p > 1 else 0.0

    ev = 6.0 * np.sqrt(ms_err)
    av = 6.0 * np.sqrt(var_op + var_inter)
    pv = 6.0 * np.sqrt(var_part)
    total_rr = float(np.hypot(ev, av))
    total_variation = float(np.hypot(total_rr, pv))
    percent_rr = 100.0 * total_rr / total_variation if total_variation > 0 else 0.0
    return GrrResult(
        repeatability_ev=float(ev),
        reproducibility_av=float(av),
        part_variation_pv=float(pv),
        total_rr=total_rr,
        total_variation=total_variation,
        percent_rr=float(percent_rr),
        unit=data.unit,
    )


def read_grr_csv(path, unit: str = "um") -> GrrMeasurementSet:
    """Load a grid from CSV with header part,operator,trial,value.

    Labels may be arbitrary strings; they are mapped to grid indices in
    sorted order. The grid must be complete.
    """
    rows = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        required = {"part", "operator", "trial", "value"}
        if reader.fieldnames is None or not required.issubset(reader.fieldnames):
            raise ValueError("R&R CSV must have header part,operator,trial,value")
        for rec in reader:
            rows.append((rec["part"], rec["operator"], rec["trial"], float(rec["value"])))
    if not rows:
        raise ValueError("R&R CSV contains no data rows")

    def index(labels):
        return {k: i for i, k in enumerate(sorted(set(labels), key=_label_key))}

    parts = index(r[0] for r in rows)
    operators = index(r[1] for r in rows)
    trials = index(r[2] for r in rows)
    values = np.full((len(parts), len(operators), len(trials)), np.nan)
    for part, op, trial, value in rows:
        values[parts[part], operators[op], trials[trial]] = value
    if not np.all(np.isfinite(values)):
        raise ValueError("R&R grid is incomplete")
    return GrrMeasurementSet(values=values, unit=unit)


def _label_key(label: str):
    try:
        return (0, float(label), label)
    except ValueError:
        return (1, 0.0, label)


def write_grr_csv(data: GrrMeasurementSet, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("part,operator,trial,value\n")
        p, o, r = data.values.shape
        for i in range(p):
            for j in range(o):
                for k in range(r):
                    fh.write(f"{i + 1},{j + 1},{k + 1},{float(data.values[i, j, k])!r}\n")
