"""Declarative parameter sweeps over the detection scheme, emitted as CSV.

A sweep file is INI-style text::

    [sweep]
    mode = analytic
    m_range = 1:20

    [fixed]
    G = 1
    V = 1000
    NP_H = 1
    sigma_MCC = 0.1
    eta1 = 1e-6
    k = 2

    [swept]
    n = 1:2:9

Ranges use ``start:step:stop`` with both ends inclusive; an explicit list is
written ``a, b, c``. ``m_range`` also accepts ``start:stop`` (unit step).
Setting ``NP_H = computed`` derives the healthy feature from an ``[ncc]``
section of channel parameters, with ``V`` as the sample volume.
"""

from __future__ import annotations

import configparser
import csv
import io
import itertools
import math
import re
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Iterator, Union

import numpy as np

from .channel import NccParameters, healthy_feature_np_h
from .detector import (AbnormalityModel, DetectorSpec, achieved_false_alarm,
                       ncc_detection_probability, ncc_misdetection_probability)
from .errors import ConfigError, NadsError
from .fusion import MccParameters, mcc_error_probabilities
from .oracle import TrialConfig, simulate_end_to_end, simulate_snm_tier
from .system import DesignConstraints, optimize_concentration, system_performance

TABLE_PARAMS = ("G", "V", "NP_H", "sigma_MCC", "eta1", "n", "k")
CONSTRAINT_PARAMS = ("xi", "gamma")
PARAMS = TABLE_PARAMS + CONSTRAINT_PARAMS
MODES = ("analytic", "validate", "optimize")
SWEEP_KEYS = ("mode", "m_range", "trials", "seed", "sensor_mode")
NCC_KEYS = tuple(f.name for f in fields(NccParameters) if f.name != "sample_volume")
RESULT_COLUMNS = ("M", "np_h_source", "P_M_NCC", "P_F_NCC", "P_F_NCC_achieved",
                  "P_M_MCC", "P_F_MCC", "P_D", "P_F", "P_M")
PROB_COLUMNS = RESULT_COLUMNS[2:]
FLUSH_BELOW = 1e-30
Z_LIMIT = 4.0

Number = Union[int, float]
_INT_RE = re.compile(r"^[+-]?\d+$")


def _number(text: str, key: str) -> Number:
    text = text.strip()
    try:
        return int(text) if _INT_RE.match(text) else float(text)
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {text!r} as a number") from None


def _fmt(value: object) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


@dataclass(frozen=True)
class Grid:
    """Values of one swept parameter: either a ``start:step:stop`` range or a list."""

    start: Number | None = None
    step: Number | None = None
    stop: Number | None = None
    values_list: tuple[Number, ...] | None = None

    @classmethod
    def parse(cls, text: str, key: str) -> "Grid":
        if ":" in text:
            parts = [p for p in text.split(":")]
            if len(parts) != 3:
                raise ConfigError(f"{key}: range must be start:step:stop, got {text!r}")
            start, step, stop = (_number(p, key) for p in parts)
            if not step > 0:
                raise ConfigError(f"{key}: range step must be positive, got {step!r}")
            if start > stop:
                raise ConfigError(f"{key}: range start {start!r} exceeds stop {stop!r}")
            return cls(start=start, step=step, stop=stop)
        items = [t for t in re.split(r"[,\s]+", text.strip().strip("[]")) if t]
        if not items:
            raise ConfigError(f"{key}: empty value list")
        return cls(values_list=tuple(_number(t, key) for t in items))

    def values(self) -> list[Number]:
        if self.values_list is not None:
            return list(self.values_list)
        count = math.floor((self.stop - self.start) / self.step + 1e-9) + 1
        if all(isinstance(v, int) for v in (self.start, self.step, self.stop)):
            return [self.start + i * self.step for i in range(count)]
        # Rounding removes accumulation noise such as 6.000000000000001.
        return [round(self.start + i * self.step, 12) for i in range(count)]

    def to_text(self) -> str:
        if self.values_list is not None:
            return ", ".join(_fmt(v) for v in self.values_list)
        return f"{_fmt(self.start)}:{_fmt(self.step)}:{_fmt(self.stop)}"


@dataclass(frozen=True)
class SweepConfig:
    fixed: dict[str, object]
    swept: dict[str, Grid] = field(default_factory=dict)
    m_range: Grid = Grid(1, 1, 1)
    outputs: tuple[str, ...] = ()
    mode: str = "analytic"
    trials: int | None = None
    seed: int | None = None
    sensor_mode: str = "poisson"
    ncc: dict[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ConfigError(f"mode: expected one of {MODES}, got {self.mode!r}")
        if self.sensor_mode not in ("poisson", "analytic"):
            raise ConfigError(f"sensor_mode: expected poisson or analytic, got {self.sensor_mode!r}")
        for key in list(self.fixed) + list(self.swept):
            if key not in PARAMS:
                raise ConfigError(f"unknown parameter {key!r}")
        both = set(self.fixed) & set(self.swept)
        if both:
            raise ConfigError(f"parameter {sorted(both)[0]!r} is both fixed and swept")
        missing = [p for p in TABLE_PARAMS if p not in self.fixed and p not in self.swept]
        if missing:
            raise ConfigError(f"missing parameter {missing[0]!r}")
        np_h = self.fixed.get("NP_H")
        if np_h == "computed":
            absent = [k for k in ("receptors", "pulse_duration", "concentration",
                                  "binding_rate", "release_rate", "threshold")
                      if k not in self.ncc]
            if absent:
                raise ConfigError(f"ncc: NP_H = computed requires {absent[0]!r}")
        elif self.ncc:
            raise ConfigError("ncc: section given but NP_H is not 'computed'")
        for key in self.ncc:
            if key not in NCC_KEYS:
                raise ConfigError(f"ncc: unknown key {key!r}")
        for key, value in self.fixed.items():
            if isinstance(value, str) and not (key == "NP_H" and value == "computed"):
                raise ConfigError(f"{key}: expected a number, got {value!r}")
        for col in self.outputs:
            if col not in self.columns(all_columns=True):
                raise ConfigError(f"outputs: unknown column {col!r}")
        for m in self.m_range.values():
            if m < 1:
                raise ConfigError(f"m_range: sensor concentration must be >= 1, got {m!r}")

    @property
    def param_names(self) -> list[str]:
        return [p for p in PARAMS if p in self.fixed or p in self.swept]

    def columns(self, all_columns: bool = False) -> list[str]:
        cols = self.param_names + list(RESULT_COLUMNS) + ["flushed"]
        if self.outputs and not all_columns:
            return list(self.outputs)
        return cols

    def points(self) -> Iterator[dict[str, object]]:
        """Parameter assignments in row order: first swept key outermost."""
        names = list(self.swept)
        for combo in itertools.product(*(self.swept[k].values() for k in names)):
            point = dict(self.fixed)
            point.update(zip(names, combo))
            yield {p: point[p] for p in self.param_names}

    def to_text(self) -> str:
        lines = ["[sweep]", f"mode = {self.mode}", f"m_range = {self.m_range.to_text()}"]
        if self.trials is not None:
            lines.append(f"trials = {self.trials}")
        if self.seed is not None:
            lines.append(f"seed = {self.seed}")
        lines.append(f"sensor_mode = {self.sensor_mode}")
        lines += ["", "[fixed]"] + [f"{k} = {_fmt(v)}" for k, v in self.fixed.items()]
        if self.swept:
            lines += ["", "[swept]"] + [f"{k} = {g.to_text()}" for k, g in self.swept.items()]
        if self.outputs:
            lines += ["", "[outputs]", "columns = " + ", ".join(self.outputs)]
        if self.ncc:
            lines += ["", "[ncc]"] + [f"{k} = {_fmt(v)}" for k, v in self.ncc.items()]
        return "\n".join(lines) + "\n"


def parse_config(text: str) -> SweepConfig:
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=(";", "#"))
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed configuration: {exc}") from None
    for section in parser.sections():
        if section not in ("sweep", "fixed", "swept", "outputs", "ncc"):
            raise ConfigError(f"unknown section [{section}]")

    def section(name: str) -> dict[str, str]:
        return dict(parser.items(name)) if parser.has_section(name) else {}

    head = section("sweep")
    for key in head:
        if key not in SWEEP_KEYS:
            raise ConfigError(f"sweep: unknown key {key!r}")
    fixed: dict[str, object] = {}
    for key, raw in section("fixed").items():
        if key not in PARAMS:
            raise ConfigError(f"unknown parameter {key!r}")
        fixed[key] = "computed" if raw.strip() == "computed" else _number(raw, key)
    swept: dict[str, Grid] = {}
    for key, raw in section("swept").items():
        if key not in PARAMS:
            raise ConfigError(f"unknown parameter {key!r}")
        swept[key] = Grid.parse(raw, key)
    out = section("outputs")
    for key in out:
        if key != "columns":
            raise ConfigError(f"outputs: unknown key {key!r}")
    outputs = tuple(c.strip() for c in out.get("columns", "").split(",") if c.strip())
    m_text = head.get("m_range", "1:1:1")
    if m_text.count(":") == 1:
        a, b = m_text.split(":")
        m_text = f"{a}:1:{b}"
    ncc = {k: float(_number(v, k)) for k, v in section("ncc").items()}
    trials = head.get("trials")
    seed = head.get("seed")
    return SweepConfig(
        fixed=fixed, swept=swept, m_range=Grid.parse(m_text, "m_range"), outputs=outputs,
        mode=head.get("mode", "analytic").strip(),
        trials=None if trials is None else int(_number(trials, "trials")),
        seed=None if seed is None else int(_number(seed, "seed")),
        sensor_mode=head.get("sensor_mode", "poisson").strip(), ncc=ncc,
    )


def load_config(path: str | Path) -> SweepConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read configuration {path}: {exc}") from None
    return parse_config(text)


@dataclass(frozen=True)
class PointModel:
    """Everything that is fixed at one grid point, independent of ``M``."""

    point: dict[str, object]
    np_h: float
    np_h_source: str
    detector: DetectorSpec
    p_m_ncc: float
    p_f_ncc_achieved: float
    mcc: MccParameters

    @property
    def k(self) -> float:
        return float(self.point["k"])

    @property
    def eta1(self) -> float:
        return float(self.point["eta1"])


def _positive_int(value: object, key: str) -> int:
    if isinstance(value, float) and value.is_integer():
        value = int(value)
    if not isinstance(value, int) or value < 1:
        raise ConfigError(f"{key}: expected a positive integer, got {value!r}")
    return value


def build_point(config: SweepConfig, point: dict[str, object]) -> PointModel:
    try:
        if point["NP_H"] == "computed":
            params = NccParameters(sample_volume=float(point["V"]), **config.ncc)
            np_h, source = healthy_feature_np_h(params), "computed"
        else:
            np_h, source = float(point["NP_H"]), "supplied"
        detector = DetectorSpec.calibrate(np_h, _positive_int(point["n"], "n"),
                                          float(point["eta1"]))
        model = AbnormalityModel(float(point["k"]))
        mcc = MccParameters(amplitude=float(point["G"]), sigma=float(point["sigma_MCC"]))
    except ConfigError:
        raise
    except (NadsError, TypeError) as exc:
        raise ConfigError(f"invalid parameters {point}: {exc}") from None
    return PointModel(point, np_h, source, detector,
                      ncc_misdetection_probability(detector, model),
                      achieved_false_alarm(detector), mcc)


def _csv(header: list[str], rows: list[list[str]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def evaluate_row(model: PointModel, m: Number) -> dict[str, object]:
    """Analytic results at one ``(grid point, M)`` pair.

    The sensor false-alarm probability entering the system law is the budget
    ``eta1``; the discrete window's achieved rate is reported alongside.
    """
    mcc_err = mcc_error_probabilities(model.mcc)
    perf = system_performance(model.p_m_ncc, model.eta1, mcc_err.p_m, mcc_err.p_f, m)
    row: dict[str, object] = dict(model.point)
    row.update(M=m, np_h_source=model.np_h_source, P_M_NCC=model.p_m_ncc, P_F_NCC=model.eta1,
               P_F_NCC_achieved=model.p_f_ncc_achieved, P_M_MCC=mcc_err.p_m,
               P_F_MCC=mcc_err.p_f, P_D=perf.p_d, P_F=perf.p_f, P_M=perf.p_m)
    if row["NP_H"] == "computed":
        row["NP_H"] = model.np_h
    return row


def _format_row(row: dict[str, object], columns: list[str]) -> list[str]:
    flushed = [c for c in PROB_COLUMNS if 0.0 < float(row[c]) < FLUSH_BELOW]
    out = []
    for col in columns:
        if col == "flushed":
            out.append(";".join(flushed))
        elif col in flushed:
            out.append("0")
        else:
            out.append(_fmt(row[col]))
    return out


def run_sweep(config: SweepConfig) -> str:
    """Analytic curves: one row per (grid point, M), M innermost and ascending."""
    columns = config.columns()
    rows = []
    for point in config.points():
        model = build_point(config, point)
        for m in config.m_range.values():
            rows.append(_format_row(evaluate_row(model, m), columns))
    return _csv(columns, rows)


@dataclass(frozen=True)
class RunReport:
    text: str
    ok: bool


def run_optimize(config: SweepConfig, m_max: int | None = None) -> RunReport:
    """Minimum sensor concentration per grid point; ``ok`` is False if any is infeasible."""
    for key in CONSTRAINT_PARAMS:
        if key not in config.fixed and key not in config.swept:
            raise ConfigError(f"optimize mode requires constraint {key!r}")
    if m_max is None:
        m_max = int(max(config.m_range.values()))
    header = config.param_names + ["M_opt", "P_D_at_opt", "P_F_at_opt",
                                   "P_D_before", "P_F_before", "feasible", "diagnosis"]
    rows, ok = [], True
    for point in config.points():
        model = build_point(config, point)
        try:
            constraints = DesignConstraints(float(point["xi"]), float(point["gamma"]), m_max)
        except NadsError as exc:
            raise ConfigError(str(exc)) from None
        result = optimize_concentration((model.p_m_ncc, model.eta1), model.mcc, constraints)
        ok &= result.feasible
        at, before = result.at_opt, result.before_opt
        values = [_fmt(point[p]) for p in config.param_names]
        values += [
            "" if result.m_opt is None else str(result.m_opt),
            "" if at is None else _fmt(at.p_d), "" if at is None else _fmt(at.p_f),
            "" if before is None else _fmt(before.p_d),
            "" if before is None else _fmt(before.p_f),
            str(result.feasible).lower(), result.diagnosis,
        ]
        rows.append(values)
    return RunReport(_csv(header, rows), ok)


def _z_score(empirical: float, analytic: float, trials: int) -> float:
    se = math.sqrt(analytic * (1.0 - analytic) / trials)
    if se == 0.0:
        return 0.0 if empirical == analytic else math.inf
    return (empirical - analytic) / se


def _sub_seed(seed: int, index: int) -> int:
    state = np.random.SeedSequence(seed, spawn_key=(index,)).generate_state(1, np.uint64)
    return int(state[0])


def analytic_targets(model: PointModel, m: Number) -> dict[str, float]:
    """Closed-form values the simulation is compared with at one grid point.

    The false-alarm targets use the achieved window rate, which is the law the
    simulated sensors actually follow.
    """
    mcc_err = mcc_error_probabilities(model.mcc)
    perf = system_performance(model.p_m_ncc, model.p_f_ncc_achieved,
                              mcc_err.p_m, mcc_err.p_f, m)
    return {
        "P_D_NCC": ncc_detection_probability(model.detector, AbnormalityModel(model.k)),
        "P_F_NCC": model.p_f_ncc_achieved,
        "P_D": perf.p_d,
        "P_F": perf.p_f,
    }


def run_validate(config: SweepConfig, trials: int | None = None,
                 seed: int | None = None) -> RunReport:
    """Analytic against empirical rates; ``ok`` is False if any ``|z| > 4``."""
    trials = trials if trials is not None else config.trials
    seed = seed if seed is not None else config.seed
    if trials is None or seed is None:
        raise ConfigError("validate mode requires trials and seed")
    header = config.param_names + ["M", "quantity", "analytic", "empirical",
                                   "std_err", "z", "ok"]
    rows, ok, index = [], True, 0
    for point in config.points():
        model = build_point(config, point)
        prefix = [_fmt(point[p]) for p in config.param_names]
        m_values = [_positive_int(m, "M") for m in config.m_range.values()]
        # Sensor-level rows do not depend on M and are simulated once per point.
        jobs = [("", q) for q in ("P_D_NCC", "P_F_NCC")]
        jobs += [(m, q) for m in m_values for q in ("P_D", "P_F")]
        for m, quantity in jobs:
            analytic = analytic_targets(model, m or 1)[quantity]
            trial = TrialConfig(
                trials=trials, seed=_sub_seed(seed, index), detector=model.detector,
                mcc=MccParameters(model.mcc.amplitude, model.mcc.sigma, m or 1),
                abnormal=quantity.startswith("P_D"), k=model.k,
                sensor_mode=config.sensor_mode)
            index += 1
            if quantity.endswith("_NCC"):
                rates = simulate_snm_tier(trial)
            else:
                rates = simulate_end_to_end(trial)
            z = _z_score(rates.rate, analytic, trials)
            passed = abs(z) <= Z_LIMIT
            ok &= passed
            rows.append(prefix + [str(m), quantity, _fmt(analytic), _fmt(rates.rate),
                                  _fmt(rates.std_err), _fmt(z), str(passed).lower()])
    return RunReport(_csv(header, rows), ok)
