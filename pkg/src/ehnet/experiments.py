"""Bundled sweep experiments and their reference baselines.

Each experiment sweeps a grid of (average harvested power in dB, run length,
battery-to-budget ratio, group size) points.  Per grid point it runs a batch
of seeded trials twice -- once with the battery enforced, once without --
on identical random draws, and emits three CSV rows: the battery system
(``eh``), the unconstrained reference (``non_eh``), and an independent
baseline (``closed_form``) computed without Monte Carlo wherever one exists.

The meaning of the group-size axis depends on the experiment: receivers for
the broadcast sweep, transmitters for the multi-access sweep, hops for the
relay chain, unused (1) elsewhere.

Shipped defaults start every battery full.  A battery at a knife-edge
operating point (request average equal to harvest average) empties itself
on the scale of sqrt(run length) when started empty, and that start-up
transient distorts short runs far from the asymptotic behaviour the sweeps
are meant to expose; `initial_fill` is the config knob that controls it.

Reproducibility contract: per-trial seeds derive deterministically from
(master seed, grid index, trial index), so reruns of the same config --
serial or parallel -- produce byte-identical CSV files.
"""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields, replace
from functools import lru_cache
from typing import Iterable

import numpy as np

from .policies import (
    AlternatingRelayPolicy,
    AmplifierModel,
    ConstantPolicy,
    MaxGainBroadcastPolicy,
    WaterfillPolicy,
    solve_lambda,
)
from .simulator import (
    ConfigError,
    LinkSpec,
    NumericsError,
    SimulationConfig,
    TransmitterSpec,
    run_eh,
    run_non_eh,
)
from .stochastic import (
    ExponentialProcess,
    expectation_quadrature,
    exponential_pdf,
    max_exponential_pdf,
)
from .utilities import (
    AmplifierRateUtility,
    BroadcastSumRateUtility,
    ChainRateUtility,
    MacBpskBerUtility,
    OutageUtility,
    rayleigh_bpsk_ber,
)

__all__ = [
    "CSV_FIELDS",
    "CsvRow",
    "EXPERIMENT_TITLES",
    "GridPoint",
    "SweepSpec",
    "build_config",
    "closed_form_baseline",
    "default_spec",
    "grid_points",
    "load_spec",
    "run_experiment",
    "spec_from_dict",
    "trial_seed",
    "write_csv",
]

EXPERIMENT_TITLES = {
    "fig1": "point-to-point outage probability vs harvested budget",
    "fig2": "point-to-point water-filling rate, ideal amplifier",
    "fig3": "water-filling rate with amplifier slope and circuit draw",
    "fig4": "opportunistic broadcast sum rate vs receiver count",
    "fig5": "multi-access BPSK error rate vs transmitter count",
    "fig6": "half-duplex amplify-and-forward chain rate",
}

GROUP_AXIS = {
    "fig1": "unused",
    "fig2": "unused",
    "fig3": "unused",
    "fig4": "receivers",
    "fig5": "transmitters",
    "fig6": "hops (even)",
}

# Reference run length for baselines that need a simulation (relay chain).
BASELINE_N = 1_000_000
_BASELINE_TRIAL = 0x7FFFFFFF


@dataclass(frozen=True)
class SweepSpec:
    """A declarative sweep: the grid, the trial budget and the model knobs."""

    experiment: str
    p_in_db: tuple[float, ...]
    n_slots: tuple[int, ...]
    b_max_ratio: tuple[float | None, ...] = (200.0,)
    group_size: tuple[int, ...] = (1,)
    trials: int = 100
    seed: int = 1
    initial_fill: float = 1.0
    rate_threshold: float = 1.0
    amplifier_epsilon: float = 1.0
    circuit_power_db: float | None = None


_DEFAULTS: dict[str, SweepSpec] = {
    "fig1": SweepSpec(
        experiment="fig1",
        p_in_db=(0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0),
        n_slots=(100, 10_000),
    ),
    "fig2": SweepSpec(
        experiment="fig2",
        p_in_db=(0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0),
        n_slots=(100, 10_000),
    ),
    "fig3": SweepSpec(
        experiment="fig3",
        p_in_db=(-30.0, -25.0, -20.0, -15.0, -10.0, -5.0, 0.0, 5.0, 10.0),
        n_slots=(10_000,),
        b_max_ratio=(20.0, 200.0),
        amplifier_epsilon=5.0,
        circuit_power_db=-25.0,
    ),
    "fig4": SweepSpec(
        experiment="fig4",
        p_in_db=(0.0, 5.0, 10.0, 15.0, 20.0),
        n_slots=(100, 10_000),
        group_size=(2, 25),
    ),
    "fig5": SweepSpec(
        experiment="fig5",
        p_in_db=(0.0, 5.0, 10.0, 15.0),
        n_slots=(100, 10_000),
        group_size=(1, 2, 5),
    ),
    "fig6": SweepSpec(
        experiment="fig6",
        p_in_db=(0.0, 5.0, 10.0, 15.0),
        n_slots=(100, 10_000),
        group_size=(2,),
    ),
}


def default_spec(experiment: str) -> SweepSpec:
    if experiment not in _DEFAULTS:
        raise ConfigError(f"unknown experiment {experiment!r}; "
                          f"known: {', '.join(sorted(_DEFAULTS))}")
    return _DEFAULTS[experiment]


def _as_tuple(value, *, none_ok: bool = False) -> tuple:
    if isinstance(value, (list, tuple)):
        items = tuple(value)
    else:
        items = (value,)
    if not items:
        raise ConfigError("grid axes must not be empty")
    if not none_ok and any(v is None for v in items):
        raise ConfigError("null is not allowed on this axis")
    return items


def spec_from_dict(data: dict) -> SweepSpec:
    """Build and validate a `SweepSpec` from a parsed config mapping."""
    if not isinstance(data, dict):
        raise ConfigError("config root must be an object")
    known = {f.name for f in fields(SweepSpec)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    if "experiment" not in data:
        raise ConfigError("config needs an 'experiment' key")
    base = default_spec(str(data["experiment"]))
    merged = {f.name: getattr(base, f.name) for f in fields(SweepSpec)}
    merged.update(data)
    try:
        spec = SweepSpec(
            experiment=str(merged["experiment"]),
            p_in_db=tuple(float(p) for p in _as_tuple(merged["p_in_db"])),
            n_slots=tuple(int(n) for n in _as_tuple(merged["n_slots"])),
            b_max_ratio=tuple(
                None if r is None else float(r)
                for r in _as_tuple(merged["b_max_ratio"], none_ok=True)
            ),
            group_size=tuple(int(m) for m in _as_tuple(merged["group_size"])),
            trials=int(merged["trials"]),
            seed=int(merged["seed"]),
            initial_fill=float(merged["initial_fill"]),
            rate_threshold=float(merged["rate_threshold"]),
            amplifier_epsilon=float(merged["amplifier_epsilon"]),
            circuit_power_db=(
                None if merged["circuit_power_db"] is None
                else float(merged["circuit_power_db"])
            ),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad config value: {exc}") from exc
    validate_spec(spec)
    return spec


def validate_spec(spec: SweepSpec) -> None:
    if spec.experiment not in _DEFAULTS:
        raise ConfigError(f"unknown experiment {spec.experiment!r}")
    if any(not math.isfinite(p) for p in spec.p_in_db):
        raise ConfigError("p_in_db values must be finite")
    if any(n < 1 for n in spec.n_slots):
        raise ConfigError("n_slots values must be >= 1")
    for r in spec.b_max_ratio:
        if r is not None and not (r > 0.0 and math.isfinite(r)):
            raise ConfigError("b_max_ratio values must be > 0 or null")
    if any(m < 1 for m in spec.group_size):
        raise ConfigError("group_size values must be >= 1")
    if spec.experiment == "fig6":
        for m in spec.group_size:
            if m < 2 or m % 2:
                raise ConfigError(
                    "fig6 group_size is the hop count and must be even and "
                    ">= 2: the chain forwards on alternating slot parity, so "
                    "an odd hop count never delivers in an even slot"
                )
    if spec.trials < 1:
        raise ConfigError("trials must be >= 1")
    if spec.seed < 0:
        raise ConfigError("seed must be >= 0")
    if not 0.0 <= spec.initial_fill <= 1.0:
        raise ConfigError("initial_fill must be in [0, 1]")
    if not spec.rate_threshold > 0.0:
        raise ConfigError("rate_threshold must be > 0")
    if not spec.amplifier_epsilon >= 1.0:
        raise ConfigError("amplifier_epsilon must be >= 1")
    if spec.circuit_power_db is not None and not math.isfinite(
        spec.circuit_power_db
    ):
        raise ConfigError("circuit_power_db must be finite or null")


def load_spec(path) -> SweepSpec:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return spec_from_dict(data)


@dataclass(frozen=True)
class GridPoint:
    index: int
    p_db: float
    n: int
    ratio: float | None
    m: int


def grid_points(spec: SweepSpec) -> list[GridPoint]:
    points = []
    for n in spec.n_slots:
        for m in spec.group_size:
            for ratio in spec.b_max_ratio:
                for p_db in spec.p_in_db:
                    points.append(
                        GridPoint(len(points), p_db, n, ratio, m)
                    )
    return points


def trial_seed(master_seed: int, point_index: int, trial: int) -> int:
    """Deterministic per-trial run seed; independent of execution order."""
    ss = np.random.SeedSequence(master_seed, spawn_key=(point_index, trial))
    return int(ss.generate_state(1, np.uint64)[0])


# ---------------------------------------------------------------------------
# Per-experiment network builders
# ---------------------------------------------------------------------------


def _db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def _battery_geometry(spec: SweepSpec, p: float, ratio: float | None):
    if ratio is None:
        return math.inf, 0.0
    capacity = ratio * p
    return capacity, spec.initial_fill * capacity


@lru_cache(maxsize=None)
def _waterfill_threshold(target: float, epsilon: float, circuit_power: float):
    amp = AmplifierModel(epsilon=epsilon, circuit_power=circuit_power)
    return solve_lambda(target, "waterfill", amplifier=amp)


@lru_cache(maxsize=None)
def _broadcast_threshold(target: float, receivers: int) -> float:
    return solve_lambda(target, "broadcast", num_receivers=receivers)


def _circuit_power(spec: SweepSpec) -> float:
    if spec.circuit_power_db is None:
        return 0.0
    return _db_to_linear(spec.circuit_power_db)


def build_config(spec: SweepSpec, point: GridPoint, seed: int) -> SimulationConfig:
    """Materialize the network for one grid point and one run seed."""
    p = _db_to_linear(point.p_db)
    capacity, initial = _battery_geometry(spec, p, point.ratio)
    kind = spec.experiment

    if kind == "fig1":
        tx = TransmitterSpec(
            node=1,
            harvest=ExponentialProcess(p),
            policy=ConstantPolicy(p),
            capacity=capacity,
            initial_level=initial,
        )
        return SimulationConfig(
            n_slots=point.n,
            transmitters=(tx,),
            links=(LinkSpec(1, 2, ExponentialProcess(1.0)),),
            utility=OutageUtility(spec.rate_threshold),
            seed=seed,
        )

    if kind in ("fig2", "fig3"):
        pc = _circuit_power(spec)
        amp = AmplifierModel(epsilon=spec.amplifier_epsilon, circuit_power=pc)
        if p <= pc:
            # Budget cannot even cover the static draw: stay silent.  This
            # pins the rate to exactly zero instead of the vanishing but
            # positive value a threshold solution would give.
            policy = ConstantPolicy(0.0)
        else:
            lam = _waterfill_threshold(p, amp.epsilon, amp.circuit_power)
            policy = WaterfillPolicy(amplifier=amp, lam=lam)
        tx = TransmitterSpec(
            node=1,
            harvest=ExponentialProcess(p),
            policy=policy,
            capacity=capacity,
            initial_level=initial,
        )
        return SimulationConfig(
            n_slots=point.n,
            transmitters=(tx,),
            links=(LinkSpec(1, 2, ExponentialProcess(1.0)),),
            utility=AmplifierRateUtility(amp),
            seed=seed,
        )

    if kind == "fig4":
        receivers = point.m
        lam = _broadcast_threshold(p, receivers)
        tx = TransmitterSpec(
            node=1,
            harvest=ExponentialProcess(p),
            policy=MaxGainBroadcastPolicy(lam=lam, num_links=receivers),
            capacity=capacity,
            initial_level=initial,
        )
        links = tuple(
            LinkSpec(1, 1 + j, ExponentialProcess(1.0))
            for j in range(1, receivers + 1)
        )
        return SimulationConfig(
            n_slots=point.n,
            transmitters=(tx,),
            links=links,
            utility=BroadcastSumRateUtility(receivers),
            seed=seed,
        )

    if kind == "fig5":
        senders = point.m
        sink = senders + 1
        txs = tuple(
            TransmitterSpec(
                node=k,
                harvest=ExponentialProcess(p),
                policy=ConstantPolicy(p),
                capacity=capacity,
                initial_level=initial,
            )
            for k in range(1, senders + 1)
        )
        links = tuple(
            LinkSpec(k, sink, ExponentialProcess(1.0))
            for k in range(1, senders + 1)
        )
        return SimulationConfig(
            n_slots=point.n,
            transmitters=txs,
            links=links,
            utility=MacBpskBerUtility(senders),
            seed=seed,
        )

    if kind == "fig6":
        hops = point.m
        hop_gain = float(hops * hops)
        txs = []
        links = []
        for k in range(1, hops + 1):
            if k <= hops // 2:
                # Front half: request average equals harvest average.
                active, p_lim = 2.0 * p, math.inf
            else:
                # Back half: limited to half the harvest average, so the
                # buffer accumulates (absorbing regime).
                active, p_lim = p, p / 2.0
            txs.append(
                TransmitterSpec(
                    node=k,
                    harvest=ExponentialProcess(p),
                    policy=AlternatingRelayPolicy(
                        node_parity=k % 2, active_power=active
                    ),
                    capacity=capacity,
                    initial_level=initial,
                    p_lim_avg=p_lim,
                )
            )
            links.append(
                LinkSpec(k, k + 1, ExponentialProcess(hop_gain), delay=hops - k)
            )
        return SimulationConfig(
            n_slots=point.n,
            transmitters=tuple(txs),
            links=tuple(links),
            utility=ChainRateUtility(hops),
            seed=seed,
        )

    raise ConfigError(f"unknown experiment {kind!r}")


# ---------------------------------------------------------------------------
# Closed-form / reference baselines
# ---------------------------------------------------------------------------


def closed_form_baseline(spec: SweepSpec, point: GridPoint) -> float:
    """Monte-Carlo-free value of the unconstrained system at this grid point.

    The relay chain has no closed form; its baseline is the unconstrained
    simulation at `BASELINE_N` slots with a seed derived from the master
    seed and the (power, hops) cell, so all rows of one cell agree.
    """
    p = _db_to_linear(point.p_db)
    kind = spec.experiment

    if kind == "fig1":
        return -math.expm1(-(2.0 ** spec.rate_threshold - 1.0) / p)

    if kind in ("fig2", "fig3"):
        pc = _circuit_power(spec)
        if p <= pc:
            return 0.0
        eps = spec.amplifier_epsilon
        lam = _waterfill_threshold(p, eps, pc)

        def rate(g: float) -> float:
            return math.log2(1.0 + (1.0 / lam - 1.0 / g) * g / (eps * eps))

        return expectation_quadrature(rate, exponential_pdf(1.0), lower=lam)

    if kind == "fig4":
        lam = _broadcast_threshold(p, point.m)

        def rate(g: float) -> float:
            return math.log2(g / lam)

        return expectation_quadrature(
            rate, max_exponential_pdf(1.0, point.m), lower=lam
        )

    if kind == "fig5":
        return rayleigh_bpsk_ber(p, branches=point.m)

    if kind == "fig6":
        p_idx = spec.p_in_db.index(point.p_db)
        m_idx = spec.group_size.index(point.m)
        ss = np.random.SeedSequence(
            spec.seed, spawn_key=(_BASELINE_TRIAL, p_idx, m_idx)
        )
        seed = int(ss.generate_state(1, np.uint64)[0])
        ref_point = replace(point, n=BASELINE_N)
        config = build_config(spec, ref_point, seed)
        return run_non_eh(config).avg_utility

    raise ConfigError(f"unknown experiment {kind!r}")


# ---------------------------------------------------------------------------
# Sweep runner and CSV output
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CsvRow:
    experiment_id: str
    p_in_db: float
    n_slots: int
    b_max_ratio: float
    m: int
    mode: str
    u_mean: float
    u_stderr: float
    mismatch_mean: float


CSV_FIELDS = tuple(f.name for f in fields(CsvRow))


def _mean_se(values: list[float]) -> tuple[float, float]:
    k = len(values)
    mean = math.fsum(values) / k
    if k < 2:
        return mean, 0.0
    var = math.fsum((v - mean) ** 2 for v in values) / (k - 1)
    return mean, math.sqrt(var / k)


def _point_rows(spec: SweepSpec, point: GridPoint) -> list[CsvRow]:
    u_eh, u_non, miss = [], [], []
    for t in range(spec.trials):
        seed = trial_seed(spec.seed, point.index, t)
        config = build_config(spec, point, seed)
        s_eh = run_eh(config)
        s_non = run_non_eh(config)
        u_eh.append(s_eh.avg_utility)
        u_non.append(s_non.avg_utility)
        miss.append(s_eh.mismatch_union)
    ratio = math.inf if point.ratio is None else point.ratio
    eh_mean, eh_se = _mean_se(u_eh)
    non_mean, non_se = _mean_se(u_non)
    mis_mean = math.fsum(miss) / len(miss)
    baseline = closed_form_baseline(spec, point)
    common = dict(
        experiment_id=spec.experiment,
        p_in_db=point.p_db,
        n_slots=point.n,
        b_max_ratio=ratio,
        m=point.m,
    )
    return [
        CsvRow(mode="eh", u_mean=eh_mean, u_stderr=eh_se,
               mismatch_mean=mis_mean, **common),
        CsvRow(mode="non_eh", u_mean=non_mean, u_stderr=non_se,
               mismatch_mean=0.0, **common),
        CsvRow(mode="closed_form", u_mean=baseline, u_stderr=0.0,
               mismatch_mean=0.0, **common),
    ]


def _point_rows_job(args) -> tuple[int, list[CsvRow]]:
    spec, point = args
    return point.index, _point_rows(spec, point)


def run_experiment(spec: SweepSpec, *, jobs: int = 1) -> list[CsvRow]:
    """Run the whole sweep.  The row list is independent of `jobs`."""
    validate_spec(spec)
    points = grid_points(spec)
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = dict(
                pool.map(_point_rows_job, [(spec, pt) for pt in points])
            )
        per_point = [results[pt.index] for pt in points]
    else:
        per_point = [_point_rows(spec, pt) for pt in points]
    rows = [row for batch in per_point for row in batch]
    for row in rows:
        if not (math.isfinite(row.u_mean) and math.isfinite(row.u_stderr)):
            raise NumericsError(
                f"non-finite statistics for {row.experiment_id} at "
                f"{row.p_in_db} dB, n={row.n_slots}, m={row.m}, mode={row.mode}"
            )
    return rows


def write_csv(rows: Iterable[CsvRow], path) -> None:
    """Write rows with the exact `CSV_FIELDS` header.  Float cells use
    `repr` (shortest round-trip), so identical runs give identical bytes."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_FIELDS)
        for row in rows:
            writer.writerow(
                [
                    row.experiment_id,
                    repr(float(row.p_in_db)),
                    row.n_slots,
                    repr(float(row.b_max_ratio)),
                    row.m,
                    row.mode,
                    repr(float(row.u_mean)),
                    repr(float(row.u_stderr)),
                    repr(float(row.mismatch_mean)),
                ]
            )
