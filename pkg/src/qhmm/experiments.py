"""Scripted studies: reference-table checks, ansatz and evolutionary
benchmark reproductions, and the landscape smoothness/correlation study.

Each experiment returns a report with target-vs-achieved numbers and a
pass flag at the documented threshold; CSV/JSON emission is handled by
the CLI layer."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import classical, models
from .circuits import efficient_su2, real_amplitudes
from .lang import hankel, sequences_of_length
from .learning import (
    AnsatzSpec,
    ChannelEngine,
    HyperParams,
    Hypothesis,
    LearnSpace,
    evolve,
    initial_state,
    train_ansatz_restarts,
)
from .linalg import spectral_norm

# Exact sequence probabilities of the half-damping generator (gamma = 1/2)
# over prefixes/suffixes up to length 2: once a 0 is emitted the process
# stays at 0; from a 1 the next symbol is a fair coin; the first step sees
# the |+> system, giving P(0) = 3/4.
DAMPING_REFERENCE_SEQUENCES = ["", "0", "1", "00", "01", "10", "11"]
DAMPING_REFERENCE_TABLE = np.array(
    [
        [1.0, 0.75, 0.25, 0.75, 0.0, 0.125, 0.125],
        [0.75, 0.75, 0.0, 0.75, 0.0, 0.0, 0.0],
        [0.25, 0.125, 0.125, 0.125, 0.0, 0.0625, 0.0625],
        [0.75, 0.75, 0.0, 0.75, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [0.125, 0.125, 0.0, 0.125, 0.0, 0.0, 0.0],
        [0.125, 0.0625, 0.0625, 0.0625, 0.0, 0.03125, 0.03125],
    ]
)


# --- landscape study ----------------------------------------------------------

@dataclass
class LandscapeSample:
    op_distance: float
    divergences: dict[int, float]  # per-length max divergence, n = 2..5
    total: float  # average divergence over lengths 1..5

    def __post_init__(self):
        if self.op_distance < -1e-12 or self.op_distance > 2.0 + 1e-9:
            raise ValueError("operator distance must lie in [0, 2]")


def landscape_walk(
    hyp: Hypothesis,
    steps: int,
    mutation_std_fraction: float,
    rng: np.random.Generator,
    lengths: tuple[int, ...] = (1, 2, 3, 4, 5),
    restart_every: Optional[int] = 25,
) -> list[LandscapeSample]:
    """Random walk from an optimized hypothesis: each step perturbs one
    uniformly chosen parameter with relative Gaussian noise (absolute scale
    0.1 * 2*pi when the value is ~0) and records the spectral distance to the
    start unitary plus the divergences against the start distributions.

    A single unbounded walk saturates at operator distance ~2 where the
    divergence decorrelates; restarting at the optimum every ``restart_every``
    steps keeps the sample inside the conditioning region (distance <~ 1).
    Pass restart_every=None for one continuous walk.
    """
    if hyp.circuit.num_parameters < 1:
        raise ValueError("landscape walk needs a parametric hypothesis")
    engine = ChannelEngine(
        hyp.circuit, hyp.dim_s, hyp.dim_e, tuple(hyp.symbol_map),
        initial_state(hyp.rho0_kind, hyp.dim_s),
    )
    lengths = tuple(sorted(lengths))
    x_opt = np.array([float(p) for p in hyp.circuit.parameters()])
    u_opt = engine.unitary(x_opt)
    ref = engine.level_probs(x_opt, lengths)

    samples: list[LandscapeSample] = []
    x = x_opt.copy()
    for step in range(steps):
        if restart_every and step and step % restart_every == 0:
            x = x_opt.copy()
        i = int(rng.integers(len(x)))
        sigma = mutation_std_fraction * abs(x[i])
        if sigma < 1e-12:
            sigma = mutation_std_fraction * 2.0 * math.pi
        x[i] += rng.normal(0.0, sigma)
        u = engine.unitary(x)
        probs = engine.level_probs(x, lengths)
        divs = {
            t: float(np.abs(p - r).max())
            for t, p, r in zip(lengths, probs, ref)
        }
        total = sum(divs.values()) / len(lengths)
        samples.append(
            LandscapeSample(
                op_distance=spectral_norm(u_opt - u),
                divergences={t: divs[t] for t in lengths if t >= 2},
                total=total,
            )
        )
    return samples


def pearson(x, y) -> float:
    """Sample Pearson correlation; NaN flags degenerate variance."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 2:
        return float("nan")
    sx, sy = x.std(ddof=1), y.std(ddof=1)
    if sx == 0.0 or sy == 0.0:
        return float("nan")
    cov = ((x - x.mean()) * (y - y.mean())).sum() / (x.size - 1)
    return float(cov / (sx * sy))


def landscape_correlation(
    samples_by_rate: dict[float, list[LandscapeSample]]
) -> dict[float, float]:
    """Pearson r between total divergence and operator distance, per rate."""
    out = {}
    for rate, samples in samples_by_rate.items():
        if len(samples) < 30:
            raise ValueError("need at least 30 samples per mutation rate")
        out[rate] = pearson(
            [s.total for s in samples], [s.op_distance for s in samples]
        )
    return out


def smoothness_violations(samples: list[LandscapeSample], n: int = 5) -> int:
    """Count samples violating avg divergence / (2n) <= operator distance."""
    return sum(
        1 for s in samples if s.total / (2 * n) > s.op_distance + 1e-9
    )


# --- reproduction reports -------------------------------------------------------

@dataclass
class ReproduceReport:
    name: str
    passed: bool
    achieved: float
    threshold: float
    details: dict = field(default_factory=dict)
    rows: list = field(default_factory=list)


def _damping_report() -> ReproduceReport:
    q = models.amplitude_damping_qhmm(math.pi / 2)
    h = hankel(lambda s: models.sequence_probability(q, s), 2, 2, 2)
    err = float(np.abs(h.values - DAMPING_REFERENCE_TABLE).max())
    rows = [
        {
            "prefix": DAMPING_REFERENCE_SEQUENCES[i],
            "suffix": DAMPING_REFERENCE_SEQUENCES[j],
            "expected": float(DAMPING_REFERENCE_TABLE[i, j]),
            "computed": float(h.values[i, j]),
        }
        for i in range(7)
        for j in range(7)
    ]
    return ReproduceReport(
        name="table2",
        passed=err < 1e-12,
        achieved=err,
        threshold=1e-12,
        details={"entries": 49},
        rows=rows,
    )


def monras_target(max_len: int = 2) -> list[tuple[tuple[int, ...], float]]:
    q = models.monras_qhmm()
    tabs = models.distribution_tables(q, range(1, max_len + 1))
    return [
        (seq, tabs[t].prob(seq))
        for t in range(1, max_len + 1)
        for seq in sequences_of_length(4, t)
    ]


def market_target_items(max_len: int = 5) -> list[tuple[tuple[int, ...], float]]:
    h = classical.market_model()
    tabs = {t: classical.distribution(h, t) for t in range(1, max_len + 1)}
    return [
        (seq, tabs[t].prob(seq))
        for t in range(1, max_len + 1)
        for seq in sequences_of_length(2, t)
    ]


def _monras_ansatz_report(
    seed: int = 0, restarts: int = 10, budget: int = 8000, reps: int = 3
) -> ReproduceReport:
    spec = AnsatzSpec(
        circuit=efficient_su2(3, reps=reps, entanglement="full",
                              rotation_pair="RZ_RX"),
        dim_s=2,
        dim_e=4,
        symbol_map=("0", "1", "2", "3"),
    )
    res = train_ansatz_restarts(
        spec, monras_target(), "nm", restarts=restarts, budget=budget, seed=seed
    )
    return ReproduceReport(
        name="monras_ansatz",
        passed=res.cost <= 1e-3,
        achieved=res.cost,
        threshold=1e-3,
        details={
            "restarts": restarts,
            "parameters": spec.circuit.num_parameters,
            "reference_cost": 3.9e-5,
        },
    )


def _market_ansatz_report(
    seed: int = 0, restarts: int = 10, budget: int = 3000
) -> ReproduceReport:
    spec = AnsatzSpec(
        circuit=real_amplitudes(2, reps=1, entanglement="linear"),
        dim_s=2,
        dim_e=2,
        symbol_map=("0", "1"),
    )
    res = train_ansatz_restarts(
        spec, market_target_items(), "nm", restarts=restarts, budget=budget,
        seed=seed,
    )
    return ReproduceReport(
        name="market_ansatz",
        passed=res.cost <= 1e-2,
        achieved=res.cost,
        threshold=1e-2,
        details={
            "restarts": restarts,
            "parameters": spec.circuit.num_parameters,
            "reference_cost": 3.0e-4,
        },
    )


def market_space(**overrides) -> LearnSpace:
    base = dict(
        alphabet=["0", "1"],
        dim_s=2,
        dim_e=2,
        gate_set=("X", "Y", "RX", "RY", "CX", "CRY"),
        min_gates=3,
        max_gates=14,
        rho0_kind="maximally_mixed",
        opt_budget=80,
    )
    base.update(overrides)
    return LearnSpace(**base)


def _market_evo_report(
    seeds=(0, 1, 2), mu: int = 100, g_max: int = 400, lam: int = 25
) -> ReproduceReport:
    h = classical.market_model()
    target = [classical.distribution(h, t) for t in range(1, 6)]
    space = market_space()
    best_div = math.inf
    runs = []
    for seed in seeds:
        hp = HyperParams(
            mu=mu, lam=lam, g_max=g_max, target_fitness=-0.01,
            c_q=0.0, c_e=0.0, prog_window=25, n_max=5,
        )
        rep = evolve(target, space, hp, seed=seed)
        div = -rep.best.fitness
        runs.append({"seed": seed, "divergence": div,
                     "generations": len(rep.generations),
                     "wall_time": rep.wall_time})
        best_div = min(best_div, div)
        if div <= 0.01:
            break
    return ReproduceReport(
        name="market_evo",
        passed=best_div <= 0.01,
        achieved=best_div,
        threshold=0.01,
        details={"runs": runs},
    )


def _gaussian_evo_report(
    seeds=(0,), mu: int = 40, g_max: int = 40, lam: int = 12
) -> ReproduceReport:
    # desk-scale run of the four-symbol mixture example; the full-size run
    # used far larger populations, so the bar here is a loose 0.05
    h = classical.gaussian4_model()
    target = [classical.distribution(h, t) for t in range(1, 5)]
    space = LearnSpace(
        alphabet=["0", "1", "2", "3"],
        dim_s=2,
        dim_e=4,
        gate_set=("X", "Y", "RX", "RY", "P", "CX", "CRY"),
        min_gates=3,
        max_gates=12,
        opt_budget=60,
    )
    best_div = math.inf
    runs = []
    for seed in seeds:
        hp = HyperParams(
            mu=mu, lam=lam, g_max=g_max, target_fitness=-0.005,
            c_q=0.0, c_e=0.0, prog_window=15, n_max=4,
        )
        rep = evolve(target, space, hp, seed=seed)
        div = -rep.best.fitness
        runs.append({"seed": seed, "divergence": div,
                     "generations": len(rep.generations)})
        best_div = min(best_div, div)
        if div <= 0.05:
            break
    return ReproduceReport(
        name="gaussian_evo",
        passed=best_div <= 0.05,
        achieved=best_div,
        threshold=0.05,
        details={"runs": runs},
    )


REPRODUCTIONS = {
    "table2": _damping_report,
    "monras_ansatz": _monras_ansatz_report,
    "market_ansatz": _market_ansatz_report,
    "market_evo": _market_evo_report,
    "gaussian_evo": _gaussian_evo_report,
}


def reproduce(name: str, **kwargs) -> ReproduceReport:
    if name not in REPRODUCTIONS:
        raise KeyError(
            f"unknown experiment {name!r}; choose from {sorted(REPRODUCTIONS)}"
        )
    return REPRODUCTIONS[name](**kwargs)


def trained_market_hypothesis(seed: int = 0, budget: int = 3000,
                              restarts: int = 6) -> Hypothesis:
    """A small optimized market model used as the landscape walk origin."""
    spec = AnsatzSpec(
        circuit=real_amplitudes(2, reps=1, entanglement="linear"),
        dim_s=2,
        dim_e=2,
        symbol_map=("0", "1"),
    )
    res = train_ansatz_restarts(spec, market_target_items(), "nm",
                                restarts=restarts, budget=budget, seed=seed)
    return Hypothesis(
        circuit=spec.circuit.with_parameters(res.params),
        dim_s=2,
        dim_e=2,
        symbol_map=("0", "1"),
        rho0_kind="maximally_mixed",
        optimal_params=res.params,
    )
