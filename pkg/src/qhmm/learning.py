"""Learning stochastic languages with unitary-circuit hypotheses.

Global evolutionary search over circuit structures with Lamarckian local
parameter optimization, temperature-controlled acceptance of inferior
candidates, rank/fitness/tournament selection, and multi-armed-bandit
adaptation of every stochastic operator distribution. A separate trainer
fits fixed ansatz templates by nonlinear cost minimization.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace
from itertools import product
from typing import Optional

import numpy as np

from . import circuits as qc
from .channels import KrausChannel, kraus_from_unitary
from .circuits import Circuit, GateSpace, compile_circuit
from .lang import DistributionTable, Sequence, divergence_avg
from .models import QhmmKraus, distribution_tables
from .optimize import ObjectiveSpec, get_optimizer


# --- hypotheses ---------------------------------------------------------------

RHO0_KINDS = ("ground", "maximally_mixed", "maximally_entangled")


def initial_state(kind: str, dim: int) -> np.ndarray:
    """Initial density for a hypothesis: ground |0><0|, maximally mixed I/N,
    or (for a square dim with two halves) the maximally entangled pair state.
    A one-qubit space has no internal split, so 'maximally_entangled'
    degrades to maximally mixed there."""
    if kind == "ground":
        rho = np.zeros((dim, dim), dtype=np.complex128)
        rho[0, 0] = 1.0
        return rho
    if kind == "maximally_mixed":
        return np.eye(dim, dtype=np.complex128) / dim
    if kind == "maximally_entangled":
        half = math.isqrt(dim)
        if half * half == dim and half >= 2:
            v = np.zeros(dim, dtype=np.complex128)
            for i in range(half):
                v[i * half + i] = 1.0 / math.sqrt(half)
            return np.outer(v, v.conj())
        return np.eye(dim, dtype=np.complex128) / dim
    raise ValueError(f"unknown initial-state kind {kind!r}")


@dataclass
class Hypothesis:
    circuit: Circuit
    dim_s: int
    dim_e: int
    symbol_map: tuple[str, ...]
    rho0_kind: str = "maximally_mixed"
    fitness: Optional[float] = None
    optimal_params: Optional[np.ndarray] = None

    def __post_init__(self):
        nq = int(math.log2(self.dim_s)) + int(math.log2(self.dim_e))
        if 2**nq != self.dim_s * self.dim_e:
            raise ValueError("dims must be powers of two")
        if self.circuit.n_qubits != nq:
            raise ValueError(
                f"circuit has {self.circuit.n_qubits} qubits, dims need {nq}"
            )

    @property
    def alphabet(self) -> list[str]:
        return sorted(set(self.symbol_map))

    def to_qhmm(self) -> QhmmKraus:
        u = compile_circuit(self.circuit)
        kraus = kraus_from_unitary(u, self.dim_s, self.dim_e, 0)
        alphabet = self.alphabet
        groups: dict[str, list[np.ndarray]] = {a: [] for a in alphabet}
        for e, k in enumerate(kraus):
            groups[self.symbol_map[e]].append(k)
        return QhmmKraus(
            alphabet=alphabet,
            channel=KrausChannel(dim=self.dim_s, groups=groups),
            rho0=initial_state(self.rho0_kind, self.dim_s),
        )

    def tables(self, lengths) -> list[DistributionTable]:
        by_len = distribution_tables(self.to_qhmm(), lengths)
        return [by_len[t] for t in sorted(set(int(x) for x in lengths))]


@dataclass
class LearnSpace:
    """Hypothesis-space configuration shared by generation and mutation."""

    alphabet: list[str]
    dim_s: int = 2
    dim_e: int = 2
    # the named single-qubit types plus controlled placements: a genotype
    # without any two-qubit gate factorizes and can only express i.i.d.
    # languages, so the entangling variants stay in the default pool
    gate_set: tuple[str, ...] = ("X", "Y", "RX", "RY", "CX", "CRY")
    min_gates: int = 3
    max_gates: int = 20
    rho0_kind: str = "maximally_mixed"
    symbol_map: Optional[tuple[str, ...]] = None
    optimizers: tuple[str, ...] = ("nm", "cbla", "bfsg")
    opt_budget: int = 80  # local-search evaluations per circuit parameter

    def __post_init__(self):
        from .models import block_symbol_map

        self.alphabet = [str(a) for a in self.alphabet]
        if self.symbol_map is None:
            self.symbol_map = block_symbol_map(self.alphabet, self.dim_e)

    def budget_for(self, n_params: int) -> int:
        """Total evaluations for one Lamarckian fit; simplex methods need
        room proportional to the parameter count."""
        return max(40, self.opt_budget * max(1, n_params))

    @property
    def n_state_qubits(self) -> int:
        return int(math.log2(self.dim_s))

    @property
    def n_emission_qubits(self) -> int:
        return int(math.log2(self.dim_e))

    def gate_space(self, distributions=None) -> GateSpace:
        return GateSpace(
            gate_set=tuple(self.gate_set),
            n_state_qubits=self.n_state_qubits,
            n_emission_qubits=self.n_emission_qubits,
            distributions=distributions or {},
        )


@dataclass
class HyperParams:
    mu: int = 20
    lam: int = 10
    gamma_bandit: float = 0.3
    prog_window: int = 10
    g_max: int = 100
    target_fitness: float = -1e-3
    c_q: float = 0.01
    c_e: float = 0.01
    n_max: int = 7

    def __post_init__(self):
        if self.mu < 2:
            raise ValueError("population size must be >= 2")
        if self.lam < 1:
            raise ValueError("offspring size must be >= 1")
        if not 0.0 <= self.gamma_bandit <= 1.0:
            raise ValueError("gamma must lie in [0, 1]")


# --- compiled evaluation engine -------------------------------------------------

def _qubit_masks(n_qubits: int, qubit: int):
    """Composite indices with the given qubit (MSB order) clear, paired with
    the same indices with it set."""
    d = 2**n_qubits
    bit = 1 << (n_qubits - 1 - qubit)
    idx = np.arange(d)
    lo = idx[(idx & bit) == 0]
    return lo, lo | bit


class _GateBuilder:
    """Fast full-space matrix assembly for one gate of a fixed structure."""

    def __init__(self, g: qc.GateSpec, n_qubits: int):
        self.gate = g.gate
        self.dim = 2**n_qubits
        self.parametric = len(g.params) > 0
        if not g.is_two_qubit:
            self.r0, self.r1 = _qubit_masks(n_qubits, g.qubits[0])
            self.c0 = None
        else:
            ctrl, data = g.qubits
            lo, _ = _qubit_masks(n_qubits, ctrl)
            self.c0 = lo  # control clear: identity block
            t_lo, t_hi = _qubit_masks(n_qubits, data)
            cbit = 1 << (n_qubits - 1 - ctrl)
            keep = (t_lo & cbit) != 0
            self.r0, self.r1 = t_lo[keep], t_hi[keep]
        if not self.parametric:
            self.matrix = self._assemble(qc._base_matrix(g.gate, g.params))

    def _assemble(self, base: np.ndarray) -> np.ndarray:
        out = np.zeros((self.dim, self.dim), dtype=np.complex128)
        if self.c0 is not None:
            out[self.c0, self.c0] = 1.0
        out[self.r0, self.r0] = base[0, 0]
        out[self.r0, self.r1] = base[0, 1]
        out[self.r1, self.r0] = base[1, 0]
        out[self.r1, self.r1] = base[1, 1]
        return out

    def __call__(self, theta=None) -> np.ndarray:
        if not self.parametric:
            return self.matrix
        return self._assemble(qc._base_matrix(self.gate, (theta,)))


class ChannelEngine:
    """Parameter vector -> unitary -> symbol-grouped Kraus stack -> exact
    lex-ordered probability vectors, with all structure precomputed.

    This is the hot path behind fitness and ansatz cost; the object-based
    route (Hypothesis.tables / models.distribution_tables) computes the same
    quantities independently and cross-checks it.
    """

    def __init__(self, circuit: Circuit, dim_s: int, dim_e: int,
                 symbol_map, rho0: np.ndarray):
        if circuit.n_qubits != int(math.log2(dim_s * dim_e)):
            raise ValueError("circuit does not match dims")
        self.dim_s, self.dim_e = dim_s, dim_e
        self.builders = [_GateBuilder(g, circuit.n_qubits) for g in circuit.gates]
        self.rho0 = np.asarray(rho0, dtype=np.complex128)
        alphabet = sorted(set(symbol_map))
        self.n_symbols = len(alphabet)
        sym_idx = {a: i for i, a in enumerate(alphabet)}
        order = sorted(range(dim_e), key=lambda e: (sym_idx[symbol_map[e]], e))
        self.kraus_order = np.array(order)
        counts = np.zeros(self.n_symbols, dtype=int)
        for e in range(dim_e):
            counts[sym_idx[symbol_map[e]]] += 1
        self.group_starts = np.concatenate([[0], np.cumsum(counts)[:-1]])

    def unitary(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        u = np.eye(self.dim_s * self.dim_e, dtype=np.complex128)
        xi = 0
        for b in self.builders:
            if b.parametric:
                u = b(x[xi]) @ u
                xi += 1
            else:
                u = b() @ u
        return u

    def level_probs(self, x, lengths) -> list[np.ndarray]:
        """Probability vectors over lex-ordered sequences for each length."""
        u4 = self.unitary(x).reshape(self.dim_s, self.dim_e,
                                     self.dim_s, self.dim_e)
        kraus = np.ascontiguousarray(
            u4[:, :, :, 0].transpose(1, 0, 2)[self.kraus_order]
        )
        kraus_c = kraus.conj()
        states = self.rho0[None, :, :]
        out = []
        wanted = set(lengths)
        for t in range(1, max(lengths) + 1):
            big = np.einsum("kij,bjl,kml->bkim", kraus, states, kraus_c)
            grouped = np.add.reduceat(big, self.group_starts, axis=1)
            states = grouped.reshape(-1, self.dim_s, self.dim_s)
            if t in wanted:
                out.append(np.einsum("bii->b", states).real)
        return out


# --- fitness ------------------------------------------------------------------

def complexity(hyp: Hypothesis, c_q: float, c_e: float) -> float:
    """c_q * (two-qubit gate count / qubit pairs) + c_e * M / N^2."""
    nq = hyp.circuit.n_qubits
    pairs = nq * (nq - 1) // 2
    gate_term = 0.0 if pairs == 0 else hyp.circuit.two_qubit_count / pairs
    return c_q * gate_term + c_e * hyp.dim_e / hyp.dim_s**2


class FitnessEngine:
    """Compiled fitness of one circuit structure against fixed target tables."""

    def __init__(self, hyp: Hypothesis, target: list[DistributionTable],
                 c_q: float = 0.01, c_e: float = 0.01):
        self.engine = ChannelEngine(
            hyp.circuit, hyp.dim_s, hyp.dim_e, tuple(hyp.symbol_map),
            initial_state(hyp.rho0_kind, hyp.dim_s),
        )
        self.complexity = complexity(hyp, c_q, c_e)
        targets = sorted(target, key=lambda tab: tab.t)
        self.lengths = [tab.t for tab in targets]
        m = self.engine.n_symbols
        self.target_vectors = [
            np.array([tab.prob(s) for s in product(range(m), repeat=tab.t)])
            for tab in targets
        ]

    def divergence(self, x) -> float:
        probs = self.engine.level_probs(x, self.lengths)
        acc = 0.0
        for vec, ref in zip(probs, self.target_vectors):
            acc += float(np.abs(vec - ref).max())
        return acc / len(self.lengths)

    def fitness(self, x) -> float:
        return -(self.divergence(x) + self.complexity)

    def neg_fitness(self, x) -> float:
        return -self.fitness(x)


def fitness(
    hyp: Hypothesis,
    target: list[DistributionTable],
    c_q: float = 0.01,
    c_e: float = 0.01,
) -> float:
    """F = -(average max-divergence against the target + complexity); always
    <= 0, equal to 0 only at zero divergence and zero complexity."""
    params = hyp.circuit.parameters()
    if any(p is None for p in params):
        raise ValueError("circuit has unbound parameters")
    return FitnessEngine(hyp, target, c_q, c_e).fitness(
        np.array(params, dtype=float)
    )


def fitness_reference(
    hyp: Hypothesis,
    target: list[DistributionTable],
    c_q: float = 0.01,
    c_e: float = 0.01,
) -> float:
    """Object-path fitness used to cross-check the compiled engine."""
    targets = sorted(target, key=lambda tab: tab.t)
    hyp_tables = hyp.tables([tab.t for tab in targets])
    div = divergence_avg(targets, hyp_tables)
    return -(div + complexity(hyp, c_q, c_e))


def optimize_parameters(
    hyp: Hypothesis,
    target: list[DistributionTable],
    optimizer_label: str = "nm",
    budget: int = 80,
    c_q: float = 0.01,
    c_e: float = 0.01,
) -> Hypothesis:
    """Lamarckian step: fit all circuit angles, write them back into the
    genotype, and record the reached fitness."""
    n_par = hyp.circuit.num_parameters
    engine = FitnessEngine(hyp, target, c_q, c_e)
    if n_par == 0:
        f = engine.fitness(np.zeros(0))
        return replace(hyp, fitness=f, optimal_params=np.zeros(0))
    x0 = np.array([p if p is not None else 0.0 for p in hyp.circuit.parameters()])
    obj = ObjectiveSpec(arity=n_par, evaluate=engine.neg_fitness, budget=budget)
    res = get_optimizer(optimizer_label)(obj, x0)
    tuned = hyp.circuit.with_parameters(res.best_params)
    return replace(
        hyp,
        circuit=tuned,
        fitness=-res.best_value,
        optimal_params=np.array(res.best_params),
    )


# --- adaptive distributions ----------------------------------------------------

@dataclass
class AdaptiveDistribution:
    """Bandit arm set: a finite domain with selection probabilities, reward
    counts for the current generation, and a log of draws awaiting credit."""

    domain: list
    probs: np.ndarray = None
    rewards: np.ndarray = None
    draws: list = field(default_factory=list)

    def __post_init__(self):
        k = len(self.domain)
        if k == 0:
            raise ValueError("empty domain")
        if self.probs is None:
            self.probs = np.full(k, 1.0 / k)
        self.probs = np.asarray(self.probs, dtype=float)
        if self.rewards is None:
            self.rewards = np.zeros(k)
        self.rewards = np.asarray(self.rewards, dtype=float)

    def sample(self, rng: np.random.Generator):
        i = int(rng.choice(len(self.domain), p=self.probs))
        self.draws.append(i)
        return self.domain[i]

    def clear_draws(self):
        self.draws.clear()

    def credit_draws(self):
        for i in self.draws:
            self.rewards[i] += 1.0
        self.draws.clear()

    def reward_value(self, value):
        self.rewards[self.domain.index(value)] += 1.0


def bandit_update(d: AdaptiveDistribution, gamma: float) -> AdaptiveDistribution:
    """p_i = gamma/k + (1-gamma) r_i / sum(r); uniform when no rewards came in.
    Rewards are cleared for the next generation."""
    if d.rewards.min() < 0:
        raise ValueError("rewards must be nonnegative")
    k = len(d.domain)
    total = d.rewards.sum()
    if total == 0:
        probs = np.full(k, 1.0 / k)
    else:
        probs = gamma / k + (1.0 - gamma) * d.rewards / total
        probs = probs / probs.sum()
    return AdaptiveDistribution(domain=list(d.domain), probs=probs,
                                rewards=np.zeros(k))


SELECTION_STRENGTHS = [0.1, 0.2, 0.5, 0.7, 1.0]
MUTATION_RATES = [0.1, 0.2, 0.3, 0.4, 0.5]
MUTATION_TYPES = ["gte", "qbt", "rpl", "dlt", "ins"]


def default_distributions(space: LearnSpace) -> dict[str, AdaptiveDistribution]:
    nq = space.n_state_qubits + space.n_emission_qubits
    pairs = [(c, d) for c in range(nq) for d in range(nq) if c != d]
    return {
        "selection_type": AdaptiveDistribution(["fitness", "rank", "tournament"]),
        "selection_strength": AdaptiveDistribution(list(SELECTION_STRENGTHS)),
        "survival_type": AdaptiveDistribution(["fitness", "rank"]),
        "survival_strength": AdaptiveDistribution(list(SELECTION_STRENGTHS)),
        "gates": AdaptiveDistribution(list(space.gate_set)),
        "qubit": AdaptiveDistribution(list(range(nq))),
        "qubit_pair": AdaptiveDistribution(pairs),
        "local_search_len": AdaptiveDistribution(list(range(1, 11))),
        "local_search_type": AdaptiveDistribution(["depth", "breadth"]),
        "mutation_rate": AdaptiveDistribution(list(MUTATION_RATES)),
        "mutation_type": AdaptiveDistribution(list(MUTATION_TYPES)),
        "optimizer": AdaptiveDistribution(list(space.optimizers)),
    }


# --- annealing and selection ----------------------------------------------------

def temperature(t: int) -> float:
    """tau(t) = (t^(3/2) + 1)^(-1/4); tau(0) = 1, strictly decreasing."""
    if t < 0:
        raise ValueError("step count must be >= 0")
    return float((t**1.5 + 1.0) ** -0.25)


def acceptance_probability(f_old: float, f_new: float, tau: float) -> float:
    """Probability of keeping a non-superior candidate at temperature tau.

    Improvements are always kept; a perfect incumbent (fitness ~ 0) never
    yields to a strictly worse candidate.
    """
    if f_new >= f_old:
        return 1.0
    if abs(f_old) < 1e-12:
        return 0.0
    p = math.exp((0.6 / tau) * (f_old - f_new) / f_old)
    return min(max(p, 0.0), 1.0)


def _ranked(pop: list[Hypothesis]) -> list[Hypothesis]:
    return sorted(pop, key=lambda h: h.fitness, reverse=True)


def select_parents(
    pop: list[Hypothesis],
    count: int,
    method: str,
    strength: float,
    rng: np.random.Generator,
) -> list[Hypothesis]:
    """Sample ``count`` parents with replacement.

    rank:       P[rank i] ~ (mu - i)^s with rank 1 the fittest (the last rank
                always gets weight 0, so s = 0 is uniform over ranks 1..mu-1);
    fitness:    weights shifted to (F - min F + eps);
    tournament: best of k = max(2, ceil(4 s)) uniform candidates per draw.
    """
    if not pop:
        raise ValueError("empty population")
    ranked = _ranked(pop)
    mu = len(ranked)
    if method == "tournament":
        k = max(2, math.ceil(strength * 4))
        out = []
        for _ in range(count):
            picks = rng.integers(mu, size=k)
            out.append(ranked[int(picks.min())])
        return out
    if method == "rank":
        base = np.array([mu - i for i in range(1, mu + 1)], dtype=float)
        weights = np.where(base > 0, base**strength, 0.0)
    elif method == "fitness":
        f = np.array([h.fitness for h in ranked])
        weights = f - f.min() + 1e-9
    else:
        raise ValueError(f"unknown selection method {method!r}")
    if weights.sum() <= 0:
        weights = np.ones(mu)
    probs = weights / weights.sum()
    idx = rng.choice(mu, size=count, replace=True, p=probs)
    return [ranked[int(i)] for i in idx]


def select_survivors(
    pool: list[Hypothesis],
    mu: int,
    method: str,
    strength: float,
    rng: np.random.Generator,
) -> list[Hypothesis]:
    """Sample mu distinct survivors from the mu+lambda pool.

    rank:    P[rank r] ~ 1/(d_r + 1) with d_r = exp(s (r - pool size));
    fitness: shifted-fitness weights sharpened by the strength exponent.
    The incumbent best hypothesis always survives.
    """
    pool = _ranked(pool)
    size = len(pool)
    if size < mu:
        raise ValueError(f"pool of {size} cannot fill a population of {mu}")
    if method == "rank":
        d = np.exp(strength * (np.arange(1, size + 1, dtype=float) - size))
        weights = 1.0 / (d + 1.0)
    elif method == "fitness":
        f = np.array([h.fitness for h in pool])
        weights = (f - f.min() + 1e-9) ** (4.0 * strength)
    else:
        raise ValueError(f"unknown survival method {method!r}")
    if weights.sum() <= 0 or not np.isfinite(weights).all():
        weights = np.ones(size)
    probs = weights / weights.sum()
    idx = list(rng.choice(size, size=mu, replace=False, p=probs))
    if 0 not in idx:  # elitism: keep the best no matter what was drawn
        worst = max(range(len(idx)), key=lambda j: idx[j])
        idx[worst] = 0
    return [pool[int(i)] for i in sorted(idx)]


# --- generation and modification -------------------------------------------------

def random_hypothesis(
    space: LearnSpace,
    target: list[DistributionTable],
    rng: np.random.Generator,
    distributions: Optional[dict] = None,
    c_q: float = 0.01,
    c_e: float = 0.01,
) -> Hypothesis:
    """Uniform random gate count in [min_gates, max_gates], random gates,
    then a Lamarckian parameter fit."""
    dists = distributions or {}
    gspace = space.gate_space(
        {k: dists[k] for k in ("gates", "qubit", "qubit_pair") if k in dists}
    )
    n_gates = int(rng.integers(space.min_gates, space.max_gates + 1))
    gates = tuple(qc.random_gate(gspace, rng) for _ in range(n_gates))
    hyp = Hypothesis(
        circuit=Circuit(gspace.n_qubits, gates),
        dim_s=space.dim_s,
        dim_e=space.dim_e,
        symbol_map=tuple(space.symbol_map),
        rho0_kind=space.rho0_kind,
    )
    label = dists["optimizer"].sample(rng) if "optimizer" in dists else space.optimizers[0]
    budget = space.budget_for(hyp.circuit.num_parameters)
    return optimize_parameters(hyp, target, label, budget, c_q, c_e)


def _mutate_sweep(
    circuit: Circuit,
    rate: float,
    gspace: GateSpace,
    dists: dict,
    rng: np.random.Generator,
) -> Circuit:
    """Per-position Bernoulli mutations over one sweep of the gate list."""
    c = circuit
    pos = 0
    while pos < len(c.gates):
        if rng.random() < rate:
            m_type = dists["mutation_type"].sample(rng)
            before = len(c.gates)
            c = qc.mutate(c, pos, m_type, gspace, rng)
            if len(c.gates) > before:
                pos += 2  # skip the freshly inserted gate
            elif len(c.gates) == before:
                pos += 1
            # deletion: the next original gate slid into pos
        else:
            pos += 1
    if not c.gates and rng.random() < rate:
        # an empty genotype would be an absorbing state; give it one insert try
        c = qc.mutate(c, 0, "ins", gspace, rng)
    return c


def modify_hypothesis(
    hyp: Hypothesis,
    tau: float,
    dists: dict[str, AdaptiveDistribution],
    space: LearnSpace,
    target: list[DistributionTable],
    rng: np.random.Generator,
    c_q: float = 0.01,
    c_e: float = 0.01,
) -> Hypothesis:
    """Stochastic local search around a parent.

    Runs a random number of steps; each step mutates the current anchor with
    a drawn rate, refits parameters, tracks the best find, and moves the
    anchor on temperature acceptance (depth mode walks, breadth mode keeps the
    anchor pinned at the parent). A final temperature acceptance may hand back
    the last candidate instead of the best one.
    """
    gspace = space.gate_space(
        {k: dists[k] for k in ("gates", "qubit", "qubit_pair") if k in dists}
    )
    best = hyp
    current = hyp
    candidate = hyp
    steps = dists["local_search_len"].sample(rng)
    for _ in range(steps):
        s_type = dists["local_search_type"].sample(rng)
        rate = dists["mutation_rate"].sample(rng)
        mutated = _mutate_sweep(current.circuit, rate, gspace, dists, rng)
        if mutated is current.circuit:
            candidate = current
        else:
            candidate = replace(hyp, circuit=mutated, fitness=None,
                                optimal_params=None)
            label = dists["optimizer"].sample(rng)
            budget = space.budget_for(candidate.circuit.num_parameters)
            candidate = optimize_parameters(
                candidate, target, label, budget, c_q, c_e
            )
        if candidate.fitness > best.fitness:
            best = candidate
        accept_p = acceptance_probability(current.fitness, candidate.fitness, tau)
        if s_type == "depth" and rng.random() < accept_p:
            current = candidate
    if rng.random() < acceptance_probability(best.fitness, candidate.fitness, tau):
        best = candidate
    return best


# --- the evolutionary loop --------------------------------------------------------

@dataclass
class GenerationStats:
    generation: int
    best_fitness: float
    mean_fitness: float
    temperature: float
    children: int
    improved_children: int


@dataclass
class LearningReport:
    generations: list[GenerationStats]
    best_trace: list[float]
    bandit_traces: dict[str, list[list[float]]]
    wall_time: float
    best: Hypothesis
    target_reached: bool


def evolve(
    target: list[DistributionTable],
    space: LearnSpace,
    hp: HyperParams,
    seed: int = 0,
) -> LearningReport:
    """Adaptive evolutionary search for a hypothesis matching the target.

    The temperature cools with the progress counter and resets to maximum
    when the best fitness stagnates for prog_window generations; every
    stochastic operator distribution is bandit-updated each generation.
    """
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    dists = default_distributions(space)
    target = sorted(target, key=lambda tab: tab.t)[: hp.n_max]

    pop = [
        random_hypothesis(space, target, rng, dists, hp.c_q, hp.c_e)
        for _ in range(hp.mu)
    ]
    for d in dists.values():
        d.clear_draws()
    pop = _ranked(pop)
    best = pop[0]
    best_trace = [best.fitness]
    bandit_traces: dict[str, list[list[float]]] = {
        name: [list(d.probs)] for name, d in dists.items()
    }
    stats: list[GenerationStats] = []
    g = 0
    t_progress = 0
    last_improvement = 0

    while best.fitness < hp.target_fitness and g < hp.g_max:
        tau = temperature(t_progress)
        sel_type = dists["selection_type"].sample(rng)
        sel_strength = dists["selection_strength"].sample(rng)
        parents = select_parents(pop, hp.lam, sel_type, sel_strength, rng)

        children = []
        improved_children = 0
        for parent in parents:
            for d in dists.values():
                d.clear_draws()
            child = modify_hypothesis(
                parent, tau, dists, space, target, rng, hp.c_q, hp.c_e
            )
            children.append(child)
            if child.fitness > parent.fitness + 1e-15:
                improved_children += 1
                for d in dists.values():
                    d.credit_draws()
        for d in dists.values():
            d.clear_draws()

        surv_type = dists["survival_type"].sample(rng)
        surv_strength = dists["survival_strength"].sample(rng)
        pop = select_survivors(pop + children, hp.mu, surv_type, surv_strength, rng)
        g += 1

        gen_best = pop[0]
        if gen_best.fitness > best.fitness + 1e-15:
            best = gen_best
            last_improvement = g
            dists["selection_type"].reward_value(sel_type)
            dists["selection_strength"].reward_value(sel_strength)
            dists["survival_type"].reward_value(surv_type)
            dists["survival_strength"].reward_value(surv_strength)
        for d in dists.values():
            d.clear_draws()
        best_trace.append(best.fitness)

        if g - last_improvement >= hp.prog_window:
            t_progress = 0
        else:
            t_progress += 1

        for name, d in dists.items():
            dists[name] = bandit_update(d, hp.gamma_bandit)
            bandit_traces[name].append(list(dists[name].probs))

        stats.append(
            GenerationStats(
                generation=g,
                best_fitness=best.fitness,
                mean_fitness=float(np.mean([h.fitness for h in pop])),
                temperature=tau,
                children=len(children),
                improved_children=improved_children,
            )
        )

    return LearningReport(
        generations=stats,
        best_trace=best_trace,
        bandit_traces=bandit_traces,
        wall_time=time.perf_counter() - t0,
        best=best,
        target_reached=best.fitness >= hp.target_fitness,
    )


# --- ansatz training ---------------------------------------------------------------

@dataclass
class AnsatzSpec:
    """A fixed template to fit: circuit with unbound angles plus the model
    designation used to turn it into a generator."""

    circuit: Circuit
    dim_s: int
    dim_e: int
    symbol_map: tuple[str, ...]
    rho0: Optional[np.ndarray] = None  # default: maximally mixed state system

    def initial_density(self) -> np.ndarray:
        if self.rho0 is not None:
            return np.asarray(self.rho0, dtype=np.complex128)
        return initial_state("maximally_mixed", self.dim_s)

    def model(self, params) -> QhmmKraus:
        hyp = Hypothesis(
            circuit=self.circuit.with_parameters(params),
            dim_s=self.dim_s,
            dim_e=self.dim_e,
            symbol_map=tuple(self.symbol_map),
        )
        q = hyp.to_qhmm()
        return QhmmKraus(alphabet=q.alphabet, channel=q.channel,
                         rho0=self.initial_density())


def ansatz_cost(
    target: list[tuple[Sequence, float]], current: list[tuple[Sequence, float]]
) -> float:
    """Sum of length-weighted squared errors over an aligned support."""
    if len(target) != len(current):
        raise ValueError("supports are not aligned")
    acc = 0.0
    for (seq_t, p_t), (seq_c, p_c) in zip(target, current):
        if tuple(seq_t) != tuple(seq_c):
            raise ValueError("supports are not aligned")
        acc += len(seq_t) * (p_t - p_c) ** 2
    return acc


@dataclass
class TrainResult:
    params: np.ndarray
    cost: float
    trace: list[float]
    evaluations: int


def train_ansatz(
    spec: AnsatzSpec,
    target: list[tuple[Sequence, float]],
    optimizer_label: str = "nm",
    x0=None,
    budget: int = 4000,
    rng: Optional[np.random.Generator] = None,
) -> TrainResult:
    """Fit the template's angles to the target sequence probabilities by
    minimizing the length-weighted squared error."""
    rng = rng or np.random.default_rng(0)
    lengths = sorted({len(seq) for seq, _ in target})
    if not lengths or lengths[0] == 0:
        raise ValueError("target support must be nonempty sequences")
    engine = ChannelEngine(
        spec.circuit, spec.dim_s, spec.dim_e, tuple(spec.symbol_map),
        spec.initial_density(),
    )
    m = engine.n_symbols
    # per length: positions of the supported sequences in lex order + refs
    by_len: dict[int, list[tuple[int, float, int]]] = {t: [] for t in lengths}
    for seq, p in target:
        pos = 0
        for a in seq:
            pos = pos * m + a
        by_len[len(seq)].append((pos, p, len(seq)))
    trace: list[float] = []

    def evaluate(x):
        probs = engine.level_probs(x, lengths)
        c = 0.0
        for vec, t in zip(probs, lengths):
            for pos, p_ref, weight in by_len[t]:
                c += weight * (vec[pos] - p_ref) ** 2
        trace.append(min(c, trace[-1]) if trace else c)
        return c

    n_par = spec.circuit.num_parameters
    if n_par == 0:
        c = evaluate(np.zeros(0))
        return TrainResult(params=np.zeros(0), cost=c, trace=trace, evaluations=1)
    if x0 is None:
        x0 = rng.uniform(0.0, 2.0 * math.pi, size=n_par)
    obj = ObjectiveSpec(arity=n_par, evaluate=evaluate, budget=budget)
    res = get_optimizer(optimizer_label)(obj, np.asarray(x0, dtype=float))
    return TrainResult(
        params=res.best_params,
        cost=res.best_value,
        trace=trace,
        evaluations=res.evaluations,
    )


def train_ansatz_restarts(
    spec: AnsatzSpec,
    target: list[tuple[Sequence, float]],
    optimizer_label: str = "nm",
    restarts: int = 10,
    budget: int = 4000,
    seed: int = 0,
) -> TrainResult:
    """Best result over seeded random restarts."""
    best: Optional[TrainResult] = None
    for r in range(restarts):
        rng = np.random.default_rng(np.random.SeedSequence([seed, r]))
        res = train_ansatz(spec, target, optimizer_label, None, budget, rng)
        if best is None or res.cost < best.cost:
            best = res
    return best
