"""Command-line entry point: batch operations over model/target files.

All primary outputs are CSV/JSON files under --out; diagnostics go to
stderr. Runs with the same seed and inputs are byte-identical.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import __version__, classical, experiments, lang, models
from .circuits import efficient_su2, real_amplitudes
from .lang import render_sequence
from .learning import (
    AnsatzSpec,
    HyperParams,
    LearnSpace,
    Hypothesis,
    evolve,
    train_ansatz_restarts,
)
from .linalg import next_power_of_two
from .models import block_symbol_map


def _fail(msg: str, code: int = 2):
    print(f"error: {msg}", file=sys.stderr)
    raise SystemExit(code)


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _resolve_seed(args) -> int:
    if args.seed is not None:
        return args.seed
    seed = int(np.random.SeedSequence().entropy % (2**31))
    print(f"seed not given; generated seed={seed}", file=sys.stderr)
    return seed


def load_model(path: str):
    """Dispatch on JSON content: classical HMM, Kraus QHMM or unitary QHMM."""
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        _fail(f"cannot read model file {path}: {exc}")
    try:
        if data.get("type") in ("kraus", "unitary"):
            return models.qhmm_from_json(data)
        if {"alphabet", "A", "B", "x0"} <= set(data):
            return classical.hmm_from_json(data)
    except (ValueError, KeyError) as exc:
        _fail(f"invalid model file {path}: {exc}")
    _fail(f"unrecognized model format in {path}")


def _model_tables(model, lengths) -> dict[int, lang.DistributionTable]:
    if isinstance(model, classical.ClassicalHmm):
        return {t: classical.distribution(model, t) for t in lengths}
    if isinstance(model, models.QhmmUnitary):
        model = models.to_kraus(model)
    return models.distribution_tables(model, lengths)


def _model_alphabet(model) -> list[str]:
    return list(model.alphabet)


def _write_table_csv(path: Path, table: lang.DistributionTable, alphabet):
    with open(path, "w") as fh:
        fh.write("sequence,probability\n")
        for seq in sorted(table.probs):
            fh.write(f"{render_sequence(seq, alphabet)},{table.probs[seq]:.12g}\n")


def _load_target(path: str, max_len: int):
    """A target file is either a sequence,probability CSV or a raw corpus."""
    try:
        with open(path) as fh:
            first = fh.readline()
    except OSError as exc:
        _fail(f"cannot read target file {path}: {exc}")
    if "," in first or first.strip().lower().startswith("sequence"):
        alphabet, tables = lang.read_tables_csv(path)
    else:
        alphabet, corpus = lang.read_corpus(path)
        tables = lang.tables_from_corpus(corpus, max_len)
    if not tables:
        _fail(f"target file {path} yields no distribution tables")
    return alphabet, tables


def cmd_simulate(args):
    model = load_model(args.model)
    seed = _resolve_seed(args)
    out = _outdir(args)
    if isinstance(model, classical.ClassicalHmm):
        samples = classical.sample(model, args.t, args.shots, seed)
    elif isinstance(model, models.QhmmUnitary):
        samples = models.simulate(model, args.t, args.shots, seed)
    else:
        _fail("simulate expects a classical model or a unitary-form QHMM")
    alphabet = _model_alphabet(model)
    with open(out / "sequences.csv", "w") as fh:
        fh.write("sequence\n")
        for s in samples:
            fh.write(render_sequence(s, alphabet) + "\n")
    table = models.empirical_table(samples, args.t)
    _write_table_csv(out / "empirical.csv", table, alphabet)
    print(f"wrote {len(samples)} sequences to {out}", file=sys.stderr)
    return 0


def cmd_distribution(args):
    model = load_model(args.model)
    out = _outdir(args)
    table = _model_tables(model, [args.t]).get(args.t) if args.t > 0 else \
        lang.DistributionTable(t=0, probs={(): 1.0})
    _write_table_csv(out / f"distribution_t{args.t}.csv", table,
                     _model_alphabet(model))
    total = table.total()
    print(f"t={args.t}: {len(table)} sequences, total={total:.12g}",
          file=sys.stderr)
    return 0


def cmd_hankel(args):
    out = _outdir(args)
    if args.model:
        model = load_model(args.model)
        alphabet = _model_alphabet(model)
        m = len(alphabet)
        if isinstance(model, classical.ClassicalHmm):
            f = lambda s: classical.sequence_probability(model, s)
        else:
            q = models.to_kraus(model) if isinstance(model, models.QhmmUnitary) else model
            f = lambda s: models.sequence_probability(q, s)
        h = lang.hankel(f, args.max_len, args.max_len, m)
    elif args.target:
        alphabet, tables = _load_target(args.target, 2 * args.max_len)
        m = len(alphabet)
        h = lang.hankel_from_tables(tables, args.max_len, args.max_len, m)
    else:
        _fail("hankel needs --model or --target")
    est = lang.order_estimate(h, args.tol)
    with open(out / "hankel.csv", "w") as fh:
        fh.write("prefix/suffix," + ",".join(
            render_sequence(s, alphabet) for s in h.suffixes) + "\n")
        for i, p in enumerate(h.prefixes):
            row = ",".join(f"{v:.12g}" for v in h.values[i])
            fh.write(f"{render_sequence(p, alphabet)},{row}\n")
    report = {
        "rank": est.rank,
        "classical_order": est.classical_order,
        "quantum_dim": est.quantum_dim,
        "rel_tol": args.tol,
        "prefixes": len(h.prefixes),
        "suffixes": len(h.suffixes),
    }
    (out / "rank.json").write_text(json.dumps(report, indent=2) + "\n")
    print(f"rank={est.rank} quantum_dim={est.quantum_dim}", file=sys.stderr)
    return 0


def cmd_quantize(args):
    model = load_model(args.model)
    if not isinstance(model, classical.ClassicalHmm):
        _fail("quantize expects a classical model file")
    out = _outdir(args)
    q = models.quantize_classical(model)
    (out / "qhmm.json").write_text(
        json.dumps(models.qhmm_to_json(q), indent=2) + "\n"
    )
    print(f"quantized {model.n}-state model -> {out/'qhmm.json'}", file=sys.stderr)
    return 0


def _space_from_config(alphabet, tables, cfg: dict, args) -> LearnSpace:
    m = len(alphabet)
    if "dim_s" in cfg:
        dim_s = int(cfg["dim_s"])
    else:
        max_ps = max(t for t in tables) // 2 or 1
        h = lang.hankel_from_tables(tables, max_ps, max_ps, m) if max_ps else None
        dim_s = lang.order_estimate(h).quantum_dim if h is not None else 2
        dim_s = max(dim_s, 2)
    dim_e = int(cfg.get("dim_e", next_power_of_two(m)))
    return LearnSpace(
        alphabet=alphabet,
        dim_s=dim_s,
        dim_e=dim_e,
        gate_set=tuple(cfg.get("gate_set", ("X", "Y", "RX", "RY", "CX", "CRY"))),
        min_gates=int(cfg.get("min_gates", 3)),
        max_gates=int(cfg.get("max_gates", 12)),
        rho0_kind=cfg.get("rho0_kind", "maximally_mixed"),
        optimizers=tuple(cfg.get("optimizers", ("nm", "cbla", "bfsg"))),
        opt_budget=int(cfg.get("opt_budget", 70)),
    )


def cmd_learn_evo(args):
    cfg = {}
    if args.config:
        try:
            cfg = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            _fail(f"cannot read config {args.config}: {exc}")
    seed = args.seed if args.seed is not None else cfg.get("seed")
    args.seed = seed
    seed = _resolve_seed(args)
    alphabet, tables = _load_target(args.target, int(cfg.get("n_max", 5)))
    target = [tables[t] for t in sorted(tables)]
    space = _space_from_config(alphabet, tables, cfg, args)
    hp = HyperParams(
        mu=int(cfg.get("mu", 30)),
        lam=int(cfg.get("lambda", 10)),
        gamma_bandit=float(cfg.get("gamma", 0.3)),
        prog_window=int(cfg.get("prog_window", 10)),
        g_max=int(cfg.get("g_max", 60)),
        target_fitness=float(cfg.get("target_fitness", -0.01)),
        c_q=float(cfg.get("c_q", 0.01)),
        c_e=float(cfg.get("c_e", 0.01)),
        n_max=int(cfg.get("n_max", min(7, max(tables)))),
    )
    out = _outdir(args)
    report = evolve(target, space, hp, seed=seed)
    best_q = report.best.to_qhmm()
    (out / "best_model.json").write_text(
        json.dumps(models.qhmm_to_json(best_q), indent=2) + "\n"
    )
    with open(out / "fitness_trace.csv", "w") as fh:
        fh.write("generation,best_fitness\n")
        for i, v in enumerate(report.best_trace):
            fh.write(f"{i},{v:.12g}\n")
    summary = {
        "seed": seed,
        "generations": len(report.generations),
        "best_fitness": report.best.fitness,
        "target_reached": report.target_reached,
        "wall_time": report.wall_time,
        "per_generation": [asdict(g) for g in report.generations],
        "bandit_traces": report.bandit_traces,
    }
    (out / "report.json").write_text(json.dumps(summary, indent=2) + "\n")
    print(
        f"best fitness {report.best.fitness:.6g} after "
        f"{len(report.generations)} generations", file=sys.stderr,
    )
    return 0


_TEMPLATES = {
    "real_amplitudes": lambda nq, reps, ent: real_amplitudes(nq, reps, ent),
    "efficient_su2_ry_rz": lambda nq, reps, ent: efficient_su2(nq, reps, ent, "RY_RZ"),
    "efficient_su2_rz_rx": lambda nq, reps, ent: efficient_su2(nq, reps, ent, "RZ_RX"),
}


def cmd_learn_ansatz(args):
    seed = _resolve_seed(args)
    alphabet, tables = _load_target(args.target, args.t)
    m = len(alphabet)
    dim_s = args.dim_s
    dim_e = args.dim_e or next_power_of_two(m)
    nq = int(math.log2(dim_s)) + int(math.log2(dim_e))
    if args.template not in _TEMPLATES:
        _fail(f"unknown template {args.template!r}; choose from {sorted(_TEMPLATES)}")
    circuit = _TEMPLATES[args.template](nq, args.reps, args.entanglement)
    spec = AnsatzSpec(
        circuit=circuit,
        dim_s=dim_s,
        dim_e=dim_e,
        symbol_map=block_symbol_map(alphabet, dim_e),
    )
    items = [
        (seq, tables[t].prob(seq))
        for t in sorted(tables)
        for seq in sorted(tables[t].probs)
    ]
    res = train_ansatz_restarts(
        spec, items, args.optimizer, restarts=args.restarts,
        budget=args.budget, seed=seed,
    )
    out = _outdir(args)
    (out / "params.json").write_text(json.dumps({
        "template": args.template,
        "entanglement": args.entanglement,
        "reps": args.reps,
        "dim_s": dim_s,
        "dim_e": dim_e,
        "cost": res.cost,
        "params": [float(p) for p in res.params],
        "seed": seed,
    }, indent=2) + "\n")
    with open(out / "training_curve.csv", "w") as fh:
        fh.write("evaluation,best_cost\n")
        for i, v in enumerate(res.trace):
            fh.write(f"{i},{v:.12g}\n")
    print(f"final cost {res.cost:.6g}", file=sys.stderr)
    return 0


def cmd_landscape(args):
    seed = _resolve_seed(args)
    out = _outdir(args)
    if args.model:
        data = json.loads(Path(args.model).read_text())
        if "circuit" not in data:
            _fail("landscape needs a unitary-form model with a circuit")
        q = models.qhmm_from_json(data)
        hyp = Hypothesis(
            circuit=q.u, dim_s=q.dim_s, dim_e=q.dim_e,
            symbol_map=tuple(q.symbol_map),
        )
    else:
        # fixed training seed: --seed varies the walk, not the walk origin
        hyp = experiments.trained_market_hypothesis(seed=0)
    rates = [float(r) for r in args.rates.split(",")]
    samples_by_rate = {}
    for i, rate in enumerate(rates):
        rng = np.random.default_rng(np.random.SeedSequence([seed, i]))
        samples_by_rate[rate] = experiments.landscape_walk(
            hyp, args.steps, rate, rng
        )
    with open(out / "samples.csv", "w") as fh:
        lengths = sorted(next(iter(samples_by_rate.values()))[0].divergences)
        cols = ",".join(f"div_{t}" for t in lengths)
        fh.write(f"rate,op_distance,{cols},total\n")
        for rate, samples in samples_by_rate.items():
            for s in samples:
                divs = ",".join(f"{s.divergences[t]:.12g}" for t in lengths)
                fh.write(f"{rate},{s.op_distance:.12g},{divs},{s.total:.12g}\n")
    corr = experiments.landscape_correlation(samples_by_rate)
    (out / "correlation.json").write_text(json.dumps(
        {str(k): (None if math.isnan(v) else v) for k, v in corr.items()},
        indent=2) + "\n")
    print(f"correlations: {corr}", file=sys.stderr)
    return 0


def cmd_reproduce(args):
    out = _outdir(args)
    kwargs = {}
    if args.seed is not None:
        if args.name in ("monras_ansatz", "market_ansatz"):
            kwargs["seed"] = args.seed
        elif args.name in ("market_evo", "gaussian_evo"):
            kwargs["seeds"] = (args.seed,)
    report = experiments.reproduce(args.name, **kwargs)
    payload = {
        "name": report.name,
        "passed": report.passed,
        "achieved": report.achieved,
        "threshold": report.threshold,
        "details": report.details,
    }
    (out / f"{args.name}.json").write_text(json.dumps(payload, indent=2) + "\n")
    if report.rows:
        with open(out / f"{args.name}.csv", "w") as fh:
            cols = list(report.rows[0])
            fh.write(",".join(cols) + "\n")
            for row in report.rows:
                fh.write(",".join(str(row[c]) for c in cols) + "\n")
    status = "PASS" if report.passed else "FAIL"
    print(f"{args.name}: {status} (achieved {report.achieved:.6g}, "
          f"threshold {report.threshold:.6g})", file=sys.stderr)
    return 0 if report.passed else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="qhmm",
        description="Quantum hidden Markov models: simulate, analyze, learn.",
    )
    p.add_argument("--version", action="version", version=f"qhmm {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, model=False, target=False):
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--out", default="out", help="output directory")
        sp.add_argument("--threads", type=int, default=1,
                        help="max worker threads (current build runs serially)")
        if model:
            sp.add_argument("--model", required=True, help="model JSON file")
        if target:
            sp.add_argument("--target", required=True,
                            help="target CSV table or corpus file")

    sp = sub.add_parser("simulate", help="sample observation sequences")
    common(sp, model=True)
    sp.add_argument("--t", type=int, required=True, help="sequence length")
    sp.add_argument("--shots", type=int, default=100000)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("distribution", help="exact sequence distribution")
    common(sp, model=True)
    sp.add_argument("--t", type=int, required=True)
    sp.set_defaults(func=cmd_distribution)

    sp = sub.add_parser("hankel", help="Hankel matrix and rank estimate")
    common(sp)
    sp.add_argument("--model", default=None)
    sp.add_argument("--target", default=None)
    sp.add_argument("--max-len", type=int, default=3, dest="max_len",
                    help="max prefix/suffix length")
    sp.add_argument("--tol", type=float, default=1e-7)
    sp.set_defaults(func=cmd_hankel)

    sp = sub.add_parser("quantize", help="classical model -> QHMM")
    common(sp, model=True)
    sp.set_defaults(func=cmd_quantize)

    sp = sub.add_parser("learn-evo", help="evolutionary circuit learning")
    common(sp, target=True)
    sp.add_argument("--config", default=None, help="hyperparameter JSON")
    sp.set_defaults(func=cmd_learn_evo)

    sp = sub.add_parser("learn-ansatz", help="fit a fixed ansatz template")
    common(sp, target=True)
    sp.add_argument("--template", default="real_amplitudes",
                    choices=sorted(_TEMPLATES))
    sp.add_argument("--entanglement", default="full",
                    choices=["full", "linear"])
    sp.add_argument("--reps", type=int, default=1)
    sp.add_argument("--optimizer", default="nm")
    sp.add_argument("--restarts", type=int, default=10)
    sp.add_argument("--budget", type=int, default=4000)
    sp.add_argument("--t", type=int, default=5, help="max corpus window length")
    sp.add_argument("--dim-s", type=int, default=2, dest="dim_s")
    sp.add_argument("--dim-e", type=int, default=None, dest="dim_e")
    sp.set_defaults(func=cmd_learn_ansatz)

    sp = sub.add_parser("landscape", help="smoothness walk and correlation")
    common(sp)
    sp.add_argument("--model", default=None,
                    help="unitary-form model JSON (default: trained market)")
    sp.add_argument("--steps", type=int, default=500)
    sp.add_argument("--rates", default="0.1", help="comma-separated fractions")
    sp.set_defaults(func=cmd_landscape)

    sp = sub.add_parser(
        "reproduce",
        help="run a named benchmark (exits nonzero if it misses its threshold)",
    )
    common(sp)
    sp.add_argument("name", choices=sorted(experiments.REPRODUCTIONS))
    sp.set_defaults(func=cmd_reproduce)

    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SystemExit:
        raise
    except Exception as exc:  # surface library errors as diagnostics
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
