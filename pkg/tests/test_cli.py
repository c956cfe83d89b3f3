import json
import math

import numpy as np
import pytest

from qhmm import classical, models
from qhmm.cli import main


@pytest.fixture
def market_file(tmp_path):
    path = tmp_path / "market.json"
    path.write_text(json.dumps(classical.hmm_to_json(classical.market_model())))
    return str(path)


@pytest.fixture
def damping_file(tmp_path):
    path = tmp_path / "ad.json"
    m = models.amplitude_damping_model(math.pi / 2)
    path.write_text(json.dumps(models.qhmm_to_json(m)))
    return str(path)


def read_table(path):
    out = {}
    for line in open(path).read().splitlines()[1:]:
        seq, prob = line.rsplit(",", 1)
        out[seq] = float(prob)
    return out


def test_version(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert "qhmm" in capsys.readouterr().out


def test_help(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--help"])
    assert exc.value.code == 0


def test_distribution_damping_matches_reference(damping_file, tmp_path):
    out = tmp_path / "out"
    assert main(["distribution", "--model", damping_file, "--t", "2",
                 "--out", str(out)]) == 0
    table = read_table(out / "distribution_t2.csv")
    assert abs(table["00"] - 0.75) < 1e-12
    assert abs(table["01"]) < 1e-12
    assert abs(table["10"] - 0.125) < 1e-12
    assert abs(table["11"] - 0.125) < 1e-12


def test_distribution_market_normalized(market_file, tmp_path):
    out = tmp_path / "out"
    assert main(["distribution", "--model", market_file, "--t", "7",
                 "--out", str(out)]) == 0
    table = read_table(out / "distribution_t7.csv")
    assert abs(sum(table.values()) - 1.0) < 1e-9


def test_distribution_t0(market_file, tmp_path):
    out = tmp_path / "out"
    assert main(["distribution", "--model", market_file, "--t", "0",
                 "--out", str(out)]) == 0
    table = read_table(out / "distribution_t0.csv")
    assert table == {"": 1.0}


def test_hankel_market_rank(market_file, tmp_path):
    out = tmp_path / "out"
    assert main(["hankel", "--model", market_file, "--max-len", "3",
                 "--out", str(out)]) == 0
    report = json.loads((out / "rank.json").read_text())
    assert report["rank"] == 4
    assert report["quantum_dim"] == 2


def test_hankel_tolerance_flag(market_file, tmp_path):
    out = tmp_path / "out"
    # an absurdly loose tolerance collapses the rank to 1
    assert main(["hankel", "--model", market_file, "--max-len", "2",
                 "--tol", "0.99", "--out", str(out)]) == 0
    report = json.loads((out / "rank.json").read_text())
    assert report["rank"] == 1
    assert report["rel_tol"] == 0.99


def test_hankel_damping_rank_plateau(damping_file, tmp_path):
    # recomputed rank stays at 2 for window lengths 1..3
    for max_len in (1, 2, 3):
        out = tmp_path / f"o{max_len}"
        assert main(["hankel", "--model", damping_file,
                     "--max-len", str(max_len), "--out", str(out)]) == 0
        rank = json.loads((out / "rank.json").read_text())["rank"]
        assert rank == 2


def test_simulate_deterministic_outputs(damping_file, tmp_path):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    for out in (out1, out2):
        assert main(["simulate", "--model", damping_file, "--t", "2",
                     "--shots", "500", "--seed", "42", "--out", str(out)]) == 0
    assert (out1 / "sequences.csv").read_bytes() == (out2 / "sequences.csv").read_bytes()
    assert (out1 / "empirical.csv").read_bytes() == (out2 / "empirical.csv").read_bytes()


def test_simulate_single_shot(damping_file, tmp_path):
    out = tmp_path / "out"
    assert main(["simulate", "--model", damping_file, "--t", "3",
                 "--shots", "1", "--seed", "0", "--out", str(out)]) == 0
    lines = (out / "sequences.csv").read_text().splitlines()
    assert len(lines) == 2  # header + one sequence


def test_simulate_empirical_close_to_exact(damping_file, tmp_path):
    out = tmp_path / "out"
    assert main(["simulate", "--model", damping_file, "--t", "2",
                 "--shots", "20000", "--seed", "1", "--out", str(out)]) == 0
    emp = read_table(out / "empirical.csv")
    assert abs(emp.get("00", 0.0) - 0.75) < 0.02
    assert "01" not in emp  # impossible sequence never sampled


def test_invalid_model_file(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(SystemExit) as exc:
        main(["distribution", "--model", str(bad), "--t", "1",
              "--out", str(tmp_path / "o")])
    assert exc.value.code == 2
    assert "error" in capsys.readouterr().err


def test_unrecognized_model_schema(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"hello": 1}))
    with pytest.raises(SystemExit) as exc:
        main(["distribution", "--model", str(bad), "--t", "1",
              "--out", str(tmp_path / "o")])
    assert exc.value.code == 2


def test_quantize_round_trip(market_file, tmp_path):
    out = tmp_path / "out"
    assert main(["quantize", "--model", market_file, "--out", str(out)]) == 0
    q = models.qhmm_from_json(json.loads((out / "qhmm.json").read_text()))
    market = classical.market_model()
    for t in (1, 2, 3):
        dc = classical.distribution(market, t)
        dq = models.distribution(q, t)
        assert max(abs(dc.prob(s) - dq.prob(s)) for s in dc.probs) < 1e-10


def test_quantize_rejects_qhmm_input(damping_file, tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["quantize", "--model", damping_file, "--out", str(tmp_path / "o")])
    assert exc.value.code == 2


def test_learn_ansatz_market(market_file, tmp_path):
    # target CSV produced from the classical tables
    market = classical.market_model()
    from qhmm.lang import write_tables_csv

    target = tmp_path / "target.csv"
    write_tables_csv(target, [classical.distribution(market, t) for t in (1, 2, 3)],
                     market.alphabet)
    out = tmp_path / "out"
    assert main(["learn-ansatz", "--target", str(target),
                 "--template", "real_amplitudes", "--entanglement", "linear",
                 "--reps", "1", "--optimizer", "nm", "--restarts", "2",
                 "--budget", "400", "--seed", "3", "--out", str(out)]) == 0
    payload = json.loads((out / "params.json").read_text())
    assert len(payload["params"]) == 2
    assert payload["cost"] < 0.05
    curve = (out / "training_curve.csv").read_text().splitlines()
    assert curve[0] == "evaluation,best_cost"
    costs = [float(r.split(",")[1]) for r in curve[1:]]
    assert all(a >= b for a, b in zip(costs, costs[1:]))


def test_learn_evo_quick(market_file, tmp_path):
    market = classical.market_model()
    from qhmm.lang import write_tables_csv

    target = tmp_path / "target.csv"
    write_tables_csv(target, [classical.distribution(market, t) for t in (1, 2)],
                     market.alphabet)
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({
        "mu": 4, "lambda": 2, "g_max": 2, "target_fitness": -1e-4,
        "c_q": 0.0, "c_e": 0.0, "opt_budget": 25, "min_gates": 1,
        "max_gates": 3, "dim_s": 2, "dim_e": 2, "seed": 7,
    }))
    out = tmp_path / "out"
    assert main(["learn-evo", "--target", str(target), "--config", str(cfg),
                 "--out", str(out)]) == 0
    report = json.loads((out / "report.json").read_text())
    assert report["seed"] == 7
    assert report["generations"] <= 2
    best = models.qhmm_from_json(json.loads((out / "best_model.json").read_text()))
    assert isinstance(best, models.QhmmKraus)
    trace = (out / "fitness_trace.csv").read_text().splitlines()
    assert trace[0] == "generation,best_fitness"


def test_landscape_outputs(tmp_path):
    out = tmp_path / "out"
    assert main(["landscape", "--steps", "40", "--rates", "0.1",
                 "--seed", "5", "--out", str(out)]) == 0
    lines = (out / "samples.csv").read_text().splitlines()
    assert lines[0].startswith("rate,op_distance,div_2")
    assert len(lines) == 41
    corr = json.loads((out / "correlation.json").read_text())
    assert "0.1" in corr


def test_reproduce_table2_cli(tmp_path):
    out = tmp_path / "out"
    assert main(["reproduce", "table2", "--out", str(out)]) == 0
    payload = json.loads((out / "table2.json").read_text())
    assert payload["passed"] is True
    rows = (out / "table2.csv").read_text().splitlines()
    assert len(rows) == 50  # header + 49 entries


def test_hankel_from_target_tables(market_file, tmp_path):
    market = classical.market_model()
    from qhmm.lang import write_tables_csv

    target = tmp_path / "target.csv"
    write_tables_csv(target, [classical.distribution(market, t) for t in range(1, 5)],
                     market.alphabet)
    out = tmp_path / "out"
    assert main(["hankel", "--target", str(target), "--max-len", "2",
                 "--out", str(out)]) == 0
    report = json.loads((out / "rank.json").read_text())
    assert report["rank"] == 4


def test_hankel_without_inputs_fails(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["hankel", "--out", str(tmp_path / "o")])
    assert exc.value.code == 2


def test_learn_evo_from_corpus(tmp_path):
    market = classical.market_model()
    seqs = classical.sample(market, 12, 400, seed=5)
    corpus = tmp_path / "corpus.txt"
    corpus.write_text("\n".join(
        "".join(market.alphabet[a] for a in s) for s in seqs) + "\n")
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({
        "mu": 3, "lambda": 2, "g_max": 1, "target_fitness": -1e-4,
        "c_q": 0.0, "c_e": 0.0, "opt_budget": 15, "min_gates": 1,
        "max_gates": 2, "dim_s": 2, "dim_e": 2, "n_max": 3,
    }))
    out = tmp_path / "out"
    assert main(["learn-evo", "--target", str(corpus), "--config", str(cfg),
                 "--seed", "2", "--out", str(out)]) == 0
    report = json.loads((out / "report.json").read_text())
    assert report["best_fitness"] <= 0.0
