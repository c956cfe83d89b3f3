#!/usr/bin/env python3
"""Write the built-in models and target tables as CLI-ready files."""

import argparse
import json
import math
from pathlib import Path

from qhmm import classical, models
from qhmm.lang import write_tables_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="fixtures", help="output directory")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    market = classical.market_model()
    gauss = classical.gaussian4_model()
    (out / "market.json").write_text(
        json.dumps(classical.hmm_to_json(market), indent=2) + "\n")
    (out / "gaussian4.json").write_text(
        json.dumps(classical.hmm_to_json(gauss), indent=2) + "\n")
    (out / "damping.json").write_text(
        json.dumps(models.qhmm_to_json(
            models.amplitude_damping_model(math.pi / 2)), indent=2) + "\n")
    (out / "monras.json").write_text(
        json.dumps(models.qhmm_to_json(models.monras_qhmm()), indent=2) + "\n")
    (out / "market_quantized.json").write_text(
        json.dumps(models.qhmm_to_json(
            models.quantize_classical(market)), indent=2) + "\n")

    write_tables_csv(out / "market_target.csv",
                     [classical.distribution(market, t) for t in range(1, 6)],
                     market.alphabet)
    write_tables_csv(out / "gaussian4_target.csv",
                     [classical.distribution(gauss, t) for t in range(1, 5)],
                     gauss.alphabet)
    monras = models.monras_qhmm()
    write_tables_csv(out / "monras_target.csv",
                     [models.distribution(monras, t) for t in (1, 2)],
                     monras.alphabet)
    print(f"fixtures written to {out}/")


if __name__ == "__main__":
    main()
