#!/usr/bin/env python3
"""Weight-side experiments: Muckenhoupt product sweeps (bounded versus
divergent exponents) and the probability statistics of the generated sets,
including the quantile divergence scan for the constant-1/2 sequence.

Writes CSV artifacts under out/ (override with --out-dir).
"""

import argparse
import os
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from poremetrics.cli import main as cli  # noqa: E402


def run(out_dir: Path) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)

    # Admissible exponent: the product is constant 4/3 across every scale.
    cli([
        "ap-scan", "--set", "point:0", "--alpha", "1/2", "--p", "2",
        "--cubes", "dyadic:-20..20", "--out", str(out_dir / "ap_origin_alpha_half.csv"),
    ])
    # Outside the admissible range: the certified lower bound diverges.
    cli([
        "ap-scan", "--set", "point:0", "--alpha", "3/2", "--p", "2",
        "--cubes", "dyadic:-10..10", "--out", str(out_dir / "ap_origin_alpha_three_halves.csv"),
    ])
    cli([
        "ap-scan", "--set", "lattice", "--alpha", "1/3", "--p", "2",
        "--cubes", "dyadic:0..8", "--out", str(out_dir / "ap_lattice.csv"),
    ])

    cli([
        "prob-stats", "--rule", "half_harmonic", "--levels", "0..200",
        "--out", str(out_dir / "half_harmonic_moments.csv"),
    ])
    cli([
        "prob-stats", "--rule", "constant", "--c", "1/2", "--levels", "0..40",
        "--out", str(out_dir / "constant_half_moments.csv"),
        "--divergence-t", "1/10",
        "--divergence-out", str(out_dir / "constant_half_divergence.csv"),
    ])
    print(f"wrote weight-scan reports to {out_dir}/")


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out-dir", default=os.path.join("out", "weight_scans"))
    args = parser.parse_args()
    run(Path(args.out_dir))
