"""Run one or more figure sweeps and print the per-point means.

    python3 scripts/run_figure.py sr_vs_snr --trials 20 --out-dir results

Writes ``<name>.csv`` and ``<name>_summary.csv`` into ``--out-dir`` and prints
mean SR (approximate and Monte Carlo) and mean beta* with standard errors.
"""
import argparse
import csv
import os
import time

from hybrid_secrecy.experiments import FIGURES, run_figures

BY_NAME = {f.name: f for f in FIGURES}


def print_summary(path):
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    print(f"{'method':<16}{'snr':>6}{'b_dac':>6}{'b_ps':>5}{'SR approx':>18}{'SR mc':>18}{'beta*':>16}")
    for r in rows:
        def cell(col):
            return f"{float(r[col]):.3f} ± {float(r[col + '_stderr']):.3f}"
        print(f"{r['method']:<16}{float(r['snr_db']):>6g}{r['b_dac']:>6}{r['b_ps']:>5}"
              f"{cell('sr_approx'):>18}{cell('sr_mc'):>18}{cell('beta_opt'):>16}")


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("figures", nargs="*", help=f"any of {', '.join(BY_NAME)} (default: all)")
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--mc-samples", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    p.add_argument("--out-dir", default="results")
    a = p.parse_args()
    unknown = set(a.figures) - set(BY_NAME)
    if unknown:
        p.error(f"unknown figure(s): {', '.join(sorted(unknown))}")
    figures = [BY_NAME[n] for n in a.figures] or list(FIGURES)
    for fig in figures:
        t0 = time.perf_counter()
        paths = run_figures(a.out_dir, a.trials, a.seed, a.mc_samples, a.workers, figures=(fig,))
        print(f"\n{fig.name}: {a.trials} trials, {time.perf_counter() - t0:.0f}s -> {paths[0]}")
        print_summary(paths[1])


if __name__ == "__main__":
    main()
