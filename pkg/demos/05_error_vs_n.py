"""Standard error versus number of users, as a CSV series per protocol.

Writes ``error_vs_n.csv`` (columns: protocol, n, mean_error, std_error),
ready for any plotting tool.  Uses few runs so it finishes quickly; raise
RUNS for smoother curves.
"""

from pathlib import Path

from shufflesum.experiment import ExperimentConfig, run_experiment
from shufflesum.tables import figure_series_csv

RUNS = 5

if __name__ == "__main__":
    reports = []
    for proto in ("ikos", "recursive-opt", "local-rr", "central-laplace"):
        for n in (1_000, 3_000, 10_000):
            rep = run_experiment(ExperimentConfig(protocol=proto, n=n, epsilon=1.0, runs=RUNS, seed=3))
            reports.append(rep)
            print(f"{proto:<16} n={n:<6} mean standard error {rep.mean_error}")
    out = Path("error_vs_n.csv")
    out.write_text(figure_series_csv(reports))
    print(f"wrote {out}")
