"""A small scaling benchmark: queries per element as n doubles.

Writes the same CSV the command line produces and prints the per-n
worst-case summary; the full-size experiment lives in the acceptance suite.
"""

from rankprobe.bench import sweep, sweep_rows_to_csv
from rankprobe.regression import load_regression_config

config = load_regression_config()
print(f"frozen C_total = {config.value('C_total')}")

for family in ("uniform-k", "equal-blocks", "singleton-heavy"):
    rows, summaries = sweep(family, [256, 512, 1024, 2048], reps=2, learner="find_partition")
    print(f"\nfamily {family}:")
    for s in summaries:
        print(
            f"  n={s['n']:5d}: worst queries/n = {s['max_queries_per_n']:.3f} "
            f"(all correct: {s['all_correct']})"
        )

rows, summaries = sweep("equal-blocks", [256, 512], reps=2, learner="find_partition")
with open("demo_sweep.csv", "w") as fh:
    fh.write(sweep_rows_to_csv(rows, summaries))
print("\nwrote demo_sweep.csv")
