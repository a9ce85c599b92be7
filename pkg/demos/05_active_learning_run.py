"""A complete active-learning run on an SBM graph, then a summary table.

The same thing from the shell:

    gcal gen-sbm --blocks 40,40,40 --p-in 0.3 --p-out 0.02 --out sbm
    gcal run --config my.cfg --strategy minimax --budget 5C --out runs/minimax
    gcal report --in runs/minimax --format csv
"""

from dataclasses import replace

from gcal.experiment import ExperimentConfig, records_to_csv, run_many, summarize, summary_to_csv

cfg = ExperimentConfig(
    sbm_blocks=(40, 40, 40), sbm_p_in=0.3, sbm_p_out=0.02,
    budget="5C", hidden=64, out_dim=64, warmup_epochs=30, epochs_per_round=5,
)

records = []
for strategy in ("minimax", "random"):
    records += run_many(replace(cfg, strategy=strategy), seeds=[0, 1])

# one line per round plus a final test evaluation per seed
print(records_to_csv(records[:4]))
print(summary_to_csv(summarize(records)))
