"""A reduced Monte-Carlo cell: 10% bad leverage points, n = 50, m = 1.

The first five rows of every replicate are moved to x = 10 with
y = -10, i.e. far off the true line y = x.  With 100 replications
instead of 500 this runs in a few seconds and shows the same ordering as
the full study: both RAMML variants beat MM, LTS, S and the AMML fits.

Run: python demos/small_simulation.py  [RAMML_WORKERS=4 to parallelise]
"""
import ramml
from ramml.simulation import ESTIMATORS

spec = ramml.ScenarioSpec(n=50, m=1, error_law="normal", contamination=0.1, leverage=10,
                          n_rep=100, seed=42)
model = ramml.make_true_model(spec.m)
first = ramml.generate_replication(spec, model, 0)
print("first replicate, rows 1-6:")
for x, y in zip(first.X[:6, 0], first.y[:6]):
    print(f"  x={x:7.3f}  y={y:7.3f}")

res = ramml.run_cell(spec)
print(f"\nMSE of the slope over {spec.n_rep} replications")
for name in sorted(ESTIMATORS, key=res.mse_beta.get):
    print(f"  {name:7}{res.mse_beta[name]:9.4f}   failures {res.failures[name]}")
