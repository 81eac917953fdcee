"""Residual/weight diagnostics on the aircraft data.

LTS flags two outlying aircraft.  This script compares how MM and RAMML
weight each observation against its scaled residual, the same listing the
``--diagnostics`` flag of ``ramml fit`` produces.

Run: python demos/aircraft_diagnostics.py
"""
import numpy as np

import ramml

data = ramml.load_aircraft()

lts = ramml.fit_lts(data, seed=0)
print("LTS rejects rows", (np.flatnonzero(lts.weights == 0) + 1).tolist())

mm = ramml.fit_mm(data, seed=0)
ramml1 = ramml.fit_method(data, "RAMML1", initial=lts)

mm_z = (data.y - mm.predict(data.X)) / mm.scale
w_r = ramml.final_weights(ramml1)

print(f"\n{'row':>4}{'MM z':>9}{'MM w':>8}{'RAMML1 z':>10}{'RAMML1 w':>10}")
for i in range(data.n):
    print(f"{i + 1:4d}{mm_z[i]:9.2f}{mm.weights[i]:8.3f}"
          f"{ramml1.standardized_residuals[i]:10.2f}{w_r[i]:10.3f}")

# RAMML weights combine a residual factor and a leverage factor.
print("\nmean weight  MM: %.3f  RAMML1: %.3f" % (mm.weights.mean(), w_r.mean()))
print("RAMML1 sigma %.4f vs MM (S) scale %.4f" % (ramml1.scale, mm.scale))
