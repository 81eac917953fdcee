"""Leverage points in the CYG OB1 star cluster.

Four giant stars sit far to the left of the main sequence in the
Hertzsprung-Russell diagram.  Least squares is dragged towards them and
even reports a negative slope; the AMML fits, which down-weight large
residuals but not remote predictors, do no better.  Adding the
L1-median-based leverage weights (RAMML) recovers the main-sequence line.

Run: python demos/starscyg_leverage.py
"""
import numpy as np

import ramml

data = ramml.load_starscyg()
print(f"{data.n} stars, response {data.response_name!r}, predictor {data.predictor_names[0]!r}\n")

# %% Fit everything once; the LTS and S fits double as starting values.
lts = ramml.fit_lts(data, seed=0)
s_fit = ramml.fit_s(data, seed=0)
fits = {
    "OLS": ramml.fit_ols(data),
    "MM": ramml.fit_mm(data, s_fit=s_fit),
    "LTS": lts,
    "S": s_fit,
    "AMML1": ramml.fit_method(data, "AMML1", initial=lts),
    "RAMML1": ramml.fit_method(data, "RAMML1", initial=lts),
    "AMML2": ramml.fit_method(data, "AMML2", initial=s_fit),
    "RAMML2": ramml.fit_method(data, "RAMML2", initial=s_fit),
}

print(f"{'method':8}{'b0':>9}{'b1':>9}{'sigma':>9}{'SEP':>9}{'SEP_trim':>10}")
for name, f in fits.items():
    s, s_trim, _ = ramml.sep(data.y, f.predict(data.X))
    print(f"{name:8}{f.intercept:9.4f}{f.coefficients[0]:9.4f}{f.scale:9.4f}{s:9.4f}{s_trim:10.4f}")

# %% Which observations does RAMML distrust?
r = fits["RAMML2"]
w = ramml.final_weights(r)
print("\nlowest RAMML2 weights (1-based row, log.Te, weight):")
for i in np.argsort(w)[:6]:
    print(f"  {i + 1:3d}  {data.X[i, 0]:.2f}  {w[i]:.4f}")

# The leverage factor alone already isolates the giants: it depends only on X.
print("\nleverage factors of rows 11, 20, 30, 34:", np.round(r.weights.delta_x[[10, 19, 29, 33]], 4))
