"""Simultaneous intervals for every series value above a threshold.

A correlated Gaussian series is observed once; we want intervals that
jointly cover the means of all points exceeding T.  The correction is
taken over the points that could plausibly exceed T, not the whole series.
"""

import numpy as np

from locsim import BudgetSplit, FileDrawerProblem, GaussianNoise, RngSpec, filedrawer_region
from locsim.experiments import generate_mu, rbf_covariance
from locsim.stats_core import max_abs_quantile_iid, max_stat_quantile_mc

m, phi, T = 120, 20.0, -1.0
budget = BudgetSplit(0.1, 0.01)

mu = generate_mu(m, 2.0, 20.0)
noise = GaussianNoise(rbf_covariance(m, phi))
y = mu + noise.sample(np.random.default_rng(11), 1)[0]

prob = FileDrawerProblem(y, T, noise, budget)
iv = filedrawer_region(prob, RngSpec(12), 50_000)
print(f"series length {m}, threshold T = {T}")
print(f"selected points: {iv.indices.size}, joint level {iv.level:.2f}")
if not iv.is_empty:
    print(f"common half-width: {iv.half_widths[0]:.3f}")

full = max_stat_quantile_mc(noise, range(m), budget.alpha, RngSpec(13), 50_000)
bonf = max_abs_quantile_iid(1, budget.alpha / m)
print(f"fully simultaneous half-width: {full.value:.3f}")
print(f"Bonferroni-over-all half-width: {bonf:.3f}")
covered = np.all(np.abs(y[iv.indices] - mu[iv.indices]) <= iv.half_widths)
print(f"all selected means covered in this draw: {bool(covered)}")
