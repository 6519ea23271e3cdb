"""Nonparametric inference on the best of several bounded-outcome arms.

Each arm yields iid outcomes in [0, 1]; nothing Gaussian is assumed.  The
screening margin comes from a concentration inequality at level nu/m and
the winner's betting interval is taken at the Bonferroni share of the
remaining budget over the plausible arms.
"""

import numpy as np

from locsim import BudgetSplit, SampleMatrix, betting_ci, np_winner_interval
from locsim.stats_core import bentkus_width

n, m = 2000, 8
budget = BudgetSplit(0.1, 0.01)
means = np.array([0.35, 0.38, 0.52, 0.54, 0.30, 0.41, 0.25, 0.33])

gen = np.random.default_rng(21)
# Beta arms with the chosen means (precision 12).
data = gen.beta(means * 12, (1 - means) * 12, size=(n, m))
samples = SampleMatrix(data)

w = bentkus_width(n, budget.nu / m)
ybar = samples.column_means()
win = int(np.argmax(ybar))
plausible = np.flatnonzero(ybar >= ybar[win] - 4 * w)
print(f"arm means observed: {np.round(ybar, 3).tolist()}")
print(f"winner: arm {win}; screening margin 4w = {4 * w:.3f}; "
      f"plausible arms: {plausible.tolist()}")

iv = np_winner_interval(samples, budget, bound_kind="bentkus", ci_kind="betting")
print(f"locally simultaneous betting interval for arm {win}: "
      f"[{iv.lower[0]:.3f}, {iv.upper[0]:.3f}]")

lo, hi = betting_ci(data[:, win], budget.alpha / m)
print(f"fully simultaneous (Bonferroni over all {m}) interval: [{lo:.3f}, {hi:.3f}]")
print(f"true mean of the winning arm: {means[win]:.3f}")
