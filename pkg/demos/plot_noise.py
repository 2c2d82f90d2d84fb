"""
Quasi-periodic trap noise
=========================

Add two incommensurate cosines with random phases to the calibrated
bowl. The spread of the coefficient shifts grows linearly with the noise
strength, and transfer degrades smoothly. A small ensemble keeps this
quick; the CLI `noise` command runs the full one.
"""

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from atomchain.ensemble import NOISE_V0_GRID, NoiseSweepConfig, fit_delta_alpha_slope, run_noise_sweep
from atomchain.reference import TAU

cfg = NoiseSweepConfig(N=10, tau=TAU[10], V0_grid=NOISE_V0_GRID, M=20, master_seed=3)
stats = run_noise_sweep(cfg)
slope = fit_delta_alpha_slope(stats)
print(f"noiseless F = {stats.F0:.5f}")
for r in stats.rows:
    print(f"V0={r.V0:.2f}  mean F={r.mean_F:.4f} +- {r.std_F:.4f}")
print(f"slope = {slope.slope:.4f} +- {slope.slope_uncertainty:.4f}")

V0 = np.array(cfg.V0_grid)
spread = [np.mean(r.std_delta_alpha) for r in stats.rows]
fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
ax1.errorbar(V0, [r.mean_F for r in stats.rows], yerr=[r.std_F for r in stats.rows], fmt="o")
ax1.set_xlabel(r"$V_0$")
ax1.set_ylabel(r"mean $F(t_{out})$")
ax2.plot(V0, spread, "o")
ax2.plot(V0, slope.slope * V0, "-")
ax2.set_xlabel(r"$V_0$")
ax2.set_ylabel(r"mean std $\Delta\alpha_k$")
fig.tight_layout()
fig.savefig("noise.png", dpi=120)
