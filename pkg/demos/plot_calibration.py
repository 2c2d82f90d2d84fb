"""
Calibrating the bowl exponent
=============================

The fitted exponent beta falls as the bowl gets flatter (larger tau).
Brent's method finds the tau where beta = 1/2, the value the
perfect-transfer profile needs.
"""

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from atomchain.calibrate import beta_of_tau, optimize_tau

N = 8
taus = np.linspace(2.5, 4.5, 9)
betas = [beta_of_tau(N, t)[0] for t in taus]
for t, b in zip(taus, betas):
    print(f"tau={t:.2f}  beta={b:.5f}")

cal = optimize_tau(N)
print(f"tau* = {cal.tau:.6f} after {cal.iterations} iterations, beta = {cal.fit.beta:.8f}")

# larger chains need flatter bowls
for n in (4, 6, 10):
    print(n, round(optimize_tau(n).tau, 6))

plt.plot(taus, betas, "o-")
plt.axhline(0.5, color="gray", lw=0.8)
plt.axvline(cal.tau, color="gray", lw=0.8, ls="--")
plt.xlabel(r"$\tau$")
plt.ylabel(r"$\beta$")
plt.title(f"N = {N}")
plt.savefig("calibration.png", dpi=120)
