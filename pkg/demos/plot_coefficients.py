"""
Geometric coefficients of a power-law bowl
==========================================

Solve the single-particle problem in a bowl trap, turn the lowest N
states into exchange coefficients alpha_k and compare them with the
power law A [k(N-k)]^beta.
"""

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from atomchain.calibrate import fit_power_law
from atomchain.geomcoeff import compute_alpha, overlap_matrix
from atomchain.potentials import power_bowl_spec
from atomchain.reference import TAU, full_alpha
from atomchain.spectral import solve_spec, wavefunctions

N = 10
spec = power_bowl_spec(TAU[N])
sol = solve_spec(spec, N)
print("lowest energies:", np.round(sol.energies, 5))

# the states live well inside the box, so the hard walls barely matter
x = np.linspace(0, spec.box_length, 1000)
psi = wavefunctions(sol, x)

# B(x) runs from 0 at the left wall to the identity at the right wall
print("|B(L) - I| =", np.abs(overlap_matrix(sol, spec.box_length).B - np.eye(N)).max())

alpha = compute_alpha(sol).alpha
fit = fit_power_law(alpha)
print("alpha:", np.round(alpha, 7))
print("stored table:", np.round(full_alpha(N), 7))
print(f"fit: A={fit.A:.5f} beta={fit.beta:.6f} f={fit.f:.2e}")

k = np.arange(1, N)
fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
ax1.plot(x, spec(x) / 20, "k", lw=0.8)
for i in range(N):
    ax1.plot(x, 0.05 * psi[i] ** 2 + sol.energies[i] / 20)
ax1.set_xlim(25, 75)
ax1.set_ylim(0, 0.07)
ax1.set_xlabel("x")
ax1.set_title("densities offset by energy")

ax2.plot(k, alpha, "o", label="computed")
ax2.plot(k, fit.A * (k * (N - k)) ** fit.beta, "-", label=r"$A[k(N-k)]^\beta$")
ax2.set_xlabel("k")
ax2.set_ylabel(r"$\alpha_k$")
ax2.legend()
fig.tight_layout()
fig.savefig("coefficients.png", dpi=120)
