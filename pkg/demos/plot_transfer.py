"""
State transfer along the chain
==============================

A calibrated trap gives couplings close to the ideal semicircle, so an
excitation put on site 1 arrives at site N with high probability.
"""

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from atomchain.geomcoeff import geometric_coefficients
from atomchain.potentials import power_bowl_spec
from atomchain.reference import TAU
from atomchain.spinchain import fidelity_curve, find_t_out, from_alpha, semicircle_couplings

N = 10
model = from_alpha(geometric_coefficients(power_bowl_spec(TAU[N]), N, check=False))
ideal = semicircle_couplings(N, abs(model.J[0]) / np.sqrt(N - 1))

s = find_t_out(model)
print(f"t0={s.t0:.2f}  F(t0)={s.F_t0:.5f}  t_out={s.t_out:.2f}  F(t_out)={s.F_t_out:.5f}")

t = np.linspace(0, 2 * s.t0, 800)
curve = fidelity_curve(model, t)
print("probability conserved:", np.allclose(curve.total_probability, 1))

fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
ax1.plot(t / s.t0, curve.F, label="trap")
ax1.plot(t / s.t0, fidelity_curve(ideal, t).F, "--", label="semicircle")
ax1.set_xlabel(r"$t/t_0$")
ax1.set_ylabel("F")
ax1.legend()

# the retrieval time drifts below t0 as N grows
Ns = list(range(4, 21, 2))
summaries = [find_t_out(from_alpha(geometric_coefficients(power_bowl_spec(TAU[n]), n, check=False)))
             for n in Ns]
for n, sm in zip(Ns, summaries):
    print(f"N={n:2d}  F(t_out)={sm.F_t_out:.4f}  t_out/t0={sm.t_out / sm.t0:.4f}")
ax2.plot(Ns, [sm.F_t_out for sm in summaries], "o-", label=r"$F(t_{out})$")
ax2.plot(Ns, [sm.t_out / sm.t0 for sm in summaries], "s-", label=r"$t_{out}/t_0$")
ax2.set_xlabel("N")
ax2.legend()
fig.tight_layout()
fig.savefig("transfer.png", dpi=120)
