"""Liouvillian spectra: relaxation, steady-state manifolds, ergodic averages,
and Spohn's commutant criterion.
"""
import numpy as np

import openqdyn as oq
from openqdyn.gksl import GKSLGenerator, hamiltonian_superop, superop_of_generator
from openqdyn.liouville import apply_superop, expm, trace_norm
from openqdyn.operators import rand_density_matrix, sigma_minus, sigma_plus, sigma_z

np.set_printoptions(precision=5, suppress=True)

G, nbar = 0.4, 0.3
damped = superop_of_generator(GKSLGenerator(
    H=0.5 * sigma_z,
    jumps=[(G * (nbar + 1), sigma_minus), (G * nbar, sigma_plus)]))
dephasing = superop_of_generator(GKSLGenerator(H=0.5 * sigma_z, jumps=[(0.3, sigma_z)]))
unitary = hamiltonian_superop(np.diag([0.0, 1.0, 2.5]))

for name, L in (("damped qubit", damped), ("pure dephasing", dephasing),
                ("closed 3-level", unitary)):
    rep = oq.liouvillian_spectrum(L)
    rel = oq.is_relaxing(L)
    print(f"{name:15s}: zero multiplicity {rep.zero_multiplicity}, "
          f"gap {rep.spectral_gap:.4f}, relaxing = {rel.verdict} ({rel.reason})")
print()

# Steady-state extraction: unique Gibbs-like state for the damped qubit,
# a whole manifold for dephasing (extreme points are the energy projectors).
res = oq.steady_states(damped)
print("damped qubit steady state:\n", res.states[0].real)
res2 = oq.steady_states(dephasing)
print(f"dephasing kernel dimension {res2.kernel_dimension}; extreme points:")
for rho in res2.states:
    print(np.diag(rho).real)
print()

# Ergodic average: the long-time Cesaro mean projects onto the kernel.
rng = np.random.default_rng(1)
rho0 = rand_density_matrix(2, rng)
avg = oq.ergodic_average(dephasing, rho0)
print("dephasing ergodic average keeps the populations:",
      np.allclose(np.diag(avg), np.diag(rho0)), "and kills coherence:",
      abs(avg[0, 1]) < 1e-12)
evolved = apply_superop(expm(60.0 * dephasing), rho0)
print("long-time evolution agrees:", trace_norm(evolved - avg) < 1e-9, "\n")

# Spohn: a self-adjoint jump set with trivial commutant guarantees relaxation.
for jumps, label in (([sigma_minus, sigma_plus], "{s-, s+}"),
                     ([sigma_z.astype(complex)], "{sz}")):
    rep = oq.spohn_check(jumps)
    print(f"Spohn on {label:10s}: self-adjoint {rep.self_adjoint_set}, "
          f"commutant dim {rep.commutant_dim}, guaranteed {rep.relaxing_guaranteed}")
