"""From a microscopic system-bath model to the Markovian master equation.

Walks the full weak-coupling pipeline for the damped qubit: eigenoperator
(Bohr) decomposition of the couplings, per-frequency decay-rate and
level-shift matrices from the ohmic bath, canonical jumps, and the thermal
certificates (detailed balance and Gibbs stationarity).
"""
import numpy as np

from openqdyn.weakcoupling import (
    BathModel,
    bohr_decompose,
    bose_occupation,
    damped_oscillator,
    damped_qubit,
    davies_generator,
    kms_check,
    pure_dephasing,
    stationarity_check,
    thermal_state,
)

np.set_printoptions(precision=5, suppress=True)

omega0 = 1.0
system = damped_qubit(omega0)
bath = BathModel.ohmic(coupling=0.1, omega_c=3.0, temperature=1.0)

# Eigenoperator blocks: the transverse coupling splits into lowering and
# raising parts at the Bohr frequencies +-omega0.
dec = bohr_decompose(system.H, system.couplings[0])
print("Bohr frequencies of the first coupling:", dec.frequencies)
print("A(+w0) =\n", dec.blocks[omega0].real, "\n")

gen = davies_generator(system, bath)
G = 2 * np.pi * float(bath.J(np.array([omega0]))[0])
nbar = bose_occupation(omega0, bath.temperature)
print("canonical jumps (rate, operator overlap):")
for rate, V in gen.base.jumps:
    kind = "emission" if abs(rate - G * (nbar + 1)) < 1e-9 else "absorption"
    print(f"  {kind:10s} rate = {rate:.6f}  "
          f"(expected {'G(nbar+1)' if kind == 'emission' else 'G nbar':10s} "
          f"= {G * (nbar + 1) if kind == 'emission' else G * nbar:.6f})")
print("Lamb-shift Hamiltonian (commutes with H):\n", gen.lamb_shift.real, "\n")

# Thermal certificates: detailed balance between absorption and emission
# blocks, and stationarity of the bath-temperature Gibbs state.
kms = kms_check(gen)
print(f"detailed-balance violation: {kms.max_relative_violation:.2e}")
print(f"Gibbs stationarity residual: {stationarity_check(gen):.2e}")
rho_th = thermal_state(system.H, bath.temperature)
print("thermal populations:", np.diag(rho_th).real, "\n")

# The same machinery runs the truncated oscillator and the pure-dephasing
# model; dephasing picks up the zero-frequency rate 2 pi alpha T.
osc = davies_generator(damped_oscillator(8, omega0), bath)
print(f"oscillator: {len(osc.base.jumps)} canonical jumps, "
      f"stationarity {stationarity_check(osc):.1e}")
deph_bath = BathModel.ohmic(coupling=0.02, omega_c=3.0, temperature=0.7)
deph = davies_generator(pure_dephasing(omega0), deph_bath)
rate = deph.base.jumps[0][0] / 2.0     # jump normalized to sigma_z/sqrt(2)
print(f"dephasing rate gamma(0) = {rate:.6f} "
      f"(ohmic limit 2 pi a T = {2 * np.pi * 0.02 * 0.7:.6f})")

# Bath correlation function: decays on the cutoff/thermal timescale.
print("\n|C(t)|/|C(0)| at t = 1/w_c, 10/w_c, 50/w_c:")
c0 = abs(bath.correlation(0.0))
print([round(abs(bath.correlation(t)) / c0, 6) for t in (1 / 3, 10 / 3, 50 / 3)])
