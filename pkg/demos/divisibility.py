"""When does the reduced evolution factorise through intermediate times?

The reduced dynamical map over [t0, t] is divisible if it equals the
composition of the maps over [t0, ts] and [ts, t], both built from the
initial environment statistics.  That is the operational fingerprint of
memoryless evolution.  Three regimes:

  * one environment state: divisible for ANY coupling strength;
  * several environment states, generic coupling: broken by orders of
    magnitude;
  * entangled initial data: broken too, unless the environment
    effectively holds a single state.
"""

import numpy as np

from markovlab import (
    CompositeSpec,
    InitialState,
    divisibility_defect,
    entangled_divisibility,
    random_hermitian,
    random_product_spec,
)

rng = np.random.default_rng(42)
triple = (0.0, 0.7, 1.3)

print("one-state environment, increasing coupling strength:")
for strength in (0.1, 1.0, 10.0):
    spec = random_product_spec(3, 1, rng, coupling_strength=strength)
    defect = divisibility_defect(spec, *triple)
    print(f"  |V| = {strength:5.1f}   defect = {defect:.3e}")

print("\nthree-state environment, mixed weights, generic coupling:")
for k in range(3):
    spec = random_product_spec(2, 3, rng)
    defect = divisibility_defect(spec, *triple)
    print(f"  sample {k}   defect = {defect:.3e}")

print("\nentangled initial data (two-state environment):")
a_bell = np.eye(2, dtype=complex) / np.sqrt(2)
spec = CompositeSpec(d_s=2, d_e=2, h_s=random_hermitian(2, rng),
                     h_e=random_hermitian(2, rng), h_se=random_hermitian(4, rng),
                     initial=InitialState.entangled(a_bell))
print(f"  maximally entangled  defect = {entangled_divisibility(spec, *triple):.3e}")

a_single = np.zeros((2, 1), dtype=complex)
a_single[:, 0] = [0.6, 0.8]
spec1 = CompositeSpec(d_s=2, d_e=1, h_s=random_hermitian(2, rng),
                      h_e=random_hermitian(1, rng), h_se=random_hermitian(2, rng),
                      initial=InitialState.entangled(a_single))
print(f"  one-state support    defect = {entangled_divisibility(spec1, *triple):.3e}")
