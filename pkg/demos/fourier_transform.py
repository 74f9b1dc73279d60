"""
Multilinear coefficients of a table
===================================

Any function on K bits is a polynomial in spins z_k = 1 - 2 n_k with at
most one power of each spin.  The transform below finds its coefficients.
"""
import numpy as np

from nqs_uat.boolean_fourier import neuron_fourier, wht_forward, wht_inverse
from nqs_uat.fockspace import SpinConvention, spin_matrix
from nqs_uat.verify import random_target

# A random normalized table on three orbitals
psi = random_target(3, seed=0)
coeffs = wht_forward(psi)
print("coefficients:", np.round(coeffs.coeffs, 4))

# The inverse rebuilds the table to rounding
print("round trip error:", np.max(np.abs(wht_inverse(coeffs).amplitudes - psi.amplitudes)))

# A pure product z1 z2 z3 has a single top coefficient
z = spin_matrix(3, SpinConvention.OCCUPIED_DOWN)
print("z1 z2 z3 ->", wht_forward(np.prod(z, axis=1)).coeffs)

# One neuron cos(b + w.z): small weights push weight to low orders
for scale in (1.0, 0.1):
    fh = neuron_fourier(np.cos, 0.3, scale * np.array([0.5, -0.4, 0.7]))
    print(f"weights x{scale}: top coefficient {fh.coeffs[-1]:.3e}")
