"""
Reproducing any table with one hidden layer
===========================================

One sigmoid neuron per configuration, each firing only on its own
configuration.  Larger theta saturates the neurons harder.
"""
from nqs_uat.ansatz import tabulate
from nqs_uat.constructors import build_fnn_exact, build_nnbf_exact
from nqs_uat.verify import compare, random_target, sector_projection

psi = random_target(4, seed=7)
for theta in (5.0, 10.0, 20.0, 40.0):
    err = compare(tabulate(build_fnn_exact(psi, theta)), psi).max_abs
    print(f"FNN theta={theta:>4}: max-abs error {err:.2e}")

# The same layer feeds the orbitals of a two-electron determinant
target = sector_projection(psi, 2)
p = build_nnbf_exact(target, N=2, theta=40.0)
print("NNBF sector error:", compare(tabulate(p), target).max_abs)
