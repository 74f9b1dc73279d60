"""
Evaluating the ansatz families
==============================

Each family maps an occupation vector to an amplitude.  ``tabulate`` runs
the whole Fock basis at once.
"""
import numpy as np

from nqs_uat import activations as acts
from nqs_uat.ansatz import CPSParams, FNNParams, NNBFParams, NPSParams, RBMParams, eval_nps_log, tabulate

rng = np.random.default_rng(1)
K = 4

# Neuron product state with integer powers.  The log form keeps huge powers finite.
nps = NPSParams(acts.sigmoid(), rng.uniform(-1, 1, (3, K)), rng.uniform(-1, 1, 3), [1, 5, 10**6])
print("NPS sign and log-magnitude at 1010:", eval_nps_log(nps, (1, 0, 1, 0)))

# One hidden layer
fnn = FNNParams(acts.tanh(), rng.standard_normal(6), rng.standard_normal((6, K)), rng.standard_normal(6))
print("FNN table:", np.round(tabulate(fnn).amplitudes, 3))

# Backflow determinant for two electrons: zero off the sector
nnbf = NNBFParams(acts.sigmoid(), rng.standard_normal((5, K)), rng.standard_normal(5),
                  rng.standard_normal((K, 2, 5)), N=2)
print("NNBF table:", np.round(tabulate(nnbf).amplitudes, 3))

# Pair correlators and a Boltzmann machine
cps = CPSParams(rng.uniform(0.5, 1.5, (K, K, 2, 2)))
rbm = RBMParams(rng.standard_normal(K), rng.standard_normal(3), rng.standard_normal((3, K)))
print("CPS min/max:", tabulate(cps).amplitudes.min(), tabulate(cps).amplitudes.max())
print("RBM is positive:", bool(np.all(tabulate(rbm).amplitudes > 0)))
