"""
Products of saturating neurons
==============================

With tanh, neuron i equals the target amplitude on its configuration and
tends to 1 everywhere else, so the product reproduces the table.
"""
import numpy as np

from nqs_uat import activations as acts
from nqs_uat.ansatz import tabulate
from nqs_uat.constructors import build_nps_saturating, separating_margins, separating_vector
from nqs_uat.fockspace import WavefunctionTable
from nqs_uat.verify import compare, random_target

K = 4
a = np.asarray(random_target(K, seed=3))
target = WavefunctionTable(K, 0.9 * a / np.max(np.abs(a)))

for theta in (5.0, 10.0, 20.0, 60.0):
    p = build_nps_saturating(target, theta, acts.tanh())
    print(f"theta={theta:>4}: max-abs error {compare(tabulate(p), target).max_abs:.2e}")

# The hyperplane for configuration 5 and its margins (Hamming distances)
u = separating_vector(5, K)
print("u =", u, "margins:", sorted(separating_margins(u, 5, K).tolist()))
