"""
General activations: sign factor plus log-space matching
=========================================================

For cos the builder first lifts zeros, then places one neuron per negative
amplitude so the remaining table is positive.  It then matches the
multilinear coefficients of the log table from the highest order down.
"""
import numpy as np

from nqs_uat import activations as acts
from nqs_uat.ansatz import tabulate
from nqs_uat.constructors import build_nps_general, general_parts
from nqs_uat.verify import compare, random_target

psi = random_target(3, seed=5)
print("target signs:", np.sign(psi.amplitudes).astype(int))

for delta in (1e-2, 1e-3, 1e-4):
    params, report = build_nps_general(psi, acts.cos(), delta=delta)
    err = compare(tabulate(params), psi).max_abs
    print(f"delta={delta:g}: {params.n_neurons} neurons, max-abs error {err:.2e}")

sign, positive = general_parts(params, report)
print("sign factor signs:", np.sign(tabulate(sign).amplitudes).astype(int))
print("positive part is positive:", bool(np.all(tabulate(positive).amplitudes > 0)))
for rec in report.subsets:
    print(f"  subset {rec.members}: N={rec.N}, residual {rec.residual:.2e}")
