"""
When products cannot work
=========================

If ln(phi) is a polynomial of degree below K, every neuron's log is
multilinear of degree below K, so the top coefficient of ln(psi) is out
of reach.  The target exp(z1 z2 z3) has a top coefficient of exactly 1.
"""
from nqs_uat.cli import demo_necessity

result = demo_necessity(K=3, g=1.0)
print("forbidden activation:", result["forbidden_activation"])
print("top-mode residual:", result["top_residual"])
print("best effort leaves:", result["best_effort_top_residual"])
print("cos reaches max-abs error", result["admissible_max_abs"])
