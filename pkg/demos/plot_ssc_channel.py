"""
Deniability on a two-topic channel
==================================

A sensitive/non-sensitive channel emits one symbol per step. We compute the
session deniability ratio in closed form, check it against brute-force
enumeration, and watch it grow as the session gets longer.
"""

import numpy as np

from plausdeny.core import DeniabilityParams
from plausdeny.deniability import check_pd, session_ratio
from plausdeny.ssc import (
    SscModel,
    brute_force_ratio,
    incremental_factors,
    sample_session,
    session_deniability,
)

####################################################################
# A channel that reports the true topic with probability 0.7 at every step.

model = SscModel.constant(0.7, steps=8)
outs = sample_session(model, "c1", seed=3)
print("outputs:", "".join(outs))

####################################################################
# The closed form and the enumeration agree.

print("closed form :", session_deniability(model, outs).value)
print("brute force :", brute_force_ratio(model, outs).value)

####################################################################
# Per-step factors multiply into the session ratio. With a budget of
# epsilon = 1 the prefix ratios leave the band quickly.

factors = incremental_factors(model, outs)
prefix = [session_ratio(factors[:k]) for k in range(1, len(factors) + 1)]
for k, r in enumerate(prefix, 1):
    print(f"step {k}: ratio {r.value:8.3f}  log {np.log(r.value):+.2f}")
print("plausibly deniable:", check_pd(prefix, DeniabilityParams(epsilon=1.0, m=len(prefix))))
