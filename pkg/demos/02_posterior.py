"""
Evaluating the model-updating posterior
=======================================

Five Young's moduli, one per block of ten elements, are inferred from five
measured natural frequencies. This script walks through the pieces of the
log posterior and its finite-difference gradient.
"""

import numpy as np

from bayesfem import builtin_case

case = builtin_case("young5")
pd = case.posterior()
theta0 = case.space.initial
print("parameters:", pd.space.names)
print("initial   :", theta0)

# relative frequency errors at the starting point
f0 = pd.model_frequencies(theta0)
print("\nmeasured (Hz):", case.data.frequencies)
print("model    (Hz):", np.round(f0, 1))
print("rel. error   :", np.round(pd.error_terms(theta0)[:, 0], 4))

# the log posterior is assembled from likelihood, prior and normalisers
print(f"\nlog likelihood : {pd.log_likelihood(theta0):.6f}")
print(f"log prior      : {pd.log_prior(theta0):.6f}")
print(f"ln Z_data      : {pd.log_z_data():.6f}")
print(f"ln Z_prior     : {pd.log_z_prior():.6f}")
print(f"log posterior  : {pd.log_posterior(theta0):.6f}")

# a softer beam fits better
softer = np.array([1.87e11, 1.89e11, 2.04e11, 2.03e11, 2.06e11])
print(f"\nlog posterior at a softer beam: {pd.log_posterior(softer):.6f}")

# outside the bounds the density vanishes
outside = theta0.copy()
outside[0] = 2.6e11
print("outside bounds:", pd.log_posterior(outside))

# gradient of the potential, steps in units of sigma
for h in (1e-4, 0.5e-4):
    print(f"grad V (h={h:g}):", np.array2string(pd.grad_potential(theta0, h=h), precision=6))
