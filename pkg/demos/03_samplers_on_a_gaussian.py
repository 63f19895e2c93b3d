"""
Three samplers on a correlated Gaussian
=======================================

Metropolis-Hastings, slice sampling and Hybrid Monte Carlo draw from the same
2-D Gaussian. Their estimates are compared with the exact moments, together
with acceptance, effective sample size and the number of density evaluations.
"""

import numpy as np

from bayesfem import Target, diagnostics, hmc_sample, mh_sample, slice_sample

mean = np.array([1.0, -1.0])
cov = np.array([[1.0, 0.5], [0.5, 1.0]])
precision = np.linalg.inv(cov)

target = Target(
    dimension=2,
    log_density=lambda x: -0.5 * (x - mean) @ precision @ (x - mean),
    lower=mean - 8,
    upper=mean + 8,
    grad_potential=lambda x: precision @ (x - mean),
)

runs = {
    "mh": mh_sample(target, mean, 20_000, seed=0, widths=1.5),
    "slice": slice_sample(target, mean, 20_000, seed=0, widths=4.0),
    "hmc": hmc_sample(target, mean, 5_000, seed=0, step_size=0.9, n_steps=3),
}

print(f"{'sampler':<8}{'mean':>22}{'cov01':>8}{'accept':>8}{'ESS':>16}{'evals':>8}")
for name, chain in runs.items():
    d = diagnostics(chain)
    m = chain.samples.mean(axis=0)
    c = np.cov(chain.samples.T)[0, 1]
    print(f"{name:<8}{np.array2string(m, precision=3):>22}{c:>8.3f}{d.acceptance_rate:>8.2f}"
          f"{np.array2string(d.ess, precision=0):>16}{d.n_target_evals:>8}")
print(f"{'exact':<8}{np.array2string(mean, precision=3):>22}{cov[0, 1]:>8.3f}")
