"""
Updating the beam model from measured frequencies
=================================================

Runs the inertia/area case with Metropolis-Hastings and slice sampling and
prints the side-by-side report. Hybrid Monte Carlo needs 2Q + 1 FE solves per
leapfrog step and takes a couple of minutes at 1000 samples, so it is left
out here; ``bayesfem compare`` runs all three.
"""

import sys
import tempfile
from dataclasses import replace

from bayesfem import builtin_case, compare, format_comparison

n = int(sys.argv[1]) if len(sys.argv) > 1 else 1000
case = replace(builtin_case("inertia_area4"), n_samples=n, seed=0)

with tempfile.TemporaryDirectory() as out:
    results = compare(case, out, samplers=("mh", "slice"))
    print(format_comparison({k: r.report for k, r in results.items()}))
    for name, r in results.items():
        print(f"{name}: {r.wall_time:.1f} s")
