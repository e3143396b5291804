"""
How runtime depends on patch size
=================================

Small patches mean many tiny rank problems; large patches mean fewer,
bigger ones. With vectorised 8-bit ranking the cost per pixel levels off
once patches reach roughly 16x16.
"""

from copulasim.bench import fit_complexity_trend, patch_sweep_timing
from copulasim.cli import default_bench_pair
from copulasim.harness import textured_image

ref, damaged = default_bench_pair(textured_image(512, 512, 3, seed=8))
records = patch_sweep_timing(ref, damaged, [4, 8, 16, 32, 64], reps=5, workers=1)
for r in records:
    print(f"P={r.patch_size:3d}  median {1e3 * r.median_time:7.2f} ms  CSIM {r.score:.4f}")

print(fit_complexity_trend(records).summary())
