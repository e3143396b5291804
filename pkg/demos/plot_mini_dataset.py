"""
Evaluating a CSIQ-style dataset
===============================

The harness walks ``src_imgs/`` plus one folder per distortion and scores
every original/distorted pair. Here a tiny synthetic dataset is generated
first, so the script runs anywhere.
"""

import tempfile
import warnings

from copulasim import dataset_eval
from copulasim.harness import aggregate_by_distortion, correlation_matrix, make_mini_csiq

with tempfile.TemporaryDirectory() as tmp:
    root = make_mini_csiq(tmp, n_originals=3, distortions=("awgn", "blur", "contrast"),
                          levels=(1, 2, 3), seed=0)
    # the real dataset has six distortion folders; missing ones only warn
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        records = dataset_eval(root, metrics="all")

print(len(records), "records")
for (metric, dist), cell in aggregate_by_distortion(records).items():
    print(f"{metric:5s} {dist:9s} {cell.mean:.3f}")

corr = correlation_matrix(records)
print("metrics:", ", ".join(corr.metrics))
print(corr.coefficients.round(2))
