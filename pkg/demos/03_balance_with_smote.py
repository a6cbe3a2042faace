"""Balance a skewed dataset by synthesizing minority rows.

SMOTE builds each synthetic row by walking a random fraction of the way
from a minority row toward one of its k nearest minority neighbours.
Original rows are preserved bit for bit and synthetic rows are flagged,
so nothing about the majority class changes.
"""

import numpy as np

from botsift import Dataset, SmoteConfig, minority_neighbors, smote

rng = np.random.default_rng(2)

# 12 normal rows against 400 botnet rows, two scaled features
minority = rng.random((12, 2)) * 0.2
majority = 0.6 + rng.random((400, 2)) * 0.4
X = np.vstack([minority, majority])
y = np.array([0] * 12 + [1] * 400)
dataset = Dataset(X, y, ("rate", "dur"))
print(f"before: class counts {dataset.class_counts}")

result = smote(dataset, SmoteConfig(k_neighbors=5), seed=9)
print(f"after:  class counts {result.counts} "
      f"({int(result.synthetic.sum())} synthetic rows)")
print(f"minority label: {result.minority_label}")

# originals survive untouched, in their original order
balanced = result.dataset
originals = balanced.features[result.synthetic == 0]
print(f"original rows preserved bitwise: {np.array_equal(originals, X)}")

# every synthetic row sits on a segment between a minority row and one
# of that row's 5 nearest minority neighbours
neighbors = minority_neighbors(minority, k=5)
synthetic = balanced.features[result.synthetic == 1]
explained = 0
for s in synthetic:
    done = False
    for i, row in enumerate(minority):
        for j in neighbors[i]:
            d = minority[j] - row
            t = np.clip(np.dot(s - row, d) / np.dot(d, d), 0.0, 1.0)
            if np.abs(s - (row + t * d)).max() <= 1e-9:
                done = True
                break
        if done:
            break
    explained += done
print(f"synthetic rows on a minority-to-neighbour segment: "
      f"{explained}/{len(synthetic)}")

# the balance point is configurable; matching the majority is the default
partial = smote(dataset, SmoteConfig(k_neighbors=5, target_minority_count=50),
                seed=9)
print(f"partial oversampling to 50 rows: {partial.counts}")
