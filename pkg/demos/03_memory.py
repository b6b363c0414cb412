"""Memory strategies on a two-phase stream.

Reservoir sampling keeps a uniform sample of everything seen.  The Shapley
based update keeps the samples that best represent each stored class; new
classes get in because their inputs are scored against themselves while
they are still rare in memory.
"""
from collections import Counter

import numpy as np

from aser import MemoryBuffer, RetrievalConfig, RngStream, Sample, reservoir_update, retrieve_aser, sv_update

gen = np.random.default_rng(0)
means = {0: (-3.0, 0.0), 1: (0.0, 3.0), 2: (3.0, 0.0)}
stream = []
for phase in ([0, 1], [2]):
    for _ in range(60):
        c = int(gen.choice(phase))
        stream.append(Sample(len(stream), gen.normal(means[c], 1.0), c))

identity = lambda X: X  # noqa: E731 - raw features stand in for a trained extractor
cfg = RetrievalConfig(memory_batch_size=4, candidate_size=12, knn_k=3, subsample_per_class=2)

res, sv = MemoryBuffer(24), MemoryBuffer(24)
rng = RngStream(7)
for i in range(0, len(stream), 6):
    batch = stream[i:i + 6]
    reservoir_update(res, batch, rng.child("res"))
    sv_update(sv, batch, cfg, identity, rng.child("sv"))

print("reservoir classes:", sorted(Counter(s.label for s in res.slots).items()))
print("SV update classes:", sorted(Counter(s.label for s in sv.slots).items()))

# retrieval for a batch of class 2: picks stored points near the class-2 cluster
batch = [s for s in stream if s.label == 2][-6:]
picked = retrieve_aser(sv, batch, cfg, identity, RngStream(1))
print("retrieved (label, x):", [(s.label, round(float(s.features[0]), 2)) for s in picked])
