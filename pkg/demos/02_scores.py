"""Adversarial Shapley scores for picking replay samples.

Memory holds classes 0 and 1; the incoming batch is class 1.  A class-0
candidate scores high when it is typical of memory (positive value for the
memory subsample) and also sits close to the incoming points while carrying
a different label (negative value for the batch).
"""
import numpy as np

from aser import asv, asv_mu, dist_mu_score, dist_score, knn_sv_matrix

gen = np.random.default_rng(3)
mem0 = gen.normal(loc=(-1.0, 0.0), scale=0.8, size=(20, 2))
mem1 = gen.normal(loc=(1.0, 0.0), scale=0.8, size=(20, 2))
batch = gen.normal(loc=(1.0, 0.0), scale=0.8, size=(10, 2))

sub = np.vstack([mem0[:4], mem1[:4]])
y_sub = np.repeat([0, 1], 4)
cand = np.vstack([mem0[4:], mem1[4:]])
y_cand = np.repeat([0, 1], 16)
y_batch = np.ones(10, int)

sv_mem = knn_sv_matrix(cand, y_cand, sub, y_sub, K=3)
sv_in = knn_sv_matrix(cand, y_cand, batch, y_batch, K=3)
scores = {
    "asv": asv(sv_mem, sv_in),
    "asv_mu": asv_mu(sv_mem, sv_in),
    "dist": dist_score((cand, y_cand), (sub, y_sub), (batch, y_batch)),
    "dist_mu": dist_mu_score((cand, y_cand), (sub, y_sub), (batch, y_batch)),
}

# class-0 candidates near the batch get negative batch values
near = np.argsort(np.linalg.norm(cand - batch.mean(axis=0), axis=1), kind="stable")
print("candidate  label  x      value(memory)  value(batch)")
for i in near[:6]:
    print(f"{i:9d}  {y_cand[i]:5d}  {cand[i, 0]:5.2f}  {sv_mem.average()[i]:13.3f}  {sv_in.average()[i]:12.3f}")

print("\ntop 5 candidates (label, x) per score")
for name, s in scores.items():
    top = np.argsort(-s, kind="stable")[:5]
    print(f"{name:8s}", [(int(y_cand[i]), round(float(cand[i, 0]), 2)) for i in top])

# the Shapley scores pick old-class points on the boundary with the batch;
# the distance scores have no adversarial term and pick points near the batch
