"""KNN Shapley values: the sorted recursion against brute-force enumeration.

Three candidates on a line, labelled A, B, A by distance from an evaluation
point labelled A.  With K=2 the nearest A helps, the B in between hurts,
and the far A still helps because B can push it out of the neighbourhood.
"""
import time

import numpy as np

from aser import exact_shapley_bruteforce, knn_sv_matrix, knn_sv_single, knn_utility

A, B = 0, 1
X = np.array([[1.0], [2.0], [3.0]])
y = np.array([A, B, A])
x_ev = np.array([0.0])

exact = knn_sv_single(X, y, x_ev, A, K=2, exact=True)
print("recursion (exact):", [str(v) for v in exact])
print("brute force      :", exact_shapley_bruteforce(X, y, x_ev, A, K=2))

# efficiency: the values add up to the utility of the whole candidate set
print("sum of values", float(sum(exact)), "utility", knn_utility(X, y, x_ev, A, K=2))

# larger random instance, where enumeration is still feasible
gen = np.random.default_rng(0)
X = gen.normal(size=(12, 4))
y = gen.integers(0, 3, 12)
x_ev = gen.normal(size=4)
t0 = time.perf_counter()
brute = exact_shapley_bruteforce(X, y, x_ev, 1, K=3)
t1 = time.perf_counter()
fast = knn_sv_single(X, y, x_ev, 1, K=3)
t2 = time.perf_counter()
print(f"\n12 candidates: max diff {np.abs(brute - fast).max():.1e}, "
      f"brute force {1e3 * (t1 - t0):.1f} ms, recursion {1e3 * (t2 - t1):.3f} ms")

# a whole evaluation set at once; rows are candidates, columns evaluation points
X_ev = gen.normal(size=(5, 4))
y_ev = gen.integers(0, 3, 5)
S = knn_sv_matrix(X, y, X_ev, y_ev, K=3)
print("value matrix", S.values.shape, "mean over evaluation points:")
print(np.round(S.average(), 4))
