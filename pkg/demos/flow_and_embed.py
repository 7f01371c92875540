"""Ricci flow on a barbell-like graph, then an MDS picture of the result.

The two bridges are the most negatively curved edges, so the flow stretches
them while the clique edges shrink.  The final weighted path metric is
embedded in the plane by stress minimization.
"""
import numpy as np

from netcurv import FlowConfig, MDSConfig, MetricKind, WeightedGraph, distance_matrix, mds_embed, run_flow

k = 6
edges = [(i, j) for i in range(k) for j in range(i + 1, k)]
edges += [(k + i, k + j) for i in range(k) for j in range(i + 1, k)]
edges += [(0, k), (1, k + 1)]
g = WeightedGraph(range(2 * k), edges)

trace = run_flow(g, None, FlowConfig(iterations=5, step=0.5, prune_keep_fraction=1.0))
for s in trace.states:
    w = np.asarray(s.weights)
    print(f"iter {s.iteration}: weight range [{w.min():.4f}, {w.max():.4f}], variance {s.variance:.4f}")

last = trace.states[-1]
bridge = [w for (u, v), w in zip(last.edges, last.weights) if (u < k) != (v < k)]
print(f"bridge weights after the flow: {np.round(bridge, 4).tolist()}")
h = WeightedGraph(range(2 * k), [(u, v, w) for (u, v), w in zip(last.edges, last.weights)])
D = distance_matrix(h, MetricKind.PATH)
emb = mds_embed(D, 2, MDSConfig(seed=0))
print(f"stress of the planar embedding: {emb.cost:.3e}")
left, right = emb.coordinates[:k], emb.coordinates[k:]
print(f"cluster centroids: {left.mean(0).round(3)} and {right.mean(0).round(3)}")
