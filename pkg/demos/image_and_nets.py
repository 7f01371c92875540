"""Curvature sampling of a step image, and an epsilon-net of a noisy circle."""
import numpy as np

from netcurv import FiniteMetricSpace, GrayImage, curvature_bound_check, epsilon_net, grid_from_image, image_sample

A = np.zeros((32, 32))
A[:, 16:] = 1.0
gc = grid_from_image(GrayImage.from_array(A))
mask = image_sample(gc, "full-forman", retain_fraction=2 / 32, formula="general")
cols = np.unique(np.nonzero(mask)[1])
print(f"kept {mask.sum()} pixels in columns {cols.tolist()}")

rng = np.random.default_rng(0)
t = rng.uniform(0, 2 * np.pi, 400)
X = np.c_[np.cos(t), np.sin(t)] * 3 + 0.05 * rng.standard_normal((400, 2))
net = epsilon_net(FiniteMetricSpace.from_coordinates(X), 0.4, order="farthest")
rep = curvature_bound_check(net)
print(f"{len(net.centers)} centers, pattern max degree {rep.max_degree}")
print(f"min curvature {rep.min_curvature:g} against the lower bound {rep.bound} (margin {rep.margin:g})")
