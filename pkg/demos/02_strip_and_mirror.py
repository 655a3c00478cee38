"""Resonances of a random cubic graph stay in a strip below the real axis.

Each vertex with d internal edges and n leads can damp a wave by at most
(n + d)/|d - n| per traversal, which bounds the depth by
max_v ln((n + d)/|d - n|) / L_min.  The resonance set is also symmetric under
z -> -conj(z).  The script prints the bound, the deepest resonance found and
the largest mismatch between the set and its mirror image.
"""

import numpy as np

from reslab.ensembles import EnsembleSpec, random_regular_graph
from reslab.solver import Rectangle
from reslab.statistics import audit

g = random_regular_graph(EnsembleSpec(30, 3, (1.0, 2.0), 3, seed=7))
rep = audit(g, Rectangle(0.5, 12, -3, -1e-4))
ims = np.array([r.z.imag for r in rep.resonances])
print(f"{len(ims)} resonances; strip bound K = {rep.strip_bound:.4f}; deepest Im z = {ims.min():.4f}")
mirror = np.array([m.z for m in rep.mirrored])
gap = max(np.min(np.abs(mirror + r.z.conjugate())) for r in rep.resonances)
print(f"largest distance to the mirror image: {gap:.2e}; audit passed: {rep.passed}")
