"""How many resonances lie deeper than -delta?

Counts of resonances below Im z = -delta grow at most like g / delta^(5/2) for
g leads.  The scan below uses a graph with many leads so that the counts are
not all zero, then repeats the count for the damped Hermitian matrix A + iB.
The bound is a statement about small delta along a growing family; a slope
fitted over a few delta values of one graph can come out steeper than 5/2.
"""

from reslab.ensembles import EnsembleSpec, hermitian_pair, random_regular_graph
from reslab.statistics import delta_scan, hermitian_strip_count

g = random_regular_graph(EnsembleSpec(40, 3, (1.0, 2.0), 12, seed=3))
scan = delta_scan(g, 1, 15, 3, [0.8, 0.4, 0.2, 0.1, 0.05])
for d, c in zip(scan.deltas, scan.counts):
    print(f"delta {d:5.2f}: {c:4d} resonances, count*delta^2.5/g = {c * d ** 2.5 / scan.lead_count:.4f}")
print(f"fitted exponent {scan.fitted_exponent:.2f} (defined: {scan.fit_defined})")

for k in (0, 1, 2, 4, 8):
    pair = hermitian_pair(200, k, 0.5, seed=1)
    print(f"damped coordinates {k:3d}: {hermitian_strip_count(pair, 0.01, (-1, 1)):4d} eigenvalues below -0.01")
