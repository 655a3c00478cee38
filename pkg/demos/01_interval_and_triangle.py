"""Two hand-checkable graphs.

A single closed edge of length 1 has det(Id - U(z)) = 1 - exp(2iz), so its
spectrum is pi, 2 pi, 3 pi, ...  The closed unit triangle has the double
eigenvalues 2 pi k / 3.  Attaching one lead splits each pair: one member moves
into the lower half plane, while a combination vanishing at the lead vertex
stays on the real axis (at 2 pi this is sin(2 pi x) around the cycle).
"""

import math

from reslab.ensembles import fixture
from reslab.graph import remove_leads
from reslab.secular import assemble
from reslab.solver import Rectangle, closed_spectrum, find_resonances, kernel_dimension

interval = assemble(fixture("interval", 1.0))
print("interval spectrum / pi:", [round(x / math.pi, 12) for x, _ in closed_spectrum(interval, 0.5, 10)])

tri = fixture("triangle_lead")
closed = closed_spectrum(assemble(remove_leads(tri)), 0.5, 7)
print("closed triangle (x, multiplicity):", [(round(x, 6), m) for x, m in closed])

open_sys = assemble(tri)
for r in find_resonances(open_sys, Rectangle(0.5, 7, -1.5, 0.01)):
    print(f"  open resonance {r.z.real:9.6f} {r.z.imag:+.6f}i  mult {r.multiplicity}"
          f"  kernel dim {kernel_dimension(open_sys, r.z)}")
