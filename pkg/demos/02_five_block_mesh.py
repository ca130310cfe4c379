"""Build the five-block disk and look at its geometry.

Shows the effect of the dilation parameter on the interior square, the grid
packing near the island radius, and the interface conformity check.
"""

import numpy as np

from anisoheat.mesh import (PackingParams, build_circle_five_block,
                            verify_interface_coincidence, dump_mesh_csv)

for gamma in (0.0, 0.1):
    dom = build_circle_five_block(21, 21, gamma, order=2)
    b0 = dom.blocks[0]
    print(f"gamma={gamma}: interior east-edge bow = "
          f"{np.max(b0.x[-1, :]) - 0.25:.4f}")
    print(f"  interface mismatch: "
          f"{verify_interface_coincidence(dom.blocks, dom.interfaces):.2e}")
    print(f"  J range per block: "
          + ", ".join(f"[{b.jac.min():.3f},{b.jac.max():.3f}]"
                      for b in dom.blocks))

packed = build_circle_five_block(21, 21, 0.0,
                                 packing=PackingParams(alpha_pack=0.1),
                                 order=2)
east = packed.blocks[1]
radii = np.hypot(east.x[:, 10], east.y[:, 10])
print("\npacked east-block radial nodes along the midline:")
print(np.round(radii, 3))
print("(node spacing tightens near r = 0.7, the island separatrix)")

dump_mesh_csv(packed, "out_demo_mesh.csv")
print("\nwrote out_demo_mesh.csv")
