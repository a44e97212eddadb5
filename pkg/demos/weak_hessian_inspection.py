"""A close look at the discrete weak Hessian on a single element.

Interpolates u(x, y) = x^2 y into the weak space on a coarse pentagon
mesh, applies the per-element weak second-derivative maps, and compares
the result against the exact Hessian [[2y, 2x], [2x, 0]] at the element
centroid. For polynomial data of degree <= k the weak Hessian of the
interpolant equals the L2 projection of the classical Hessian, so the
agreement is at roundoff level.

Run with: python demos/weak_hessian_inspection.py
"""

import numpy as np

from lswg import (DofMap, OperatorCache, SpaceConfig, generate_grid,
                  interpolate_qh)


def main():
    mesh = generate_grid("polygonal", 1)
    config = SpaceConfig(k=3)
    dofmap = DofMap(mesh, config)

    def u(p):
        return p[:, 0] ** 2 * p[:, 1]

    def grad(p):
        return np.column_stack([2.0 * p[:, 0] * p[:, 1], p[:, 0] ** 2])

    qh = interpolate_qh(u, grad, mesh, config, dofmap)
    ops = OperatorCache(mesh, config)

    t = 0
    el = mesh.elements[t]
    x, y = el.centroid
    got = ops[t].eval_at(qh.local(t), np.array([[x, y]]))[0]
    want = np.array([[2.0 * y, 2.0 * x], [2.0 * x, 0.0]])

    print(f"element {t}: centroid ({x:.3f}, {y:.3f}), {len(el.edges)} edges")
    print("weak Hessian at centroid:")
    print(np.array_str(got, precision=12))
    print("exact Hessian:")
    print(want)
    print(f"max deviation: {np.abs(got - want).max():.3e}")


if __name__ == "__main__":
    main()
