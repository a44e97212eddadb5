"""Independent oracles: brute-force integration and assembly.

Everything here recomputes quantities from their definitions with scalar
loops and boosted quadrature orders, deliberately avoiding the
production assembly path, so that the two routes can be compared.
"""

import numpy as np
from matplotlib.path import Path

from lswg.basis import EdgeBasis, ElementBasis
from lswg.quadrature import quad_edge, quad_polygon
from lswg.space import DofMap


def rasterize_integral(f, polygon, n=1000):
    """Midpoint-grid integral of f over a polygon (no quadrature rules)."""
    polygon = np.asarray(polygon, float)
    lo = polygon.min(axis=0)
    hi = polygon.max(axis=0)
    xs = lo[0] + (hi[0] - lo[0]) * (np.arange(n) + 0.5) / n
    ys = lo[1] + (hi[1] - lo[1]) * (np.arange(n) + 0.5) / n
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    pts = np.column_stack([X.ravel(), Y.ravel()])
    inside = Path(polygon).contains_points(pts)
    cell = (hi[0] - lo[0]) * (hi[1] - lo[1]) / n ** 2
    return cell * f(pts[inside]).sum()


def oracle_weak_hessian(mesh, t, config, order_boost=6):
    """Weak second-derivative maps assembled column by column from the
    defining moments, with boosted quadrature. Returns H[i][j] arrays."""
    el = mesh.elements[t]
    k, r = config.k, config.r
    order = config.quad_order + order_boost
    rbasis = ElementBasis(el.centroid, el.diameter, r)
    ibasis = ElementBasis(el.centroid, el.diameter, k)
    rule = quad_polygon(mesh.element_coords(t), order)

    ni = ibasis.dim
    nb = k + 1
    ngc = k
    m = len(el.edges)
    nloc = ni + m * (nb + 2 * ngc)

    # P_r mass matrix by scalar loops
    M = np.zeros((rbasis.dim, rbasis.dim))
    for p in range(rbasis.dim):
        for q in range(rbasis.dim):
            M[p, q] = rule.weights @ (rbasis.eval(rule.points)[:, p]
                                      * rbasis.eval(rule.points)[:, q])

    edge_data = []
    for loc, e in enumerate(el.edges):
        a, b = (mesh.vertices[v] for v in mesh.edges[e].endpoints)
        erule = quad_edge(a, b, order)
        edge_data.append((
            erule,
            mesh.edges[e].unit_normal_of(t),
            EdgeBasis(a, b, k),
            EdgeBasis(a, b, k - 1),
        ))

    H = [[np.zeros((rbasis.dim, nloc)) for _ in range(2)] for _ in range(2)]
    derivs = {(0, 0): (2, 0), (0, 1): (1, 1), (1, 0): (1, 1), (1, 1): (0, 2)}
    for i in range(2):
        for j in range(2):
            B = np.zeros((rbasis.dim, nloc))
            for p in range(rbasis.dim):
                dx, dy = derivs[(j, i)]
                d2phi = rbasis.eval(rule.points, dx=dx, dy=dy)[:, p]
                for c in range(ni):
                    B[p, c] = rule.weights @ (ibasis.eval(rule.points)[:, c] * d2phi)
                for loc, (erule, normal, eb, eg) in enumerate(edge_data):
                    dphi_j = rbasis.eval(erule.points, dx=(1 if j == 0 else 0),
                                         dy=(1 if j == 1 else 0))[:, p]
                    phi = rbasis.eval(erule.points)[:, p]
                    for q in range(nb):
                        col = ni + loc * nb + q
                        Lb = eb.eval(erule.points)[:, q]
                        B[p, col] = -(erule.weights @ (Lb * normal[i] * dphi_j))
                    for comp in range(2):
                        for q in range(ngc):
                            col = ni + m * nb + loc * 2 * ngc + comp * ngc + q
                            if comp == i:
                                Lg = eg.eval(erule.points)[:, q]
                                B[p, col] = erule.weights @ (Lg * phi * normal[j])
            H[i][j] = np.linalg.solve(M, B)
    return H


def oracle_assemble(mesh, config, coeff, source, order_boost=6):
    """Dense brute-force assembly of the full system over all DOFs.

    Returns (A_full, b_full) before boundary elimination; slice with the
    DofMap's free DOFs to compare against the production system.
    """
    dm = DofMap(mesh, config)
    order = config.quad_order + order_boost
    A = np.zeros((dm.total, dm.total))
    b = np.zeros(dm.total)
    for t in range(mesh.n_elements):
        el = mesh.elements[t]
        k = config.k
        H = oracle_weak_hessian(mesh, t, config, order_boost)
        rbasis = ElementBasis(el.centroid, el.diameter, config.r)
        ibasis = ElementBasis(el.centroid, el.diameter, k)
        rule = quad_polygon(mesh.element_coords(t), order)
        gdofs = dm.element_dofs(t)
        nloc = len(gdofs)

        # coefficient-weighted weak Hessian of each local basis function
        avals = coeff(rule.points)
        phi_r = rbasis.eval(rule.points)
        g = np.zeros((len(rule.weights), nloc))
        for i in range(2):
            for j in range(2):
                g += avals[:, i, j, None] * (phi_r @ H[i][j])

        fvals = source(rule.points)
        for p in range(nloc):
            b[gdofs[p]] += rule.weights @ (fvals * g[:, p])
            for q in range(nloc):
                A[gdofs[p], gdofs[q]] += rule.weights @ (g[:, p] * g[:, q])

        # stabilizer from the printed jump forms
        hT = el.diameter
        ni, nb, ngc = ibasis.dim, k + 1, k
        m = len(el.edges)
        for loc, e in enumerate(el.edges):
            a0, b0 = (mesh.vertices[v] for v in mesh.edges[e].endpoints)
            erule = quad_edge(a0, b0, order)
            eb = EdgeBasis(a0, b0, k)
            eg = EdgeBasis(a0, b0, k - 1)
            jump0 = np.zeros((len(erule.weights), nloc))
            jump0[:, :ni] = ibasis.eval(erule.points)
            jump0[:, ni + loc * nb:ni + (loc + 1) * nb] = -eb.eval(erule.points)
            jumps = [jump0]
            for comp, (dx, dy) in enumerate(((1, 0), (0, 1))):
                jc = np.zeros((len(erule.weights), nloc))
                jc[:, :ni] = ibasis.eval(erule.points, dx=dx, dy=dy)
                cg = ni + m * nb + loc * 2 * ngc + comp * ngc
                jc[:, cg:cg + ngc] = -eg.eval(erule.points)
                jumps.append(jc)
            for w_pow, js in ((3, jumps[:1]), (1, jumps[1:])):
                for J in js:
                    for p in range(nloc):
                        for q in range(nloc):
                            A[gdofs[p], gdofs[q]] += hT ** -w_pow * (
                                erule.weights @ (J[:, p] * J[:, q]))
    return A, b


def fd_hessian(u, points, step=1e-5):
    """Central finite-difference Hessian of a scalar field."""
    points = np.atleast_2d(points)
    h = step
    ex = np.array([h, 0.0])
    ey = np.array([0.0, h])
    out = np.empty((len(points), 2, 2))
    out[:, 0, 0] = (u(points + ex) - 2 * u(points) + u(points - ex)) / h ** 2
    out[:, 1, 1] = (u(points + ey) - 2 * u(points) + u(points - ey)) / h ** 2
    mixed = (u(points + ex + ey) - u(points + ex - ey)
             - u(points - ex + ey) + u(points - ex - ey)) / (4 * h ** 2)
    out[:, 0, 1] = out[:, 1, 0] = mixed
    return out
