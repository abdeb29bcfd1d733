"""Exact Whitney mass matrices and circumcentric duals with sympy.

Prints the values frozen in tests/oracles.rs. Edges are ordered
lexicographically with the lower vertex index as tail.
"""
import itertools
import sympy as sp

x, y = sp.symbols("x y")


def barycentric(p):
    (x0, y0), (x1, y1), (x2, y2) = p
    det = (x1 - x0) * (y2 - y0) - (x2 - x0) * (y1 - y0)
    l1 = ((x - x0) * (y2 - y0) - (x2 - x0) * (y - y0)) / det
    l2 = ((x1 - x0) * (y - y0) - (x - x0) * (y1 - y0)) / det
    return [1 - l1 - l2, l1, l2], abs(det) / 2


def integrate(expr, p):
    # Affine pullback to the reference triangle.
    (x0, y0), (x1, y1), (x2, y2) = p
    s, t = sp.symbols("s t")
    sub = {x: x0 + s * (x1 - x0) + t * (x2 - x0), y: y0 + s * (y1 - y0) + t * (y2 - y0)}
    jac = abs((x1 - x0) * (y2 - y0) - (x2 - x0) * (y1 - y0))
    return sp.integrate(sp.integrate(sp.expand(expr.subs(sub)) * jac, (t, 0, 1 - s)), (s, 0, 1))


def whitney(lam, a, b):
    ga = [sp.diff(lam[a], x), sp.diff(lam[a], y)]
    gb = [sp.diff(lam[b], x), sp.diff(lam[b], y)]
    return [lam[a] * gb[i] - lam[b] * ga[i] for i in range(2)]


def assemble(points, triangles):
    edges = sorted({tuple(sorted(e)) for t in triangles for e in itertools.combinations(t, 2)})
    m1 = sp.zeros(len(edges))
    star1 = [sp.Integer(0)] * len(edges)
    star0 = [sp.Integer(0)] * len(points)
    for tri in triangles:
        tri = sorted(tri)
        p = [points[v] for v in tri]
        lam, area = barycentric(p)
        local = [(i, j) for i, j in itertools.combinations(range(3), 2)]
        forms = {(i, j): whitney(lam, i, j) for i, j in local}
        for (i, j), (k, l) in itertools.product(local, local):
            e = edges.index((tri[i], tri[j]))
            f = edges.index((tri[k], tri[l]))
            w, v = forms[(i, j)], forms[(k, l)]
            m1[e, f] += integrate(w[0] * v[0] + w[1] * v[1], p)
        cc = circumcenter(p)
        for (i, j) in local:
            k = 3 - i - j
            mid = [(p[i][c] + p[j][c]) / 2 for c in range(2)]
            # Signed distance from the edge midpoint to the circumcenter,
            # positive toward the opposite vertex.
            d = sp.sqrt(sum((cc[c] - mid[c]) ** 2 for c in range(2)))
            side = sp.sign(orient(p[i], p[j], cc) * orient(p[i], p[j], p[k]))
            length = sp.sqrt(sum((p[i][c] - p[j][c]) ** 2 for c in range(2)))
            star1[edges.index((tri[i], tri[j]))] += side * d / length
        for i in range(3):
            j, k = (i + 1) % 3, (i + 2) % 3
            mij = [(p[i][c] + p[j][c]) / 2 for c in range(2)]
            mik = [(p[i][c] + p[k][c]) / 2 for c in range(2)]
            star0[tri[i]] += shoelace([p[i], mij, cc, mik]) * sp.sign(orient(*p))
    return edges, m1, star0, star1


def orient(a, b, c):
    return (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1])


def shoelace(poly):
    n = len(poly)
    return sum(poly[i][0] * poly[(i + 1) % n][1] - poly[(i + 1) % n][0] * poly[i][1] for i in range(n)) / 2


def circumcenter(p):
    (ax, ay), (bx, by), (cx, cy) = p
    d = 2 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by))
    ux = ((ax**2 + ay**2) * (by - cy) + (bx**2 + by**2) * (cy - ay) + (cx**2 + cy**2) * (ay - by)) / d
    uy = ((ax**2 + ay**2) * (cx - bx) + (bx**2 + by**2) * (ax - cx) + (cx**2 + cy**2) * (bx - ax)) / d
    return [ux, uy]


R = sp.Rational
cases = {
    "scalene": ([(0, 0), (R(13, 10), R(1, 10)), (R(2, 5), R(9, 10))], [(0, 1, 2)]),
    "kite": ([(0, 0), (2, 0), (1, R(3, 10)), (R(6, 5), R(-11, 10))], [(0, 1, 2), (0, 1, 3)]),
}
for name, (pts, tris) in cases.items():
    edges, m1, star0, star1 = assemble(pts, tris)
    print(name, "edges", edges)
    for i in range(len(edges)):
        print("  M1 row", [float(sp.N(m1[i, j], 20)) for j in range(len(edges))])
    print("  star0", [float(sp.N(v, 20)) for v in star0])
    print("  star1", [float(sp.N(v, 20)) for v in star1])
