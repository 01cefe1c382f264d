"""Regenerate values.json with mpmath at 40 digits.

Everything here is written from the defining formulas and mpmath's jtheta;
nothing is imported from the Rust crate.

    python3 crates/core/tests/oracles/generate.py
"""

import itertools
import json
import pathlib

from mpmath import cos, eig, jtheta, matrix, mp, mpf, pi, sin, sqrt

mp.dps = 40
HALF = mpf(1) / 2
PERMS = [[0, 1, 2, 3], [1, 0, 3, 2], [2, 3, 0, 1], [3, 2, 1, 0]]


def bracket(alpha, p, z, r):
    x = alpha * z / 2
    if p == 0:
        return [sin(x) / sin(alpha / 2), cos(x), mpf(1), mpf(1)][r - 1]
    if r == 1:
        v = jtheta(1, x, p) / (sin(alpha / 2) * jtheta(1, 0, p, 1))
    else:
        v = jtheta(r, x, p) / jtheta(r, 0, p)
    return mp.re(v)


class Params:
    def __init__(self, n, m, g, gs, gps, p):
        self.n, self.m, self.g, self.p = n, m, mpf(g), mpf(p)
        self.gs = [mpf(x) for x in gs]
        self.gps = [mpf(x) for x in gps]
        self.alpha = pi / (m + (n - 1) * self.g + self.gs[0] + self.gs[1])
        self.rho = [(n - j) * self.g + self.gs[0] for j in range(1, n + 1)]

    def br(self, z, r):
        return bracket(self.alpha, self.p, z, r)

    def c(self):
        den = self.br(self.g, 1) * self.br(self.g - 1, 1)
        out = []
        for perm in PERMS:
            num = mpf(1)
            for s in range(4):
                num *= self.br(self.gs[perm[s]] - HALF, s + 1) * self.br(self.gps[perm[s]], s + 1)
            out.append(2 * num / den)
        return out


def partitions(n, m):
    pts = [p for p in itertools.product(range(m + 1), repeat=n) if all(p[i] >= p[i + 1] for i in range(n - 1))]
    return sorted(pts, key=lambda p: (sum(p), tuple(-x for x in p)))


def coeff_b(P, lam, j, eps):
    x = P.rho[j] + lam[j]
    b = mpf(1)
    for r in range(1, 5):
        b *= P.br(x + eps * P.gs[r - 1], r) * P.br(x + eps * (P.gps[r - 1] + HALF), r)
        b /= P.br(x, r) * P.br(x + eps * HALF, r)
    for k in range(P.n):
        if k == j:
            continue
        y = P.rho[k] + lam[k]
        for d in (1, -1):
            b *= P.br(x + d * y + eps * P.g, 1) / P.br(x + d * y, 1)
    return b


def coeff_a(P, lam):
    total = mpf(0)
    for r, cr in zip(range(1, 5), P.c()):
        t = mpf(1)
        for j in range(P.n):
            x = P.rho[j] + lam[j]
            t *= P.br(x + HALF - P.g, r) * P.br(x - HALF + P.g, r) / (P.br(x + HALF, r) * P.br(x - HALF, r))
        total += cr * (t - 1)
    return total


def hamiltonian(P):
    pts = partitions(P.n, P.m)
    index = {p: i for i, p in enumerate(pts)}
    H = matrix(len(pts), len(pts))
    for i, lam in enumerate(pts):
        H[i, i] = coeff_a(P, lam)
        for j in range(P.n):
            for eps in (1, -1):
                mu = list(lam)
                mu[j] += eps
                mu = tuple(mu)
                if mu in index:
                    H[i, index[mu]] = coeff_b(P, lam, j, eps)
    return pts, H


def weights(P, pts, H):
    # detailed balance from the zero partition along a spanning tree of single steps
    index = {p: i for i, p in enumerate(pts)}
    w = {pts[0]: mpf(1)}
    for lam in pts[1:]:
        j = max(i for i in range(P.n) if lam[i] > 0 and (i + 1 == P.n or lam[i] > lam[i + 1]))
        prev = list(lam)
        prev[j] -= 1
        prev = tuple(prev)
        w[lam] = w[prev] * H[index[prev], index[lam]] / H[index[lam], index[prev]]
    return [w[p] for p in pts]


def case(n, m, g, gs, gps, p):
    P = Params(n, m, g, gs, gps, p)
    pts, H = hamiltonian(P)
    w = weights(P, pts, H)
    dim = len(pts)
    S = matrix(dim, dim)
    for i in range(dim):
        for k in range(dim):
            S[i, k] = sqrt(w[i]) * H[i, k] / sqrt(w[k])
    S = (S + S.T) / 2
    vals, vecs = eig(S)
    order = sorted(range(dim), key=lambda i: -vals[i])
    h0 = []
    for i in order:
        v = [vecs[k, i] for k in range(dim)]
        nrm = sqrt(sum(x * x for x in v))
        h0.append(float((v[0] / nrm) ** 2))
    b = []
    for lam in pts:
        for j in range(n):
            for eps in (1, -1):
                b.append({"lambda": list(lam), "part": j, "raise": eps > 0, "B": float(coeff_b(P, lam, j, eps))})
    return {
        "params": {"n": n, "m": m, "g": g, "g1": gs[0], "g2": gs[1], "g3": gs[2], "g4": gs[3],
                   "gp1": gps[0], "gp2": gps[1], "gp3": gps[2], "gp4": gps[3], "p": p},
        "lattice": [list(x) for x in pts],
        "c": [float(x) for x in P.c()],
        "A": [float(coeff_a(P, lam)) for lam in pts],
        "B": b,
        "weights": [float(x) for x in w],
        "eigenvalues": [float(vals[i]) for i in order],
        "h0": h0,
    }


def main():
    brackets = []
    for alpha in ("0.35", "1.0", "2.2"):
        for p in ("0", "0.1", "0.4", "-0.3", "0.75"):
            for z in ("1.3", "-0.45", "3.7"):
                for r in range(1, 5):
                    v = bracket(mpf(alpha), mpf(p), mpf(z), r)
                    brackets.append({"alpha": float(alpha), "p": float(p), "z": float(z), "r": r, "value": float(v)})
    cases = [
        case(2, 2, 0.5, [0.6, 0.7, 0.1, 0.1], [0.05, 0.05, 0.05, 0.05], 0.3),
        case(3, 2, 0.35, [0.6, 0.8, 0.2, 0.1], [0.05, 0.1, -0.05, 0.02], -0.2),
        case(1, 3, 0.5, [0.45, 0.9, 0.3, 0.15], [0.2, -0.1, 0.05, 0.0], 0.55),
    ]
    out = {"brackets": brackets, "cases": cases}
    path = pathlib.Path(__file__).with_name("values.json")
    path.write_text(json.dumps(out, indent=1) + "\n")


if __name__ == "__main__":
    main()
