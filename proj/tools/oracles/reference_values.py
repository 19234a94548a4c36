"""Independent reference values for the frozen numbers in the C++ tests.

Builds each walk as a plain numpy matrix over its arcs and solves
(z - U_int) u = B_in alpha directly, so nothing is shared with the C++ code.
Run with `python3 tools/oracles/reference_values.py`.
"""

import numpy as np


def sigma(arcs, tails_in, tails_out, coins, z):
    """arcs: interior arc names. coins: list of (in_names, out_names, matrix)
    with matrix rows indexed by out_names and columns by in_names."""
    names = list(arcs) + list(tails_in) + list(tails_out)
    idx = {a: k for k, a in enumerate(names)}
    n = len(names)
    u = np.zeros((n, n), complex)
    for ins, outs, c in coins:
        for r, o in enumerate(outs):
            for k, i in enumerate(ins):
                u[idx[o], idx[i]] = c[r][k]
    m, t = len(arcs), len(tails_in)
    ui = u[:m, :m]
    b_in = u[:m, m:m + t]
    b_out = u[m + t:, :m]
    d = u[m + t:, m:m + t]
    sol = np.linalg.solve(z * np.eye(m) - ui, b_in)
    return b_out @ sol + d


def ms(eps, z):
    s = np.sqrt(1 - eps**2)
    cin = [[s, -eps], [eps, s]]
    cout = [[s, eps], [-eps, s]]
    coins = [
        (["a1", "w1"], ["a2", "a5"], cin),  # L+
        (["a3", "w2"], ["a4", "a6"], cin),  # R-
        (["a4", "a5"], ["a1", "o1"], cout),  # L-
        (["a2", "a6"], ["a3", "o2"], cout),  # R+
    ]
    return sigma(["a1", "a2", "a3", "a4", "a5", "a6"], ["w1", "w2"], ["o1", "o2"], coins, z)


def cycle(c, eps, z):
    n = len(c)
    arcs = [f"a{k}" for k in range(1, n + 1)]
    coins = []
    for k in range(1, n + 1):
        ce = c[k - 1] * eps
        s = np.sqrt(1 - ce**2)
        nxt = 1 if k == n else k + 1
        coins.append(([f"a{k}", f"w{k}"], [f"a{nxt}", f"o{k}"], [[s, ce], [-ce, s]]))
    return sigma(arcs, [f"w{k}" for k in range(1, n + 1)], [f"o{k}" for k in range(1, n + 1)], coins, z)


def line(barriers, z):
    """barriers: {site: 2x2 coin}. Left movers l{x} arrive at x from x+1,
    right movers r{x} arrive at x from x-1."""
    last = max(barriers)
    arcs = [f"l{x}" for x in range(last)] + [f"r{x}" for x in range(1, last + 1)]
    coins = []
    for x in range(last + 1):
        c = barriers.get(x, np.eye(2))
        coins.append(([f"l{x}", f"r{x}"], [f"l{x - 1}", f"r{x + 1}"], c))
    s = sigma(arcs, ["r0", f"l{last}"], ["l-1", f"r{last + 1}"], coins, z)
    return abs(s[0, 1]) ** 2


def rot(r):
    s = np.sqrt(1 - r * r)
    return np.array([[s, r], [-r, s]])


def show(label, m):
    print(label)
    for row in np.atleast_2d(m):
        print("  " + ", ".join(f"{{{v.real:.17g}, {v.imag:.17g}}}" for v in row))


if __name__ == "__main__":
    show("ms eps=0.3 z=exp(0.7i)", ms(0.3, np.exp(0.7j)))
    show("ms eps=0.2 z=0.5+0.3i", ms(0.2, 0.5 + 0.3j))
    show("cycle c=(0.5,1,0.8) eps=0.2 z=exp(1.1i)", cycle([0.5, 1.0, 0.8], 0.2, np.exp(1.1j)))
    db = {0: np.array([[0.6, 0.8], [-0.8, 0.6]]), 1: np.array([[0.6, 0.8], [-0.8, 0.6]])}
    print(f"double barrier T(exp(0.4i)) = {line(db, np.exp(0.4j)):.17g}")
    tb = {0: rot(0.5), 2: rot(0.4), 3: rot(0.75)}
    print(f"triple barrier T(exp(0.9i)) = {line(tb, np.exp(0.9j)):.17g}")
    print(f"triple barrier T(i) = {line(tb, 1j):.17g}")
    e1, e2 = np.exp(-10.0), np.exp(-20.0)
    bs = {0: np.array([[e1, np.sqrt(1 - e1**2)], [-np.sqrt(1 - e1**2), e1]]),
          3: np.array([[e2, np.sqrt(1 - e2**2)], [-np.sqrt(1 - e2**2), e2]])}
    print(f"broken symmetry x0=3 eps=0.1 T(exp(0.3i)) = {line(bs, np.exp(0.3j)):.17g}")
