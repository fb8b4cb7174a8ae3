"""Pure-Python versions of the hot loops (reference implementation)."""


class BudgetExceeded(Exception):
    pass


def compose(v, w):
    """(v o w)(h) = v(w(h)): apply w first."""
    return tuple([v[i] for i in w])


def closure(gens, n, budget=None):
    """All products of gens (plus the identity) as tuples over range(n)."""
    ident = tuple(range(n))
    gens = [tuple(g) for g in gens]
    seen = {ident: None}
    order = [ident]
    frontier = [ident]
    while frontier:
        nxt = []
        for x in frontier:
            for g in gens:
                y = tuple([g[i] for i in x])
                if y not in seen:
                    seen[y] = None
                    order.append(y)
                    nxt.append(y)
                    if budget is not None and len(order) > budget:
                        raise BudgetExceeded(len(order))
        frontier = nxt
    return order


def orbit(x, n):
    """Threshold and period of the transformation x under composition."""
    pos = {}
    cur = x
    k = 1
    while cur not in pos:
        pos[cur] = k
        cur = tuple([x[i] for i in cur])
        k += 1
    t = pos[cur]
    return t, k - t


def mat_mul(A, B, tau, pi):
    d = len(A)
    m = len(B[0]) if B else 0
    out = []
    for i in range(d):
        row = []
        Ai = A[i]
        for j in range(m):
            s = 0
            for k in range(len(B)):
                s += Ai[k] * B[k][j]
            if s >= tau:
                s = tau + (s - tau) % pi
            row.append(s)
        out.append(tuple(row))
    return tuple(out)


def sumset(a, b, table):
    """Pointwise sum of two element sets given as bitmasks."""
    out = 0
    i = 0
    while a >> i:
        if (a >> i) & 1:
            row = table[i]
            j = 0
            while b >> j:
                if (b >> j) & 1:
                    out |= 1 << row[j]
                j += 1
        i += 1
    return out


def imageset(a, f):
    out = 0
    i = 0
    while a >> i:
        if (a >> i) & 1:
            out |= 1 << f[i]
        i += 1
    return out
