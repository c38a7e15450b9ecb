"""Independent reference values for the C++ tests.

Written in numpy/scipy with a different formulation than the library:
admittance derivatives by central finite differences of the Kron-reduced
matrix, full-model Jacobians by finite differences of a nodal-form right-hand
side, critical gains by plain bisection. Run once; the printed numbers are
frozen into the tests.
"""
import numpy as np
from scipy.linalg import expm

Ub = 381.58; Sb = 1e4; w0 = 2 * np.pi * 50; zb = 1.5 * Ub**2 / Sb
tau = 1 / 31.4


def z(R, L):
    return R / zb, w0 * L / zb


rc, xc = z(0.03, 0.35e-3)
rl, xl = z(0.165, 0.26e-3)
mp0 = 9.3e-5 * Sb
nq0 = 1.3e-3 * Sb / Ub
kp0 = mp0 / w0
kq0 = nq0


def cascade(n=5, lens=(5, 4.1, 3, 6), loads=(25, 20, 20 + 4.72j, 40 + 12.58j, 18.4 + 0.157j), xscale=1.0):
    br = [(i, n + i, rc, xc) for i in range(n)]
    for k in range(n - 1):
        L = lens[k % len(lens)]
        br.append((n + k, n + k + 1, rl * L, xl * L * xscale))
    ld = [(n + i, loads[i % len(loads)].real / zb, loads[i % len(loads)].imag / zb) for i in range(n)]
    return n, 2 * n, br, ld


def yfull(nn, br, ld, s):
    Y = np.zeros((nn, nn), complex)
    for a, b, r, x in br:
        y = 1 / (r + 1j * x + s * x / w0)
        Y[a, a] += y; Y[b, b] += y; Y[a, b] -= y; Y[b, a] -= y
    for k, r, x in ld:
        Y[k, k] += 1 / (r + 1j * x + s * x / w0)
    return Y


def taylor(net, h=1e-3):
    n, nn, br, ld = net

    def red(s):
        Y = yfull(nn, br, ld, s)
        A = Y[:n, :n]; B = Y[:n, n:]; C = Y[n:, :n]; D = Y[n:, n:]
        return A - B @ np.linalg.solve(D, C)

    # Richardson-extrapolated central difference
    d1 = (red(h) - red(-h)) / (2 * h)
    d2 = (red(h / 2) - red(-h / 2)) / h
    return red(0), (4 * d2 - d1) / 3


def reduced(net, kp, kq, first=True):
    n = net[0]
    Y0, Y1 = taylor(net)
    rs = Y0.sum(1); Y0n = Y0 - np.diag(rs)
    B = -Y0n.imag; G = Y0n.real; Bt = np.diag(-2 * rs.imag); Gt = np.diag(2 * rs.real)
    Bp = Y1.imag; Gp = -Y1.real
    if not first:
        Bp = 0 * Bp; Gp = 0 * Gp
    mp = kp * w0; nq = kq
    lp = np.eye(n) / mp; lq = np.eye(n) / nq; I = np.eye(n); Z = np.zeros((n, n))
    M = np.block([[I, Z, Z], [Z, tau * lp, -Gp], [Z, Z, tau * lq - Bp]])
    K = np.block([[Z, I, Z], [-B, -(lp - Bp), -(G + Gt)], [G, -Gp, -(lq + B + Bt)]])
    return np.linalg.solve(M, K)


def full(net, kp, kq, Rv=1e4):
    n, nn, br, ld = net
    mp = kp * w0; nq = kq
    ind = [l for l in ld if l[2] > 0]; res = [l for l in ld if l[2] == 0]
    nb = len(br)
    gres = np.zeros(nn)
    for k, r, x in res:
        gres[k] += 1 / r

    def volt(xs):
        V = np.zeros(nn, complex)
        V[:n] = xs[2 * n:3 * n] * np.exp(1j * xs[0:n])
        I = xs[3 * n:3 * n + 2 * nb:2] + 1j * xs[3 * n + 1:3 * n + 2 * nb:2]
        IL = xs[3 * n + 2 * nb::2] + 1j * xs[3 * n + 2 * nb + 1::2]
        inj = np.zeros(nn, complex)
        for bi, (a, b, r, x) in enumerate(br):
            inj[a] -= I[bi]; inj[b] += I[bi]
        for li, (k, r, x) in enumerate(ind):
            inj[k] -= IL[li]
        V[n:] = inj[n:] / (gres[n:] + 1 / Rv)
        return V, I, IL, inj

    def rhs(xs, wset, uset):
        V, I, IL, inj = volt(xs)
        Om = xs[n:2 * n]; U = xs[2 * n:3 * n]
        S = V[:n] * np.conj(-inj[:n] + gres[:n] * V[:n])
        d = np.zeros_like(xs)
        d[0:n] = Om
        d[n:2 * n] = (wset - Om - mp * S.real) / tau
        d[2 * n:3 * n] = (uset - U - nq * S.imag) / tau
        for bi, (a, b, r, x) in enumerate(br):
            dI = (V[a] - V[b] - (r + 1j * x) * I[bi]) * w0 / x
            d[3 * n + 2 * bi] = dI.real; d[3 * n + 2 * bi + 1] = dI.imag
        for li, (k, r, x) in enumerate(ind):
            dI = (V[k] - (r + 1j * x) * IL[li]) * w0 / x
            d[3 * n + 2 * nb + 2 * li] = dI.real; d[3 * n + 2 * nb + 2 * li + 1] = dI.imag
        return d

    Y = yfull(nn, br, ld, 0) + np.diag(np.r_[np.zeros(n), np.ones(nn - n) / Rv])
    Vb = np.linalg.solve(Y[n:, n:], -Y[n:, :n] @ np.ones(n)); V = np.r_[np.ones(n), Vb]
    xs = np.zeros(3 * n + 2 * nb + 2 * len(ind)); xs[2 * n:3 * n] = 1
    for bi, (a, b, r, x) in enumerate(br):
        c = (V[a] - V[b]) / (r + 1j * x); xs[3 * n + 2 * bi] = c.real; xs[3 * n + 2 * bi + 1] = c.imag
    for li, (k, r, x) in enumerate(ind):
        c = V[k] / (r + 1j * x); xs[3 * n + 2 * nb + 2 * li] = c.real; xs[3 * n + 2 * nb + 2 * li + 1] = c.imag
    Vc, I, IL, inj = volt(xs)
    S = Vc[:n] * np.conj(-inj[:n] + gres[:n] * Vc[:n])
    wset = mp * S.real; uset = 1 + nq * S.imag
    N = len(xs); A = np.zeros((N, N)); h = 1e-7
    for j in range(N):
        e = np.zeros(N); e[j] = h
        A[:, j] = (rhs(xs + e, wset, uset) - rhs(xs - e, wset, uset)) / (2 * h)
    return A


def absc(A, tol=1e-6):
    ev = np.linalg.eigvals(A); ev = ev[np.abs(ev) > tol]
    return ev.real.max()


def crit(f, lo=1e-4, hi=0.2):
    assert absc(f(lo)) < 0
    if absc(f(hi)) < 0:
        return np.inf
    for _ in range(60):
        m = np.sqrt(lo * hi)
        if absc(f(m)) < 0: lo = m
        else: hi = m
    return lo


def twobus_full(L, kp, kq):
    r = rc + rl * L; x = xc + xl * L
    mp = kp * w0; nq = kq; Lh = x / w0
    A = np.zeros((5, 5))
    A[0, 1] = 1; A[1, 1] = -1 / tau; A[1, 3] = -mp / tau; A[2, 2] = -1 / tau; A[2, 4] = nq / tau
    A[3, 2] = 1 / Lh; A[3, 3] = -r / Lh; A[3, 4] = x / Lh
    A[4, 0] = 1 / Lh; A[4, 4] = -r / Lh; A[4, 3] = -x / Lh
    return A


if __name__ == "__main__":
    np.set_printoptions(precision=15)
    print("zb", repr(zb), "kp0", repr(kp0), "kq0", repr(kq0))
    r1 = rc + rl; x1 = xc + xl
    print("twobus 1km r x", repr(r1), repr(x1), "B12", repr(-x1 / (r1**2 + x1**2)), "G12", repr(-r1 / (r1**2 + x1**2)))
    core = (r1**2 + x1**2) ** 2 / (2 * r1 * x1**2)
    print("kp_max", repr(core), "kq_max", repr(tau * w0 * core))
    net = cascade()
    Y0, Y1 = taylor(net)
    print("Y0 diag", [repr(v) for v in np.diag(Y0)])
    print("Y0[0,1]", repr(Y0[0, 1]), "Y0[1,3]", repr(Y0[1, 3]))
    print("Y1 diag", [repr(v) for v in np.diag(Y1)])
    print("Y1[0,1]", repr(Y1[0, 1]), "Y1[2,4]", repr(Y1[2, 4]))
    for name, A in [("full", full(net, kp0, kq0)), ("hifi3", reduced(net, kp0, kq0)), ("simple3", reduced(net, kp0, kq0, False))]:
        print(name, "abscissa at defaults", repr(absc(A)), "dim", A.shape[0])
    print("crit full", repr(crit(lambda k: full(net, k, kq0))))
    print("crit hifi3", repr(crit(lambda k: reduced(net, k, kq0))))
    print("crit simple3", repr(crit(lambda k: reduced(net, k, kq0, False))))
    A = twobus_full(1.0, kp0, kq0)
    x0 = np.array([1e-3, 0, 0, 0, 0])
    print("twobus expm(0.1)", [repr(v) for v in expm(0.1 * A) @ x0])
    print("twobus full eig", sorted(np.linalg.eigvals(A), key=lambda c: (c.real, c.imag)))
