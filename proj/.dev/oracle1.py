#!/usr/bin/env python3
# Dev-time oracle validation (not part of the deliverable).
# Validates sign conventions and frozen values before C++ implementation.
import numpy as np

np.set_printoptions(precision=6, suppress=True)
rng = np.random.default_rng(12345)

I2 = np.eye(2, dtype=complex)
sx = np.array([[0, 1], [1, 0]], dtype=complex)
sy = np.array([[0, -1j], [1j, 0]], dtype=complex)
sz = np.array([[1, 0], [0, -1]], dtype=complex)


def dag(M):
    return M.conj().T


def nkron(*Ms):
    out = np.array([[1.0 + 0j]])
    for M in Ms:
        out = np.kron(out, M)
    return out


def vn(rho):
    ev = np.linalg.eigvalsh(rho)
    ev = ev[ev > 1e-14]
    return float(-(ev * np.log(ev)).sum())


def logm_support(h, cut=1e-12):
    ev, U = np.linalg.eigh(h)
    lmax = max(ev.max(), 0.0)
    keep = ev > cut * max(lmax, 1e-300)
    L = np.zeros_like(h)
    P = np.zeros_like(h)
    for i in range(len(ev)):
        if keep[i]:
            v = U[:, i:i+1]
            L += np.log(ev[i]) * (v @ dag(v))
            P += (v @ dag(v)).astype(complex)
    return L, P


def rel_ent(rho, sig):
    Ls, Ps = logm_support(sig)
    leak = float(np.real(np.trace(rho @ (np.eye(len(rho)) - Ps))))
    if leak > 1e-9:
        return np.inf
    ev = np.linalg.eigvalsh(rho)
    ev = ev[ev > 1e-14]
    return float((ev * np.log(ev)).sum() - np.real(np.trace(rho @ Ls)))


def ptrace(rho, dims, keep):
    n = len(dims)
    keep = list(keep)
    rho_t = rho.reshape(dims + dims)
    traced = [i for i in range(n) if i not in keep]
    for t in sorted(traced, reverse=True):
        rho_t = np.trace(rho_t, axis1=t, axis2=t + len(dims) - (len(traced) - 1 - traced[::-1].index(t)) * 0)
        # messy; do simpler below
        raise RuntimeError
    return rho_t


def ptrace2(rho, dims, keep):
    # robust reshape-based partial trace
    n = len(dims)
    keep = sorted(keep)
    dk = int(np.prod([dims[i] for i in keep])) if keep else 1
    T = rho.reshape(dims + dims)
    # move kept axes to front for rows and cols
    perm = keep + [i for i in range(n) if i not in keep]
    T = np.transpose(T, perm + [p + n for p in perm])
    dr = int(np.prod(dims) // dk)
    T = T.reshape(dk, dr, dk, dr)
    return np.einsum('arbr->ab', T)


def apply_ch(Ks, rho):
    out = sum(K @ rho @ dag(K) for K in Ks)
    return (out + dag(out)) / 2


def adj_ch(Ks, X):
    out = sum(dag(K) @ X @ K for K in Ks)
    return (out + dag(out)) / 2


def depolarizing(p):
    a0 = np.sqrt(1 - 3 * p / 4)
    ai = np.sqrt(p / 4)
    return [a0 * I2, ai * sx, ai * sy, ai * sz]


def dephasing(p):
    return [np.sqrt(1 - p / 2) * I2, np.sqrt(p / 2) * sz]


def complement(Ks, rho):
    m = len(Ks)
    G = np.zeros((m, m), dtype=complex)
    for i in range(m):
        for j in range(m):
            G[i, j] = np.trace(Ks[i] @ rho @ dag(Ks[j]))
    return G


def rand_iso(dout, din, rg):
    G = rg.normal(size=(dout, din)) + 1j * rg.normal(size=(dout, din))
    Q, R = np.linalg.qr(G)
    return Q[:, :din]


def rand_rho(d, rank, rg):
    G = rg.normal(size=(d, rank)) + 1j * rg.normal(size=(d, rank))
    r = G @ dag(G)
    return r / np.trace(r).real


def rand_herm(d, rg):
    G = rg.normal(size=(d, d)) + 1j * rg.normal(size=(d, d))
    return (G + dag(G)) / 2


# ---------------------------------------------------------------
# Variational objective in the channel formulation (factorized input)
# sigma = V rho_A V^dag on A(x)W ; rho_BW = (N(x)Id)(sigma)
def objective_ch(Ks, rhoA, V, dA, dW):
    sig = V @ rhoA @ dag(V)
    Kext = [np.kron(K, np.eye(dW)) for K in Ks]
    rBW = apply_ch(Kext, sig)
    rB0 = apply_ch(Ks, rhoA)
    rW = ptrace2(rBW, [2, dW], [1])  # careful: B dim assumed 2 here
    dis = np.kron(rB0, rW)
    return rel_ent(rBW, dis), rBW, rB0, rW, sig


def gradient_ch(Ks, rhoA, V, dA, dW):
    sig = V @ rhoA @ dag(V)
    Kext = [np.kron(K, np.eye(dW)) for K in Ks]
    rBW = apply_ch(Kext, sig)
    rB0 = apply_ch(Ks, rhoA)
    dB = rB0.shape[0]
    rW = ptrace2(rBW, [dB, dW], [1])
    LBW, _ = logm_support(rBW)
    LB0, _ = logm_support(rB0)
    LW, _ = logm_support(rW)
    L1 = adj_ch(Kext, LBW)
    L2 = np.kron(adj_ch(Ks, LB0), np.eye(dW))
    L3 = np.kron(np.eye(dA), LW)
    G = L1 - L2 - L3
    M = 1j * (sig @ G - G @ sig)
    return (M + dag(M)) / 2


print("== 1. gradient sign / FD check ==")
dA, dW = 2, 4
Ks = depolarizing(0.35)
rhoA = rand_rho(2, 2, rng)
V = rand_iso(dA * dW, dA, rng)
M = gradient_ch(Ks, rhoA, V, dA, dW)
T = rand_herm(dA * dW, rng)
eps = 1e-5


def expiH(H):
    ev, U = np.linalg.eigh(H)
    return U @ np.diag(np.exp(1j * ev)) @ dag(U)


Vp = expiH(eps * T) @ V
Vm = expiH(-eps * T) @ V
Sp = objective_ch(Ks, rhoA, Vp, dA, dW)[0]
Sm = objective_ch(Ks, rhoA, Vm, dA, dW)[0]
fd = (Sp - Sm) / (2 * eps)
an = np.real(np.trace(T @ M))
print(f"FD={fd:.10f} analytic={an:.10f} relerr={abs(fd-an)/abs(fd):.2e}")

print("== ascent direction: step along +M should increase S ==")
S0 = objective_ch(Ks, rhoA, V, dA, dW)[0]
S1 = objective_ch(Ks, rhoA, expiH(0.01 * M) @ V, dA, dW)[0]
print(f"S0={S0:.8f} S(+0.01M)={S1:.8f} increase={S1-S0:.3e}")
