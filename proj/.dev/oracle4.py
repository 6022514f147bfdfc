#!/usr/bin/env python3
# causal-influence denominator test + ansatz machinery validation
import numpy as np
from oracle1 import (dag, vn, rel_ent, ptrace2, apply_ch, adj_ch, depolarizing,
                     dephasing, rand_iso, rand_rho, rand_herm, I2, sx, sy, sz,
                     expiH, logm_support, objective_ch, gradient_ch)

rng = np.random.default_rng(999)
dA = 2
epr = np.zeros(4, dtype=complex)
epr[0] = epr[3] = 1 / np.sqrt(2)
Vsd = np.zeros((8, 2), dtype=complex)
for a in range(2):
    for w1 in range(2):
        for w2 in range(2):
            Vsd[(w1 * 2 + a) * 2 + w2, a] = epr[w1 * 2 + w2]
P = np.outer(epr, epr.conj())


def rand_channel(d, nk, rg):
    # random CPTP: random isometry d -> d*nk, Kraus = blocks
    W = rand_iso(d * nk, d, rg)
    return [W[i * d:(i + 1) * d, :] for i in range(nk)]


print("== causal influence: which identity & denominator ==")
viol2, viol4 = 0, 0
for t in range(200):
    rho = rand_rho(2, 2, rng)
    Ks = rand_channel(2, rng.integers(1, 4), rng)
    OB = rand_herm(2, rng)
    UA = expiH(rand_herm(2, rng))
    OWc = np.kron(UA, I2) @ P @ dag(np.kron(UA, I2))
    sig = Vsd @ rho @ dag(Vsd)
    Kext = [np.kron(K, np.eye(4)) for K in Ks]
    rBW = apply_ch(Kext, sig)
    rB0 = apply_ch(Ks, rho)
    rW = ptrace2(rBW, [2, 2, 2], [1, 2])
    conn = (np.trace(rBW @ np.kron(OB, OWc)) - np.trace(rB0 @ OB) * np.trace(rW @ OWc)).real
    d_fwd = (np.trace(apply_ch(Ks, UA @ rho @ dag(UA)) @ OB) - np.trace(rB0 @ OB)).real
    d_bwd = (np.trace(apply_ch(Ks, dag(UA) @ rho @ UA) @ OB) - np.trace(rB0 @ OB)).real
    if t < 3:
        print(f"  conn={conn:+.8f} d^-2*fwd={d_fwd/4:+.8f} d^-2*bwd={d_bwd/4:+.8f}")
    S = rel_ent(rBW, np.kron(rB0, rW))
    nB = np.linalg.norm(np.linalg.eigvalsh(OB), ord=np.inf)
    # bwd matches (check first three rows); bound with that delta:
    delta = d_bwd
    if S < delta**2 / (2 * dA**2 * nB**2) - 1e-12:
        viol2 += 1
    if S < delta**2 / (2 * dA**4 * nB**2) - 1e-12:
        viol4 += 1
print(f"violations with 2dA^2: {viol2}/200 ; with 2dA^4: {viol4}/200")

print()
print("== ansatz: complement channel, relent3 objective, fixed point ==")


def complement_kraus(Ks):
    # \tilde N(rho) with Gamma_IJ = Tr(K_I rho K_J^dag); Kraus indexed by b
    m = len(Ks)
    d = Ks[0].shape[1]
    dB = Ks[0].shape[0]
    Kt = []
    for b in range(dB):
        M = np.zeros((m, d), dtype=complex)
        for I in range(m):
            M[I, :] = Ks[I][b, :]
        Kt.append(M)
    return Kt


def ansatz_obj(Ks, rhoA, rhoW):
    Kt = complement_kraus(Ks)
    Gam = apply_ch(Kt, rhoW)
    NrhoW = apply_ch(Ks, rhoW)
    Nin = apply_ch(Ks, rhoA)
    Lin, Pin_ = logm_support(Nin)
    leak = np.real(np.trace(NrhoW @ (np.eye(len(Nin)) - Pin_)))
    if leak > 1e-9:
        return np.inf
    return -vn(Gam) + vn(rhoW) - np.real(np.trace(NrhoW @ Lin))


def fixed_point(Ks, rhoA, lam=0.5, iters=4000, tol=1e-12):
    d = Ks[0].shape[1]
    Kt = complement_kraus(Ks)
    Nin = apply_ch(Ks, rhoA)
    Lin, _ = logm_support(Nin)
    AdjLin = adj_ch(Ks, Lin)
    rho = np.eye(d, dtype=complex) / d
    best, bestrho = -np.inf, rho
    for it in range(iters):
        Gam = apply_ch(Kt, rho)
        LG, PG = logm_support(Gam)
        LGc = LG + (-50.0) * (np.eye(len(Gam)) - PG)
        T = adj_ch(Kt, LGc) - AdjLin
        Lr, _ = logm_support(rho)
        X = (1 - lam) * Lr + lam * T
        ev, U = np.linalg.eigh((X + dag(X)) / 2)
        ev = ev - ev.max()
        new = U @ np.diag(np.exp(ev)) @ dag(U)
        new /= np.trace(new).real
        delta = np.abs(np.linalg.eigvalsh(new - rho)).sum()
        rho = new
        o = ansatz_obj(Ks, rhoA, rho)
        if o > best:
            best, bestrho = o, rho
        if delta < tol:
            break
    return bestrho, best, it


# unitary closed form: J = log tr rho^-1, rho_W = rho^-1/Z
rhoA = np.diag([0.9, 0.1]).astype(complex)
U = expiH(rand_herm(2, rng))
rw, J, its = fixed_point([U], rhoA)
print(f"unitary: fixed-point J = {J:.12f}  log tr rho^-1 = {np.log(1/0.9+1/0.1):.12f} iters={its}")
print(f"rho_W = diag({np.diag(rw).real}) vs rho^-1/Z = {np.array([1/0.9,1/0.1])/(1/0.9+1/0.1)}")

# identity channel, rho_W = rho_in -> 2 S(rho_in)
o = ansatz_obj([I2], rhoA, rhoA)
print(f"identity channel, rhoW=rho_in: {o:.12f} vs 2S = {2*vn(rhoA):.12f}")

# depolarizing p=0.999: beta and A,B coefficient check
p = 0.999
Ks = depolarizing(p)
rhoA = np.diag([1.0, 0.0]).astype(complex)
rw, J, its = fixed_point(Ks, rhoA, lam=0.5, iters=20000, tol=1e-14)
tb = np.real(np.trace(rw @ sz))
beta = np.arctanh(tb)
print(f"depol p={p}: J = {J:.6e}, beta = {beta:.5f} (target -0.72 - 0.68*(1-p) = {-0.72-0.68*(1-p):.5f}), iters={its}")


def coefA(b):
    return np.exp(-2*b)*(1+1/np.tanh(b))*(1+b+b/np.tanh(b))*np.tanh(b)


def coefB(b):
    return -b/np.sinh(b)/np.cosh(b)


pred = coefA(beta)*(1-p)**2 + coefB(beta)*(1-p)**3
print(f"predicted A(1-p)^2+B(1-p)^3 = {pred:.6e}  relerr = {abs(pred-J)/J:.3%}")

print()
print("== dephasing slope (criterion 3) ==")
for p in [0.3, 0.6, 0.9]:
    vals = []
    for eps in [1e-2, 1e-3, 1e-4]:
        a1, a3 = eps, np.sqrt(1 - eps**2)
        rin = 0.5 * (I2 + a1 * sx + a3 * sz)
        Ks = dephasing(p)
        rw, J, its = fixed_point(Ks, rin, lam=0.5, iters=30000, tol=1e-13)
        vals.append(J)
    le = np.array([-np.log(1e-2), -np.log(1e-3), -np.log(1e-4)])
    slope = np.polyfit(le, vals, 1)[0]
    print(f"p={p}: J = {[f'{v:.4f}' for v in vals]} slope = {slope:.4f}")
