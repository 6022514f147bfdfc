#!/usr/bin/env python3
# classical STMI machinery + criterion 1 variational on unitary evolution
import numpy as np
from oracle1 import (dag, vn, rel_ent, ptrace2, I2, sx, sy, sz, expiH,
                     rand_rho, rand_herm, rand_iso)
from oracle6 import Problem, optimize

rng = np.random.default_rng(808)

print("== criterion 1: variational on unitary evolution, full-rank qubit ==")
for trial in range(3):
    rhoA = rand_rho(2, 2, rng) if trial else np.eye(2, dtype=complex) / 2
    U = expiH(rand_herm(2, rng))
    target = np.log(np.trace(np.linalg.inv(rhoA)).real)
    prob = Problem(rhoA, 2, 1, [U], [2], [0], 4)
    J = optimize(prob, 2, 4, rng, restarts=4, max_iters=4000)
    print(f"  J = {J:.6f}  log tr rho^-1 = {target:.6f}  diff = {abs(J-target):.2e}")

print()
print("== classical machinery ==")


def kl(p, q):
    p = np.asarray(p, float); q = np.asarray(q, float)
    mask = p > 1e-300
    if np.any(q[mask] <= 1e-300):
        return np.inf
    return float((p[mask] * np.log(p[mask] / q[mask])).sum())


def rand_stoch(nout, nin, rg):
    M = rg.gamma(1.0, size=(nout, nin))
    return M / M.sum(axis=0, keepdims=True)


def rand_dist(n, rg):
    p = rg.gamma(1.0, size=n)
    return p / p.sum()


# Reduced-form classical stmi:
# P_in(i,j) on A x Abar; M((k,l)|(q,j)): [B,Bbar] x [A,Abar]
# T(k|q,i) P_A(i) = sum_{l j} M(kl|qj) P_in(i,j) ... coupling feeds q into M's A slot,
# i is the recorded input. J = sum_i P_A(i) max_q KL(T(.|q,i) | P_B0)
def classical_setup(nA, nAb, nB, nBb, rg):
    Pin = rand_dist(nA * nAb, rg).reshape(nA, nAb)
    M = rand_stoch(nB * nBb, nA * nAb, rg).reshape(nB, nBb, nA, nAb)
    return Pin, M


def classical_J_reduced(Pin, M):
    nA, nAb = Pin.shape
    nB = M.shape[0]
    PA = Pin.sum(axis=1)
    # P_B0(k) = sum_{l,i,j} M(kl|ij) Pin(i,j)
    PB0 = np.einsum('klij,ij->k', M, Pin)
    Tqi = np.einsum('klqj,ij->kqi', M, Pin)  # joint over (k,q-fed,i): T*P_A(i)
    J = 0.0
    choice = []
    for i in range(nA):
        if PA[i] <= 1e-300:
            choice.append(0)
            continue
        best = -np.inf
        bq = 0
        for q in range(nA):
            t = Tqi[:, q, i] / PA[i]
            v = kl(t, PB0)
            if v > best:
                best, bq = v, q
        choice.append(bq)
        J += PA[i] * best
    return J, choice, PB0


def classical_connected_full(Pin, M, K):
    # K[(q,w),i]: A -> A x W ; returns P_BW[k,(w)] , P_B0, P_W
    nA, nAb = Pin.shape
    nB, nBb = M.shape[0], M.shape[1]
    nW = K.shape[0] // nA
    PBW = np.zeros((nB, nW))
    for k in range(nB):
        for l in range(nBb):
            for q in range(nA):
                for w in range(nW):
                    for i in range(nA):
                        for j in range(nAb):
                            PBW[k, w] += M[k, l, q, j] * K[q * nW + w, i] * Pin[i, j]
    PB0 = np.einsum('klij,ij->k', M, Pin)
    PW = PBW.sum(axis=0)
    return PBW, PB0, PW


def mirror_ascent_reduced(Pin, M, rg, restarts=6, iters=3000, lr=0.5):
    nA, nAb = Pin.shape
    PA = Pin.sum(axis=1)
    PB0 = np.einsum('klij,ij->k', M, Pin)
    Tqi = np.einsum('klqj,ij->kqi', M, Pin)
    # gradient coefficients c(q,i) = P_A(i) * KL(T(.|q,i)|P_B0): linear objective
    C = np.zeros((nA, nA))
    for i in range(nA):
        for q in range(nA):
            if PA[i] > 1e-300:
                C[q, i] = PA[i] * kl(Tqi[:, q, i] / PA[i], PB0)
    best = -np.inf
    for r in range(restarts):
        K = rand_stoch(nA, nA, rg)
        for it in range(iters):
            K = K * np.exp(lr * C)
            K /= K.sum(axis=0, keepdims=True)
        best = max(best, float((K * C).sum()))
    return best


for t in range(4):
    nA, nAb, nB, nBb = rng.integers(2, 5), rng.integers(2, 4), rng.integers(2, 5), rng.integers(2, 4)
    Pin, M = classical_setup(nA, nAb, nB, nBb, rng)
    Jr, choice, PB0 = classical_J_reduced(Pin, M)
    Jm = mirror_ascent_reduced(Pin, M, rng)
    # exhaustive deterministic K through the FULL route with W = (q,i) records:
    nW = nA * nA
    bestD = -np.inf
    from itertools import product
    for assign in product(range(nA), repeat=nA):
        K = np.zeros((nA * nW, nA))
        for i in range(nA):
            q = assign[i]
            K[q * nW + (q * nA + i), i] = 1.0
        PBW, PB0_, PW = classical_connected_full(Pin, M, K)
        # D(P_BW | P_B0 x P_W)
        D = kl(PBW.reshape(-1), np.outer(PB0_, PW).reshape(-1))
        bestD = max(bestD, D)
    print(f"  nA={nA} nAb={nAb} nB={nB}: J_reduced={Jr:.8f} mirror={Jm:.8f} exhaustive={bestD:.8f}")

print()
print("== CMI vanishing + response bound + copy MI ==")
viol = 0
for t in range(300):
    nA, nAb, nB, nBb = rng.integers(2, 5), rng.integers(2, 4), rng.integers(2, 5), rng.integers(2, 4)
    Pin, M = classical_setup(nA, nAb, nB, nBb, rng)
    # general K: A -> A x Wg; extended with records: W = (i, p, q); check I(B:Wg | i,q)=0
    nWg = int(rng.integers(2, 4))
    K = rand_stoch(nA * nWg, nA, rng)  # K[(q,p)|i]
    PA = Pin.sum(axis=1)
    # joint P(k, i, p, q) = sum_{l,j} M(kl|qj) K(qp|i) Pin(i,j)
    Pj = np.einsum('klqj,ij->kqi', M, Pin)  # (k,q,i): M*Pin marginalized over l,j... times K next
    P4 = np.zeros((nB, nA, nWg, nA))  # k, i, p, q
    for k in range(nB):
        for i in range(nA):
            for p in range(nWg):
                for q in range(nA):
                    if PA[i] > 0:
                        P4[k, i, p, q] = Pj[k, q, i] / PA[i] * K[q * nWg + p, i] * PA[i]
    # I(B : p | i,q)
    cmi = 0.0
    for i in range(nA):
        for q in range(nA):
            blk = P4[:, i, :, q]
            s = blk.sum()
            if s < 1e-14:
                continue
            pk = blk.sum(axis=1); pp = blk.sum(axis=0)
            for k in range(nB):
                for p in range(nWg):
                    if blk[k, p] > 1e-300:
                        cmi += blk[k, p] * np.log(blk[k, p] * s / (pk[k] * pp[p]))
    if cmi > 1e-12:
        viol += 1
    # response bound: generator N_A columns sum 0; G_R = sum OB(j) M(jl|kp) N(k|i) Pin(i,p)
    NA = rand_stoch(nA, nA, rng) - np.eye(nA)
    OB = rng.normal(size=nB)
    GR = np.einsum('jlkp,ki,ip->', M, NA, Pin)  # wait: need OB weight
    GR = np.einsum('j,jlkp,ki,ip->', OB, M, NA, Pin)
    nrmN = np.abs(NA).sum(axis=0).max()
    nrmB = np.abs(OB).max()
    # coupling: K(j,w=0|i) = 0.5(delta + N/nrm), K(j,1|i)=0.5 delta
    K2 = np.zeros((nA * 2, nA))
    for i_ in range(nA):
        for j_ in range(nA):
            K2[j_ * 2 + 0, i_] = 0.5 * ((j_ == i_) + NA[j_, i_] / nrmN)
            K2[j_ * 2 + 1, i_] = 0.5 * (j_ == i_)
    PBW, PB0_, PW = classical_connected_full(Pin, M, K2)
    D = kl(PBW.reshape(-1), np.outer(PB0_, PW).reshape(-1))
    bound = (GR / (nrmB * nrmN))**2 / 8
    if D < bound - 1e-12:
        viol += 1000
    # copy channel MI >= 0.5 (corr_c/(|OB||OA|))^2 : B vs A-record
    OA = rng.normal(size=nA)
    PBA = np.einsum('klij,ij->ki', M, Pin)
    corr = np.einsum('k,ki,i->', OB, PBA, OA) - (PB0_ @ OB) * (PBA.sum(axis=0) @ OA)
    mi_ba = kl(PBA.reshape(-1), np.outer(PB0_, PBA.sum(axis=0)).reshape(-1))
    b2 = 0.5 * (corr / (nrmB * np.abs(OA).max()))**2
    if mi_ba < b2 - 1e-12:
        viol += 1000000
print(f"violations code: {viol} (0 = all good; +1 CMI, +1000 response, +1e6 copyMI)")
