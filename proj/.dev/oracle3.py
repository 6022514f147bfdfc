#!/usr/bin/env python3
# causal-influence identity + appendix C values + closed forms
import numpy as np
from oracle1 import (dag, vn, rel_ent, ptrace2, apply_ch, adj_ch, depolarizing,
                     dephasing, rand_iso, rand_rho, rand_herm, I2, sx, sy, sz,
                     expiH, logm_support, objective_ch, gradient_ch)

rng = np.random.default_rng(4242)
dA = 2
epr = np.zeros(dA * dA, dtype=complex)
for i in range(dA):
    epr[i * dA + i] = 1 / np.sqrt(dA)
Vsd = np.zeros((dA**3, dA), dtype=complex)
for a in range(dA):
    for w1 in range(dA):
        for w2 in range(dA):
            Vsd[(w1 * dA + a) * dA + w2, a] = epr[w1 * dA + w2]

print("== causal influence: unsubtracted identity ==")
rho = rand_rho(2, 2, rng)
Ks = depolarizing(0.3)
OB = rand_herm(2, rng)
UA = expiH(rand_herm(2, rng))
P = np.outer(epr, epr.conj())
OWc = np.kron(UA, np.eye(dA)) @ P @ dag(np.kron(UA, np.eye(dA)))
sig = Vsd @ rho @ dag(Vsd)
Kext = [np.kron(K, np.eye(4)) for K in Ks]
rBW = apply_ch(Kext, sig)
rB0 = apply_ch(Ks, rho)
rW = ptrace2(rBW, [2, 2, 2], [1, 2])
lhs_raw = np.trace(rBW @ np.kron(OB, OWc))
rhs_rot = np.trace(apply_ch(Ks, UA @ rho @ dag(UA)) @ OB) / dA**2
print(f"Tr(rBW OB OWc) = {lhs_raw.real:.10f};  dA^-2 <OB>_rotated = {rhs_rot.real:.10f}")
print(f"Tr(rW OWc) = {np.trace(rW @ OWc).real:.10f};  dA^-2 = {1/dA**2:.10f}")
# connected piece = d^-2 (<OB>_rot - <OB>_0) ?
conn = lhs_raw - np.trace(rB0 @ OB) * np.trace(rW @ OWc)
print(f"connected = {conn.real:.10f} vs d^-2*diff = {(rhs_rot - np.trace(rB0@OB)/dA**2).real:.10f}")

print()
print("== appendix C: rho = (1-eps)|Gamma><Gamma| + eps/4 Id, trivial evolution ==")
# two qubits Abar (x) A ; Gamma = EPR between Abar and A
gam = np.zeros(4, dtype=complex); gam[0] = gam[3] = 1/np.sqrt(2)
Pg = np.outer(gam, gam.conj())
for eps in [1e-2, 1e-3, 1e-4]:
    rin = (1 - eps) * Pg + eps / 4 * np.eye(4)
    # V = X on A (no ancilla): rho_B = (Id (x) X) rin (Id (x) X)
    XA = np.kron(I2, sx)
    rB = XA @ rin @ dag(XA)
    SX = rel_ent(rB, rin)
    print(f"eps={eps:.0e}: S(XA) = {SX:.6f}   -log(eps) = {-np.log(eps):.6f}  diff = {SX + np.log(eps):+.6f}")

# swap ansatz: V = SWAP(A,W1)(psi_W1W2), optimize over psi (4-dim pure)
def swap_state(rin, psi):
    # full space Abar, A, W1, W2 ; state rin (x) psi psi^dag, then swap A<->W1
    full = np.kron(rin, np.outer(psi, psi.conj()))
    # dims [2,2,2,2] order [Abar, A, W1, W2]; swap factors 1 and 2
    T = full.reshape([2]*8)
    T = np.transpose(T, [0, 2, 1, 3, 4, 6, 5, 7])
    return T.reshape(16, 16)

def swap_J(rin, psi):
    sig = swap_state(rin, psi)
    rB = ptrace2(sig, [2]*4, [0, 1])      # B = whole system Abar,A
    rW = ptrace2(sig, [2]*4, [2, 3])
    return rel_ent(sig, np.kron(rin, rW)), sig, rW

for eps in [1e-2, 1e-3, 1e-4]:
    rin = (1 - eps) * Pg + eps / 4 * np.eye(4)
    # ascend over psi via restricted gradient: T_W herm on W1W2, psi <- e^{i eta T} psi
    rg = np.random.default_rng(7)
    best = -np.inf
    for restart in range(4):
        psi = rg.normal(size=4) + 1j * rg.normal(size=4)
        psi /= np.linalg.norm(psi)
        eta = 0.1
        J0 = swap_J(rin, psi)[0]
        for it in range(800):
            # numerical gradient on psi-manifold (cheap dev-time hack):
            # dJ/dT for basis of hermitian ops on W (16 real dims)
            grad = np.zeros((4, 4), dtype=complex)
            base = swap_J(rin, psi)[0]
            h = 1e-6
            for a in range(4):
                for b in range(a, 4):
                    E = np.zeros((4, 4), dtype=complex)
                    if a == b:
                        E[a, a] = 1
                    else:
                        E[a, b] = E[b, a] = 0.5
                    Jp = swap_J(rin, expiH(h * E) @ psi)[0]
                    g = (Jp - base) / h
                    grad[a, b] += g * (1 if a == b else 1)
                    if a != b:
                        grad[b, a] += g
                    if a != b:
                        E2 = np.zeros((4, 4), dtype=complex)
                        E2[a, b] = 0.5j; E2[b, a] = -0.5j
                        Jp2 = swap_J(rin, expiH(h * E2) @ psi)[0]
                        g2 = (Jp2 - base) / h
                        grad[a, b] += -1j * g2
                        grad[b, a] += 1j * g2
            gn = np.linalg.norm(grad)
            if gn < 1e-7:
                break
            stepped = False
            s = eta
            while s > 1e-10:
                psin = expiH(s * grad) @ psi
                Jn = swap_J(rin, psin)[0]
                if Jn > base:
                    psi = psin
                    stepped = True
                    break
                s /= 2
            if not stepped:
                break
        Jf = swap_J(rin, psi)[0]
        best = max(best, Jf)
    print(f"eps={eps:.0e}: J_swap = {best:.6f}  -0.75 log eps = {-0.75*np.log(eps):.6f}  diff = {best + 0.75*np.log(eps):+.6f}")
