#!/usr/bin/env python3
# depol p->1 with perturbed starts; spacelike=MI; stationarity; MBL; Floquet; classical
import numpy as np
from oracle1 import (dag, vn, rel_ent, ptrace2, apply_ch, adj_ch, depolarizing,
                     dephasing, rand_iso, rand_rho, rand_herm, I2, sx, sy, sz,
                     expiH, logm_support, objective_ch, gradient_ch)
from oracle4 import complement_kraus, ansatz_obj

rng = np.random.default_rng(31337)


def fixed_point(Ks, rhoA, rho0, lam=0.5, iters=60000, tol=1e-13):
    Kt = complement_kraus(Ks)
    Nin = apply_ch(Ks, rhoA)
    Lin, _ = logm_support(Nin)
    AdjLin = adj_ch(Ks, Lin)
    rho = rho0.copy()
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
        if delta < tol:
            break
    o = ansatz_obj(Ks, rhoA, rho)
    return rho, o, it


def fp_multi(Ks, rhoA, rg, nstart=4, **kw):
    d = Ks[0].shape[1]
    starts = [np.eye(d, dtype=complex) / d]
    for _ in range(nstart - 1):
        starts.append(rand_rho(d, d, rg))
    best = (-np.inf, None, 0)
    for s in starts:
        rho, o, it = fixed_point(Ks, rhoA, s, **kw)
        if o > best[0]:
            best = (o, rho, it)
    return best[1], best[0], best[2]


print("== depol p=0.999 with perturbed starts ==")
p = 0.999
Ks = depolarizing(p)
rhoA = np.diag([1.0, 0.0]).astype(complex)
rw, J, its = fp_multi(Ks, rhoA, rng, nstart=4)
beta = np.arctanh(np.real(np.trace(rw @ sz)))
def coefA(b): return np.exp(-2*b)*(1+1/np.tanh(b))*(1+b+b/np.tanh(b))*np.tanh(b)
def coefB(b): return -b/np.sinh(b)/np.cosh(b)
bstar = -0.72 - 0.68 * (1 - p)
pred = coefA(bstar)*(1-p)**2 + coefB(bstar)*(1-p)**3
print(f"J = {J:.6e} beta = {beta:.5f} (target {bstar:.5f}) iters={its}")
print(f"prediction at target beta = {pred:.6e} relerr vs J = {abs(pred-J)/abs(pred):.3%}")

print()
print("== spacelike: optimizer J should equal I(A:B) ==")
# two qubits [A, Abar], identity evolution, B = Abar. Full-space machinery:
# sigma on [A, W, Abar] after coupling; trace out A_out -> rho_BW on [Abar, W]
def spacelike_J(rho2, V, dW):
    # rho2 on [A, Abar] dims [2,2]; V: A -> A(x)W
    # build (V (x) I_Abar) with factor order [A,Abar] -> [A,W,Abar]
    Vfull = np.zeros((2 * dW * 2, 4), dtype=complex)
    for a in range(2):
        for w in range(dW):
            for ab in range(2):
                for a2 in range(2):
                    Vfull[(a * dW + w) * 2 + ab, a2 * 2 + ab] = V[a * dW + w, a2]
    sig = Vfull @ rho2 @ dag(Vfull)     # [A, W, Abar]
    rBW = ptrace2(sig, [2, dW, 2], [2, 1])  # keep Abar, W -> order [W, Abar]? ptrace2 sorts keep
    # ptrace2 keeps sorted axes [1,2] -> [W, Abar]; want [Abar(B), W]: reorder
    rBW_t = rBW.reshape(dW, 2, dW, 2).transpose(1, 0, 3, 2).reshape(2 * dW, 2 * dW)
    rB0 = ptrace2(rho2, [2, 2], [1])
    rW = ptrace2(rBW_t, [2, dW], [1])
    return rel_ent(rBW_t, np.kron(rB0, rW)), sig


def grad_spacelike(rho2, V, dW):
    h = 1e-6
    G = np.zeros((2 * dW, 2 * dW), dtype=complex)
    base = spacelike_J(rho2, V, dW)[0]
    for a in range(2 * dW):
        for b in range(a, 2 * dW):
            E = np.zeros((2 * dW, 2 * dW), dtype=complex)
            if a == b:
                E[a, a] = 1
                g = (spacelike_J(rho2, expiH(h * E) @ V, dW)[0] - base) / h
                G[a, a] = g
            else:
                E[a, b] = E[b, a] = 0.5
                g = (spacelike_J(rho2, expiH(h * E) @ V, dW)[0] - base) / h
                E2 = np.zeros((2 * dW, 2 * dW), dtype=complex)
                E2[a, b] = 0.5j; E2[b, a] = -0.5j
                g2 = (spacelike_J(rho2, expiH(h * E2) @ V, dW)[0] - base) / h
                G[a, b] = g - 1j * g2
                G[b, a] = g + 1j * g2
    return G, base


rho2 = rand_rho(4, 4, rng)
mi = vn(ptrace2(rho2, [2, 2], [0])) + vn(ptrace2(rho2, [2, 2], [1])) - vn(rho2)
best = -np.inf
for restart in range(3):
    V = rand_iso(8, 2, rng)
    eta = 0.1
    for it in range(300):
        G, base = grad_spacelike(rho2, V, 4)
        if np.linalg.norm(G) < 1e-6:
            break
        s = eta
        while s > 1e-11:
            Vn = expiH(s * G) @ V
            Jn = spacelike_J(rho2, Vn, 4)[0]
            if Jn > base:
                V = Vn
                break
            s /= 2
        else:
            break
    best = max(best, spacelike_J(rho2, V, 4)[0])
print(f"optimized J = {best:.6f}  I(A:B) = {mi:.6f}  diff = {abs(best-mi):.2e}")

print()
print("== criterion 8: gradient at ansatz swap coupling (random channel) ==")
def swap_coupling_from_rhoW(rhoW):
    ev, U = np.linalg.eigh(rhoW)
    ev = np.clip(ev, 0, None)
    psi = np.zeros(4, dtype=complex)
    for i in range(2):
        for j in range(2):
            # |psi> = sum_i sqrt(l_i) |u_i>_W1 |i>_W2 ... use W2 comp basis
            psi[i * 2 + j] += np.sqrt(ev[j]) * U[i, j]
    # V: A -> A (x) W1 (x) W2 : V|phi> = SWAP_{A,W1}(|phi> (x) |psi>)
    V = np.zeros((8, 2), dtype=complex)
    for a in range(2):
        for w1 in range(2):
            for w2 in range(2):
                V[(w1 * 2 + a) * 2 + w2, a] = psi[w1 * 2 + w2]
    return V


def rand_channel(d, nk, rg):
    W = rand_iso(d * nk, d, rg)
    return [W[i * d:(i + 1) * d, :] for i in range(nk)]


for t in range(3):
    Ks = rand_channel(2, 3, rng)
    rhoA = rand_rho(2, 1, rng)  # pure
    rw, J, its = fp_multi(Ks, rhoA, rng, nstart=3, iters=50000, tol=1e-14)
    V = swap_coupling_from_rhoW(rw)
    M = gradient_ch(Ks, rhoA, V, 2, 4)
    Jvar = objective_ch(Ks, rhoA, V, 2, 4)[0]
    print(f"  ||M||_F = {np.linalg.norm(M):.2e}  J_ansatz={J:.8f} J_var_at_V={Jvar:.8f} iters={its}")
