#!/usr/bin/env python3
# MBL plateau (criterion 10) and Floquet decay (criterion 11) pre-validation
import numpy as np
from oracle1 import (dag, vn, rel_ent, ptrace2, apply_ch, adj_ch, I2, sx, sy, sz,
                     expiH, logm_support, rand_rho)
from oracle4 import complement_kraus, ansatz_obj
from oracle6 import Problem, optimize

rng = np.random.default_rng(55)


def mbl_energies(L, w, xi, seed, three_body=True):
    rg = np.random.default_rng(seed)
    h = rg.uniform(-w, w, L)
    Jij = {}
    for i in range(L):
        for j in range(i + 1, L):
            Jij[(i, j)] = np.exp(-abs(i - j) / xi) * rg.uniform(-w, w)
    Jijk = {}
    if three_body:
        for i in range(L):
            for j in range(i + 1, L):
                for k in range(j + 1, L):
                    Jijk[(i, j, k)] = np.exp(-abs(i - k) / xi) * rg.uniform(-w, w)
    E = np.zeros(2**L)
    for s in range(2**L):
        z = np.array([1 - 2 * ((s >> (L - 1 - i)) & 1) for i in range(L)])
        e = (h * z).sum()
        for (i, j), v in Jij.items():
            e += v * z[i] * z[j]
        for (i, j, k), v in Jijk.items():
            e += v * z[i] * z[j] * z[k]
        E[s] = e
    return E


def mbl_f(L, E, site, t):
    # f(t) = 2^{-(L-1)} sum_env e^{-it(E(0,env)-E(1,env))}, site bit at position `site`
    tot = 0j
    for env in range(2**(L - 1)):
        # insert site bit into env bits at position `site` (bit index from left)
        hi = env >> (L - 1 - site)
        lo = env & ((1 << (L - 1 - site)) - 1)
        s0 = (hi << (L - site)) | (0 << (L - 1 - site)) | lo
        s1 = (hi << (L - site)) | (1 << (L - 1 - site)) | lo
        tot += np.exp(-1j * t * (E[s0] - E[s1]))
    return tot / 2**(L - 1)


def dephase_channel_from_f(f):
    af = abs(f)
    if af < 1e-300:
        return [np.diag([1, 0]).astype(complex), np.diag([0, 1]).astype(complex)]
    u = f / af
    q = (1 + af) / 2
    K1 = np.sqrt(q) * np.diag([1, np.conj(u)])
    K2 = np.sqrt(1 - q) * np.diag([1, -np.conj(u)])
    return [K1, K2]


def maximize_ansatz_bloch(Ks, rhoA):
    best = -np.inf
    for r in list(np.linspace(0.02, 0.98, 14)) + [0.999, 0.9999]:
        for th in np.linspace(0, np.pi, 11):
            for ph in np.linspace(0, 2 * np.pi, 8, endpoint=False):
                n = r * np.array([np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)])
                rw = 0.5 * (I2 + n[0] * sx + n[1] * sy + n[2] * sz)
                o = ansatz_obj(Ks, rhoA, rw)
                if o > best:
                    best = o
                    bn = n
    # local refine
    step = 0.08
    n = bn
    for round_ in range(40):
        improved = False
        for d_ in range(3):
            for sgn in (+1, -1):
                n2 = n.copy()
                n2[d_] += sgn * step
                if np.linalg.norm(n2) >= 1:
                    n2 = n2 / np.linalg.norm(n2) * 0.999999
                rw = 0.5 * (I2 + n2[0] * sx + n2[1] * sy + n2[2] * sz)
                o = ansatz_obj(Ks, rhoA, rw)
                if o > best:
                    best, n, improved = o, n2, True
        if not improved:
            step /= 2
            if step < 1e-6:
                break
    return best


print("== MBL plateau ==")
L, w, xi = 8, 10.0, 2.0
E = mbl_energies(L, w, xi, seed=12)
site = 4
for alpha in [0.05, 0.1]:
    chi = np.array([np.cos(alpha), np.sin(alpha)], dtype=complex)
    rhoA = np.outer(chi, chi.conj())
    vals = []
    for t in [2.0, 4.0, 8.0, 16.0, 32.0]:
        f = mbl_f(L, E, site, t)
        Ks = dephase_channel_from_f(f)
        J = maximize_ansatz_bloch(Ks, rhoA)
        vals.append(J)
    med = np.median(vals)
    print(f"alpha={alpha}: J(t) = {[f'{v:.3f}' for v in vals]}, median = {med:.3f}, "
          f"-2 log a = {-2*np.log(alpha):.3f}, diff = {med + 2*np.log(alpha):+.3f}")

print()
print("== Floquet decay ==")
g, h, tau = 0.9045, 0.8090, 0.8


def floquet_U(L):
    rot = expiH(-(tau / 2) * g * sx * 1)  # exp(i * (-(tau/2) g sx)) = e^{-i tau/2 g sx}
    Ux = np.eye(1, dtype=complex)
    for _ in range(L):
        Ux = np.kron(Ux, rot)
    Ez = np.zeros(2**L)
    for s in range(2**L):
        z = np.array([1 - 2 * ((s >> (L - 1 - i)) & 1) for i in range(L)])
        Ez[s] = sum(z[j] * z[j + 1] for j in range(L - 1)) + h * z.sum()
    Uz = np.diag(np.exp(-1j * tau * Ez))
    return Ux @ Uz @ Ux


def channel_from_unitary_mixed_env(U, L, site):
    # env maximally mixed; Kraus K_{(l,m)} = 2^{-(L-1)/2} <l|U|m>, compressed by Choi
    d = 2
    dE = 2**(L - 1)
    # permute U to [env, site] in/out ordering
    # index s -> (env, bit): env = bits excluding site
    idx = np.zeros(2**L, dtype=int)
    for s in range(2**L):
        b = (s >> (L - 1 - site)) & 1
        hi = s >> (L - site)
        lo = s & ((1 << (L - 1 - site)) - 1)
        env = (hi << (L - 1 - site)) | lo
        idx[env * 2 + b] = s
    Up = U[np.ix_(idx, idx)]
    # Choi = sum_{l,m} vec(K_lm) vec(K_lm)^dag / dE
    C = np.zeros((4, 4), dtype=complex)
    for l in range(dE):
        for m in range(dE):
            K = Up[l * 2:l * 2 + 2, m * 2:m * 2 + 2] / np.sqrt(dE)
            v = K.reshape(-1)
            C += np.outer(v, v.conj())
    ev, Vv = np.linalg.eigh((C + dag(C)) / 2)
    Ks = []
    for i in range(4):
        if ev[i] > 1e-12 * ev.max():
            Ks.append(np.sqrt(ev[i]) * Vv[:, i].reshape(2, 2))
    return Ks


L = 8
UF = floquet_U(L)
eps = 1e-5
site = 4
Un = np.eye(2**L, dtype=complex)
res = {0: [], np.pi / 8: [], np.pi / 4: []}
for n in range(1, 21):
    Un = UF @ Un
    if n in (1, 5, 10, 15, 20):
        Ks = channel_from_unitary_mixed_env(Un, L, site)
        for alpha in res:
            chi = np.array([np.cos(alpha), np.sin(alpha)], dtype=complex)
            rhoA = (1 - eps) * np.outer(chi, chi.conj()) + eps / 2 * I2
            J = maximize_ansatz_bloch(Ks, rhoA)
            res[alpha].append((n, J))
for alpha, series in res.items():
    print(f"alpha={alpha:.4f}: " + "  ".join(f"n={n}: J={J:.4f}" for n, J in series))
