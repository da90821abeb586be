"""Independent degradability-parameter values for isotropic qubit states.

Solved with cvxpy/CLARABEL using a separately written trace-norm encoding;
the C++ tests pin the printed numbers.  Run: python3 dg_state_oracle.py
"""
import numpy as np
import cvxpy as cp


def isotropic(f):
    phi = np.zeros(4)
    phi[0] = phi[3] = 1 / np.sqrt(2)
    p = np.outer(phi, phi)
    return f * p + (1 - f) / 3 * (np.eye(4) - p)


def dg_state(rho):
    # purification |psi> on A B E, E = 4
    w, v = np.linalg.eigh(rho)
    sq = v @ np.diag(np.sqrt(np.clip(w, 0, None))) @ v.conj().T
    psi = (sq @ np.eye(4)).reshape(2, 2, 4)  # psi[a,b,e] = sqrt(rho)[ab, e]
    rho_ae = np.einsum("abe,cbf->aecf", psi, psi.conj()).reshape(8, 8)
    # J on B (in) x E' (out), 8x8; (I_A x M)(rho_AB)[ae, cf] = sum_{b,b'} rho[ab, cb'] J[b e, b' f]
    J = cp.Variable((8, 8), hermitian=True)
    r = rho.reshape(2, 2, 2, 2)  # a b c b'
    out = 0
    for b in range(2):
        for bp in range(2):
            blk_rho = r[:, b, :, bp]  # a x c
            blk_j = J[b * 4:(b + 1) * 4, bp * 4:(bp + 1) * 4]  # e x f
            out = out + cp.kron(blk_rho, blk_j)
    P = cp.Variable((8, 8), hermitian=True)
    Q = cp.Variable((8, 8), hermitian=True)
    cons = [J >> 0, P >> 0, Q >> 0, P - Q == rho_ae - out]
    # trace preserving: Tr_E' J = I_B
    for b in range(2):
        for bp in range(2):
            cons.append(cp.trace(J[b * 4:(b + 1) * 4, bp * 4:(bp + 1) * 4]) == (1.0 if b == bp else 0.0))
    prob = cp.Problem(cp.Minimize(0.5 * cp.real(cp.trace(P + Q))), cons)
    prob.solve(solver="CLARABEL", tol_gap_abs=1e-9, tol_gap_rel=1e-9, tol_feas=1e-9)
    return prob.value


if __name__ == "__main__":
    for f in (0.95, 0.85):
        print(f"isotropic f={f}: dg = {dg_state(isotropic(f)):.10f}")
