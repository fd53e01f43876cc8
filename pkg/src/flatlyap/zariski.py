"""Numerical rank certificate for the monodromy group's identity component.

Starting from a hyperbolic monodromy element C, the logarithm X of C^3 is
an infinitesimal generator inside the Lie algebra of the Zariski closure;
conjugating X by powers of the elliptic generators produces candidate
directions.  Fifteen independent ones fill su(3,1).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cyclotomic import CycloMatrix, complex_embed


class DeadBandError(RuntimeError):
    """Numerical rank fell between the accept and reject thresholds."""


def _eig_moduli(c):
    return sorted(abs(x) for x in np.linalg.eigvals(np.asarray(c, dtype=complex)))


def hyperbolicity_check(c, eps=1e-9, order_bound=720):
    """Eigenvalue moduli and a hyperbolic/elliptic classification."""
    c = complex_embed(c) if isinstance(c, CycloMatrix) else np.asarray(c, complex)
    moduli = _eig_moduli(c)
    if moduli[-1] > 1 + eps:
        cls = "hyperbolic"
    elif all(abs(m - 1) <= 1e-8 for m in moduli):
        cls = "unit-modulus"
        power = np.eye(c.shape[0], dtype=complex)
        for m in range(1, order_bound + 1):
            power = power @ c
            scaled = power / power[0, 0] if abs(power[0, 0]) > 1e-12 else power
            if np.allclose(scaled, np.eye(c.shape[0]), atol=1e-8):
                cls = "elliptic"
                break
    else:
        cls = "indeterminate"
    return {"moduli": [float(m) for m in moduli], "classification": cls}


@dataclass
class LieVector:
    matrix: object          # 4x4 complex
    exp_residual: float
    su_residual: float
    trace_residual: float

    def real_coordinates(self):
        m = self.matrix
        return np.concatenate([m.real.ravel(), m.imag.ravel()])


def su_residual(x, form):
    """Relative size of X^H H + H X (anti-self-adjointness w.r.t. H)."""
    h = np.asarray(form, dtype=complex)
    return float(np.linalg.norm(x.conj().T @ h + h @ x) / np.linalg.norm(h))


def log_of_cube(c, form, tol_gap=1e-6):
    """Logarithm of C^3 with branches chosen so the trace vanishes.

    C^3 must be diagonalizable with distinct eigenvalues; argument branches
    of the unit-modulus eigenvalues are shifted by multiples of 2*pi until
    the arguments sum to zero, which forces trace X = 0 while keeping
    exp(X) = C^3 and the su-membership residual small.
    """
    cm = complex_embed(c) if isinstance(c, CycloMatrix) else np.asarray(c, complex)
    c3 = np.linalg.matrix_power(cm, 3)
    vals, vecs = np.linalg.eig(c3)
    n = len(vals)
    gaps = [abs(vals[i] - vals[j]) for i in range(n) for j in range(i + 1, n)]
    if min(gaps) < tol_gap:
        raise ValueError("repeated eigenvalues; logarithm branch is ambiguous")
    logs = np.log(np.abs(vals))
    args = np.angle(vals)
    total = args.sum()
    k = round(total / (2 * np.pi))
    if k:
        # shift the branch of a unit-modulus (self-paired) eigenvalue
        unit = [i for i in range(n) if abs(logs[i]) < 1e-9]
        if not unit:
            raise ValueError("cannot normalize branches: no unit eigenvalue")
        j = max(unit, key=lambda i: abs(args[i]))
        args[j] -= 2 * np.pi * k
    diag = np.diag(logs + 1j * args)
    pinv = np.linalg.inv(vecs)
    x = vecs @ diag @ pinv

    from scipy.linalg import expm

    exp_res = float(np.linalg.norm(expm(x) - c3) / max(np.linalg.norm(c3), 1.0))
    su_res = su_residual(x, form)
    tr_res = float(abs(np.trace(x)))
    return LieVector(x, exp_res, su_res, tr_res)


def density_certificate(a, b, x: LieVector, form, accept=1e-6, reject=1e-10,
                        a_powers=range(0, 9), b_powers=(0, 2, 3, 4, 5, 6)):
    """Rank of the conjugated-generator family inside su(3,1).

    Builds A^n X A^-n for n in ``a_powers`` and B (A^n X A^-n) B^-1 for n in
    ``b_powers`` as vectors in the 32-dimensional real coordinate space and
    certifies full rank 15 via singular values.  The verdict is accepted
    when sigma_min/sigma_max exceeds ``accept``, rejected below ``reject``,
    and raises in the dead band between them.
    """
    am = complex_embed(a) if isinstance(a, CycloMatrix) else np.asarray(a, complex)
    bm = complex_embed(b) if isinstance(b, CycloMatrix) else np.asarray(b, complex)
    xm = np.asarray(x.matrix if isinstance(x, LieVector) else x, dtype=complex)
    h = np.asarray(form, dtype=complex)
    ainv = np.linalg.inv(am)
    binv = np.linalg.inv(bm)
    vectors = []
    residuals = []
    for n in a_powers:
        v = np.linalg.matrix_power(am, n) @ xm @ np.linalg.matrix_power(ainv, n)
        vectors.append(v)
        residuals.append(su_residual(v, h))
    for n in b_powers:
        v = np.linalg.matrix_power(am, n) @ xm @ np.linalg.matrix_power(ainv, n)
        v = bm @ v @ binv
        vectors.append(v)
        residuals.append(su_residual(v, h))
    rows = np.array([np.concatenate([v.real.ravel(), v.imag.ravel()])
                     for v in vectors])
    sing = np.linalg.svd(rows, compute_uv=False)
    sing = sing / sing[0]
    full = len(vectors)
    ratio = float(sing[-1])
    if ratio > accept:
        rank = full
        verdict = "dense"
    elif ratio < reject:
        rank = int(np.sum(sing > reject))
        verdict = "degenerate"
    else:
        raise DeadBandError(
            f"singular value ratio {ratio:.3e} inside the dead band "
            f"({reject:.0e}, {accept:.0e})")
    return {
        "rank": rank,
        "singular_values": [float(s) for s in sing],
        "sigma_ratio": ratio,
        "su_residuals": residuals,
        "verdict": verdict,
        "vectors": len(vectors),
    }
