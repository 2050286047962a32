"""Uhlmann fidelity, directly and through the projector-channel overlap formula."""
from __future__ import annotations

import math
from itertools import product
from typing import Sequence

import numpy as np

from .core import OracleError

MAX_DIM = 64


def _check_state(rho, tol=1e-10):
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1] or rho.shape[0] > MAX_DIM:
        raise OracleError("density matrices must be square with dimension <= 64")
    if not np.allclose(rho, rho.conj().T, atol=tol):
        raise OracleError("density matrix is not Hermitian")
    ev = np.linalg.eigvalsh(rho)
    if ev.min() < -tol or abs(np.trace(rho).real - 1) > tol:
        raise OracleError("density matrix must be PSD with unit trace")
    return rho


def _clip_roundoff(w):
    # eigenvalues at round-off level would contribute sqrt(eps) after the square root
    cut = w.size * np.finfo(float).eps * max(float(np.max(np.abs(w))), 1.0)
    return np.where(w > cut, w, 0.0)


def _psd_sqrt(rho):
    w, V = np.linalg.eigh(rho)
    return (V * np.sqrt(_clip_roundoff(w))) @ V.conj().T


def fidelity_direct(rho, sigma) -> float:
    """(tr sqrt(sqrt(rho) sigma sqrt(rho)))^2."""
    rho, sigma = _check_state(rho), _check_state(sigma)
    s = _psd_sqrt(rho)
    ev = np.linalg.eigvalsh(s @ sigma @ s)
    return float(math.fsum(np.sqrt(_clip_roundoff(ev)).tolist()) ** 2)


def _check_ops(ops, dim, tol=1e-10):
    ops = [np.asarray(o, dtype=complex) for o in ops]
    eye = np.eye(dim)
    for o in ops:
        if o.shape != (dim, dim) or not np.allclose(o, o.conj().T, atol=tol):
            raise OracleError("channel operators must be Hermitian and match the state dimension")
        if not np.allclose(o @ o, eye, atol=tol):
            raise OracleError("channel operators must square to the identity")
    for a in ops:
        for b in ops:
            if not np.allclose(a @ b, b @ a, atol=tol):
                raise OracleError("channel operators must commute")
    return ops


def dephase(rho, ops, p: float):
    """Compose rho -> (1 - p) rho + p O rho O over all operators."""
    for o in ops:
        rho = (1 - p) * rho + p * (o @ rho @ o)
    return rho


def data_processing_check(psi, phi, ops, ps=(0.05, 0.15, 0.3, 0.45), tol=1e-9) -> bool:
    """F(E_p rho, E_p sigma) <= F(E_1/2 rho, E_1/2 sigma) at every sampled p."""
    psi, phi = np.asarray(psi, dtype=complex), np.asarray(phi, dtype=complex)
    psi, phi = psi / np.linalg.norm(psi), phi / np.linalg.norm(phi)
    rho, sig = np.outer(psi, psi.conj()), np.outer(phi, phi.conj())
    top = fidelity_direct(dephase(rho, ops, 0.5), dephase(sig, ops, 0.5))
    return all(fidelity_direct(dephase(rho, ops, p), dephase(sig, ops, p)) <= top + tol for p in ps)


def fidelity_projector_formula(psi, phi, ops: Sequence, tol: float = 1e-8,
                               check_dpi: bool = True) -> float:
    """Sum over projector branches s of |<psi| P_s |phi>|.

    P_s = prod_j (1 + s_j O_j) / 2.  The result is checked against the square
    root of the directly computed fidelity of the fully dephased states and,
    optionally, the data-processing inequality on a grid of p.
    """
    psi = np.asarray(psi, dtype=complex)
    phi = np.asarray(phi, dtype=complex)
    psi, phi = psi / np.linalg.norm(psi), phi / np.linalg.norm(phi)
    dim = psi.size
    ops = _check_ops(ops, dim)
    eye = np.eye(dim)
    terms = []
    for s in product((1, -1), repeat=len(ops)):
        P = eye
        for sj, o in zip(s, ops):
            P = P @ (eye + sj * o) / 2
        terms.append(abs(np.vdot(psi, P @ phi)))
    fp = math.fsum(terms)
    rho, sig = np.outer(psi, psi.conj()), np.outer(phi, phi.conj())
    direct = fidelity_direct(dephase(rho, ops, 0.5), dephase(sig, ops, 0.5))
    if abs(fp - math.sqrt(max(direct, 0.0))) > tol:
        raise OracleError(f"projector formula {fp} disagrees with direct sqrt(F) {math.sqrt(direct)}")
    if check_dpi and not data_processing_check(psi, phi, ops):
        raise OracleError("data-processing inequality violated")
    return fp
