"""In-place gate application on a state tensor of shape ``(2,)*q + batch``.

Axis ``q`` of the tensor is qubit ``q``; qubit 0 is the most significant
bit of the flat amplitude index.  Any trailing axes are a batch (used to
push a whole identity matrix through a circuit).
"""

from __future__ import annotations

import numpy as np

from .circuit import GateKind, GateOp, base_matrix


def _sub_index(ndim: int, op: GateOp):
    idx = [slice(None)] * ndim
    for c in op.controls:
        idx[c.qubit] = c.polarity
    return tuple(idx)


def _target_axes(op: GateOp) -> list[int]:
    ctrl = sorted(c.qubit for c in op.controls)
    return [t - sum(1 for c in ctrl if c < t) for t in op.targets]


def _apply_matrix(sub: np.ndarray, mat: np.ndarray, axes: list[int]) -> np.ndarray:
    k = len(axes)
    tensor = mat.reshape((2,) * (2 * k))
    out = np.tensordot(tensor, sub, axes=(list(range(k, 2 * k)), axes))
    return np.moveaxis(out, list(range(k)), axes)


def _apply_diagonal(sub: np.ndarray, diag: np.ndarray, axes: list[int]) -> np.ndarray:
    k = len(axes)
    d = diag.reshape((2,) * k)
    order = np.argsort(axes)
    d = d.transpose(order)
    shape = [1] * sub.ndim
    for ax in axes:
        shape[ax] = 2
    return sub * d.reshape(shape)


def apply_op(psi: np.ndarray, op: GateOp) -> np.ndarray:
    """Apply ``op`` to ``psi``; may work in place and returns the result."""
    kind = op.kind
    if kind is GateKind.SWAP:
        a, b = op.targets
        return np.ascontiguousarray(np.swapaxes(psi, a, b))
    if kind is GateKind.REGISTER_SWAP:
        half = len(op.targets) // 2
        perm = list(range(psi.ndim))
        for a, b in zip(op.targets[:half], op.targets[half:]):
            perm[a], perm[b] = perm[b], perm[a]
        return np.ascontiguousarray(psi.transpose(perm))

    idx = _sub_index(psi.ndim, op)
    sub = psi[idx]
    axes = _target_axes(op)
    if kind in (GateKind.Z, GateKind.CZ, GateKind.MCZ):
        tidx = [slice(None)] * sub.ndim
        tidx[axes[0]] = 1
        sub[tuple(tidx)] *= -1
        return psi
    if kind in (GateKind.X, GateKind.CX, GateKind.CCX):
        new = np.flip(sub, axis=axes[0]).copy()
    elif kind is GateKind.DIAGONAL:
        new = _apply_diagonal(sub, np.diagonal(op.matrix), axes)
    else:
        new = _apply_matrix(sub, base_matrix(op), axes)
    psi[idx] = new
    return psi
