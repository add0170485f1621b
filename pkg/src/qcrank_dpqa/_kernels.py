"""Dense tensor kernels shared by the circuit and instruction simulators.

All helpers act on complex ndarrays whose leading axes (or explicitly
addressed axes) are qubit axes of length 2. They return new arrays unless
documented as in-place; flip-based results may be views of the input, so
callers must not mutate the input while holding them.
"""

from __future__ import annotations

import numpy as np

SQRT_HALF = 1.0 / np.sqrt(2.0)

H_MATRIX = np.array([[SQRT_HALF, SQRT_HALF], [SQRT_HALF, -SQRT_HALF]], dtype=complex)
Z_MATRIX = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)

# Amplitude rules for single-qubit Paulis: out[a] = factor[a] * in[1-a] when
# flipped, factor[a] * in[a] otherwise.
_PAULI_RULES = {
    "x": (True, np.array([1.0, 1.0], dtype=complex)),
    "y": (True, np.array([-1.0j, 1.0j], dtype=complex)),
    "z": (False, np.array([1.0, -1.0], dtype=complex)),
}


def ry_matrix(angle: float) -> np.ndarray:
    c = np.cos(angle / 2.0)
    s = np.sin(angle / 2.0)
    return np.array([[c, -s], [s, c]], dtype=complex)


def apply_u1(arr: np.ndarray, u: np.ndarray, axis: int) -> np.ndarray:
    """Apply a 2x2 matrix on one qubit axis; trailing batch axes pass through."""
    out = np.tensordot(u, arr, axes=([1], [axis]))
    return np.moveaxis(out, 0, axis)


def apply_cx_inplace(arr: np.ndarray, control_axis: int, target_axis: int) -> np.ndarray:
    """CX as an index permutation: flip the target axis on the control=1 slice."""
    sl = [slice(None)] * arr.ndim
    sl[control_axis] = 1
    sub = arr[tuple(sl)]
    t = target_axis - 1 if target_axis > control_axis else target_axis
    arr[tuple(sl)] = np.flip(sub, axis=t)
    return arr


def apply_cz_inplace(arr: np.ndarray, axis_a: int, axis_b: int) -> np.ndarray:
    """CZ as an exact sign flip on the |11> slice of two qubit axes."""
    sl = [slice(None)] * arr.ndim
    sl[axis_a] = 1
    sl[axis_b] = 1
    arr[tuple(sl)] = -arr[tuple(sl)]
    return arr


def apply_pauli(arr: np.ndarray, pauli: str, axis: int, conjugate: bool = False) -> np.ndarray:
    """Apply X, Y or Z on one qubit axis (element-exact, no matmul rounding).

    With ``conjugate=True`` the complex-conjugated Pauli is applied, which is
    what the bra side of a density-matrix conjugation needs.
    """
    flip, factors = _PAULI_RULES[pauli]
    if conjugate:
        factors = factors.conj()
    out = np.flip(arr, axis=axis) if flip else arr
    if pauli == "x":
        return out
    shape = [1] * arr.ndim
    shape[axis] = 2
    return out * factors.reshape(shape)
