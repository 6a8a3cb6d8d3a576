"""Real <-> complex reshaping conventions shared by the whole package.

A complex matrix X with columns grouped into square blocks is carried
around as one long real vector: for each block, the column-major complex
entries are stacked as [real parts; imaginary parts].  Complex linear
maps become real matrices through split_matrix, and the two views commute
by construction.
"""

import numpy as np


def split_matrix(A):
    """Real expansion [[Re A, -Im A], [Im A, Re A]] of a complex matrix."""
    A = np.asarray(A, dtype=complex)
    return np.block([[A.real, -A.imag], [A.imag, A.real]])


def mat_to_real_vec(X, block_cols=None):
    """Flatten a complex matrix to the block-stacked real vector.

    block_cols columns at a time; each block contributes its column-major
    entries as [Re; Im].  Default is a single block of all columns.
    """
    X = np.asarray(X, dtype=complex)
    rows, cols = X.shape
    bc = cols if block_cols is None else int(block_cols)
    if cols % bc != 0:
        raise ValueError("column count must be a multiple of block_cols")
    segs = []
    for j in range(0, cols, bc):
        v = X[:, j:j + bc].ravel(order="F")
        segs.append(np.concatenate([v.real, v.imag]))
    return np.concatenate(segs)


def real_vec_to_mat(v, rows, block_cols):
    """Inverse of mat_to_real_vec for a given row count and block width."""
    v = np.asarray(v, dtype=float)
    per = 2 * rows * block_cols
    if v.size % per != 0:
        raise ValueError("vector length incompatible with block shape")
    blocks = []
    for b in range(v.size // per):
        s = v[b * per:(b + 1) * per]
        h = per // 2
        blocks.append((s[:h] + 1j * s[h:]).reshape(rows, block_cols, order="F"))
    return np.concatenate(blocks, axis=1)
