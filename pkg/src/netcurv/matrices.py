"""Dense symmetric matrices with a spectral type tag."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

POSITIVE = "positive"
NEGATIVE = "negative"
INDEFINITE = "indefinite"
UNKNOWN = "unknown"


def psd_check(M, tol: float = 1e-9) -> tuple[bool, float]:
    """Return ``(min_eig >= -tol, min_eig)`` for a symmetric matrix."""
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("matrix must be square")
    if M.size == 0:
        return True, 0.0
    if np.max(np.abs(M - M.T)) > 1e-12:
        raise ValueError("matrix is not symmetric")
    lam = float(np.linalg.eigvalsh(M)[0])
    return lam >= -tol, lam


def centering_matrix(n: int) -> np.ndarray:
    return np.eye(n) - np.ones((n, n)) / n


def negative_type_check(M, tol: float = 1e-9) -> tuple[bool, float]:
    """Conditionally negative semidefinite test.

    ``M`` is of negative type on the finite set iff ``-H M H`` is PSD, with
    ``H`` the centering projector onto vectors summing to zero.
    """
    M = np.asarray(M, dtype=float)
    H = centering_matrix(M.shape[0])
    S = -H @ M @ H
    return psd_check((S + S.T) / 2, tol)


@dataclass(frozen=True)
class KernelMatrix:
    """Symmetric matrix over an ordered index of node or edge ids.

    ``kind`` is one of ``positive``/``negative``/``indefinite``/``unknown``;
    ``positive`` is only ever assigned after :func:`psd_check` passes.
    """

    index: tuple
    values: np.ndarray
    kind: str = UNKNOWN
    min_eigenvalue: float | None = None
    diagonal: str = ""

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (len(self.index), len(self.index)):
            raise ValueError("kernel shape does not match its index")
        if np.any(v != v.T):
            raise ValueError("kernel matrix must be exactly symmetric")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "index", tuple(self.index))

    @classmethod
    def tagged(cls, index: Sequence, values, tol: float = 1e-9, diagonal: str = "") -> "KernelMatrix":
        """Symmetrize ``values`` and tag it from its measured spectrum."""
        v = np.asarray(values, dtype=float)
        v = (v + v.T) / 2
        if v.size == 0:
            return cls(tuple(index), v, POSITIVE, 0.0, diagonal)
        lam = np.linalg.eigvalsh(v)
        lo, hi = float(lam[0]), float(lam[-1])
        if lo >= -tol:
            kind = POSITIVE
        elif hi <= tol:
            kind = NEGATIVE
        else:
            kind = INDEFINITE
        return cls(tuple(index), v, kind, lo, diagonal)

    def __len__(self) -> int:
        return len(self.index)

    def position(self, ids) -> np.ndarray:
        lookup = {k: i for i, k in enumerate(self.index)}
        try:
            return np.array([lookup[x] for x in ids], dtype=np.int64)
        except KeyError as exc:
            raise KeyError(f"id {exc.args[0]!r} not in kernel index") from None
