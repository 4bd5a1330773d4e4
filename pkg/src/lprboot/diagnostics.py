"""Finite-sample checks on C = X'X/n: block split, irrepresentable margin, cliff split."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .errors import SingularC11


@dataclass(frozen=True, eq=False)
class BlockDecomposition:
    c11: np.ndarray
    c12: np.ndarray
    c21: np.ndarray
    c22: np.ndarray
    support: np.ndarray
    complement: np.ndarray

    def reassemble(self) -> np.ndarray:
        """C in the original column order."""
        order = np.concatenate([self.support, self.complement])
        full = np.block([[self.c11, self.c12], [self.c21, self.c22]])
        out = np.empty_like(full)
        out[np.ix_(order, order)] = full
        return out


def block_decompose_gram(c, support) -> BlockDecomposition:
    c = np.asarray(c, dtype=np.float64)
    p = c.shape[0]
    s = np.unique(np.asarray(support, dtype=np.int64))
    if s.size == 0:
        raise ValueError("support must be nonempty")
    rest = np.setdiff1d(np.arange(p), s)
    c11 = c[np.ix_(s, s)]
    if np.linalg.matrix_rank(c11) < s.size:
        raise SingularC11("C11 is singular; the selected columns are collinear")
    return BlockDecomposition(c11, c[np.ix_(s, rest)], c[np.ix_(rest, s)], c[np.ix_(rest, rest)],
                              s, rest)


def block_decompose(x, support) -> BlockDecomposition:
    x = np.asarray(x, dtype=np.float64)
    return block_decompose_gram(x.T @ x / x.shape[0], support)


def irrepresentable_margin(decomp: BlockDecomposition, sign_s):
    """``1 - |C21 C11^{-1} sign_S|_inf`` and whether it is positive."""
    sign_s = np.asarray(sign_s, dtype=np.float64)
    if sign_s.shape != (decomp.support.size,):
        raise ValueError("sign vector must have one entry per support index")
    if decomp.complement.size == 0:
        return 1.0, True
    try:
        v = linalg.solve(decomp.c11, sign_s, assume_a="sym")
    except linalg.LinAlgError as exc:
        raise SingularC11(str(exc)) from exc
    margin = 1.0 - float(np.max(np.abs(decomp.c21 @ v)))
    return margin, margin > 0


def projection_magnitudes(decomp: BlockDecomposition, beta_small, n) -> dict:
    """The two sup-norms bounding the small effects' leakage into the selected block.

    Reported as raw magnitudes; no finite-n threshold is implied.
    """
    beta_small = np.asarray(beta_small, dtype=np.float64)
    if decomp.complement.size == 0:
        return {"selected_leakage": 0.0, "residual_leakage": 0.0}
    a = linalg.solve(decomp.c11, decomp.c12 @ beta_small, assume_a="sym")
    b = decomp.c21 @ a - decomp.c22 @ beta_small
    root = np.sqrt(n)
    return {"selected_leakage": float(root * np.max(np.abs(a))),
            "residual_leakage": float(root * np.max(np.abs(b)))}


def cliff_split(beta0, n, threshold_factor=1.0):
    """Indices with |beta0_j| >= threshold_factor / sqrt(n), and the rest."""
    if threshold_factor <= 0:
        raise ValueError("threshold_factor must be positive")
    beta0 = np.asarray(beta0, dtype=np.float64)
    big = np.abs(beta0) >= threshold_factor / np.sqrt(n)
    return np.flatnonzero(big), np.flatnonzero(~big)


def diagnose(x, beta0, threshold_factor=1.0) -> dict:
    """Irrepresentable margin on the large set of ``beta0`` for a standardized design."""
    x = np.asarray(x, dtype=np.float64)
    n = x.shape[0]
    large, small = cliff_split(beta0, n, threshold_factor)
    out = {"large_set": large.tolist(), "small_set": small.tolist()}
    if large.size == 0:
        out.update(margin=None, holds=None)
        return out
    decomp = block_decompose(x, large)
    margin, holds = irrepresentable_margin(decomp, np.sign(beta0[large]))
    out.update(margin=margin, holds=bool(holds))
    out.update(projection_magnitudes(decomp, np.asarray(beta0)[decomp.complement], n))
    return out
