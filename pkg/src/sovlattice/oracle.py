"""Brute-force reference computations: dense contractions, kernels and residual metrics."""
from __future__ import annotations

from dataclasses import dataclass, asdict

import numpy as np

NORM_FLOOR = 1e-300


@dataclass
class ResidualReport:
    absolute: float
    relative: float
    tolerance: float = np.inf
    condition: float = float("nan")
    norm: str = "fro"

    @property
    def passed(self) -> bool:
        return bool(self.relative < self.tolerance)

    def as_dict(self):
        d = asdict(self)
        d["pass"] = self.passed
        return d


def residual(diff, scale, tol=np.inf, condition=float("nan")) -> ResidualReport:
    """Frobenius residual of ``diff`` relative to ``scale`` (a number or an array)."""
    ab = float(np.linalg.norm(diff))
    sc = float(np.linalg.norm(scale)) if np.ndim(scale) else float(abs(scale))
    return ResidualReport(ab, ab / max(sc, NORM_FLOOR), tol, condition)


def rel_err(value, reference) -> float:
    value, reference = np.asarray(value), np.asarray(reference)
    return float(np.linalg.norm(value - reference) / max(np.linalg.norm(reference), NORM_FLOOR))


def direct_matrix_element(left: np.ndarray, op: np.ndarray | None, right: np.ndarray) -> complex:
    """<l| O |r> with no conjugation of ``left`` (covectors are stored as rows)."""
    left, right = np.asarray(left), np.asarray(right)
    if op is None:
        if left.shape != right.shape:
            raise ValueError(f"dimension mismatch {left.shape} vs {right.shape}")
        return complex(left @ right)
    if op.shape != (len(left), len(right)):
        raise ValueError(f"dimension mismatch {left.shape}, {op.shape}, {right.shape}")
    return complex(left @ op @ right)


def kernel_vector(M: np.ndarray):
    """Right singular vector of the least singular value and sigma_min/sigma_max."""
    _, s, vh = np.linalg.svd(M)
    return vh[-1].conj(), float(s[-1] / max(s[0], NORM_FLOOR))


def commutator_residual(A: np.ndarray, B: np.ndarray, tol=np.inf) -> ResidualReport:
    C = A @ B - B @ A
    ab = float(np.linalg.norm(C))
    sc = float(np.linalg.norm(A) * np.linalg.norm(B))
    return ResidualReport(ab, ab / max(sc, NORM_FLOOR), tol)


def condition_number(M: np.ndarray) -> float:
    return float(np.linalg.cond(M, 2))


def align(vec: np.ndarray, ref: np.ndarray) -> np.ndarray:
    """Rescale ``vec`` so that its component of largest |ref| matches ``ref``."""
    i = int(np.argmax(np.abs(ref)))
    return vec * (ref[i] / vec[i])


def overlap(a: np.ndarray, b: np.ndarray) -> float:
    return float(abs(np.vdot(a, b)) / (np.linalg.norm(a) * np.linalg.norm(b)))
