"""Distance computation and membership decisions over a trained eigenspace.

A probe's reduced image is compared against every enrolled reduced image
(omega column) with Euclidean and eigenvalue-weighted distances; the decision
statistic h = (min d_m)^2 / min d_e drives the default three-way band rule.
Three older single-threshold rules are kept as explicit legacy modes.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass

import numpy as np

from .eigenspace import RANK_TOLERANCE, EigenSpace, Projection, project
from .imaging import GrayImage, NoiseSpec, add_gaussian_noise

__all__ = [
    "Verdict",
    "DecisionConfig",
    "VerificationReport",
    "DegenerateSpaceError",
    "DECISION_MODES",
    "euclidean",
    "mahalanobis",
    "theta_l",
    "h_value",
    "auto_epsilon_d",
    "decide_h",
    "decide_legacy",
    "verify",
]

DECISION_MODES = (
    "h_band",
    "legacy_euclidean",
    "legacy_mahalanobis",
    "legacy_euclid_eigen",
)


class Verdict(enum.Enum):
    IN_BASE = "InBase"
    OUT_OF_BASE = "OutOfBase"
    INCONCLUSIVE = "Inconclusive"

    def __str__(self) -> str:
        return self.value


class DegenerateSpaceError(RuntimeError):
    """All eigenvalues are zero and the compared vectors differ."""


@dataclass
class DecisionConfig:
    """Decision rule selection and its thresholds.

    h_band accepts at h <= h_in, rejects at h >= h_out, and is inconclusive
    in between. The legacy modes are single-threshold and binary. epsilon_d
    guards the h division against a zero Euclidean minimum; None means
    derive it from the space (see auto_epsilon_d).
    """

    mode: str = "h_band"
    h_in: float = 0.5
    h_out: float = 0.55
    alpha: float = 1.0
    beta: float = 1.0
    epsilon_d: float | None = None

    def __post_init__(self):
        if self.mode not in DECISION_MODES:
            raise ValueError(f"unknown decision mode {self.mode!r}")
        if not self.h_in <= self.h_out:
            raise ValueError("h_in must not exceed h_out")
        if self.alpha <= 0 or self.beta <= 0:
            raise ValueError("alpha and beta must be positive")
        if self.epsilon_d is not None and self.epsilon_d <= 0:
            raise ValueError("epsilon_d must be positive")


@dataclass
class VerificationReport:
    """Everything measured for one probe, plus the verdict."""

    d_e: np.ndarray
    d_m: np.ndarray
    argmin_e: int
    argmin_m: int
    h: float
    theta_L: float
    verdict: Verdict
    mode: str

    def __post_init__(self):
        self.d_e = np.asarray(self.d_e, dtype=np.float64)
        self.d_m = np.asarray(self.d_m, dtype=np.float64)
        if self.d_e.shape != self.d_m.shape or self.d_e.ndim != 1:
            raise ValueError("d_e and d_m must be vectors of equal length")
        if np.any(self.d_e < 0) or np.any(self.d_m < 0) or self.h < 0:
            raise ValueError("distances and h must be non-negative")
        for name, idx, arr in (
            ("argmin_e", self.argmin_e, self.d_e),
            ("argmin_m", self.argmin_m, self.d_m),
        ):
            if not 0 <= idx < arr.size or arr[idx] != arr.min():
                raise ValueError(f"{name} does not point at a minimum")

    def to_json_line(self) -> str:
        """One-line JSON record; field order matches the declaration."""
        record = {
            "d_e": [float(x) for x in self.d_e],
            "d_m": [float(x) for x in self.d_m],
            "argmin_e": int(self.argmin_e),
            "argmin_m": int(self.argmin_m),
            "h": float(self.h),
            "theta_L": float(self.theta_L),
            "verdict": self.verdict.value,
            "mode": self.mode,
        }
        return json.dumps(record, separators=(",", ":"))


def euclidean(a: np.ndarray, b: np.ndarray) -> float:
    """Plain Euclidean distance between two equal-length vectors."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.shape} vs {b.shape}")
    d = a - b
    return float(np.sqrt((d * d).sum()))


def mahalanobis(
    omega_k: np.ndarray,
    pi: np.ndarray,
    eigenvalues: np.ndarray,
    epsilon: float = RANK_TOLERANCE,
) -> float:
    """Eigenvalue-weighted distance between a reduced image and a projection.

    Coordinates whose eigenvalue is at or below epsilon * largest are
    degenerate directions and contribute nothing. With an all-zero spectrum
    the metric has no support: equal vectors give 0, unequal vectors raise
    DegenerateSpaceError.
    """
    omega_k = np.asarray(omega_k, dtype=np.float64)
    pi = np.asarray(pi, dtype=np.float64)
    eigenvalues = np.asarray(eigenvalues, dtype=np.float64)
    if not omega_k.shape == pi.shape == eigenvalues.shape:
        raise ValueError("omega_k, pi, and eigenvalues must share one length")
    if eigenvalues.size == 0 or eigenvalues[0] <= 0.0:
        scale = max(np.abs(omega_k).max(initial=0.0), np.abs(pi).max(initial=0.0))
        if np.abs(omega_k - pi).max(initial=0.0) <= 1e-12 * (1.0 + scale):
            return 0.0
        raise DegenerateSpaceError(
            "all eigenvalues are zero but the compared vectors differ"
        )
    keep = eigenvalues > epsilon * eigenvalues[0]
    d = omega_k[keep] - pi[keep]
    return float(np.sqrt((d * d / eigenvalues[keep]).sum()))


def theta_l(omega: np.ndarray) -> float:
    """Half the largest pairwise Euclidean distance between omega columns."""
    omega = np.asarray(omega, dtype=np.float64)
    if omega.ndim != 2 or omega.shape[1] < 2:
        raise ValueError("need at least two omega columns")
    diffs = omega[:, :, None] - omega[:, None, :]
    pairwise = np.sqrt((diffs * diffs).sum(axis=0))
    return 0.5 * float(pairwise.max())


def auto_epsilon_d(omega: np.ndarray) -> float:
    """Zero-distance guard scaled to the training matrix magnitude."""
    omega = np.asarray(omega, dtype=np.float64)
    peak = np.abs(omega).max() if omega.size else 0.0
    return 1e-12 * (1.0 + float(peak))


def h_value(d_e: np.ndarray, d_m: np.ndarray, epsilon_d: float) -> float:
    """Decision statistic h = (min d_m)^2 / min d_e.

    A Euclidean minimum at or below epsilon_d means the probe coincides with
    an enrolled image, where the quotient degenerates; h is 0 by definition
    there. The two minima are taken independently and may occur at different
    indices.
    """
    d_e = np.asarray(d_e, dtype=np.float64)
    d_m = np.asarray(d_m, dtype=np.float64)
    if d_e.size == 0 or d_m.size == 0:
        raise ValueError("distance arrays must be nonempty")
    min_e = float(d_e.min())
    if min_e <= epsilon_d:
        return 0.0
    min_m = float(d_m.min())
    return (min_m * min_m) / min_e


def decide_h(h: float, cfg: DecisionConfig) -> Verdict:
    """Three-way band rule: accept low h, reject high h, abstain between."""
    if h <= cfg.h_in:
        return Verdict.IN_BASE
    if h >= cfg.h_out:
        return Verdict.OUT_OF_BASE
    return Verdict.INCONCLUSIVE


def decide_legacy(space: EigenSpace, pi: Projection, cfg: DecisionConfig) -> Verdict:
    """Single-threshold rules predating the h statistic; always binary.

    legacy_euclidean:    in base iff min d_e <= theta_l(omega)
    legacy_mahalanobis:  in base iff min d_m <= alpha * largest eigenvalue
    legacy_euclid_eigen: in base iff min d_e <= beta * largest eigenvalue
    """
    if cfg.mode not in ("legacy_euclidean", "legacy_mahalanobis", "legacy_euclid_eigen"):
        raise ValueError(f"not a legacy decision mode: {cfg.mode!r}")
    m = space.size
    d_e = np.array([euclidean(space.omega[:, k], pi.coords) for k in range(m)])
    lam_max = float(space.eigenvalues[0]) if m else 0.0
    if cfg.mode == "legacy_euclidean":
        accepted = d_e.min() <= theta_l(space.omega)
    elif cfg.mode == "legacy_mahalanobis":
        d_m = np.array(
            [mahalanobis(space.omega[:, k], pi.coords, space.eigenvalues) for k in range(m)]
        )
        accepted = d_m.min() <= cfg.alpha * lam_max
    else:
        accepted = d_e.min() <= cfg.beta * lam_max
    return Verdict.IN_BASE if accepted else Verdict.OUT_OF_BASE


def verify(
    space: EigenSpace,
    img: GrayImage,
    cfg: DecisionConfig | None = None,
    noise: NoiseSpec | None = None,
    source_path: str | None = None,
) -> VerificationReport:
    """Full per-probe pipeline: noise, edge stage, projection, distances, verdict.

    The edge stage is the space's own configuration, applied inside project;
    noise (when given) is added to the raw probe before everything else.
    """
    if cfg is None:
        cfg = DecisionConfig()
    probe = add_gaussian_noise(img, noise) if noise is not None else img
    pi = project(space, probe, source_path=source_path, noise=noise)

    m = space.size
    d_e = np.array([euclidean(space.omega[:, k], pi.coords) for k in range(m)])
    d_m = np.array(
        [mahalanobis(space.omega[:, k], pi.coords, space.eigenvalues) for k in range(m)]
    )
    epsilon_d = cfg.epsilon_d if cfg.epsilon_d is not None else auto_epsilon_d(space.omega)
    h = h_value(d_e, d_m, epsilon_d)
    if cfg.mode == "h_band":
        verdict = decide_h(h, cfg)
    else:
        verdict = decide_legacy(space, pi, cfg)
    return VerificationReport(
        d_e=d_e,
        d_m=d_m,
        argmin_e=int(d_e.argmin()),
        argmin_m=int(d_m.argmin()),
        h=h,
        theta_L=theta_l(space.omega),
        verdict=verdict,
        mode=cfg.mode,
    )
