"""Reduced image space built from a centered database and probe projection.

The eigenspace comes from the small M x M product A^T A rather than the huge
(N*K) x (N*K) covariance A A^T; the nonzero spectra of the two coincide, so
a basis for the image space is recovered as U = A V without ever
materializing the full covariance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .edges import EdgeConfig, apply_edge_stage
from .imaging import FingerprintDatabase, GrayImage, NoiseSpec, vectorize

__all__ = [
    "EigenSpace",
    "Projection",
    "EigenSolverError",
    "RANK_TOLERANCE",
    "compute_mean",
    "center",
    "reduced_covariance",
    "eig_symmetric",
    "build_space",
    "train_matrix",
    "effective_rank_of",
    "train",
    "project",
]

# Eigenvalues at or below RANK_TOLERANCE * largest are treated as zero when
# counting rank and when weighting Mahalanobis terms.
RANK_TOLERANCE = 1e-10


class EigenSolverError(RuntimeError):
    """Raised when the Jacobi iteration fails or produces impossible output."""


@dataclass
class EigenSpace:
    """Trained model: mean vector, basis U, eigenvalues, reduced images omega.

    basis column k spans eigendirection k (columns are A V, deliberately not
    renormalized); omega column m is the reduced image of database entry m.
    """

    mean: np.ndarray
    basis: np.ndarray
    eigenvalues: np.ndarray
    omega: np.ndarray
    effective_rank: int
    edge_config: EdgeConfig
    height: int
    width: int

    def __post_init__(self):
        self.mean = np.asarray(self.mean, dtype=np.float64)
        self.basis = np.asarray(self.basis, dtype=np.float64)
        self.eigenvalues = np.asarray(self.eigenvalues, dtype=np.float64)
        self.omega = np.asarray(self.omega, dtype=np.float64)
        nk = self.height * self.width
        m = self.eigenvalues.size
        if self.mean.shape != (nk,):
            raise ValueError("mean length must equal height * width")
        if self.basis.shape != (nk, m):
            raise ValueError("basis must have shape (N*K, M)")
        if self.omega.shape != (m, m):
            raise ValueError("omega must have shape (M, M)")
        if np.any(np.diff(self.eigenvalues) > 0):
            raise ValueError("eigenvalues must be sorted descending")
        if self.eigenvalues.size and self.eigenvalues[-1] < 0:
            raise ValueError("eigenvalues must be non-negative")

    @property
    def size(self) -> int:
        """Number of enrolled images M."""
        return self.eigenvalues.size


@dataclass
class Projection:
    """Probe coordinates in the image space, with provenance."""

    coords: np.ndarray
    source_path: str | None = None
    noise: NoiseSpec | None = None
    edge_method: str = "none"

    def __post_init__(self):
        self.coords = np.asarray(self.coords, dtype=np.float64)
        if self.coords.ndim != 1:
            raise ValueError("projection coordinates must be a vector")


def compute_mean(db: FingerprintDatabase) -> np.ndarray:
    """Element-wise average of the database columns."""
    return db.data.mean(axis=1)


def center(db: FingerprintDatabase, mean: np.ndarray) -> np.ndarray:
    """The difference matrix A: column m is database column m minus the mean."""
    mean = np.asarray(mean, dtype=np.float64)
    if mean.shape != (db.data.shape[0],):
        raise ValueError(
            f"mean length {mean.shape} does not match database rows {db.data.shape[0]}"
        )
    return db.data - mean[:, None]


def reduced_covariance(a: np.ndarray) -> np.ndarray:
    """The M x M product A^T A, stand-in for the intractable full covariance."""
    a = np.asarray(a, dtype=np.float64)
    if a.size == 0:
        raise ValueError("difference matrix is empty")
    return a.T @ a


def eig_symmetric(matrix: np.ndarray, max_sweeps: int = 60) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvectors and eigenvalues of a small symmetric PSD matrix.

    Cyclic Jacobi rotations; deterministic. Returns (V, eigenvalues) with
    eigenvalues sorted descending (stable on ties), V's columns orthonormal
    and sign-fixed so each column's largest-magnitude entry is positive.
    Rounding-level negative eigenvalues are clamped to zero; anything more
    negative raises (the input was not positive semi-definite).
    """
    r = np.asarray(matrix, dtype=np.float64)
    if r.ndim != 2 or r.shape[0] != r.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {r.shape}")
    m = r.shape[0]
    entry_scale = np.abs(r).max() if r.size else 0.0
    if np.abs(r - r.T).max() > 1e-9 * (1.0 + entry_scale):
        raise ValueError("matrix is not symmetric within tolerance")

    a = 0.5 * (r + r.T)
    v = np.eye(m)
    scale = np.sqrt((a * a).sum())
    if scale == 0.0:
        return v, np.zeros(m)

    def off_diagonal(mat: np.ndarray) -> float:
        # summed directly over the off-diagonal entries: subtracting the
        # diagonal mass from the total cancels catastrophically near
        # convergence and would leave a sqrt(ulp)-level floor
        off = mat.copy()
        np.fill_diagonal(off, 0.0)
        return float(np.sqrt((off * off).sum()))

    off_tol = max(m, 10) * 1e-15 * scale
    converged = False
    for _ in range(max_sweeps):
        if off_diagonal(a) <= off_tol:
            converged = True
            break
        for p in range(m - 1):
            for q in range(p + 1, m):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                diff = a[q, q] - a[p, p]
                if abs(diff) + 100.0 * abs(apq) == abs(diff):
                    # the off-diagonal entry is float-negligible against the
                    # diagonal gap; the rotation formula's large-ratio limit
                    # avoids overflow in tau * tau
                    t = apq / diff
                else:
                    tau = diff / (2.0 * apq)
                    if tau >= 0.0:
                        t = 1.0 / (tau + np.sqrt(1.0 + tau * tau))
                    else:
                        t = -1.0 / (-tau + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c

                app, aqq = a[p, p], a[q, q]
                row_p, row_q = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                col_p, col_q = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                a[p, p] = app - t * apq
                a[q, q] = aqq + t * apq
                a[p, q] = 0.0
                a[q, p] = 0.0

                vp, vq = v[:, p].copy(), v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    if not converged and off_diagonal(a) > off_tol:
        raise EigenSolverError(f"Jacobi iteration did not converge in {max_sweeps} sweeps")

    values = np.diag(a).copy()
    order = np.argsort(-values, kind="stable")
    values = values[order]
    v = v[:, order]

    vmax = max(values[0], 0.0)
    if values[-1] < -(1e-9 * vmax + 1e-30):
        raise EigenSolverError(
            f"matrix has a genuinely negative eigenvalue {values[-1]!r}; input was not PSD"
        )
    values = np.maximum(values, 0.0)

    for k in range(m):
        lead = np.argmax(np.abs(v[:, k]))
        if v[lead, k] < 0:
            v[:, k] = -v[:, k]
    return v, values


def build_space(a: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Image-space basis U = A V; columns are left unnormalized."""
    a = np.asarray(a, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if a.shape[1] != v.shape[0]:
        raise ValueError(f"shape mismatch: A is {a.shape}, V is {v.shape}")
    return a @ v


def train_matrix(u: np.ndarray, a: np.ndarray) -> np.ndarray:
    """Training matrix omega = U^T A: column m is the reduced image m."""
    u = np.asarray(u, dtype=np.float64)
    a = np.asarray(a, dtype=np.float64)
    if u.shape[0] != a.shape[0]:
        raise ValueError(f"shape mismatch: U is {u.shape}, A is {a.shape}")
    return u.T @ a


def _edge_processed(db: FingerprintDatabase, cfg: EdgeConfig) -> FingerprintDatabase:
    if cfg.method == "none":
        return db
    columns = []
    for m in range(db.size):
        edged = apply_edge_stage(db.image(m), cfg)
        columns.append(vectorize(edged).values)
    return FingerprintDatabase(np.stack(columns, axis=1), db.labels, db.height, db.width)


def effective_rank_of(eigenvalues: np.ndarray) -> int:
    """Count of eigenvalues above RANK_TOLERANCE relative to the largest."""
    eigenvalues = np.asarray(eigenvalues, dtype=np.float64)
    if eigenvalues.size == 0 or eigenvalues[0] <= 0.0:
        return 0
    return int((eigenvalues > RANK_TOLERANCE * eigenvalues[0]).sum())


def train(db: FingerprintDatabase, edge_cfg: EdgeConfig | None = None) -> EigenSpace:
    """Build the eigenspace from a database.

    Pipeline: edge stage per image, mean, centering, A^T A, Jacobi
    eigendecomposition, U = A V, omega = U^T A. The edge configuration is
    recorded so probes are processed identically at projection time.
    """
    if edge_cfg is None:
        edge_cfg = EdgeConfig()
    processed = _edge_processed(db, edge_cfg)
    mean = compute_mean(processed)
    a = center(processed, mean)
    v, values = eig_symmetric(reduced_covariance(a))
    u = build_space(a, v)
    omega = train_matrix(u, a)
    return EigenSpace(
        mean=mean,
        basis=u,
        eigenvalues=values,
        omega=omega,
        effective_rank=effective_rank_of(values),
        edge_config=edge_cfg,
        height=db.height,
        width=db.width,
    )


def project(
    space: EigenSpace,
    img: GrayImage,
    source_path: str | None = None,
    noise: NoiseSpec | None = None,
) -> Projection:
    """Project a probe into the image space.

    The space's own edge configuration is applied first, so callers hand in
    the raw probe; coordinates are U^T (vectorized edge image - mean).
    """
    if (img.height, img.width) != (space.height, space.width):
        raise ValueError(
            f"probe is {img.height}x{img.width}, space expects {space.height}x{space.width}"
        )
    edged = apply_edge_stage(img, space.edge_config)
    diff = vectorize(edged).values - space.mean
    coords = space.basis.T @ diff
    return Projection(
        coords=coords,
        source_path=source_path,
        noise=noise,
        edge_method=space.edge_config.method,
    )
