"""Ornstein-Uhlenbeck base processes and the multiparameter Brownian motion.

The one-dimensional OU process ``dU = -k (U - theta) dt + sigma dW`` has an
exactly Gaussian transition kernel,

    mean(dt) = e^{-k dt} x + (1 - e^{-k dt}) theta,
    var(dt)  = sigma^2 (1 - e^{-2 k dt}) / (2 k),

so transitions over a random clock increment can be sampled without
discretization error.  The factor construction assembles a (d+1)-parameter
process on R^d from d idiosyncratic OU processes plus a common OU factor
scaled by non-negative loadings:

    X(s) = ( U_1(s_1) + a_1 U(s_{d+1}), ..., U_d(s_d) + a_d U(s_{d+1}) ).

All component processes start at zero.  The alternative Levy base is the
multiparameter Brownian motion ``sum_j A_j B_j(s_j)`` with per-block drift
and covariance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .numerics import RngStream

__all__ = [
    "OUSpec",
    "MatrixOUSpec",
    "FactorMOUSpec",
    "BMBlock",
    "MultiparamBMSpec",
    "LatentState",
    "ou_transition_moments",
    "ou_sample_step",
    "ou_char_exponent",
    "ou_conditional_log_cf",
    "matrix_ou_transition_moments",
    "mou_char_exponent",
    "scaled_marginal_params",
    "mbm_char_exponent",
]


@dataclass(frozen=True)
class OUSpec:
    """One-dimensional OU parameters (mean-reversion ``k``, level ``theta``,
    volatility ``sigma``, initial value ``x0``)."""

    k: float
    theta: float
    sigma: float
    x0: float = 0.0

    def __post_init__(self):
        if self.k <= 0.0:
            raise ValueError(f"mean-reversion rate k must be positive, got {self.k}")
        if self.sigma < 0.0:
            raise ValueError(f"sigma must be non-negative, got {self.sigma}")

    @property
    def stationary_var(self) -> float:
        return self.sigma ** 2 / (2.0 * self.k)


def ou_transition_moments(spec: OUSpec, x, dt):
    """Exact Gaussian transition moments over ``dt`` from state ``x``.

    Vectorized over both arguments; ``dt = 0`` returns ``(x, 0)`` and
    ``dt -> inf`` the stationary moments ``(theta, sigma^2/(2k))``.
    """
    dt = np.asarray(dt, dtype=float)
    if np.any(dt < 0.0):
        raise ValueError("dt must be non-negative")
    e = np.exp(-spec.k * dt)
    mean = np.asarray(x) * e + (1.0 - e) * spec.theta
    var = spec.sigma ** 2 * (1.0 - e ** 2) / (2.0 * spec.k)
    return mean, var


def ou_sample_step(spec: OUSpec, x, dt, rng) -> np.ndarray:
    """Exact draw of the OU state after ``dt`` from state ``x``.

    ``rng`` may be an :class:`RngStream` or a ``numpy.random.Generator``.
    """
    gen = rng.generator() if isinstance(rng, RngStream) else rng
    mean, var = ou_transition_moments(spec, x, dt)
    z = gen.standard_normal(np.broadcast(np.asarray(x), np.asarray(dt)).shape)
    return mean + np.sqrt(var) * z


def ou_char_exponent(spec: OUSpec, t, xi):
    """Log-CF of the OU value at time ``t`` started from zero:
    ``i theta (1 - e^{-kt}) xi - sigma^2/(4k) (1 - e^{-2kt}) xi^2``."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0.0):
        raise ValueError("t must be non-negative")
    xi = np.asarray(xi)
    e = np.exp(-spec.k * t)
    return 1j * spec.theta * (1.0 - e) * xi \
        - spec.sigma ** 2 / (4.0 * spec.k) * (1.0 - e ** 2) * xi ** 2


def ou_conditional_log_cf(spec: OUSpec, x: float, s, xi):
    """Log-CF of the displacement ``U(s) - x`` given ``U(0) = x``.

    This is the conditional one-step exponent mixed against subordinator
    increment laws; vectorized over the elapsed time ``s``.
    """
    mean, var = ou_transition_moments(spec, x, s)
    xi = np.asarray(xi)
    return 1j * xi * (mean - x) - 0.5 * xi ** 2 * var


# ---------------------------------------------------------------------------
# Matrix-valued OU
# ---------------------------------------------------------------------------

def _as_matrix(a, name):
    m = np.atleast_2d(np.asarray(a, dtype=float))
    if m.ndim != 2:
        raise ValueError(f"{name} must be a matrix")
    return m


@dataclass(frozen=True)
class MatrixOUSpec:
    """d-dimensional OU process ``dX = -K (X - theta) dt + Lambda dW`` with
    all eigenvalues of ``K`` of positive real part; ``Sigma = Lambda Lambda^T``."""

    K: tuple
    theta: tuple
    Lambda: tuple
    x0: tuple | None = None

    def __post_init__(self):
        K = _as_matrix(self.K, "K")
        d = K.shape[0]
        if K.shape != (d, d):
            raise ValueError("K must be square")
        if np.any(np.linalg.eigvals(K).real <= 0.0):
            raise ValueError("all eigenvalues of K must have positive real part")
        theta = np.asarray(self.theta, dtype=float).reshape(d)
        Lam = _as_matrix(self.Lambda, "Lambda")
        if Lam.shape[0] != d:
            raise ValueError("Lambda must have d rows")
        x0 = np.zeros(d) if self.x0 is None else np.asarray(self.x0, dtype=float).reshape(d)
        object.__setattr__(self, "K", tuple(map(tuple, K.tolist())))
        object.__setattr__(self, "theta", tuple(theta.tolist()))
        object.__setattr__(self, "Lambda", tuple(map(tuple, Lam.tolist())))
        object.__setattr__(self, "x0", tuple(x0.tolist()))

    @property
    def d(self) -> int:
        return len(self.theta)

    @property
    def K_mat(self) -> np.ndarray:
        return np.asarray(self.K, dtype=float)

    @property
    def Sigma(self) -> np.ndarray:
        lam = np.asarray(self.Lambda, dtype=float)
        return lam @ lam.T


def matrix_ou_transition_moments(spec: MatrixOUSpec, x, dt: float):
    """Exact transition mean and covariance of the matrix OU process.

    Mean via the matrix exponential; covariance
    ``int_0^dt e^{-Ku} Sigma e^{-K^T u} du`` via the Van Loan block-matrix
    exponential (a Lyapunov-type closed form, no quadrature).
    """
    if dt < 0.0:
        raise ValueError("dt must be non-negative")
    d = spec.d
    x = np.asarray(x, dtype=float).reshape(d)
    K = spec.K_mat
    Sigma = spec.Sigma
    if dt == 0.0:
        return x.copy(), np.zeros((d, d))
    block = np.zeros((2 * d, 2 * d))
    block[:d, :d] = -K
    block[:d, d:] = Sigma
    block[d:, d:] = K.T
    B = expm(block * dt)
    F1 = B[:d, :d]            # e^{-K dt}
    cov = B[:d, d:] @ F1.T
    cov = 0.5 * (cov + cov.T)
    theta = np.asarray(spec.theta, dtype=float)
    mean = F1 @ x + (np.eye(d) - F1) @ theta
    return mean, cov


# ---------------------------------------------------------------------------
# Factor construction
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FactorMOUSpec:
    """Factor-based multiparameter OU process on R^d.

    ``idio`` are the d idiosyncratic OU components and ``common`` the shared
    factor (defaults to the normalized ``k=1, theta=0, sigma=1``); all
    components start at zero.  ``loadings`` are the non-negative factor
    weights.
    """

    idio: tuple[OUSpec, ...]
    loadings: tuple[float, ...]
    common: OUSpec = OUSpec(1.0, 0.0, 1.0)

    def __post_init__(self):
        object.__setattr__(self, "idio", tuple(self.idio))
        object.__setattr__(self, "loadings", tuple(float(a) for a in self.loadings))
        if len(self.idio) == 0:
            raise ValueError("at least one idiosyncratic component is required")
        if len(self.loadings) != len(self.idio):
            raise ValueError("loadings must have one entry per idiosyncratic component")
        if any(a < 0.0 for a in self.loadings):
            raise ValueError("loadings must be non-negative")
        for spec in (*self.idio, self.common):
            if spec.x0 != 0.0:
                raise ValueError("all factor components must start at zero")

    @property
    def d(self) -> int:
        return len(self.idio)

    @property
    def n_params(self) -> int:
        """Number of time parameters (= subordinator components needed)."""
        return self.d + 1

    @property
    def a(self) -> np.ndarray:
        return np.asarray(self.loadings, dtype=float)


def mou_char_exponent(spec: FactorMOUSpec, s, xi):
    """Characteristic exponent of ``X(s)`` at the (d+1)-vector time ``s``:
    ``sum_j psi_{U_j(s_j)}(xi_j) + psi_{U(s_{d+1})}(sum_h a_h xi_h)``."""
    s = np.asarray(s, dtype=float)
    xi = np.asarray(xi, dtype=float)
    d = spec.d
    if s.shape != (d + 1,):
        raise ValueError(f"s must have length d+1 = {d + 1}")
    if xi.shape != (d,):
        raise ValueError(f"xi must have length d = {d}")
    if np.any(s < 0.0):
        raise ValueError("s must be componentwise non-negative")
    total = 0.0 + 0.0j
    for j in range(d):
        total += ou_char_exponent(spec.idio[j], s[j], xi[j])
    total += ou_char_exponent(spec.common, s[d], float(spec.a @ xi))
    return complex(total)


def scaled_marginal_params(spec: FactorMOUSpec) -> MatrixOUSpec:
    """Parameters of the scaled marginal ``V(t) = X(t/k_1, ..., t/k_d, t)``.

    ``V`` is a d-dimensional OU process with ``K = I``, level vector
    ``theta`` and ``Sigma~`` with diagonal ``sigma_j^2/k_j + a_j^2`` and
    off-diagonal ``a_j a_h``.  Valid for the normalized common factor.
    """
    if (spec.common.k, spec.common.theta, spec.common.sigma) != (1.0, 0.0, 1.0):
        raise ValueError("scaled marginal closed form assumes the normalized common factor")
    d = spec.d
    a = spec.a
    sig = np.outer(a, a)
    for j in range(d):
        sig[j, j] = spec.idio[j].sigma ** 2 / spec.idio[j].k + a[j] ** 2
    theta = np.array([c.theta for c in spec.idio])
    # Lambda with Lambda Lambda^T = Sigma~ (Cholesky when PD, eigen square root otherwise)
    try:
        lam = np.linalg.cholesky(sig)
    except np.linalg.LinAlgError:
        w, v = np.linalg.eigh(sig)
        lam = v @ np.diag(np.sqrt(np.maximum(w, 0.0)))
    return MatrixOUSpec(K=np.eye(d), theta=theta, Lambda=lam)


# ---------------------------------------------------------------------------
# Multiparameter Brownian motion
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BMBlock:
    """One Brownian block: loading matrix ``A`` (d x n_j), drift ``mu`` and
    covariance ``Sigma`` (symmetric positive semidefinite)."""

    A: tuple
    mu: tuple
    Sigma: tuple

    def __post_init__(self):
        A = _as_matrix(self.A, "A")
        n = A.shape[1]
        mu = np.asarray(self.mu, dtype=float).reshape(n)
        S = _as_matrix(self.Sigma, "Sigma")
        if S.shape != (n, n):
            raise ValueError("Sigma must be n_j x n_j")
        if not np.allclose(S, S.T, atol=1e-12):
            raise ValueError("Sigma must be symmetric")
        if np.any(np.linalg.eigvalsh(0.5 * (S + S.T)) < -1e-10):
            raise ValueError("Sigma must be positive semidefinite")
        object.__setattr__(self, "A", tuple(map(tuple, A.tolist())))
        object.__setattr__(self, "mu", tuple(mu.tolist()))
        object.__setattr__(self, "Sigma", tuple(map(tuple, S.tolist())))

    @property
    def d(self) -> int:
        return len(self.A)

    def drift(self) -> np.ndarray:
        return np.asarray(self.A, dtype=float) @ np.asarray(self.mu, dtype=float)

    def covariance(self) -> np.ndarray:
        A = np.asarray(self.A, dtype=float)
        return A @ np.asarray(self.Sigma, dtype=float) @ A.T

    def log_cf(self, xi) -> complex:
        """Unit-time log-CF ``i (A mu).xi - 0.5 xi.(A Sigma A^T) xi`` (the
        block's characteristic exponent)."""
        xi = np.asarray(xi, dtype=float)
        return complex(1j * self.drift() @ xi - 0.5 * xi @ self.covariance() @ xi)


@dataclass(frozen=True)
class MultiparamBMSpec:
    """Multiparameter Brownian motion ``sum_j A_j B_j(s_j)`` on R^d."""

    blocks: tuple[BMBlock, ...]

    def __post_init__(self):
        object.__setattr__(self, "blocks", tuple(self.blocks))
        if not self.blocks:
            raise ValueError("at least one block is required")
        d = self.blocks[0].d
        if any(b.d != d for b in self.blocks):
            raise ValueError("all blocks must map into the same R^d")

    @property
    def d(self) -> int:
        return self.blocks[0].d

    @property
    def n_params(self) -> int:
        return len(self.blocks)

    @classmethod
    def standard(cls, d: int) -> "MultiparamBMSpec":
        """Single-block standard Brownian motion on R^d (A = I, mu = 0, Sigma = I)."""
        return cls((BMBlock(np.eye(d), np.zeros(d), np.eye(d)),))


def mbm_char_exponent(spec: MultiparamBMSpec, s, xi) -> complex:
    """Characteristic exponent ``sum_j s_j * block_log_cf_j(xi)``; linear in
    each time coordinate (Levy homogeneity)."""
    s = np.asarray(s, dtype=float)
    if s.shape != (spec.n_params,):
        raise ValueError(f"s must have length {spec.n_params}")
    if np.any(s < 0.0):
        raise ValueError("s must be componentwise non-negative")
    return complex(sum(sj * blk.log_cf(xi) for sj, blk in zip(s, spec.blocks)))


# ---------------------------------------------------------------------------
# Latent state
# ---------------------------------------------------------------------------

@dataclass
class LatentState:
    """Sufficient statistic of the factor process: the latent component
    values and the accumulated subordinated clock.

    The observable ``Y`` is not Markov in its own filtration for positive
    loadings, so the conditional laws are parameterized by the full latent
    vector ``(u_1, ..., u_d, u_common)``.
    """

    u: np.ndarray
    u_common: float
    clock: np.ndarray

    def __post_init__(self):
        self.u = np.asarray(self.u, dtype=float).reshape(-1)
        self.clock = np.asarray(self.clock, dtype=float).reshape(-1)
        if self.clock.shape != (len(self.u) + 1,):
            raise ValueError("clock must have one entry per component plus the common factor")
        if np.any(self.clock < 0.0):
            raise ValueError("clock entries must be non-negative")

    @classmethod
    def zero(cls, d: int) -> "LatentState":
        return cls(np.zeros(d), 0.0, np.zeros(d + 1))

    def observed(self, loadings) -> np.ndarray:
        return self.u + np.asarray(loadings, dtype=float) * self.u_common
