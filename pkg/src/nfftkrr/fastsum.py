"""Fast summation of Gaussian kernel sums via the NFFT sandwich.

Approximates ``s(z_i) = sum_j alpha_j kappa(||z_i - x_j||)`` by mapping
all nodes into a ball on the torus, replacing the kernel with the
Fourier series of a smooth periodization, and evaluating

    s = forward_nfft( coeffs * adjoint_nfft(alpha) )

which costs O(N_x + N_z) per apply at fixed accuracy instead of
O(N_x * N_z).  ``direct_sum`` is the dense reference evaluation.
"""

import math
from dataclasses import dataclass, replace

import numpy as np
import scipy.fft as sfft

from .errors import NumericalError, ShapeError, ValidationError
from .nfft import GridSpec, NfftPlan, resolve_profile

_COEFF_GRIDS = {"rough": 32, "default": 64, "fine": 128}


@dataclass(frozen=True)
class GaussianKernel:
    """Radial Gaussian kernel kappa(r) = exp(-r^2 / sigma^2), kappa(0) = 1."""

    sigma: float

    def __post_init__(self):
        if not (self.sigma > 0 and math.isfinite(self.sigma)):
            raise ValidationError(f"kernel shape parameter must be positive, got {self.sigma}")

    def __call__(self, r):
        r = np.asarray(r, dtype=np.float64)
        return np.exp(-((r / self.sigma) ** 2))

    def derivative(self, order, r):
        """order-th derivative d^j/dr^j exp(-(r/sigma)^2) at r."""
        # Rodrigues: d^j/dt^j exp(-t^2) = (-1)^j H_j(t) exp(-t^2)
        t = np.asarray(r, dtype=np.float64) / self.sigma
        coeffs = np.zeros(order + 1)
        coeffs[order] = 1.0
        hermite = np.polynomial.hermite.hermval(t, coeffs)
        return (-1.0 / self.sigma) ** order * hermite * np.exp(-t * t)

    def rescaled(self, factor):
        return replace(self, sigma=self.sigma * factor)


@dataclass(frozen=True)
class PeriodizationConfig:
    """Geometry of the smooth periodic kernel extension (period fixed to 1).

    The kernel is kept exact on ``[0, ball_radius]``, blended to a
    constant over ``(ball_radius, ball_radius + transition_width)`` by a
    two-point Hermite polynomial matching ``smoothness_degree``
    derivatives, and sampled on a ``coeff_grid``-per-dimension FFT grid
    (refined by ``coeff_oversample`` before truncation) to obtain the
    Fourier coefficients.
    """

    ball_radius: float = 0.25 - 1.0 / 32.0
    transition_width: float = 1.0 / 16.0
    smoothness_degree: int = 7
    coeff_grid: int = 64
    coeff_oversample: int = 2

    def __post_init__(self):
        if not 0.0 < self.ball_radius < 0.5:
            raise ValidationError("ball_radius must lie in (0, 1/2)")
        if self.transition_width <= 0:
            raise ValidationError("transition_width must be positive")
        if self.ball_radius + self.transition_width > 0.5 + 1e-12:
            raise ValidationError("ball_radius + transition_width must not exceed 1/2")
        if self.smoothness_degree < 1:
            raise ValidationError("smoothness_degree must be at least 1")
        if self.coeff_grid < 2 or self.coeff_grid % 2 != 0:
            raise ValidationError("coeff_grid must be even and >= 2")
        if self.coeff_oversample < 1:
            raise ValidationError("coeff_oversample must be at least 1")

    @classmethod
    def for_profile(cls, profile):
        name = resolve_profile(profile).name
        return cls(coeff_grid=_COEFF_GRIDS.get(name, 64))


def _transition_coefficients(kernel, config):
    """Monomial coefficients of the blend q(t) on t = (r - L)/ell in [0, 1].

    Matches q^(j)(0) to the kernel's derivatives at L for j < p and forces
    q^(j)(1) = 0 for j = 1..p, so the periodic continuation is C^(p-1).
    """
    L = config.ball_radius
    ell = config.transition_width
    p = config.smoothness_degree
    size = 2 * p
    A = np.zeros((size, size))
    rhs = np.zeros(size)
    for j in range(p):
        A[j, j] = math.factorial(j)
        rhs[j] = ell**j * kernel.derivative(j, L)
    for row, j in enumerate(range(1, p + 1)):
        for i in range(j, size):
            A[p + row, i] = math.factorial(i) / math.factorial(i - j)
    cond = np.linalg.cond(A)
    if not np.isfinite(cond) or cond > 1.0 / np.finfo(np.float64).eps:
        raise NumericalError(
            f"Hermite transition system is numerically singular at "
            f"smoothness_degree={p} (condition number {cond:.2e})"
        )
    return np.linalg.solve(A, rhs)


def periodized_profile(kernel, config):
    """Radial profile r -> kappa_tilde(r) of the periodized kernel."""
    coeffs = _transition_coefficients(kernel, config)
    powers = coeffs[::-1]
    L = config.ball_radius
    ell = config.transition_width
    tail = float(np.polyval(powers, 1.0))

    def profile(r):
        r = np.abs(np.asarray(r, dtype=np.float64))
        out = np.empty_like(r)
        inner = r <= L
        trans = (r > L) & (r < L + ell)
        out[inner] = kernel(r[inner])
        out[trans] = np.polyval(powers, (r[trans] - L) / ell)
        out[~inner & ~trans] = tail
        return out

    return profile


def regularize_kernel(kernel, config, dims):
    """Fourier coefficients of the periodized kernel on the d-dim grid.

    Returns a real array of shape ``(coeff_grid,) * dims`` in centered
    order (axis index i corresponds to frequency i - coeff_grid/2).
    """
    if not 1 <= dims <= 3:
        raise ValidationError(f"dimension must be 1..3, got {dims}")
    profile = periodized_profile(kernel, config)
    M = config.coeff_grid
    n = M * config.coeff_oversample
    axes = np.meshgrid(
        *[np.arange(-n // 2, n // 2) / n for _ in range(dims)], indexing="ij"
    )
    r = np.sqrt(sum(a * a for a in axes))
    samples = profile(r)
    chat = sfft.fftn(sfft.ifftshift(samples)) / n**dims
    chat = sfft.fftshift(chat)
    lo = n // 2 - M // 2
    block = chat[tuple(slice(lo, lo + M) for _ in range(dims))]
    # the periodized kernel is real and even, so its coefficients are real
    return np.ascontiguousarray(block.real)


def direct_sum(kernel, sources, targets, alpha, chunk=256):
    """Exact dense evaluation of s(z_i) = sum_j alpha_j kappa(z_i, x_j)."""
    X = np.atleast_2d(np.asarray(sources, dtype=np.float64))
    Z = np.atleast_2d(np.asarray(targets, dtype=np.float64))
    alpha = np.asarray(alpha, dtype=np.float64)
    if X.ndim != 2 or Z.ndim != 2 or X.shape[1] != Z.shape[1]:
        raise ShapeError("sources and targets must be (N, d) matrices with equal d")
    if alpha.shape != (X.shape[0],):
        raise ShapeError(f"alpha must have length {X.shape[0]}, got {alpha.shape}")
    sq_x = (X * X).sum(axis=1)
    out = np.empty(Z.shape[0])
    for lo in range(0, Z.shape[0], chunk):
        hi = min(lo + chunk, Z.shape[0])
        zc = Z[lo:hi]
        d2 = (zc * zc).sum(axis=1)[:, None] + sq_x[None, :] - 2.0 * (zc @ X.T)
        np.maximum(d2, 0.0, out=d2)
        out[lo:hi] = kernel(np.sqrt(d2)) @ alpha
    return out


class FastsumOperator:
    """Matrix-free kernel summation operator built by :func:`fastsum_build`.

    Linear in alpha; with targets omitted it realizes multiplication by
    the symmetric kernel matrix over the source set.
    """

    def __init__(self, kernel, config, sources, targets=None, profile="default"):
        profile = resolve_profile(profile)
        X = np.atleast_2d(np.asarray(sources, dtype=np.float64))
        if X.ndim != 2 or X.shape[0] == 0:
            raise ShapeError("sources must form a nonempty (N, d) matrix")
        if not np.all(np.isfinite(X)):
            raise ValidationError("source coordinates must be finite")
        d = X.shape[1]
        if not 1 <= d <= 3:
            raise ValidationError(f"fast summation supports 1..3 dimensions, got {d}")
        if config is None:
            config = PeriodizationConfig.for_profile(profile)

        Z = None
        if targets is not None:
            Z = np.atleast_2d(np.asarray(targets, dtype=np.float64))
            if Z.shape[1] != d:
                raise ShapeError(f"targets have {Z.shape[1]} columns, sources {d}")
            if not np.all(np.isfinite(Z)):
                raise ValidationError("target coordinates must be finite")

        stacked = X if Z is None else np.vstack([X, Z])
        mins = stacked.min(axis=0)
        maxs = stacked.max(axis=0)
        diameter = float(np.linalg.norm(maxs - mins))
        # every scaled pairwise distance is bounded by the scaled bounding
        # box diagonal, which this maps exactly onto the ball radius
        scale = config.ball_radius / diameter if diameter > 0 else 1.0
        center = (mins + maxs) / 2.0

        self.kernel = kernel
        self.config = config
        self.profile = profile
        self.dims = d
        self.scale = scale
        self.center = center
        self.scaled_kernel = kernel.rescaled(scale)
        self.coeffs = regularize_kernel(self.scaled_kernel, config, d)

        grid = GridSpec((config.coeff_grid,) * d)
        self.source_plan = NfftPlan(grid, (X - center) * scale, profile)
        self.target_plan = (
            None if Z is None else NfftPlan(grid, (Z - center) * scale, profile)
        )

    @property
    def n_sources(self):
        return self.source_plan.node_count

    @property
    def n_targets(self):
        plan = self.target_plan or self.source_plan
        return plan.node_count

    def apply_complex(self, alpha):
        alpha = np.asarray(alpha)
        if alpha.ndim != 1 or alpha.shape[0] != self.n_sources:
            raise ShapeError(
                f"alpha must have length {self.n_sources}, got shape {alpha.shape}"
            )
        ghat = self.source_plan.adjoint(alpha.astype(np.complex128, copy=False))
        shat = self.coeffs.ravel() * ghat
        plan = self.target_plan or self.source_plan
        return plan.forward(shat)

    def apply(self, alpha):
        """s(z_i) for real alpha; the imaginary residue is discarded."""
        return self.apply_complex(alpha).real


def fastsum_build(kernel, config, sources, targets=None, profile="default"):
    """Build a :class:`FastsumOperator`; targets=None realizes Z = X."""
    return FastsumOperator(kernel, config, sources, targets, profile)


def fastsum_apply(op, alpha):
    return op.apply(alpha)
