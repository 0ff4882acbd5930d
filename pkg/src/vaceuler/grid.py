"""Reference slab discretization: periodic horizontal directions, bounded vertical.

Fields are plain numpy arrays. A scalar field on a ``dim``-dimensional slab has
shape ``slab.shape = (n_h,) * (dim - 1) + (n_v,)``; vector fields carry one
leading component axis and matrix fields two. The vertical coordinate is always
the last array axis, and the vertical component of a vector is index
``dim - 1``.

Horizontal derivatives are Fourier collocation on ``[0, 1)``; vertical
derivatives act on uniform nodes ``x_v = k / (n_v - 1)``, either as order-``p``
finite differences with one-sided end stencils (``"fd"``) or as a
summation-by-parts operator whose norm doubles as the quadrature (``"sbp"``).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DimensionError, FieldError

__all__ = [
    "Slab",
    "fd_weights",
    "endcorrected_trapezoid_weights",
    "vertical_diff_matrix",
    "sbp_operator",
    "VERTICAL_SCHEMES",
]

VERTICAL_SCHEMES = ("fd", "sbp")


def fd_weights(z: float, x: np.ndarray, m: int) -> np.ndarray:
    """Finite-difference weights for derivatives 0..m at ``z`` on nodes ``x``.

    Fornberg's recursion. Returns an array ``c`` of shape ``(len(x), m + 1)``
    with ``c[:, k]`` the weights of the k-th derivative.
    """
    x = np.asarray(x, dtype=float)
    n = len(x)
    c = np.zeros((n, m + 1))
    c1, c4 = 1.0, x[0] - z
    c[0, 0] = 1.0
    for i in range(1, n):
        mn = min(i, m)
        c2, c5, c4 = 1.0, c4, x[i] - z
        for j in range(i):
            c3 = x[i] - x[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[i, k] = c1 * (k * c[i - 1, k - 1] - c5 * c[i - 1, k]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for k in range(mn, 0, -1):
                c[j, k] = (c4 * c[j, k] - k * c[j, k - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return c


def vertical_diff_matrix(n: int, order: int = 6) -> np.ndarray:
    """Dense first-derivative matrix on ``n`` uniform nodes of [0, 1].

    Every row uses ``order + 1`` nodes: centered where possible, shifted
    toward the interior near the ends (no ghost values).
    """
    if order % 2:
        raise ValueError("order must be even")
    width = order + 1
    if n < width:
        raise ValueError(f"need at least {width} vertical nodes for order {order}")
    h = 1.0 / (n - 1)
    half = order // 2
    D = np.zeros((n, n))
    for i in range(n):
        start = min(max(i - half, 0), n - width)
        idx = np.arange(start, start + width)
        D[i, idx] = fd_weights(float(i), idx.astype(float), 1)[:, 1] / h
    return D


_SBP_INTERIOR = {1: 3.0 / 4.0, 2: -3.0 / 20.0, 3: 1.0 / 60.0}


def sbp_operator(n: int, block: int = 6, boundary_order: int = 3) -> tuple[np.ndarray, np.ndarray]:
    """Summation-by-parts first derivative on ``n`` uniform nodes of [0, 1].

    Sixth-order central interior, a ``block x block`` boundary closure exact
    for polynomials up to ``boundary_order``. Returns ``(D, w)`` with ``w`` the
    diagonal norm (a positive quadrature) so that
    ``diag(w) D + (diag(w) D)^T = diag(-1, 0, ..., 0, 1)``.

    The closure solves a small least-squares problem with both the boundary
    block of the skew part and the boundary norm entries as unknowns; the
    minimum-norm solution is taken.
    """
    r = block
    if n < 2 * r + 2:
        raise ValueError(f"SBP operator needs at least {2 * r + 2} nodes")

    def interior():
        Q = np.zeros((n, n))
        for i in range(n):
            for k, ck in _SBP_INTERIOR.items():
                if i + k < n:
                    Q[i, i + k] = ck
                if i - k >= 0:
                    Q[i, i - k] = -ck
        return Q

    Q = interior()
    Q[:r, :r] = 0.0
    pairs = [(i, j) for i in range(r) for j in range(i + 1, r)]
    nu = len(pairs) + r
    x = np.arange(n, dtype=float)
    rows, rhs = [], []
    for i in range(r):
        for q in range(boundary_order + 1):
            row = np.zeros(nu)
            for t, (a, b) in enumerate(pairs):
                if a == i:
                    row[t] += x[b] ** q
                if b == i:
                    row[t] -= x[a] ** q
            row[len(pairs) + i] = -(q * x[i] ** (q - 1) if q > 0 else 0.0)
            known = Q[i] @ x**q - (0.5 * x[i] ** q if i == 0 else 0.0)
            rows.append(row)
            rhs.append(-known)
    sol = np.linalg.lstsq(np.array(rows), np.array(rhs), rcond=None)[0]
    for t, (a, b) in enumerate(pairs):
        Q[a, b], Q[b, a] = sol[t], -sol[t]
    H = np.ones(n)
    H[:r] = sol[len(pairs):]
    Q[n - r:, n - r:] = 0.0
    for i in range(r):
        for j in range(r + 3):
            Q[n - 1 - i, n - 1 - j] = -Q[i, j]
    H[n - r:] = H[:r][::-1]
    Q[0, 0], Q[-1, -1] = -0.5, 0.5
    h = 1.0 / (n - 1)
    return Q / H[:, None] / h, H * h


def endcorrected_trapezoid_weights(n: int, m: int = 4) -> np.ndarray:
    """Trapezoid weights on [0, 1] with symmetric corrections on ``m`` end nodes.

    The corrections are chosen so the rule is exact for polynomials of degree
    ``2m - 1`` (Gregory-type end correction).
    """
    if n < 2 * m:
        raise ValueError("too few nodes for the requested end correction")
    h = 1.0 / (n - 1)
    x = np.linspace(0.0, 1.0, n)
    w = np.full(n, h)
    w[0] = w[-1] = h / 2
    # Unknown correction c_j is added at node j and at node n-1-j.
    basis = np.zeros((m, n))
    for j in range(m):
        basis[j, j] += 1.0
        basis[j, n - 1 - j] += 1.0
    y = x - 0.5
    rows, rhs = [], []
    for q in range(m):
        mono = y ** (2 * q)
        exact = 2.0 * 0.5 ** (2 * q + 1) / (2 * q + 1)
        rows.append(basis @ mono)
        rhs.append(exact - w @ mono)
    corr = np.linalg.solve(np.array(rows), np.array(rhs))
    return w + corr @ basis


@dataclass(frozen=True)
class Slab:
    """The reference domain T^(dim-1) x (0, 1) and its discrete operators."""

    dim: int
    n_horizontal: int
    n_vertical: int
    order: int = 6
    vertical_scheme: str = "fd"

    def __post_init__(self):
        if self.vertical_scheme not in VERTICAL_SCHEMES:
            raise ValueError(f"vertical_scheme must be one of {VERTICAL_SCHEMES}")
        if self.vertical_scheme == "sbp" and self.order != 6:
            raise ValueError("the sbp scheme is sixth order in the interior; use order=6")
        if self.dim not in (1, 2, 3):
            raise DimensionError(f"dim must be 1, 2 or 3, got {self.dim}")
        if self.n_vertical < 8:
            raise ValueError("n_vertical must be >= 8")
        if self.dim > 1 and self.n_horizontal < 4:
            raise ValueError("n_horizontal must be >= 4")
        if self.n_vertical < self.order + 1:
            raise ValueError("n_vertical too small for the stencil order")

    # -- geometry -----------------------------------------------------------

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n_horizontal,) * (self.dim - 1) + (self.n_vertical,)

    @property
    def horizontal_shape(self) -> tuple[int, ...]:
        return (self.n_horizontal,) * (self.dim - 1)

    @property
    def h_vertical(self) -> float:
        return 1.0 / (self.n_vertical - 1)

    @property
    def h_min(self) -> float:
        if self.dim == 1:
            return self.h_vertical
        return min(self.h_vertical, 1.0 / self.n_horizontal)

    @cached_property
    def x_horizontal(self) -> np.ndarray:
        return np.arange(self.n_horizontal) / self.n_horizontal

    @cached_property
    def x_vertical(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.n_vertical)

    @cached_property
    def coords(self) -> np.ndarray:
        """Reference coordinates as a vector field (the identity map)."""
        axes = [self.x_horizontal] * (self.dim - 1) + [self.x_vertical]
        return np.stack(np.meshgrid(*axes, indexing="ij"))

    @property
    def distance_to_top(self) -> np.ndarray:
        return 1.0 - self.coords[-1]

    # -- field helpers ------------------------------------------------------

    def check(self, f: np.ndarray, components: int = 0) -> np.ndarray:
        """Validate shape (``components`` leading axes allowed) and finiteness."""
        f = np.asarray(f, dtype=float)
        if f.shape[f.ndim - self.dim:] != self.shape or f.ndim != self.dim + components:
            raise FieldError(f"field shape {f.shape} does not match slab {self.shape}")
        if not np.all(np.isfinite(f)):
            raise FieldError("field contains NaN or Inf")
        return f

    def zeros(self, *lead: int) -> np.ndarray:
        return np.zeros(tuple(lead) + self.shape)

    def top(self, f: np.ndarray) -> np.ndarray:
        """Trace on the vacuum boundary x_v = 1."""
        return f[..., -1]

    def bottom(self, f: np.ndarray) -> np.ndarray:
        return f[..., 0]

    # -- derivatives ----------------------------------------------------------

    @cached_property
    def _sbp(self) -> tuple[np.ndarray, np.ndarray]:
        return sbp_operator(self.n_vertical)

    @cached_property
    def Dv(self) -> np.ndarray:
        if self.vertical_scheme == "sbp":
            return self._sbp[0]
        return vertical_diff_matrix(self.n_vertical, self.order)

    @cached_property
    def _ik(self) -> np.ndarray:
        n = self.n_horizontal
        k = np.fft.rfftfreq(n, d=1.0 / n)
        ik = 2j * np.pi * k
        if n % 2 == 0:
            ik[-1] = 0.0  # Nyquist mode has no odd derivative
        return ik

    def _haxis(self, direction: int) -> int:
        if self.dim < 2:
            raise DimensionError("horizontal derivative needs dim >= 2")
        if not 1 <= direction <= self.dim - 1:
            raise DimensionError(
                f"direction {direction} out of range for dim {self.dim}"
            )
        return -self.dim + direction - 1

    def d_bar(self, f: np.ndarray, direction: int = 1) -> np.ndarray:
        """Spectral derivative along periodic direction ``direction`` (1-based)."""
        axis = self._haxis(direction)
        fh = np.fft.rfft(f, axis=axis)
        shape = [1] * fh.ndim
        shape[axis] = -1
        return np.fft.irfft(fh * self._ik.reshape(shape), n=self.n_horizontal, axis=axis)

    def d_vertical(self, f: np.ndarray) -> np.ndarray:
        """Order-p finite-difference derivative along the vertical (last) axis."""
        return f @ self.Dv.T

    def d(self, f: np.ndarray, k: int) -> np.ndarray:
        """Partial derivative along reference coordinate ``k`` (0-based)."""
        if k == self.dim - 1:
            return self.d_vertical(f)
        return self.d_bar(f, k + 1)

    def grad(self, f: np.ndarray) -> np.ndarray:
        """Gradient appended as the next-to-leading axis.

        For a field with leading component axes ``c``, the result has shape
        ``c + (dim,) + slab.shape`` so ``grad(v)[i, s] = v^i_{,s}``.
        """
        lead = f.ndim - self.dim
        parts = [self.d(f, k) for k in range(self.dim)]
        return np.stack(parts, axis=lead)

    def filter_horizontal(self, f: np.ndarray, keep: float = 2.0 / 3.0) -> np.ndarray:
        """Zero horizontal Fourier modes above ``keep`` of the resolved band."""
        if self.dim < 2:
            return f
        out = f
        kmax = keep * (self.n_horizontal // 2)
        k = np.fft.rfftfreq(self.n_horizontal, d=1.0 / self.n_horizontal)
        mask = (k <= kmax).astype(float)
        for direction in range(1, self.dim):
            axis = self._haxis(direction)
            fh = np.fft.rfft(out, axis=axis)
            shape = [1] * fh.ndim
            shape[axis] = -1
            out = np.fft.irfft(fh * mask.reshape(shape), n=self.n_horizontal, axis=axis)
        return out

    # -- quadrature -----------------------------------------------------------

    @cached_property
    def vertical_weights(self) -> np.ndarray:
        if self.vertical_scheme == "sbp":
            return self._sbp[1]
        return endcorrected_trapezoid_weights(self.n_vertical, m=(self.order + 2) // 2)

    def integrate(self, f: np.ndarray) -> np.ndarray | float:
        """Integral over the unit-volume slab.

        Horizontal: exact Fourier mean (plain average of periodic samples).
        Vertical: end-corrected trapezoid rule, or the SBP norm.
        """
        g = f
        for _ in range(self.dim - 1):
            g = g.mean(axis=-2)
        out = g @ self.vertical_weights
        return float(out) if np.ndim(out) == 0 else out

    def integrate_boundary(self, f: np.ndarray) -> np.ndarray | float:
        """Mean over the horizontal torus for a trace field (unit area)."""
        g = f
        for _ in range(self.dim - 1):
            g = g.mean(axis=-1)
        return float(g) if np.ndim(g) == 0 else g

    def l2(self, f: np.ndarray) -> float:
        """L2 norm over the slab, summed over any component axes."""
        sq = np.asarray(f) ** 2
        sq = sq.reshape((-1,) + self.shape).sum(axis=0)
        return float(np.sqrt(max(self.integrate(sq), 0.0)))
