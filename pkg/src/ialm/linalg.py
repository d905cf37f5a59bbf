"""Self-contained dense real linear algebra.

Factorizations and eigenvalue iterations are implemented in-repo (Cholesky;
Householder tridiagonalization + implicit-shift QL for symmetric matrices;
balancing + Householder Hessenberg reduction + Francis double-shift QR for
general matrices).  numpy is used for array storage and arithmetic only.
The kernels are numba-jitted when numba is available and fall back to the
same pure-Python code otherwise.
"""

from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatch,
    NegativeQuadraticForm,
    NoConvergence,
    NotSPD,
    NotSymmetric,
    Singular,
)
from .tolerances import TOL

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is a declared dependency
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f

_EPS = float(np.finfo(np.float64).eps)


# ---------------------------------------------------------------------------
# value construction / validation


def as_matrix(a, name="matrix"):
    """Copy `a` into a float64 2-d array, rejecting non-finite entries."""
    m = np.array(a, dtype=float, order="C")
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise DimensionMismatch(f"{name} must be 2-d and non-empty, got shape {m.shape}")
    if not np.isfinite(m).all():
        raise ValueError(f"{name} contains non-finite entries")
    return m


def as_vector(v, name="vector"):
    """Copy `v` into a float64 1-d array, rejecting non-finite entries."""
    w = np.array(v, dtype=float).reshape(-1)
    if w.size < 1:
        raise DimensionMismatch(f"{name} must be non-empty")
    if not np.isfinite(w).all():
        raise ValueError(f"{name} contains non-finite entries")
    return w


def require_square(B, name="matrix"):
    B = as_matrix(B, name)
    if B.shape[0] != B.shape[1]:
        raise DimensionMismatch(f"{name} must be square, got shape {B.shape}")
    return B


def require_symmetric(B, name="matrix"):
    B = require_square(B, name)
    scale = np.abs(B).max()
    if scale > 0 and np.abs(B - B.T).max() > TOL.symmetry_rtol * scale:
        raise NotSymmetric(f"{name} is not symmetric within rtol {TOL.symmetry_rtol:g}")
    return B


# ---------------------------------------------------------------------------
# domain types


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues of one matrix plus the derived spectral radius."""

    eigenvalues: np.ndarray  # complex, sorted by decreasing modulus
    spectral_radius: float
    converged: bool

    @classmethod
    def from_eigenvalues(cls, values, converged=True):
        ev = np.asarray(values, dtype=complex)
        order = np.lexsort((-ev.imag, -ev.real, -np.abs(ev)))
        ev = ev[order]
        radius = float(np.abs(ev).max()) if ev.size else 0.0
        return cls(eigenvalues=ev, spectral_radius=radius, converged=bool(converged))

    @property
    def order(self):
        return self.eigenvalues.size

    def real_parts(self):
        return self.eigenvalues.real.copy()

    def max_abs_imag(self):
        return float(np.abs(self.eigenvalues.imag).max())


@dataclass(frozen=True)
class Permutation:
    """Bijection on {0, ..., order-1}; image[i] is processed at position i.

    The associated matrix P has rows of the identity selected by `image`, so
    (P x)_i = x[image[i]] and P B P^T reorders both axes by `image`.
    """

    image: tuple

    def __post_init__(self):
        img = tuple(int(i) for i in self.image)
        if sorted(img) != list(range(len(img))):
            raise ValueError(f"image {img} is not a bijection on 0..{len(img) - 1}")
        object.__setattr__(self, "image", img)

    @property
    def order(self):
        return len(self.image)

    @classmethod
    def identity(cls, n):
        return cls(tuple(range(n)))

    @classmethod
    def random(cls, n, rng):
        return cls(tuple(int(i) for i in rng.permutation(n)))

    def is_identity(self):
        return self.image == tuple(range(self.order))

    def matrix(self):
        return np.eye(self.order)[list(self.image)]

    def inverse(self):
        inv = [0] * self.order
        for pos, idx in enumerate(self.image):
            inv[idx] = pos
        return Permutation(tuple(inv))


def apply_permutation(P, B, side):
    """Apply permutation matrix P to B: rows -> PB, cols -> BP^T, similarity -> PBP^T."""
    B = as_matrix(B)
    idx = list(P.image)
    if side == "rows":
        if P.order != B.shape[0]:
            raise DimensionMismatch("permutation order does not match row count")
        return B[idx, :]
    if side == "cols":
        if P.order != B.shape[1]:
            raise DimensionMismatch("permutation order does not match column count")
        return B[:, idx]
    if side == "similarity":
        if B.shape[0] != B.shape[1] or P.order != B.shape[0]:
            raise DimensionMismatch("similarity needs a square matrix of matching order")
        return B[np.ix_(idx, idx)]
    raise ValueError(f"side must be rows, cols or similarity, got {side!r}")


# ---------------------------------------------------------------------------
# Cholesky


@njit(cache=True)
def _chol(B):
    n = B.shape[0]
    L = np.zeros((n, n))
    for j in range(n):
        s = B[j, j] - np.dot(L[j, :j], L[j, :j])
        if s <= 0.0 or np.isnan(s):
            return L, j
        L[j, j] = np.sqrt(s)
        for i in range(j + 1, n):
            L[i, j] = (B[i, j] - np.dot(L[i, :j], L[j, :j])) / L[j, j]
    return L, -1


@njit(cache=True)
def _chol_solve(L, rhs):
    n = L.shape[0]
    y = rhs.copy()
    for i in range(n):
        y[i] = (y[i] - np.dot(L[i, :i], y[:i])) / L[i, i]
    for i in range(n - 1, -1, -1):
        acc = y[i]
        for k in range(i + 1, n):
            acc -= L[k, i] * y[k]
        y[i] = acc / L[i, i]
    return y


def cholesky_factor(B, name="matrix"):
    """Lower Cholesky factor of SPD B; raises NotSPD on a non-positive pivot."""
    B = require_symmetric(B, name)
    L, bad = _chol(B)
    if bad >= 0:
        raise NotSPD(f"{name}: non-positive pivot at index {bad}")
    return L


def cholesky_solve_factored(L, rhs):
    rhs = as_vector(rhs, "rhs")
    if rhs.size != L.shape[0]:
        raise DimensionMismatch("rhs length does not match factor order")
    return _chol_solve(L, rhs)


def cholesky_solve(B, rhs):
    """Solve B y = rhs for SPD B via an in-repo Cholesky factorization."""
    L = cholesky_factor(B)
    return cholesky_solve_factored(L, rhs)


def solve_lower_triangular(T, rhs):
    """Forward substitution with the lower triangle of T."""
    T = require_square(T, "T")
    y = as_vector(rhs, "rhs").copy()
    if y.size != T.shape[0]:
        raise DimensionMismatch("rhs length does not match matrix order")
    for i in range(T.shape[0]):
        if T[i, i] == 0.0:
            raise Singular("zero pivot in triangular solve")
        y[i] = (y[i] - T[i, :i] @ y[:i]) / T[i, i]
    return y


# ---------------------------------------------------------------------------
# symmetric eigensolver: Householder tridiagonalization + implicit-shift QL


@njit(cache=True)
def _tridiagonalize(z):
    n = z.shape[0]
    d = np.zeros(n)
    e = np.zeros(n)
    for i in range(n - 1, 0, -1):
        l = i - 1
        h = 0.0
        if l > 0:
            scale = 0.0
            for k in range(i):
                scale += abs(z[i, k])
            if scale == 0.0:
                e[i] = z[i, l]
            else:
                for k in range(i):
                    z[i, k] /= scale
                    h += z[i, k] * z[i, k]
                f = z[i, l]
                g = -np.sqrt(h) if f >= 0.0 else np.sqrt(h)
                e[i] = scale * g
                h -= f * g
                z[i, l] = f - g
                f = 0.0
                for j in range(i):
                    z[j, i] = z[i, j] / h
                    g = 0.0
                    for k in range(j + 1):
                        g += z[j, k] * z[i, k]
                    for k in range(j + 1, i):
                        g += z[k, j] * z[i, k]
                    e[j] = g / h
                    f += e[j] * z[i, j]
                hh = f / (h + h)
                for j in range(i):
                    f = z[i, j]
                    g = e[j] - hh * f
                    e[j] = g
                    for k in range(j + 1):
                        z[j, k] -= f * e[k] + g * z[i, k]
        else:
            e[i] = z[i, l]
        d[i] = h
    d[0] = 0.0
    e[0] = 0.0
    for i in range(n):
        if d[i] != 0.0:
            for j in range(i):
                g = 0.0
                for k in range(i):
                    g += z[i, k] * z[k, j]
                for k in range(i):
                    z[k, j] -= g * z[k, i]
        d[i] = z[i, i]
        z[i, i] = 1.0
        for j in range(i):
            z[j, i] = 0.0
            z[i, j] = 0.0
    return d, e


@njit(cache=True)
def _ql_implicit(d, e, z, max_iter, off_floor):
    n = d.shape[0]
    for i in range(1, n):
        e[i - 1] = e[i]
    e[n - 1] = 0.0
    total = 0
    for l in range(n):
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= _EPS * dd + off_floor:
                    break
                m += 1
            if m == l:
                break
            total += 1
            if total > max_iter:
                return -1
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = np.hypot(g, 1.0)
            sgn = r if g >= 0.0 else -r
            g = d[m] - d[l] + e[l] / (g + sgn)
            s = 1.0
            c = 1.0
            p = 0.0
            broke = False
            for i in range(m - 1, l - 1, -1):
                f = s * e[i]
                b = c * e[i]
                r = np.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    broke = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                for k in range(n):
                    f = z[k, i + 1]
                    z[k, i + 1] = s * z[k, i] + c * f
                    z[k, i] = c * z[k, i] - s * f
            if not broke:
                d[l] -= p
                e[l] = g
                e[m] = 0.0
    return total


def symmetric_eigh(B, name="matrix"):
    """Eigen-decomposition of symmetric B: (values descending, vectors as columns)."""
    B = require_symmetric(B, name)
    z = B.copy()
    d, e = _tridiagonalize(z)
    floor = TOL.eig_offdiag_rel * float(np.sqrt((B * B).sum()))
    if _ql_implicit(d, e, z, TOL.eig_max_iter, floor) < 0:
        raise NoConvergence(f"QL iteration exceeded {TOL.eig_max_iter} sweeps")
    order = np.argsort(-d, kind="stable")
    return d[order], z[:, order]


def symmetric_eigenvalues(B):
    """Spectrum of a symmetric matrix (real eigenvalues, descending)."""
    d, _ = symmetric_eigh(B)
    return Spectrum(
        eigenvalues=d.astype(complex),
        spectral_radius=float(np.abs(d).max()),
        converged=True,
    )


# ---------------------------------------------------------------------------
# general eigensolver: balancing + Hessenberg + Francis double-shift QR


@njit(cache=True)
def _balance(a):
    n = a.shape[0]
    radix = 2.0
    sqrdx = radix * radix
    for _ in range(100):
        done = True
        for i in range(n):
            r = 0.0
            c = 0.0
            for j in range(n):
                if j != i:
                    c += abs(a[j, i])
                    r += abs(a[i, j])
            if c != 0.0 and r != 0.0:
                g = r / radix
                f = 1.0
                s = c + r
                while c < g:
                    f *= radix
                    c *= sqrdx
                g = r * radix
                while c > g:
                    f /= radix
                    c /= sqrdx
                if (c + r) / f < 0.95 * s:
                    done = False
                    g = 1.0 / f
                    for j in range(n):
                        a[i, j] *= g
                    for j in range(n):
                        a[j, i] *= f
        if done:
            break
    return a


@njit(cache=True)
def _hessenberg(a):
    n = a.shape[0]
    v = np.zeros(n)
    for k in range(1, n - 1):
        scale = 0.0
        for i in range(k, n):
            scale += abs(a[i, k - 1])
        if scale == 0.0:
            continue
        h = 0.0
        for i in range(k, n):
            v[i] = a[i, k - 1] / scale
            h += v[i] * v[i]
        f = v[k]
        g = -np.sqrt(h) if f >= 0.0 else np.sqrt(h)
        h -= f * g
        if h == 0.0:
            continue
        v[k] = f - g
        for j in range(n):
            s = 0.0
            for i in range(k, n):
                s += v[i] * a[i, j]
            s /= h
            for i in range(k, n):
                a[i, j] -= s * v[i]
        for i in range(n):
            s = 0.0
            for j in range(k, n):
                s += a[i, j] * v[j]
            s /= h
            for j in range(k, n):
                a[i, j] -= s * v[j]
        a[k, k - 1] = scale * g
        for i in range(k + 1, n):
            a[i, k - 1] = 0.0
    return a


@njit(cache=True)
def _hqr(a, max_iter):
    n = a.shape[0]
    wr = np.zeros(n)
    wi = np.zeros(n)
    anorm = 0.0
    for i in range(n):
        lo = i - 1 if i > 0 else 0
        for j in range(lo, n):
            anorm += abs(a[i, j])
    if anorm == 0.0:
        return wr, wi, True
    nn = n - 1
    t = 0.0
    total = 0
    while nn >= 0:
        its = 0
        while True:
            l = nn
            while l >= 1:
                s = abs(a[l - 1, l - 1]) + abs(a[l, l])
                if s == 0.0:
                    s = anorm
                if abs(a[l, l - 1]) <= _EPS * s:
                    a[l, l - 1] = 0.0
                    break
                l -= 1
            x = a[nn, nn]
            if l == nn:
                wr[nn] = x + t
                wi[nn] = 0.0
                nn -= 1
                break
            y = a[nn - 1, nn - 1]
            w = a[nn, nn - 1] * a[nn - 1, nn]
            if l == nn - 1:
                p = 0.5 * (y - x)
                q = p * p + w
                z = np.sqrt(abs(q))
                x += t
                if q >= 0.0:
                    z = p + (z if p >= 0.0 else -z)
                    wr[nn - 1] = x + z
                    wr[nn] = x + z
                    if z != 0.0:
                        wr[nn] = x - w / z
                    wi[nn - 1] = 0.0
                    wi[nn] = 0.0
                else:
                    wr[nn - 1] = x + p
                    wr[nn] = x + p
                    wi[nn - 1] = -z
                    wi[nn] = z
                nn -= 2
                break
            total += 1
            if total > max_iter:
                return wr, wi, False
            if its == 10 or its == 20:
                t += x
                for i in range(nn + 1):
                    a[i, i] -= x
                s = abs(a[nn, nn - 1]) + abs(a[nn - 1, nn - 2])
                x = 0.75 * s
                y = x
                w = -0.4375 * s * s
            its += 1
            m = nn - 2
            while m >= l:
                z = a[m, m]
                r = x - z
                s = y - z
                p = (r * s - w) / a[m + 1, m] + a[m, m + 1]
                q = a[m + 1, m + 1] - z - r - s
                r = a[m + 2, m + 1]
                s = abs(p) + abs(q) + abs(r)
                p /= s
                q /= s
                r /= s
                if m == l:
                    break
                u = abs(a[m, m - 1]) * (abs(q) + abs(r))
                v = abs(p) * (abs(a[m - 1, m - 1]) + abs(z) + abs(a[m + 1, m + 1]))
                if u <= _EPS * v:
                    break
                m -= 1
            for i in range(m + 2, nn + 1):
                a[i, i - 2] = 0.0
                if i != m + 2:
                    a[i, i - 3] = 0.0
            for k in range(m, nn):
                if k != m:
                    p = a[k, k - 1]
                    q = a[k + 1, k - 1]
                    r = 0.0
                    if k != nn - 1:
                        r = a[k + 2, k - 1]
                    x = abs(p) + abs(q) + abs(r)
                    if x != 0.0:
                        p /= x
                        q /= x
                        r /= x
                s = np.sqrt(p * p + q * q + r * r)
                if p < 0.0:
                    s = -s
                if s == 0.0:
                    continue
                if k == m:
                    if l != m:
                        a[k, k - 1] = -a[k, k - 1]
                else:
                    a[k, k - 1] = -s * x
                p += s
                x = p / s
                y = q / s
                z = r / s
                q /= p
                r /= p
                for j in range(k, nn + 1):
                    p = a[k, j] + q * a[k + 1, j]
                    if k != nn - 1:
                        p += r * a[k + 2, j]
                        a[k + 2, j] -= p * z
                    a[k + 1, j] -= p * y
                    a[k, j] -= p * x
                mmin = nn if nn < k + 3 else k + 3
                for i in range(l, mmin + 1):
                    p = x * a[i, k] + y * a[i, k + 1]
                    if k != nn - 1:
                        p += z * a[i, k + 2]
                        a[i, k + 2] -= p * r
                    a[i, k + 1] -= p * q
                    a[i, k] -= p
    return wr, wi, True


def general_spectrum(B):
    """All (possibly complex) eigenvalues of a square matrix."""
    B = require_square(B)
    if B.shape[0] == 1:
        return Spectrum.from_eigenvalues([complex(B[0, 0])])
    a = _balance(B.copy())
    a = _hessenberg(a)
    wr, wi, ok = _hqr(a, TOL.eig_max_iter)
    if not ok:
        raise NoConvergence(f"QR iteration exceeded {TOL.eig_max_iter} steps")
    return Spectrum.from_eigenvalues(wr + 1j * wi)


# ---------------------------------------------------------------------------
# derived quantities


def spectral_norm(B):
    """Largest singular value, via the symmetric eigensolver on B^T B."""
    B = as_matrix(B)
    gram = B.T @ B if B.shape[0] >= B.shape[1] else B @ B.T
    gram = 0.5 * (gram + gram.T)
    d, _ = symmetric_eigh(gram, "gram matrix")
    return float(np.sqrt(max(d[0], 0.0)))


def extreme_singular_values(B):
    B = require_square(B)
    gram = 0.5 * ((B.T @ B) + (B.T @ B).T)
    d, _ = symmetric_eigh(gram, "gram matrix")
    smax = float(np.sqrt(max(d[0], 0.0)))
    smin = float(np.sqrt(max(d[-1], 0.0)))
    return smax, smin


def condition_number_2(B):
    """Two-norm condition number sigma_max / sigma_min of a square matrix.

    Raises Singular when the smallest gram eigenvalue is numerically zero
    (the resolution limit of the B^T B route) or when sigma_min falls below
    the configured fraction of sigma_max.
    """
    B = require_square(B)
    n = B.shape[0]
    gram = 0.5 * ((B.T @ B) + (B.T @ B).T)
    d, _ = symmetric_eigh(gram, "gram matrix")
    lam_max, lam_min = d[0], d[-1]
    if lam_min <= max(0.0, n * TOL.gram_rank_rel * lam_max):
        raise Singular(f"gram eigenvalue {lam_min:g} numerically zero vs {lam_max:g}")
    smax, smin = float(np.sqrt(lam_max)), float(np.sqrt(lam_min))
    if smin <= TOL.singular_ratio * smax:
        raise Singular(f"sigma_min {smin:g} below {TOL.singular_ratio:g} * sigma_max {smax:g}")
    return smax / smin


def energy_norm(B, v):
    """sqrt(v^T B v) for SPD B."""
    B = require_square(B, "B")
    v = as_vector(v, "v")
    if v.size != B.shape[0]:
        raise DimensionMismatch("vector length does not match matrix order")
    q = float(v @ (B @ v))
    if q < TOL.quadform_floor:
        raise NegativeQuadraticForm(f"v^T B v = {q:g} < {TOL.quadform_floor:g}")
    return float(np.sqrt(max(q, 0.0)))


def _clamped_spd_eigs(B, name):
    d, V = symmetric_eigh(B, name)
    if d[-1] < -TOL.eig_clamp:
        raise NotSPD(f"{name}: eigenvalue {d[-1]:g} below -{TOL.eig_clamp:g}")
    return np.maximum(d, 0.0), V


def spd_sqrt(B):
    """Symmetric square root of SPD B via its eigendecomposition."""
    d, V = _clamped_spd_eigs(require_symmetric(B, "B"), "B")
    return (V * np.sqrt(d)) @ V.T


def spd_inv_sqrt(B):
    """Symmetric inverse square root of SPD B."""
    d, V = _clamped_spd_eigs(require_symmetric(B, "B"), "B")
    if d[-1] == 0.0:
        raise NotSPD("matrix is singular; cannot form inverse square root")
    return (V / np.sqrt(d)) @ V.T
