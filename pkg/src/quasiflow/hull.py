"""Hull functions on the torus T^p, truncated to a symmetric set of modes.

A hull field stores complex coefficients on an "active" set of integer mode
indices: the largest subset of the box |m|_inf <= N (intersected with the
wavevector ball |k(m)| <= K_max) that is mapped to itself by every group
element.  Closure under the group action makes symmetrization exact; closure
under negation lets the Hermitian constraint a_{-m} = conj(a_m) keep field
values real.

Products of fields are evaluated pseudospectrally on a zero-padded FFT grid.
With the default padding factor 2 the grid has at least 4N+2 points per axis,
so the retained coefficients of triple products (computed by chaining the two
multiplications on the padded grid, as ``cubic`` and ``triple_product`` do)
carry no aliasing error at all.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .symmetry import FrequencyModule, integer_box, module_points_in_ball

DEFAULT_PAD_FACTOR = 2
HERMITIAN_TOL = 1e-12
IMAG_RESIDUE_TOL = 1e-10


class InactiveMode(KeyError):
    """Mode index outside the active set."""


class EmptyActiveSet(ValueError):
    """Symmetry reduction left nothing but the zero mode."""


class ImaginaryResidue(ValueError):
    """Field values came out with a non-negligible imaginary part."""


class DimensionUnsupported(ValueError):
    """Operation requires a different ambient dimension."""


class BallExceedsTruncation(ValueError):
    """Requested wavevector ball is not resolved by the truncation."""


class TooLarge(ValueError):
    """Brute-force path refused; the mode count is too big for it."""


def default_grid_axis_points(p: int) -> int:
    # sup-norm estimates sample 64^p points for planar-size problems and
    # back off for high-rank modules where that grid would not fit
    if p <= 4:
        return 64
    return 16


class ActiveModeSet:
    """Largest group-invariant set of modes in a box-and-ball truncation.

    Computed by discarding every index whose group orbit leaves the
    truncation (one orbit check per index is equivalent to iterating removal
    to a fixed point).  Indices are stored in lexicographic order; all
    derived arrays (wavevectors, group permutations, negation permutation)
    are aligned with that order.
    """

    def __init__(self, module: FrequencyModule, N: int, K_max: float = np.inf):
        if N < 0 or int(N) != N:
            raise ValueError("N must be a nonnegative integer")
        if not (K_max > 0):
            raise ValueError("K_max must be positive")
        self.module = module
        self.N = int(N)
        self.K_max = float(K_max)

        p = module.rank
        box = integer_box(p, self.N)
        kvec = box @ module.generators
        klen = np.linalg.norm(kvec, axis=1)
        inside = klen <= self.K_max * (1.0 + 1e-12) + 1e-12
        cand = box[inside]
        cand_set = {tuple(m) for m in cand}

        keep = np.ones(len(cand), dtype=bool)
        for rep in module.integer_reps:
            images = cand @ rep.T
            for i, img in enumerate(images):
                if keep[i] and tuple(img) not in cand_set:
                    keep[i] = False
        kept = {tuple(m) for m in cand[keep]}
        # orbits that partially left the set must go entirely
        changed = True
        while changed:
            changed = False
            for rep in module.integer_reps:
                for m in list(kept):
                    if tuple(rep @ np.array(m)) not in kept:
                        kept.discard(m)
                        changed = True

        if self.N > 0 and len(kept) <= 1:
            raise EmptyActiveSet(
                "symmetry reduction left only the zero mode; "
                "raise N or K_max"
            )

        self.indices = np.array(sorted(kept), dtype=np.int64).reshape(-1, p)
        self._pos = {tuple(m): i for i, m in enumerate(self.indices)}
        self.wavevectors = self.indices @ module.generators
        self.ksq = np.einsum("ij,ij->i", self.wavevectors, self.wavevectors)
        self.msq = np.einsum("ij,ij->i", self.indices, self.indices).astype(float)

        self.perms = np.empty((len(module.integer_reps), len(self.indices)), dtype=np.int64)
        for g, rep in enumerate(module.integer_reps):
            images = self.indices @ rep.T
            self.perms[g] = [self._pos[tuple(img)] for img in images]
        self.neg_perm = np.array(
            [self._pos[tuple(-m)] for m in self.indices], dtype=np.int64
        )
        self._grid_cache: dict[tuple, tuple] = {}

    @property
    def rank(self) -> int:
        return self.indices.shape[1]

    def __len__(self):
        return len(self.indices)

    def __repr__(self):
        return (
            f"ActiveModeSet(N={self.N}, K_max={self.K_max}, "
            f"modes={len(self)}, p={self.rank})"
        )

    def position(self, m) -> int:
        key = tuple(int(x) for x in np.asarray(m).ravel())
        try:
            return self._pos[key]
        except KeyError:
            raise InactiveMode(f"mode {key} is not in the active set") from None

    def contains(self, m) -> bool:
        key = tuple(int(x) for x in np.asarray(m).ravel())
        return key in self._pos

    def orbit_positions(self, m) -> np.ndarray:
        """Positions of the group orbit of an active index (sorted, unique)."""
        i = self.position(m)
        return np.unique(self.perms[:, i])

    def _grid(self, axis_points: int | None = None, pad_factor: int = DEFAULT_PAD_FACTOR):
        """Scatter positions for an FFT grid; grid must hold indices exactly."""
        if axis_points is None:
            axis_points = pad_factor * (2 * self.N + 1)
        G = max(int(axis_points), 2 * self.N + 1)
        key = (G,)
        hit = self._grid_cache.get(key)
        if hit is None:
            shape = (G,) * self.rank
            flat = np.zeros(len(self), dtype=np.int64)
            for j in range(self.rank):
                flat = flat * G + (self.indices[:, j] % G)
            hit = (shape, flat)
            self._grid_cache[key] = hit
        return hit

    def grid_values(self, coeffs: np.ndarray, axis_points: int | None = None,
                    pad_factor: int = DEFAULT_PAD_FACTOR) -> np.ndarray:
        """Real field values on a uniform torus grid (inverse FFT)."""
        shape, flat = self._grid(axis_points, pad_factor)
        spread = np.zeros(shape, dtype=complex)
        spread.ravel()[flat] = coeffs
        vals = np.fft.ifftn(spread) * spread.size
        return np.ascontiguousarray(vals.real)

    def coefficients_from_grid(self, vals: np.ndarray) -> np.ndarray:
        """Retained coefficients of the trigonometric interpolant of vals."""
        shape, flat = self._grid(vals.shape[0])
        spec = np.fft.fftn(vals) / vals.size
        return spec.ravel()[flat].copy()


def make_field(module: FrequencyModule, N: int, K_max: float = np.inf) -> "HullField":
    """Zero hull field on the invariant truncation (N, K_max)."""
    return HullField.zeros(ActiveModeSet(module, N, K_max))


@dataclass
class HullField:
    """Coefficients of a truncated hull function on T^p.

    The Hermitian constraint is enforced at write time through
    ``set_coefficient``; bulk constructors should call ``hermitianized`` when
    the raw coefficients are not already symmetric.  ``symmetric`` marks
    fields produced by ``symmetrize`` (or preserved from one); it is advisory
    and is re-measured by ``symmetry_drift``.
    """

    active: ActiveModeSet
    coeffs: np.ndarray
    symmetric: bool = False

    @classmethod
    def zeros(cls, active: ActiveModeSet) -> "HullField":
        return cls(active, np.zeros(len(active), dtype=complex))

    def copy(self) -> "HullField":
        return HullField(self.active, self.coeffs.copy(), self.symmetric)

    # -- coefficient access -------------------------------------------------

    def set_coefficient(self, m, value: complex) -> None:
        """Set a_m (and a_{-m} = conj) so field values stay real."""
        i = self.active.position(m)
        j = self.active.neg_perm[i]
        value = complex(value)
        if i == j and abs(value.imag) > HERMITIAN_TOL * max(1.0, abs(value)):
            raise ValueError("self-conjugate mode must have a real coefficient")
        self.coeffs[i] = value
        self.coeffs[j] = np.conj(value)
        self.symmetric = False

    def get_coefficient(self, m) -> complex:
        return complex(self.coeffs[self.active.position(m)])

    def hermitianized(self) -> "HullField":
        c = 0.5 * (self.coeffs + np.conj(self.coeffs[self.active.neg_perm]))
        return HullField(self.active, c, self.symmetric)

    def hermitian_defect(self) -> float:
        return float(
            np.max(np.abs(self.coeffs - np.conj(self.coeffs[self.active.neg_perm])))
        ) if len(self.coeffs) else 0.0

    # -- algebra --------------------------------------------------------

    def __add__(self, other: "HullField") -> "HullField":
        self._check_same_active(other)
        return HullField(self.active, self.coeffs + other.coeffs)

    def __sub__(self, other: "HullField") -> "HullField":
        self._check_same_active(other)
        return HullField(self.active, self.coeffs - other.coeffs)

    def __mul__(self, scalar) -> "HullField":
        return HullField(self.active, self.coeffs * scalar)

    __rmul__ = __mul__

    def _check_same_active(self, other: "HullField") -> None:
        if other.active is not self.active:
            raise ValueError("fields must share an active mode set")

    # -- norms ----------------------------------------------------------

    def l2_norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def l1_norm(self) -> float:
        return float(np.sum(np.abs(self.coeffs)))

    def hs_norm(self, s: float) -> float:
        w = (self.active.msq + 1.0) ** s
        return float(np.sqrt(np.sum(w * np.abs(self.coeffs) ** 2)))

    def grad_sq(self) -> float:
        """Sum over torus directions of the squared l2 norm of dU/dphi_i."""
        return float(np.sum(self.active.msq * np.abs(self.coeffs) ** 2))

    # -- symmetry ---------------------------------------------------------

    def symmetrize(self) -> "HullField":
        """Orthogonal projection onto the group-invariant subspace.

        Averages coefficients over the group action; idempotent, and exact
        because the active set is closed under every integer representation.
        """
        sym = np.mean(self.coeffs[self.active.perms], axis=0)
        return HullField(self.active, sym, symmetric=True)

    def symmetry_drift(self) -> float:
        """max over group elements and modes of |a_{gamma m} - a_m|."""
        drift = 0.0
        for perm in self.active.perms:
            d = np.max(np.abs(self.coeffs[perm] - self.coeffs))
            if d > drift:
                drift = float(d)
        return drift

    def support_set(self, eps: float) -> np.ndarray:
        """Active indices with |a_m| > eps (rows)."""
        if eps < 0:
            raise ValueError("support threshold must be nonnegative")
        return self.active.indices[np.abs(self.coeffs) > eps]

    # -- pointwise products ----------------------------------------------

    def values(self, axis_points: int | None = None,
               pad_factor: int = DEFAULT_PAD_FACTOR) -> np.ndarray:
        return self.active.grid_values(self.coeffs, axis_points, pad_factor)

    def cubic(self, pad_factor: int = DEFAULT_PAD_FACTOR) -> "HullField":
        """Retained coefficients of u^3, alias-free.

        Both multiplications happen on the padded grid, which resolves
        indices out to 4N+1 per axis and therefore holds every triple-sum
        image of retained modes without wraparound.
        """
        if pad_factor < 2:
            raise ValueError("cubic terms need a padding factor of at least 2")
        vals = self.values(pad_factor=pad_factor)
        return HullField(self.active, self.active.coefficients_from_grid(vals ** 3))

    def squared_l2_of_square(self, pad_factor: int = DEFAULT_PAD_FACTOR) -> float:
        """l2 norm squared of the untruncated square of the field.

        Evaluated as the grid mean of u^4; exact because the padded grid
        resolves the square's full spectrum.
        """
        vals = self.values(pad_factor=max(pad_factor, 2))
        return float(np.mean(vals ** 4))

    # -- physical-space sampling -------------------------------------------

    def evaluate_physical(self, points: np.ndarray, chunk: int = 4096) -> np.ndarray:
        """Field values u(x) = U(A x) at physical points (rows).

        Raises ImaginaryResidue when coefficients are not Hermitian enough
        for the values to be real.
        """
        points = np.atleast_2d(np.asarray(points, dtype=float))
        if points.shape[1] != self.active.module.dimension:
            raise ValueError("points have the wrong ambient dimension")
        out = np.empty(len(points))
        K = self.active.wavevectors
        for lo in range(0, len(points), chunk):
            block = points[lo:lo + chunk]
            waves = np.exp(1j * (block @ K.T))
            vals = waves @ self.coeffs
            resid = np.max(np.abs(vals.imag)) if len(vals) else 0.0
            if resid > IMAG_RESIDUE_TOL:
                raise ImaginaryResidue(
                    f"imaginary residue {resid:.3e}; coefficients are not Hermitian"
                )
            out[lo:lo + chunk] = vals.real
        return out if out.shape[0] > 1 else out

    def torus_minmax(self, axis_points: int | None = None) -> tuple[float, float]:
        """(min, max) of the hull function over a uniform torus grid."""
        if axis_points is None:
            axis_points = default_grid_axis_points(self.active.rank)
        vals = self.values(axis_points=axis_points)
        return float(vals.min()), float(vals.max())

    def energy(self, lam: float) -> float:
        """Gradient-flow energy 0.5|(lap+1)u|^2 - 0.5*lam*|u|^2 + 0.25|u^2|^2."""
        a2 = np.abs(self.coeffs) ** 2
        quad = 0.5 * np.sum((1.0 - self.active.ksq) ** 2 * a2)
        mass = np.sum(a2)
        return float(quad - 0.5 * lam * mass + 0.25 * self.squared_l2_of_square())


def pointwise_product(f: HullField, g: HullField,
                      pad_factor: int = DEFAULT_PAD_FACTOR) -> HullField:
    """Retained coefficients of f*g, computed on the padded grid.

    A single product is alias-free for padding factor >= 2 (the grid holds
    all pair sums of retained modes).  Chaining through a third factor must
    keep the intermediate on the grid -- use ``triple_product`` or
    ``HullField.cubic`` for that; re-truncating the intermediate to the
    active set would discard tail modes that feed back into retained ones.
    """
    f._check_same_active(g)
    if pad_factor < 2:
        raise ValueError("padding factor must be at least 2")
    vals = f.values(pad_factor=pad_factor) * g.values(pad_factor=pad_factor)
    return HullField(f.active, f.active.coefficients_from_grid(vals))


def triple_product(f: HullField, g: HullField, h: HullField,
                   pad_factor: int = DEFAULT_PAD_FACTOR) -> HullField:
    """Retained coefficients of f*g*h with the intermediate kept on the grid."""
    f._check_same_active(g)
    f._check_same_active(h)
    if pad_factor < 2:
        raise ValueError("triple products need a padding factor of at least 2")
    vals = (
        f.values(pad_factor=pad_factor)
        * g.values(pad_factor=pad_factor)
        * h.values(pad_factor=pad_factor)
    )
    return HullField(f.active, f.active.coefficients_from_grid(vals))


def inner_l2(f: HullField, g: HullField) -> float:
    """Real l2 inner product of two fields on the same active set."""
    f._check_same_active(g)
    val = np.sum(f.coeffs * np.conj(g.coeffs))
    return float(val.real)


def convolve_direct(*fields: HullField, max_pair_sums: int = 4_000_000) -> dict:
    """Exact convolution of the fields' coefficient arrays, as {index: coeff}.

    Brute force, no FFT; intended as an oracle for the pseudospectral path
    on small mode sets.  Raises TooLarge rather than grinding through a
    search with more than ``max_pair_sums`` pairwise products per stage.
    """
    out = {tuple(m): c for m, c in zip(fields[0].active.indices, fields[0].coeffs)}
    for f in fields[1:]:
        if len(out) * len(f.active) > max_pair_sums:
            raise TooLarge("direct convolution refused; use the padded-grid path")
        nxt: dict = {}
        items = list(out.items())
        for m1, c1 in items:
            if c1 == 0:
                continue
            for m2, c2 in zip(f.active.indices, f.coeffs):
                if c2 == 0:
                    continue
                key = tuple(np.array(m1) + m2)
                nxt[key] = nxt.get(key, 0.0) + c1 * c2
        out = nxt
    return out


def l1_hs_bound_constant(active: ActiveModeSet, s: float) -> float:
    """Cauchy-Schwarz constant C with l1 <= C * hs on this active set."""
    if s <= active.rank / 2.0:
        warnings.warn(
            f"s = {s} does not exceed p/2 = {active.rank / 2}; the constant "
            "does not stay bounded as the truncation grows",
            stacklevel=2,
        )
    return float(np.sqrt(np.sum((active.msq + 1.0) ** (-s))))


def separation_from_constants(field: HullField,
                              grid_resolution: int | None = None) -> float:
    """Half the range of the hull function over a sample grid.

    A lower bound for the true half-range; refining the grid can only
    increase it.
    """
    lo, hi = field.torus_minmax(grid_resolution)
    return 0.5 * (hi - lo)


def condition_iii_check(field: HullField, ball_radius: float, covering_radius: float,
                        eps: float):
    """Covering check: every module point in the ball is near the support.

    Enumerates module points with |k| <= ball_radius (coefficients bounded
    by the module's relation bound), and tests that each lies within
    ``covering_radius`` of the wavevector of some mode with |a_m| > eps.
    Returns (ok, uncovered) where uncovered lists witness wavevectors.
    """
    if ball_radius > field.active.K_max:
        raise BallExceedsTruncation(
            "ball radius exceeds the truncation's wavevector cap; "
            "the check would be vacuous"
        )
    if eps < 0:
        raise ValueError("support threshold must be nonnegative")
    sup = np.abs(field.coeffs) > eps
    support_k = field.active.wavevectors[sup]
    _, ball_k = module_points_in_ball(field.active.module, ball_radius)
    if len(support_k) == 0:
        return False, [k for k in ball_k]
    uncovered = []
    for k in ball_k:
        d = np.min(np.linalg.norm(support_k - k, axis=1))
        if d > covering_radius:
            uncovered.append(k)
    return len(uncovered) == 0, uncovered


def render_image(field: HullField, window: tuple[float, float],
                 resolution: int = 512) -> np.ndarray:
    """Grayscale raster of the field over a square planar window.

    Row r runs top-down (decreasing y), column c left-right (increasing x).
    The value range maps linearly onto 0..255; a constant field renders as
    mid-gray 128.
    """
    if field.active.module.dimension != 2:
        raise DimensionUnsupported("rendering needs a two-dimensional pattern")
    if resolution < 2:
        raise ValueError("resolution must be at least 2")
    lo, hi = float(window[0]), float(window[1])
    if not hi > lo:
        raise ValueError("window must be a nonempty interval")
    xs = np.linspace(lo, hi, resolution)
    ys = np.linspace(hi, lo, resolution)
    K = field.active.wavevectors
    ex = np.exp(1j * np.outer(xs, K[:, 0]))
    ey = np.exp(1j * np.outer(ys, K[:, 1]))
    vals = (ey * field.coeffs) @ ex.T
    resid = np.max(np.abs(vals.imag))
    if resid > IMAG_RESIDUE_TOL:
        raise ImaginaryResidue(
            f"imaginary residue {resid:.3e}; coefficients are not Hermitian"
        )
    vals = vals.real
    vmin, vmax = vals.min(), vals.max()
    span = vmax - vmin
    if span < 1e-12 * max(1.0, abs(vmax), abs(vmin)):
        return np.full((resolution, resolution), 128, dtype=np.uint8)
    return np.round(255.0 * (vals - vmin) / span).astype(np.uint8)
