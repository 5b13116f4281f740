"""Circle measures: atoms plus piecewise-constant densities on [0, 1).

Constructions (smooth martingale-driven measures, Salem-type Cantor
measures), moduli of continuity/smoothness, closed-form Fourier
coefficients, and Beurling-Carleson entropy of candidate supports.

The representation is exact: pieces keep their real endpoints (Salem's
d-adic geometry is never snapped to a dyadic grid) and all interval masses
are closed-form interval intersections.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dyadic import MAX_DEPTH, DyadicMartingale
from .profiles import SmoothnessProfile

__all__ = [
    "CircleMeasure", "IntervalSet", "SalemSpec",
    "lebesgue", "atomic", "kahane_smooth", "salem_measure",
    "choose_salem_parameters", "modulus_continuity", "modulus_smoothness",
    "smoothness_constant", "anderson_check", "fourier_coefficient",
    "bc_entropy", "measure_of_set",
]

MASS_TOL = 1e-12


class CircleMeasure:
    """Atoms plus disjoint constant-density pieces on the circle [0, 1).

    ``signed=True`` admits negative densities/masses (boundary data for
    outer functions); the positive variant rejects them.
    """

    def __init__(self, atoms=(), pieces=(), signed: bool = False):
        ax, am = [], []
        for x, mss in atoms:
            ax.append(x % 1.0)
            am.append(float(mss))
        order = np.argsort(ax, kind="stable")
        self.atom_x = np.asarray(ax, dtype=float)[order]
        self.atom_m = np.asarray(am, dtype=float)[order]
        # merge duplicate positions
        if self.atom_x.size:
            keep_x, keep_m = [], []
            for x, mss in zip(self.atom_x, self.atom_m):
                if keep_x and x == keep_x[-1]:
                    keep_m[-1] += mss
                else:
                    keep_x.append(x)
                    keep_m.append(mss)
            self.atom_x = np.array(keep_x)
            self.atom_m = np.array(keep_m)

        pa, pb, pd = [], [], []
        for a, b, d in pieces:
            if not b > a:
                raise ValueError(f"piece [{a}, {b}) is empty or reversed")
            if b - a > 1.0 + 1e-15:
                raise ValueError(f"piece [{a}, {b}) longer than the circle")
            a %= 1.0
            length = b - a if b - a <= 1.0 else 1.0
            if a + length <= 1.0 + 1e-15:
                pa.append(a)
                pb.append(min(a + length, 1.0))
                pd.append(float(d))
            else:  # split a wrap-around piece at the seam
                pa.extend([a, 0.0])
                pb.extend([1.0, a + length - 1.0])
                pd.extend([float(d), float(d)])
        order = np.argsort(pa, kind="stable")
        self.piece_a = np.asarray(pa, dtype=float)[order]
        self.piece_b = np.asarray(pb, dtype=float)[order]
        self.piece_d = np.asarray(pd, dtype=float)[order]
        if self.piece_a.size > 1 and (self.piece_a[1:] < self.piece_b[:-1] - 1e-15).any():
            raise ValueError("pieces overlap")
        self.signed = bool(signed)
        if not signed:
            if (self.atom_m < 0).any():
                raise ValueError("negative atom mass in positive measure")
            if (self.piece_d < 0).any():
                raise ValueError("negative density in positive measure")
        # cumulative piece mass at piece starts, for O(log) mass queries
        piece_masses = self.piece_d * (self.piece_b - self.piece_a)
        self._piece_cum = np.concatenate([[0.0], np.cumsum(piece_masses)])
        self.total_mass = float(self.atom_m.sum() + piece_masses.sum())

    # -- mass queries ------------------------------------------------------

    def _piece_cdf(self, x):
        """Mass of the density part on [0, x), 0 <= x <= 1, vectorized."""
        x = np.asarray(x, dtype=float)
        k = np.searchsorted(self.piece_a, x, side="right") - 1
        out = np.where(k >= 0, self._piece_cum[np.clip(k, 0, None)], 0.0)
        kc = np.clip(k, 0, max(len(self.piece_a) - 1, 0))
        if len(self.piece_a):
            inside = np.clip(x - self.piece_a[kc], 0.0,
                             self.piece_b[kc] - self.piece_a[kc])
            out = out + np.where(k >= 0, self.piece_d[kc] * inside, 0.0)
        return out

    def _atom_count_mass(self, lo, hi, closed_right=False):
        """Total atom mass with lo <= x < hi (or <= hi), vectorized."""
        side = "right" if closed_right else "left"
        i0 = np.searchsorted(self.atom_x, lo, side="left")
        i1 = np.searchsorted(self.atom_x, hi, side=side)
        cum = np.concatenate([[0.0], np.cumsum(self.atom_m)])
        return cum[i1] - cum[i0]

    def interval_mass_many(self, a, b):
        """mu([a, b)) for arrays of endpoints; intervals wrap modulo 1."""
        a = np.atleast_1d(np.asarray(a, dtype=float))
        b = np.atleast_1d(np.asarray(b, dtype=float))
        length = b - a
        if (length < -1e-15).any() or (length > 1.0 + 1e-15).any():
            raise ValueError("interval length must lie in [0, 1]")
        full = length >= 1.0
        a = a % 1.0
        hi = a + np.minimum(length, 1.0)
        wraps = hi > 1.0
        m = np.where(
            wraps,
            (self._piece_cdf(np.ones_like(a)) - self._piece_cdf(a))
            + self._piece_cdf(np.minimum(hi - 1.0, 1.0))
            + self._atom_count_mass(a, np.ones_like(a))
            + self._atom_count_mass(np.zeros_like(a), hi - 1.0),
            self._piece_cdf(np.minimum(hi, 1.0)) - self._piece_cdf(a)
            + self._atom_count_mass(a, np.minimum(hi, 1.0)),
        )
        return np.where(full, self.total_mass, m)

    def interval_mass(self, a: float, b: float) -> float:
        return float(self.interval_mass_many([a], [b])[0])

    def closed_arc_mass(self, a: float, b: float) -> float:
        """mu([a, b]) with both boundary atoms counted, a <= b within [0, 1]."""
        piece = float(self._piece_cdf(np.array([min(b, 1.0)]))[0]
                      - self._piece_cdf(np.array([a]))[0])
        atom = float(self._atom_count_mass(np.array([a]), np.array([min(b, 1.0)]),
                                           closed_right=True)[0])
        # an arc ending exactly at 1 also closes on the atom at 0
        if b >= 1.0 and self.atom_x.size and self.atom_x[0] == 0.0:
            atom += float(self.atom_m[0])
        return piece + atom

    @property
    def breakpoints(self) -> np.ndarray:
        """Positions where the window-mass derivative can change."""
        return np.unique(np.concatenate([
            self.atom_x, self.piece_a, self.piece_b % 1.0, [0.0]]))

    def max_leaf_density(self) -> float:
        """Proxy for singularity of finite-depth constructions."""
        if not len(self.piece_d):
            return math.inf if self.atom_x.size else 0.0
        d = float(np.abs(self.piece_d).max())
        return math.inf if self.atom_x.size else d

    # -- Fourier ----------------------------------------------------------

    def fourier_many(self, ns) -> np.ndarray:
        """hat mu(n) = int e^{-2 pi i n x} dmu(x), exact closed form, vectorized."""
        ns = np.atleast_1d(np.asarray(ns))
        out = np.zeros(ns.shape, dtype=complex)
        if self.atom_x.size:
            out += np.exp(-2j * np.pi * np.outer(ns, self.atom_x)) @ self.atom_m
        if self.piece_a.size:
            nz = ns != 0
            n_nz = ns[nz]
            if n_nz.size:
                # chunk over n to bound the pieces-by-n workspace
                res = np.empty(n_nz.size, dtype=complex)
                chunk = max(1, int(4e6 / max(len(self.piece_a), 1)))
                for s in range(0, n_nz.size, chunk):
                    nn = n_nz[s:s + chunk, None]
                    ea = np.exp(-2j * np.pi * nn * self.piece_a[None, :])
                    eb = np.exp(-2j * np.pi * nn * self.piece_b[None, :])
                    res[s:s + chunk] = ((ea - eb) / (2j * np.pi * nn)) @ self.piece_d
                out[nz] += res
            out[~nz] += np.sum(self.piece_d * (self.piece_b - self.piece_a))
        return out

    def fourier(self, n: int) -> complex:
        return complex(self.fourier_many([n])[0])

    # -- dyadic alignment (fast path hook for spectral evaluation) ---------

    def dyadic_resolution(self):
        """N if all pieces are the 2^N uniform leaves, else None."""
        p = len(self.piece_a)
        if p == 0 or p & (p - 1):
            return None
        n = p.bit_length() - 1
        edges = np.arange(p + 1) / p
        if (np.array_equal(self.piece_a, edges[:-1])
                and np.array_equal(self.piece_b, edges[1:])):
            return n
        return None

    def __repr__(self):
        return (f"CircleMeasure(atoms={len(self.atom_x)}, "
                f"pieces={len(self.piece_a)}, mass={self.total_mass:.6g}"
                f"{', signed' if self.signed else ''})")


# -- constructors ----------------------------------------------------------


def lebesgue(total_mass: float = 1.0) -> CircleMeasure:
    """Absolutely continuous baseline: constant density on the circle."""
    if total_mass <= 0:
        raise ValueError("total mass must be positive")
    return CircleMeasure(pieces=[(0.0, 1.0, total_mass)])


def atomic(points) -> CircleMeasure:
    """Purely atomic measure; duplicate positions merge with summed mass."""
    pts = list(points)
    if any(mss <= 0 for _, mss in pts):
        raise ValueError("atom masses must be positive")
    return CircleMeasure(atoms=pts)


@dataclass
class KahaneLog:
    """Construction log for kahane_smooth: clip events per generation."""

    clips: list = field(default_factory=list)

    @property
    def total_clips(self) -> int:
        return sum(c for _, c in self.clips)


def kahane_smooth(phi: SmoothnessProfile, depth: int, seed: int = 0,
                  log: KahaneLog | None = None) -> CircleMeasure:
    """Random-sign martingale measure with increments phi(2^-n)/2 at each level.

    Starting from density 1, each node of value m splits into
    m +/- min(phi(2^-n)/2, m) with the sign drawn independently per node
    from the seeded generator; the clip at m keeps densities nonnegative
    without renormalizing, so the mean-value property stays exact.  The
    result is the depth-N piecewise-constant measure of the leaf densities.
    """
    if depth < 0 or depth > MAX_DEPTH:
        raise ValueError(f"depth must be in 0..{MAX_DEPTH}")
    rng = np.random.default_rng(seed)
    level = np.ones(1)
    for n in range(1, depth + 1):
        half = float(phi.phi(2.0**-n)) / 2.0
        delta = np.minimum(half, level)
        if log is not None:
            log.clips.append((n, int(np.count_nonzero(delta < half))))
        signs = rng.integers(0, 2, size=level.size) * 2 - 1
        child = np.empty(2 * level.size)
        child[0::2] = level + signs * delta
        child[1::2] = level - signs * delta
        level = child
    edges = np.arange(level.size + 1) / level.size
    return CircleMeasure(pieces=list(zip(edges[:-1], edges[1:], level)))


@dataclass(frozen=True)
class IntervalSet:
    """Disjoint closed arcs (support candidate) plus complementary open gaps.

    ``gap_generation[k]`` records at which construction step gap k appeared,
    when the set comes from a Cantor-type recursion; otherwise it is 0.
    """

    arcs: tuple          # ((a, b), ...) closed, sorted, disjoint
    gaps: tuple          # ((a, b), ...) open, the complement
    gap_generation: tuple = ()

    def total_arc_length(self) -> float:
        return sum(b - a for a, b in self.arcs)

    @staticmethod
    def from_arcs(arcs) -> "IntervalSet":
        arcs = tuple(sorted((float(a), float(b)) for a, b in arcs))
        for (a1, b1), (a2, b2) in zip(arcs, arcs[1:]):
            if a2 < b1:
                raise ValueError("arcs overlap")
        gaps = []
        for (_, b1), (a2, _) in zip(arcs, arcs[1:]):
            if a2 > b1:
                gaps.append((b1, a2))
        if arcs:
            wrap = (arcs[-1][1], arcs[0][0] + 1.0)
            if wrap[1] > wrap[0]:
                gaps.append(wrap)
        else:
            gaps.append((0.0, 1.0))
        return IntervalSet(arcs=arcs, gaps=tuple(gaps),
                           gap_generation=tuple(0 for _ in gaps))


@dataclass(frozen=True)
class SalemSpec:
    """Parameters of the Cantor-type construction with polynomial Fourier decay.

    Branching d >= 2, ratio 0 < xi < 1/d, spacing nu = (xi + 1/d)/2; at step j
    each interval spawns d children of length xi_j * |I| whose consecutive
    left endpoints sit nu * |I| apart, with xi_j drawn uniformly from
    [(1 - 1/(j+1)^2) xi, xi].
    """

    alpha: float
    epsilon: float
    d: int
    xi: float
    generations: int
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must be in (0, 1)")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.d < 2:
            raise ValueError("branching d must be at least 2")
        if not 0.0 < self.xi < 1.0 / self.d:
            raise ValueError("need 0 < xi < 1/d")
        if self.generations < 1:
            raise ValueError("need at least one generation")

    @property
    def nu(self) -> float:
        return (self.xi + 1.0 / self.d) / 2.0

    def xi_sequence(self) -> np.ndarray:
        rng = np.random.default_rng(self.seed)
        js = np.arange(1, self.generations + 1)
        lo = (1.0 - 1.0 / (js + 1) ** 2) * self.xi
        return lo + rng.random(self.generations) * (self.xi - lo)

    def gamma_sequence(self, xis=None) -> np.ndarray:
        """Gamma_j = prod_{i<=j} (nu - xi_i), the discarded-length bookkeeping."""
        if xis is None:
            xis = self.xi_sequence()
        return np.cumprod(self.nu - np.asarray(xis))

    def gamma_bound(self, j: int) -> float:
        """((1/d - xi)/2)^j * exp((pi^2/6 - 1) * 2 xi / (1/d - xi))."""
        base = (1.0 / self.d - self.xi) / 2.0
        return base**j * math.exp((math.pi**2 / 6 - 1.0)
                                  * 2.0 * self.xi / (1.0 / self.d - self.xi))


def choose_salem_parameters(alpha: float, epsilon: float) -> tuple[int, float]:
    """Heuristic (d, xi) = (2, 2^(-1/alpha)); the exact dependence on
    (alpha, epsilon) is not pinned down by the construction, only that
    xi = d^(-1/alpha) matches Hausdorff dimension alpha.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must be in (0, 1)")
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    d = 2
    xi = d ** (-1.0 / alpha)
    if 1.0 / d - xi < 1e-2:
        import warnings

        warnings.warn(f"xi={xi:.4f} is close to the 1/d={1 / d} boundary; "
                      "gap lengths degenerate", stacklevel=2)
    return d, xi


def salem_measure(spec: SalemSpec) -> tuple[CircleMeasure, IntervalSet]:
    """Generation-J Cantor construction with the uniform mass d^-J per leaf.

    Returns the piecewise-constant measure and the IntervalSet holding the
    closed leaves of E_J together with every discarded gap, labeled by the
    generation at which it appeared.
    """
    d, J, nu = spec.d, spec.generations, spec.nu
    if (d - 1) * nu + spec.xi >= 1.0:
        raise ValueError("children would overflow the parent interval")
    xis = spec.xi_sequence()
    starts = np.array([0.0])
    length = 1.0
    gaps, gap_gen = [], []
    for j in range(1, J + 1):
        xi_j = xis[j - 1]
        child_len = xi_j * length
        offsets = np.arange(d) * (nu * length)
        new_starts = (starts[:, None] + offsets[None, :]).ravel()
        # gaps inside each parent: between consecutive children, then trailing
        for k in range(d - 1):
            lo = starts + offsets[k] + child_len
            hi = starts + offsets[k + 1]
            gaps.extend(zip(lo, hi))
            gap_gen.extend([j] * len(starts))
        lo = starts + offsets[d - 1] + child_len
        hi = starts + length
        gaps.extend(zip(lo, hi))
        gap_gen.extend([j] * len(starts))
        starts = new_starts
        length = child_len
    mass = float(d) ** -J
    density = mass / length
    starts = np.sort(starts)
    measure = CircleMeasure(pieces=[(a, a + length, density) for a in starts])
    arcs = tuple((float(a), float(a + length)) for a in starts)
    order = np.argsort([g[0] for g in gaps])
    gaps_sorted = tuple((float(gaps[i][0]), float(gaps[i][1])) for i in order)
    gens_sorted = tuple(int(gap_gen[i]) for i in order)
    support = IntervalSet(arcs=arcs, gaps=gaps_sorted, gap_generation=gens_sorted)
    return measure, support


# -- moduli ----------------------------------------------------------------

_NUDGE = 1e-12


def _window_candidates(mu: CircleMeasure, t: float) -> np.ndarray:
    b = mu.breakpoints
    cand = np.concatenate([b, (b - t) % 1.0])
    if mu.atom_x.size:  # window mass jumps at atom translates
        cand = np.concatenate([cand, (cand + _NUDGE) % 1.0, (cand - _NUDGE) % 1.0])
    return np.unique(cand)


def modulus_continuity(mu: CircleMeasure, t: float) -> float:
    """delta_mu(t) = sup over intervals |I| <= t of mu(I).

    For positive measures the sup over lengths <= t is attained at length t,
    so only the window position is scanned; candidates are the points where
    the window mass is non-smooth (breakpoints and their t-translates).
    """
    if not 0.0 < t <= 1.0:
        raise ValueError(f"t must be in (0, 1], got {t}")
    xs = _window_candidates(mu, t)
    return float(mu.interval_mass_many(xs, xs + t).max())


def _smoothness_h_candidates(mu: CircleMeasure, t: float) -> np.ndarray:
    b = mu.breakpoints
    cands = [np.array([t])]
    gaps = np.diff(np.concatenate([b, [b[0] + 1.0]]))
    cands.append(np.unique(gaps))
    cands.append(2.0 ** -np.arange(0, 25))
    if b.size <= 64:  # small case: all pairwise spans and their halves
        diffs = (b[None, :] - b[:, None]).ravel() % 1.0
        diffs = diffs[diffs > 0]
        cands.extend([diffs, diffs / 2.0])
    h = np.unique(np.concatenate(cands))
    return h[(h > 0) & (h <= t)]


def modulus_smoothness(mu: CircleMeasure, t: float) -> float:
    """omega_mu(t): sup over adjacent equal-length windows |I| = |J| <= t
    of |mu(I) - mu(J)|.

    For each candidate half-width h the position scan is exact (the
    difference is piecewise linear between breakpoint translates); h runs
    over the window lengths where the two-parameter supremum can live for
    the stored measure class: t itself, breakpoint gaps, dyadic lengths,
    and (for small breakpoint sets) all pairwise spans and their halves.
    """
    if not 0.0 < t <= 1.0:
        raise ValueError(f"t must be in (0, 1], got {t}")
    best = 0.0
    for h in _smoothness_h_candidates(mu, t):
        b = mu.breakpoints
        xs = np.concatenate([b, (b - h) % 1.0, (b + h) % 1.0])
        if mu.atom_x.size:
            xs = np.concatenate([xs, (xs + _NUDGE) % 1.0, (xs - _NUDGE) % 1.0])
        xs = np.unique(xs)
        right = mu.interval_mass_many(xs, xs + h)
        left = mu.interval_mass_many((xs - h) % 1.0, (xs - h) % 1.0 + h)
        best = max(best, float(np.abs(right - left).max()))
    return best


def smoothness_constant(mu: CircleMeasure, phi: SmoothnessProfile, t_grid) -> float:
    """Least admissible C on the grid for omega_mu(t) <= C t phi(t)."""
    t_grid = np.atleast_1d(np.asarray(t_grid, dtype=float))
    best = 0.0
    for t in t_grid:
        denom = t * float(phi.phi(t))
        if denom == 0.0:
            raise ZeroDivisionError(f"phi({t}) vanished")
        best = max(best, modulus_smoothness(mu, float(t)) / denom)
    return best


@dataclass
class AndersonReport:
    """Both-moduli check: delta_mu(t) <= 8t(2 + log log(e/t)/96) and
    omega_mu(t) <= 36 t / sqrt(log(e/t)) on a grid."""

    rows: list                  # (t, delta, delta_bound, omega, omega_bound)
    delta_pass: bool
    omega_pass: bool
    worst_delta_margin: float   # max delta/bound
    worst_omega_margin: float


def anderson_check(mu: CircleMeasure, t_grid) -> AndersonReport:
    rows = []
    wd = wo = 0.0
    for t in np.atleast_1d(np.asarray(t_grid, dtype=float)):
        t = float(t)
        delta = modulus_continuity(mu, t)
        omega = modulus_smoothness(mu, t)
        delta_bound = 8.0 * t * (2.0 + math.log(math.log(math.e / t)) / 96.0)
        omega_bound = 36.0 * t / math.sqrt(math.log(math.e / t))
        rows.append((t, delta, delta_bound, omega, omega_bound))
        wd = max(wd, delta / delta_bound)
        wo = max(wo, omega / omega_bound)
    return AndersonReport(rows, wd <= 1.0 + 1e-12, wo <= 1.0 + 1e-12, wd, wo)


def fourier_coefficient(mu: CircleMeasure, n: int) -> complex:
    """hat mu(n), exact closed form (atoms plus piecewise-constant pieces)."""
    return mu.fourier(n)


# -- Beurling-Carleson entropy --------------------------------------------


@dataclass
class BCEntropyReport:
    total: float
    generation_subtotals: list   # (generation, sum |I| log(1/|I|))
    subtotal_ratios: list
    verdict: str                 # convergent | divergent | trivial

    @property
    def convergent(self) -> bool:
        return self.verdict in ("convergent", "trivial")


def bc_entropy(E: IntervalSet) -> BCEntropyReport:
    """sum |I_n| log(1/|I_n|) over the stored complementary gaps.

    For Cantor-type sets the per-generation subtotals are reported; the
    verdict is convergent when the subtotal sequence decays geometrically
    (every late-generation ratio below 1).
    """
    lengths = np.array([b - a for a, b in E.gaps])
    gens = np.array(E.gap_generation) if E.gap_generation else np.zeros(len(E.gaps), int)
    keep = lengths > 0
    lengths, gens = lengths[keep], gens[keep]
    terms = lengths * np.log(1.0 / lengths)
    total = float(terms.sum())
    subtotals = []
    for g in np.unique(gens):
        subtotals.append((int(g), float(terms[gens == g].sum())))
    ratios = []
    for (_, s1), (_, s2) in zip(subtotals, subtotals[1:]):
        if s1 > 0:
            ratios.append(s2 / s1)
    if len(subtotals) <= 1:
        verdict = "trivial"
    else:
        # decide from the tail rate: early generations can tick upward while
        # the log factor still grows, so use the geometric mean over the
        # second half of the generations
        vals = np.array([s for _, s in subtotals])
        j0 = max(1, len(vals) // 2)
        if vals[j0 - 1] <= 0:
            verdict = "convergent"
        else:
            rate = (vals[-1] / vals[j0 - 1]) ** (1.0 / (len(vals) - j0))
            verdict = "convergent" if rate < 0.98 else "divergent"
    return BCEntropyReport(total, subtotals, ratios, verdict)


def measure_of_set(mu: CircleMeasure, E: IntervalSet) -> float:
    """mu-mass of the union of closed arcs (boundary atoms counted in)."""
    return float(sum(mu.closed_arc_mass(a, b) for a, b in E.arcs))


def martingale_of(mu: CircleMeasure, depth: int) -> DyadicMartingale:
    """Convenience re-export: the dyadic martingale mu(I)/|I| of the measure."""
    from .dyadic import martingale_from_measure

    return martingale_from_measure(mu, depth)
