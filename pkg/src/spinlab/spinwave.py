"""Spin-wave profiles, their Dirichlet energy, and the relative-entropy bound.

The spin-wave interpolates the amplitude psi on an inner box down to 0
outside the big box, harmonically with respect to the connectivity
conductances d_eps.  The harmonic profile is the electrical voltage, equal to
psi times the probability that the conductance walk hits the inner box before
leaving.  Bond samples A deform the wave to its cluster-wise minimum; the
entropy of the tilted state is bounded by a quadratic form in the deformed
wave, split by Jensen into two cluster-displacement terms and one smooth
term.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import fftconvolve
from scipy.sparse.linalg import LinearOperator, cg

from .longrange_walk import WalkKernel, connectivity_bound


def conductance_grid(walk: WalkKernel, eps: float, radius: int = None) -> np.ndarray:
    """d_eps surrogate conductances on a square grid, no self-conductance."""
    d = connectivity_bound(walk, eps, radius=radius)
    g = d.grid.copy()
    g[d.radius, d.radius] = 0.0
    return g


@dataclass
class SpinWaveField:
    n: int
    inner: int  # radius R of the inner box held at psi
    psi: float
    values: np.ndarray  # full grid, side 2*margin+1, zero outside the box
    margin: int
    cgrid: np.ndarray
    residual: float

    def at(self, x) -> float:
        return float(self.values[x[0] + self.margin, x[1] + self.margin])

    def export(self) -> str:
        m = self.margin
        lines = []
        for x in range(-self.n, self.n + 1):
            for y in range(-self.n, self.n + 1):
                lines.append(f"{x} {y} {self.values[x + m, y + m]:.10g}")
        return "\n".join(lines) + "\n"


def _sup_grid(margin: int) -> np.ndarray:
    ax = np.arange(-margin, margin + 1)
    return np.maximum.outer(np.abs(ax), np.abs(ax))


def solve_spinwave(walk: WalkKernel, n: int, inner: int, psi: float,
                   eps: float = 0.2, tol: float = 1e-9,
                   cgrid: np.ndarray = None, maxiter: int = 10 ** 5) -> SpinWaveField:
    """Discrete Dirichlet problem: psi on the inner box, 0 outside the box,
    harmonic for the conductances in between, solved by conjugate gradients
    with an FFT matvec."""
    if inner >= n:
        raise ValueError("inner radius must be smaller than n")
    if cgrid is None:
        cgrid = conductance_grid(walk, eps)
    k = (cgrid.shape[0] - 1) // 2
    margin = n + k
    sup = _sup_grid(margin)
    free = (sup > inner) & (sup <= n)
    fixed = np.where(sup <= inner, psi, 0.0)
    c_tot = float(cgrid.sum())

    idx = np.where(free.ravel())[0]
    shape = fixed.shape

    def matvec(u):
        grid = np.zeros(shape)
        grid.ravel()[idx] = u
        conv = fftconvolve(grid, cgrid, mode="same")
        return c_tot * u - conv.ravel()[idx]

    b = fftconvolve(fixed, cgrid, mode="same").ravel()[idx]
    op = LinearOperator((len(idx), len(idx)), matvec=matvec)
    u, info = cg(op, b, rtol=tol * 1e-2, atol=0.0, maxiter=maxiter)
    values = fixed.copy()
    values.ravel()[idx] = u
    conv = fftconvolve(values, cgrid, mode="same")
    res = float(np.max(np.abs(conv - c_tot * values).ravel()[idx]))
    if info != 0 or res > tol * c_tot:
        raise RuntimeError(f"solver did not converge: residual {res:.3e}")
    return SpinWaveField(n, inner, psi, values, margin, cgrid, res)


def dirichlet_energy(wave: SpinWaveField, weights: np.ndarray = None) -> float:
    """sum over x in the box, y anywhere, of c(x-y)(Psi(x) - Psi(y))^2."""
    c = wave.cgrid if weights is None else weights
    c_tot = float(c.sum())
    v = wave.values
    conv_v = fftconvolve(v, c, mode="same")
    conv_v2 = fftconvolve(v * v, c, mode="same")
    local = c_tot * v * v - 2.0 * v * conv_v + conv_v2
    box = _sup_grid(wave.margin) <= wave.n
    return float(np.sum(local[box]))


def compute_R_delta(v_sites, delta: float, eps: float, walk: WalkKernel,
                    f_sup: float, radius: int = None) -> int:
    """Smallest R with |V| * (d_eps mass beyond R - rho_V) <= delta/(2 f_sup).

    The unresolved mass past the numerical truncation is charged to every
    tail, so the answer errs on the large side.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    v_sites = list(v_sites)
    rho = max(1, max((max(abs(x[0]), abs(x[1])) for x in v_sites), default=1))
    d = connectivity_bound(walk, eps, radius=radius)
    sup = _sup_grid(d.radius)
    ring_mass = np.bincount(sup.ravel(), weights=d.grid.ravel())
    leak = d.c_bound - d.total  # mass beyond the truncation radius
    target = delta / (2.0 * f_sup)
    tail = leak
    tails = np.empty(len(ring_mass) + 1)
    tails[len(ring_mass)] = leak
    for r in range(len(ring_mass) - 1, -1, -1):
        tail += ring_mass[r]
        tails[r] = tail
    for r_del in range(rho, rho + len(ring_mass) + 1):
        cut = min(r_del - rho + 1, len(ring_mass))
        if len(v_sites) * tails[cut] <= target:
            return r_del
    raise ValueError("tail never small enough; increase the truncation radius")


class _UnionFind:
    def __init__(self):
        self.parent = {}

    def find(self, x):
        p = self.parent.setdefault(x, x)
        if p != x:
            p = self.parent[x] = self.find(p)
        return p

    def union(self, x, y):
        rx, ry = self.find(x), self.find(y)
        if rx != ry:
            self.parent[ry] = rx


@dataclass
class DeformedSpinWave:
    base: SpinWaveField
    bonds: list
    values: np.ndarray
    witness: dict  # site -> t_A(x), only for sites whose value moved
    r_a: int  # cluster reach of the gate set V
    gated: bool  # True when r_A(V) > R(delta) forced the wave to zero

    def at(self, x) -> float:
        return float(self.values[x[0] + self.base.margin, x[1] + self.base.margin])


def cluster_reach(bonds, v_sites) -> int:
    """r_A(V): the largest sup-norm reachable from V through bonds of A."""
    uf = _UnionFind()
    for x, y in bonds:
        uf.union(x, y)
    roots = {uf.find(x) for x in v_sites if x in uf.parent}
    reach = max((max(abs(x[0]), abs(x[1])) for x in v_sites), default=0)
    for site in uf.parent:
        if uf.find(site) in roots:
            reach = max(reach, abs(site[0]), abs(site[1]))
    return reach


def deform(wave: SpinWaveField, bonds, v_sites=((0, 0),),
           r_delta: int = None) -> DeformedSpinWave:
    """Cluster-wise minimum of the wave over the A-clusters (identity off
    clusters); if the clusters of V reach beyond r_delta the whole deformed
    wave is set to zero."""
    bonds = list(bonds)
    m = wave.margin
    r_a = cluster_reach(bonds, list(v_sites))
    if r_delta is not None and r_a > r_delta:
        return DeformedSpinWave(wave, bonds, np.zeros_like(wave.values), {},
                                r_a, True)
    uf = _UnionFind()
    for x, y in bonds:
        uf.union(x, y)
    clusters = {}
    for site in uf.parent:
        clusters.setdefault(uf.find(site), []).append(site)
    values = wave.values.copy()
    witness = {}

    def val(site):
        if max(abs(site[0]), abs(site[1])) > m:
            return 0.0
        return wave.values[site[0] + m, site[1] + m]

    for members in clusters.values():
        best = min(members, key=lambda s: (val(s), s))
        vmin = val(best)
        for s in members:
            if max(abs(s[0]), abs(s[1])) <= m:
                values[s[0] + m, s[1] + m] = vmin
                witness[s] = best
    return DeformedSpinWave(wave, bonds, values, witness, r_a, False)


@dataclass
class EntropyEstimate:
    value: float
    term_cluster_x: float
    term_cluster_y: float
    term_smooth: float
    c1: float

    @property
    def jensen_total(self) -> float:
        return self.term_cluster_x + self.term_cluster_y + self.term_smooth


def entropy_bound(deformed: DeformedSpinWave, j_grid: np.ndarray,
                  c1: float) -> EntropyEstimate:
    """Quadratic form c1 sum J(x-y) (tilde Psi(x) - tilde Psi(y))^2 over x in
    the box, and its three-term Jensen decomposition."""
    wave = deformed.base
    box = _sup_grid(wave.margin) <= wave.n
    psi = wave.values
    tpsi = deformed.values
    j_tot = float(j_grid.sum())

    def quad(v):
        conv_v = fftconvolve(v, j_grid, mode="same")
        conv_v2 = fftconvolve(v * v, j_grid, mode="same")
        return float(np.sum((j_tot * v * v - 2 * v * conv_v + conv_v2)[box]))

    value = c1 * quad(tpsi)
    disp2 = (tpsi - psi) ** 2
    j_mass = fftconvolve(np.ones_like(psi), j_grid, mode="same")
    term_x = 3 * c1 * float(np.sum((j_mass * disp2)[box]))
    term_y = 3 * c1 * float(np.sum(fftconvolve(disp2, j_grid, mode="same")[box]))
    term_smooth = 3 * c1 * quad(psi)
    return EntropyEstimate(value, term_x, term_y, term_smooth, c1)


def sample_long_range_bonds(eps: float, j_grid: np.ndarray, margin: int,
                            rng) -> list:
    """A ~ Q_{J,eps} on pairs inside the square of the given radius: each pair
    {x, y} open with probability eps * J(x - y), sampled per displacement."""
    k = (j_grid.shape[0] - 1) // 2
    side = 2 * margin + 1
    bonds = []
    for dx in range(0, k + 1):
        for dy in range(-k, k + 1):
            if dx == 0 and dy <= 0:
                continue  # one representative per displacement pair
            p = eps * j_grid[dx + k, dy + k]
            if p <= 0:
                continue
            nx = side - dx
            ny = side - abs(dy)
            if nx <= 0 or ny <= 0:
                continue
            count = rng.binomial(nx * ny, p)
            if count == 0:
                continue
            picks = rng.choice(nx * ny, size=count, replace=False)
            xs = picks // ny - margin
            ys = picks % ny - margin + max(0, -dy)
            for x, y in zip(xs, ys):
                bonds.append(((int(x), int(y)), (int(x) + dx, int(y) + dy)))
    return bonds


@dataclass
class EntropyReport:
    n: int
    eps: float
    samples: int
    mean: float
    ci: tuple
    gated_fraction: float
    cluster_mean: float
    cluster_comparison: float
    smooth_term: float

    def row(self) -> str:
        return (f"{self.n} {self.eps} {self.mean:.10g} "
                f"{self.ci[0]:.10g} {self.ci[1]:.10g}")


def expected_entropy(walk: WalkKernel, eps: float, n: int, inner: int,
                     psi: float, samples: int, seed: int,
                     c1: float = 1.0, r_delta: int = None,
                     wave: SpinWaveField = None) -> EntropyReport:
    """Monte Carlo average of the entropy bound over A ~ Q_{J,eps}.

    The coupling J is the walk kernel itself; the analytic comparison value
    for the cluster terms replaces the connectivity probability by its d_eps
    upper bound.
    """
    if wave is None:
        wave = solve_spinwave(walk, n, inner, psi, eps=eps)
    j_grid = walk.grid_values(min(walk.radius, wave.margin))
    rng = np.random.default_rng(seed)
    vals = []
    cluster_vals = []
    gated = 0
    for _ in range(samples):
        bonds = sample_long_range_bonds(eps, j_grid, wave.margin, rng)
        dw = deform(wave, bonds, r_delta=r_delta)
        if dw.gated:
            gated += 1
            vals.append(0.0)
            cluster_vals.append(0.0)
            continue
        est = entropy_bound(dw, j_grid, c1)
        vals.append(est.value)
        cluster_vals.append(est.term_cluster_x + est.term_cluster_y)
    vals = np.asarray(vals)
    mean = float(vals.mean())
    half = 1.96 * float(vals.std(ddof=1)) / math.sqrt(samples) if samples > 1 else math.inf
    # cluster comparison: Q(x <-> y) <= d_eps(x - y), hence the cluster terms
    # are bounded by 6 c1 times the d_eps quadratic form of the smooth wave
    comparison = 6.0 * c1 * dirichlet_energy(wave)
    smooth = 3.0 * c1 * dirichlet_energy(wave, weights=j_grid)
    return EntropyReport(n, eps, samples, mean, (mean - half, mean + half),
                         gated / samples, float(np.mean(cluster_vals)),
                         comparison, smooth)
