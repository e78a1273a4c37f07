"""Interference from one wide slit A and a grid B of many narrow slits.

A plane wave falls on the aperture plane.  The particle carries an internal
wave of size ``s_int``; an aperture narrower than that never lets the
particle itself through.  Two transmission rules are compared:

``standard``
    the external wave is blocked wherever the particle is, so only the
    wide apertures transmit and the far field is their diffraction pattern.
``alternative``
    the external wave passes every aperture, but sampled particles that
    start in a narrow aperture are vetoed at the plane.  The survivors ride
    the full wave to the far field.

In 1D Bohmian trajectories never cross, so as ``t -> inf`` the particle
starting at position quantile ``q`` ends at momentum quantile ``q``.  The
alternative far field is therefore the full pattern restricted to the
quantile set occupied by surviving starts; it is evaluated exactly and
also estimated from a sampled ensemble.
"""

from __future__ import annotations

import math

import numpy as np
import scipy.fft as sfft

from ..errors import DomainError, ResolutionError
from ..fields import CODATA_HBAR, ComplexField, Grid
from ..madelung import sample_initial_positions
from ..rng import stream
from .base import DensityFrame, Param, RunRecord, ScenarioSpec, count, positive, register
from .c60 import aperture

PARAMS = (
    positive("mass", 3.82e-26, "atom mass (sodium)", "kg"),
    positive("velocity", 500.0, "beam velocity", "m/s"),
    positive("s_int", 1e-6, "size of the internal wave", "m"),
    Param("slit_a_center", -150e-6, "centre of slit A", unit="m"),
    positive("slit_a_width", 100e-6, "width of slit A", "m"),
    Param("grid_b_center", 150e-6, "centre of grid B", unit="m"),
    count("grid_b_count", 1000, "number of slits in grid B", lo=0),
    positive("grid_b_width", 0.1e-6, "width of each grid-B slit", "m"),
    positive("grid_b_pitch", 0.2e-6, "centre-to-centre pitch of grid B", "m"),
    Param("smoothing", 0.1, "edge smoothing as a fraction of slit width", lo=0.0, hi=0.5),
    count("n_points", 2**18, "grid points on the aperture plane", lo=1024),
    positive("spacing", 1e-8, "grid spacing on the aperture plane", "m"),
    count("n_ensemble", 10000, "sampled particles for the alternative rule", lo=0),
    count("hist_bins", 200, "bins of the sampled far-field histogram", lo=2),
    positive("frame_lobes", 40.0, "far-field half range in slit-A diffraction lobes"),
)


def apertures(cfg):
    """``(centers, widths)`` of every aperture, slit A first."""
    nb = cfg["grid_b_count"]
    offs = (np.arange(nb) - (nb - 1) / 2) * cfg["grid_b_pitch"]
    centers = np.concatenate([[cfg["slit_a_center"]], cfg["grid_b_center"] + offs])
    widths = np.concatenate([[cfg["slit_a_width"]], np.full(nb, cfg["grid_b_width"])])
    return centers, widths


def transmission(z, centers, widths, smooth_frac, keep=None):
    """Sum of smoothed apertures; each one is evaluated on a local window."""
    h = z[1] - z[0]
    out = np.zeros_like(z)
    for i, (c, w) in enumerate(zip(centers, widths)):
        if keep is not None and not keep[i]:
            continue
        s = smooth_frac * w
        reach = w / 2 + 8 * s + 2 * h
        lo = max(int(np.searchsorted(z, c - reach)), 0)
        hi = min(int(np.searchsorted(z, c + reach)) + 1, z.size)
        out[lo:hi] += aperture(z[lo:hi], c, w, s)
    return out


def far_field(psi):
    """Normalized momentum distribution (sums to one) on the shifted k axis."""
    p = np.abs(sfft.fftshift(sfft.fft(psi))) ** 2
    return p / p.sum()


def quantile_restrict(rho_x, keep_x, p_k):
    """Far-field share of the starts flagged by ``keep_x`` under
    order-preserving transport from position quantiles to momentum quantiles.
    """
    fx = np.concatenate([[0.0], np.cumsum(rho_x)])
    fx /= fx[-1]
    gx = np.concatenate([[0.0], np.cumsum(rho_x * keep_x)])
    gx /= np.sum(rho_x)
    fk = np.concatenate([[0.0], np.cumsum(p_k)])
    fk /= fk[-1]
    # cumulative kept mass as a function of quantile, read at the k-bin edges
    g = np.interp(fk, fx, gx)
    out = np.diff(g)
    tot = out.sum()
    if tot <= 0:
        raise DomainError("no particle survives the aperture plane")
    return out / tot


def visibility(p_k, k, d):
    """Contrast of the fringes with period ``2 pi / d`` (cross term of A and B)."""
    return float(2 * abs(np.sum(p_k * np.exp(-1j * k * d))) / np.sum(p_k))


def run_asym(cfg) -> RunRecord:
    rec = RunRecord(cfg)
    n, h = cfg["n_points"], cfg["spacing"]
    grid = Grid.centered(n, h)
    z = grid.axis(0)
    centers, widths = apertures(cfg)
    if np.any(widths < 4 * h):
        raise ResolutionError(f"aperture of {widths.min():g} m not resolved by spacing {h:g} m")
    reach = np.max(np.abs(centers) + widths / 2)
    if reach >= 0.45 * n * h:
        raise DomainError(f"apertures reach {reach:g} m; domain half width is {n * h / 2:g} m")
    if cfg["grid_b_count"] > 1 and cfg["grid_b_pitch"] < cfg["grid_b_width"]:
        raise DomainError("grid B slits overlap")

    passes = widths >= cfg["s_int"]
    t_all = transmission(z, centers, widths, cfg["smoothing"])
    t_std = transmission(z, centers, widths, cfg["smoothing"], keep=passes)
    if not np.any(t_std > 0):
        raise DomainError("no aperture is wider than the internal size; nothing transmits")

    k = sfft.fftshift(grid.wavenumbers(0))
    p_full = far_field(t_all)
    p_std = far_field(t_std)

    # owner aperture of every point and whether it lets the particle through
    order = np.argsort(centers)
    cs = centers[order]
    idx = np.clip(np.searchsorted(cs, z), 1, cs.size - 1) if cs.size > 1 else np.zeros(z.size, int)
    if cs.size > 1:
        left = np.abs(z - cs[idx - 1]) <= np.abs(z - cs[idx])
        idx = np.where(left, idx - 1, idx)
    keep_x = passes[order][idx].astype(float)
    rho_x = t_all**2
    p_alt = quantile_restrict(rho_x, keep_x, p_full)

    l1 = float(np.sum(np.abs(p_std - p_alt)))
    d = cfg["grid_b_center"] - cfg["slit_a_center"]
    w_pass = float(np.sum(rho_x * keep_x) / np.sum(rho_x))
    rec.stat("pattern_l1", l1)
    rec.stat("visibility_standard", visibility(p_std, k, d))
    rec.stat("visibility_alternative", visibility(p_alt, k, d))
    rec.stat("visibility_full", visibility(p_full, k, d))
    rec.stat("passing_weight", w_pass)
    rec.stat("blocked_apertures", int(np.count_nonzero(~passes)))

    # sampled alternative: veto at the plane, then quantile transport
    ns = cfg["n_ensemble"]
    if ns:
        x0 = sample_initial_positions(ComplexField(grid, t_all.astype(complex)), ns,
                                      stream(cfg.seed, "asym_interference/ensemble")).reshape(-1)
        fx = np.concatenate([[0.0], np.cumsum(rho_x)]) / np.sum(rho_x)
        edges = np.concatenate([z - h / 2, [z[-1] + h / 2]])
        q = np.interp(x0, edges, fx)
        own = np.interp(x0, z, keep_x) >= 0.5
        frac = float(np.mean(own))
        rec.stat("survivor_fraction", frac, math.sqrt(frac * (1 - frac) / ns))
        if own.any():
            fk = np.concatenate([[0.0], np.cumsum(p_full)])
            dk = k[1] - k[0]
            kedges = np.concatenate([k - dk / 2, [k[-1] + dk / 2]])
            ks = np.interp(q[own], fk, kedges)
            lo, hi = np.quantile(ks, [0.001, 0.999])
            bins = np.linspace(lo, hi, cfg["hist_bins"] + 1)
            hist = np.histogram(ks, bins)[0] / own.sum()
            ref = np.diff(np.interp(bins, kedges, np.concatenate([[0.0], np.cumsum(p_alt)])))
            rec.stat("alternative_sampled_l1", float(np.sum(np.abs(hist - ref))))

    # far-field frames in angle, cropped to a few slit-A lobes
    widest = widths[passes].max() if passes.any() else widths.max()
    kcut = cfg["frame_lobes"] * 2 * math.pi / widest
    sel = np.abs(k) <= kcut
    theta = CODATA_HBAR * k[sel] / (cfg["mass"] * cfg["velocity"])
    for label, p in (("standard", p_std), ("alternative", p_alt), ("full", p_full)):
        rec.frames.append(DensityFrame(f"far_field_{label}", 0.0, [theta], p[sel]))
    rec.series["far_field_theta"] = (theta, np.stack([p_std[sel], p_alt[sel], p_full[sel]]))
    return rec


SPEC = register(ScenarioSpec("asym_interference", "slit A plus grid B: standard vs alternative transmission",
                             PARAMS, run_asym))
