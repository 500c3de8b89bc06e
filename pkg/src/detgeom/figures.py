"""Plane coordinates, SVG and CSV output for the embedding pictures.

All embeddings live in the zero-sum hyperplane of R^N, so N-1 orthonormal
coordinates describe them without loss.  The basis is the Helmert basis,

    u_k = (1, ..., 1, -k, 0, ..., 0) / sqrt(k (k + 1)),   k = 1..N-1,

which for N = 3 is u1 = (1, -1, 0)/sqrt(2), u2 = (1, 1, -2)/sqrt(6).
SVG output is produced for N = 3 only; CSV works for any N.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

import numpy as np

from ._mathutil import fmt
from .channels import AwgnChannel, Channel, DiscreteChannel, LaplaceChannel, as_prior
from .detection import decide
from .geometry import embed_log_posterior, in_plane, symbol_matrix, symbol_spacing
from .tolerances import FIGURE_TOL


def plane_basis(n: int) -> np.ndarray:
    """(N-1) x N matrix whose orthonormal rows span the zero-sum hyperplane."""
    basis = np.zeros((n - 1, n))
    for k in range(1, n):
        basis[k - 1, :k] = 1.0
        basis[k - 1, k] = -float(k)
        basis[k - 1] /= math.sqrt(k * (k + 1))
    return basis


@dataclass(frozen=True)
class PlaneProjection:
    basis: np.ndarray
    coords: np.ndarray  # (P, N-1)
    labels: tuple[str, ...]
    kinds: tuple[str, ...]

    def unproject(self) -> np.ndarray:
        return self.coords @ self.basis


def project(points, labels=None, kinds=None) -> PlaneProjection:
    """Coordinates of hyperplane points in the fixed orthonormal basis."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    for p in pts:
        if not in_plane(p):
            raise ValueError(f"point {p} is not in the zero-sum hyperplane")
    n = pts.shape[1]
    labels = tuple(labels) if labels is not None else tuple(str(k) for k in range(len(pts)))
    kinds = tuple(kinds) if kinds is not None else ("point",) * len(pts)
    basis = plane_basis(n)
    return PlaneProjection(basis, pts @ basis.T, labels, kinds)


@dataclass(frozen=True)
class LocusPiece:
    y_start: float
    y_end: float
    velocity: np.ndarray

    @property
    def saturated(self) -> bool:
        return bool(np.linalg.norm(self.velocity) <= FIGURE_TOL)


def locus_pieces(ys, points) -> list[LocusPiece]:
    """Split a sampled locus y -> point into maximal pieces of constant velocity.

    Each piece is affine in y; a saturated piece maps every y to one point.
    The grid must contain the breakpoints for the split to be exact.
    """
    ys = np.asarray(ys, dtype=float)
    points = np.asarray(points, dtype=float)
    vel = np.diff(points, axis=0) / np.diff(ys)[:, None]
    pieces: list[LocusPiece] = []
    start = 0
    for k in range(1, len(vel) + 1):
        if k < len(vel):
            scale = max(1.0, float(np.linalg.norm(vel[start])))
            if np.linalg.norm(vel[k] - vel[start]) <= FIGURE_TOL * scale:
                continue
        pieces.append(LocusPiece(float(ys[start]), float(ys[k]), vel[start]))
        start = k
    return pieces


def collinearity_residual(points) -> float:
    """Largest distance from the best-fit line, relative to max(1, extent)."""
    pts = np.asarray(points, dtype=float)
    if len(pts) < 3:
        return 0.0
    centred = pts - pts.mean(axis=0)
    _, _, vt = np.linalg.svd(centred, full_matrices=False)
    along = centred @ vt[0]
    resid = centred - np.outer(along, vt[0])
    extent = float(np.ptp(along))
    return float(np.max(np.linalg.norm(resid, axis=1)) / max(1.0, extent))


@dataclass
class Figure:
    title: str
    projection: PlaneProjection
    boundaries: list = field(default_factory=list)  # unit directions of rays from the origin
    polyline: np.ndarray | None = None
    checks: dict = field(default_factory=dict)

    # ---------------------------------------------------------------- CSV
    def to_csv(self, header: str | None = None) -> str:
        buf = io.StringIO()
        if header:
            buf.write(f"# {header}\n")
        dims = self.projection.coords.shape[1]
        if dims == 1:
            cols = ["u"]
        elif dims == 2:
            cols = ["u", "v"]
        else:
            cols = [f"u{k}" for k in range(1, dims + 1)]
        buf.write(",".join(["label", "kind", *cols]) + "\n")
        for label, kind, c in zip(self.projection.labels, self.projection.kinds, self.projection.coords):
            buf.write(",".join([label, kind, *(fmt(v) for v in c)]) + "\n")
        return buf.getvalue()

    # ---------------------------------------------------------------- SVG
    def _view_box(self):
        c = self.projection.coords
        lo, hi = c.min(axis=0), c.max(axis=0)
        span = hi - lo
        side = max(float(span.max()), symbol_spacing(3))
        # square frame so that angles and distances are not distorted
        mid = (lo + hi) / 2
        half = side / 2 * 1.1
        return mid[0] - half, mid[0] + half, mid[1] - half, mid[1] + half

    def to_svg(self, header: str | None = None) -> str:
        coords = self.projection.coords
        if coords.shape[1] != 2:
            raise ValueError("SVG figures are only drawn for three-symbol alphabets")
        u0, u1, v0, v1 = self._view_box()
        size = u1 - u0
        r = size * 0.008
        stroke = size * 0.002
        font = size * 0.03

        def xy(u, v):
            return fmt(u), fmt(-v)  # SVG y axis points down

        out = ['<?xml version="1.0" encoding="UTF-8"?>']
        if header:
            out.append(f"<!-- {header} -->")
        out.append(
            f'<svg version="1.1" xmlns="http://www.w3.org/2000/svg" width="600" height="600" '
            f'viewBox="{fmt(u0)} {fmt(-v1)} {fmt(size)} {fmt(size)}">'
        )
        out.append(f"<title>{self.title}</title>")
        out.append(f'<rect x="{fmt(u0)}" y="{fmt(-v1)}" width="{fmt(size)}" height="{fmt(size)}" fill="white"/>')

        if self.boundaries:
            out.append(
                f'<g id="boundaries" stroke="gray" stroke-width="{fmt(stroke)}" '
                f'stroke-dasharray="{fmt(4 * stroke)} {fmt(3 * stroke)}">'
            )
            for d in self.boundaries:
                t = _ray_exit(d, (u0, u1, v0, v1))
                x2, y2 = xy(d[0] * t, d[1] * t)
                out.append(f'<line x1="0.0" y1="0.0" x2="{x2}" y2="{y2}"/>')
            out.append("</g>")

        if self.polyline is not None and len(self.polyline) > 1:
            pts = " ".join(",".join(xy(u, v)) for u, v in self.polyline)
            out.append(
                f'<polyline id="locus" fill="none" stroke="red" stroke-width="{fmt(stroke)}" points="{pts}"/>'
            )

        colours = {"symbol": "black", "observation": "red", "locus": "red"}
        for kind in ("symbol", "observation", "locus"):
            members = [k for k, kd in enumerate(self.projection.kinds) if kd == kind]
            if not members or (kind == "locus" and self.polyline is not None and len(self.polyline) > 1):
                continue
            out.append(f'<g id="{kind}s" fill="{colours[kind]}" font-size="{fmt(font)}">')
            for k in members:
                cx, cy = xy(*coords[k])
                out.append(f'<circle cx="{cx}" cy="{cy}" r="{fmt(r)}"/>')
                if kind != "locus":
                    tx, ty = xy(coords[k][0] + 1.5 * r, coords[k][1] + 1.5 * r)
                    out.append(f'<text x="{tx}" y="{ty}">{self.projection.labels[k]}</text>')
            out.append("</g>")
        out.append("</svg>")
        return "\n".join(out) + "\n"


def _ray_exit(direction, box):
    """Parameter at which the ray t * direction (t >= 0) leaves the box."""
    u0, u1, v0, v1 = box
    ts = []
    for comp, lo, hi in ((direction[0], u0, u1), (direction[1], v0, v1)):
        if comp > 0:
            ts.append(hi / comp)
        elif comp < 0:
            ts.append(lo / comp)
    return min(ts)


def _symbol_part(n, labels):
    return symbol_matrix(n), list(labels), ["symbol"] * n


def _map_boundaries(n):
    """Directions (plane coordinates) of the MAP boundary rays for N = 3.

    The boundary between x_i and x_j is the half of their perpendicular
    bisector pointing away from the third symbol.
    """
    if n != 3:
        return []
    basis = plane_basis(3)
    sym = symbol_matrix(3) @ basis.T
    out = []
    for k in (2, 1, 0):  # pairs (0,1), (0,2), (1,2)
        d = -sym[k]
        out.append(d / np.linalg.norm(d))
    return out


def figure_discrete(channel: DiscreteChannel, prior=None) -> Figure:
    """Symbol simplex, observation images and MAP boundaries of a discrete channel."""
    n = channel.n
    lp = np.log(as_prior(prior, n))
    obs_pts = embed_log_posterior(channel.loglik_codes(np.arange(len(channel.observations))) + lp)
    sym, labels, kinds = _symbol_part(n, channel.alphabet.labels)
    proj = project(
        np.vstack([sym, obs_pts]),
        labels + list(channel.observations),
        kinds + ["observation"] * len(obs_pts),
    )
    checks = _simplex_checks(sym)
    bisector = 0.0
    ties = []
    for label, y in zip(channel.observations, obs_pts):
        dec = decide(channel, label, prior)
        if dec.tie:
            ties.append(label)
            d = dec.distances[list(dec.tied)]
            bisector = max(bisector, float(d.max() - d.min()))
    checks["tie_observations"] = ties
    checks["bisector_residual"] = bisector
    return Figure("Discrete channel", proj, _map_boundaries(n), None, checks)


def _simplex_checks(sym):
    n = sym.shape[0]
    d = [np.linalg.norm(sym[a] - sym[b]) for a in range(n) for b in range(a + 1, n)]
    return {
        "triangle_side": float(np.mean(d)),
        "side_spread": float(max(d) - min(d)),
    }


def locus_grid(channel: Channel, y_grid) -> np.ndarray:
    """Sorted grid, with the symbol values inserted for Laplace channels.

    The Laplace locus is piecewise affine with kinks at the symbol values, so
    including them keeps the drawn polyline exact.
    """
    ys = np.unique(np.asarray(y_grid, dtype=float))
    if not np.all(np.isfinite(ys)):
        raise ValueError("y grid must be finite")
    if isinstance(channel, LaplaceChannel) and ys.size > 1:
        inner = [v for v in channel.alphabet.values if ys[0] < v < ys[-1]]
        ys = np.unique(np.concatenate([ys, inner]))
    return ys


def figure_locus(channel: Channel, y_grid, prior=None) -> Figure:
    """Image of the real line under the observation embedding (additive channels)."""
    if not isinstance(channel, (AwgnChannel, LaplaceChannel)):
        raise TypeError("locus figures need an AWGN or Laplace channel")
    n = channel.n
    ys = locus_grid(channel, y_grid)
    lp = np.log(as_prior(prior, n))
    pts = embed_log_posterior(channel.loglik_codes(ys) + lp)
    sym, labels, kinds = _symbol_part(n, channel.alphabet.labels)
    proj = project(
        np.vstack([sym, pts]),
        labels + [f"y={fmt(y)}" for y in ys],
        kinds + ["locus"] * len(ys),
    )
    checks = _simplex_checks(sym)
    checks["collinearity_residual"] = collinearity_residual(pts)
    if len(ys) > 1:
        pieces = locus_pieces(ys, pts)
        checks["pieces"] = len(pieces)
        checks["saturation_points"] = sum(p.saturated for p in pieces)
    else:
        checks["pieces"] = 0
        checks["saturation_points"] = 0
    polyline = proj.coords[n:] if len(ys) > 1 else None
    title = "AWGN channel" if isinstance(channel, AwgnChannel) else "Laplace channel"
    return Figure(title, proj, _map_boundaries(n), polyline, checks)
