"""Conversions between road-aligned (s, d) coordinates and the plane.

A reference line is a dense polyline with cumulative arclength.  The
longitudinal coordinate s runs along the polyline, the lateral
coordinate d is measured along the left normal of the local frame, so
positive d is left of travel direction.

The frame angle is the segment direction away from vertices and turns
linearly across a blend window around each interior vertex.  Without
the blend, offset points generated just before a concave vertex are
exactly reproducible from the next segment as well, so no projection
could recover the original coordinates; the blended frame keeps the
offset map injective for offsets well inside the local turn radius,
and projection inverts it exactly.  Projection picks the nearest
segment first, breaking exact ties toward the smaller arclength, then
refines the arclength with a bracketed root solve on the frame-
orthogonality condition.
"""

import warnings

import numpy as np

from .errors import (
    ClampWarning,
    InsufficientDataError,
    OutOfRangeError,
    ProjectionError,
)

#: how far a query point may sit from the line before projection gives up
PROJECTION_CORRIDOR = 50.0

#: arclength overhang tolerated (with a warning) beyond the line ends
END_SLACK = 1.0


class ReferenceLine:
    """Polyline with arclength bookkeeping and a segment lookup grid.

    Args:
        points: (N, 2) array of vertices, N >= 2.  Consecutive
            duplicate vertices are dropped.
    """

    def __init__(self, points):
        points = np.asarray(points, dtype=float)
        if points.ndim != 2 or points.shape[1] != 2:
            raise InsufficientDataError(
                f"reference line needs an (N, 2) array, got {points.shape}"
            )
        seg = np.diff(points, axis=0)
        lens = np.hypot(seg[:, 0], seg[:, 1])
        keep = lens > 0.0
        if keep.sum() < 1:
            raise InsufficientDataError(
                "reference line needs at least two distinct points"
            )
        if not keep.all():
            points = np.concatenate([points[:1], points[1:][keep]], axis=0)
            seg = np.diff(points, axis=0)
            lens = np.hypot(seg[:, 0], seg[:, 1])
        self.points = points
        self.seg_dirs = seg / lens[:, None]
        self.seg_lens = lens
        self.cum_arc = np.concatenate([[0.0], np.cumsum(lens)])
        self.length = float(self.cum_arc[-1])
        self._build_frame()
        self._grid = None
        self._cell = max(2.0, 4.0 * float(lens.mean()))

    def _build_frame(self):
        """Piecewise-linear frame angle over arclength.

        Each interior vertex contributes a blend window of half the
        shorter adjacent segment on either side; inside the window the
        angle ramps linearly from one segment direction to the next,
        passing through the bisector at the vertex itself.
        """
        angles = np.unwrap(
            np.arctan2(self.seg_dirs[:, 1], self.seg_dirs[:, 0])
        )
        breaks = [0.0]
        values = [angles[0]]
        for k in range(1, len(self.seg_lens)):
            w = 0.5 * min(self.seg_lens[k - 1], self.seg_lens[k])
            c = self.cum_arc[k]
            breaks.extend([c - w, c + w])
            values.extend([angles[k - 1], angles[k]])
        breaks.append(self.length)
        values.append(angles[-1])
        self._frame_s = np.asarray(breaks)
        self._frame_angle = np.asarray(values)

    def frame_angle(self, s):
        """Unwrapped frame direction angle at arclength s."""
        return float(np.interp(s, self._frame_s, self._frame_angle))

    # -- forward map ------------------------------------------------------

    def _locate(self, s):
        idx = int(np.searchsorted(self.cum_arc, s, side="right")) - 1
        return min(max(idx, 0), len(self.seg_lens) - 1)

    def _base_point(self, s):
        """Chord point at arclength s, linearly extended past the ends."""
        idx = self._locate(min(max(s, 0.0), self.length))
        t = s - self.cum_arc[idx]
        return self.points[idx] + t * self.seg_dirs[idx]

    def to_cartesian(self, s, d):
        """Planar point at arclength s offset d along the left normal.

        s may overhang the line ends by less than 1 m (clamped with a
        warning); anything farther out raises.
        """
        if s < -END_SLACK or s > self.length + END_SLACK:
            raise OutOfRangeError(
                f"arclength {s} outside [0, {self.length}] by more than "
                f"{END_SLACK} m"
            )
        if s < 0.0 or s > self.length:
            warnings.warn(
                f"arclength {s} clamped to [0, {self.length}]", ClampWarning
            )
            s = min(max(s, 0.0), self.length)
        base = self._base_point(s)
        psi = self.frame_angle(s)
        return base + d * np.array([-np.sin(psi), np.cos(psi)])

    def to_cartesian_batch(self, ss, ds):
        """Vectorized forward map over equal-length coordinate arrays."""
        ss = np.asarray(ss, dtype=float)
        ds = np.asarray(ds, dtype=float)
        if ss.size and (
            ss.min() < -END_SLACK or ss.max() > self.length + END_SLACK
        ):
            raise OutOfRangeError(
                f"arclengths outside [0, {self.length}] by more than "
                f"{END_SLACK} m"
            )
        clipped = np.clip(ss, 0.0, self.length)
        idx = np.clip(
            np.searchsorted(self.cum_arc, clipped, side="right") - 1,
            0,
            len(self.seg_lens) - 1,
        )
        t = clipped - self.cum_arc[idx]
        base = self.points[idx] + t[:, None] * self.seg_dirs[idx]
        psi = np.interp(clipped, self._frame_s, self._frame_angle)
        normal = np.column_stack([-np.sin(psi), np.cos(psi)])
        return base + ds[:, None] * normal

    def heading_at(self, s):
        """Travel direction angle at arclength s, wrapped to (-pi, pi]."""
        psi = self.frame_angle(min(max(s, 0.0), self.length))
        return float(np.arctan2(np.sin(psi), np.cos(psi)))

    # -- inverse map ------------------------------------------------------

    def _build_grid(self):
        mids = self.points[:-1] + 0.5 * self.seg_dirs * self.seg_lens[:, None]
        cells = np.floor(mids / self._cell).astype(np.int64)
        grid = {}
        for i, (cx, cy) in enumerate(cells):
            grid.setdefault((cx, cy), []).append(i)
        self._grid = {k: np.array(v) for k, v in grid.items()}

    def _segment_distances(self, point, idx):
        rel = point - self.points[idx]
        t = np.clip(
            np.einsum("ij,ij->i", rel, self.seg_dirs[idx]),
            0.0,
            self.seg_lens[idx],
        )
        feet = self.points[idx] + t[:, None] * self.seg_dirs[idx]
        return t, np.hypot(*(point - feet).T)

    def _candidate_segments(self, point):
        """Segment indices near the point, by expanding grid rings.

        The scan stops once every unvisited cell is provably farther
        away than the best candidate seen so far, so the closest
        segment is always among the returned indices.  Ring distances
        are padded by one cell because segments are binned by midpoint.
        """
        if self._grid is None:
            self._build_grid()
        cell = self._cell
        cx, cy = int(np.floor(point[0] / cell)), int(np.floor(point[1] / cell))
        max_ring = int(np.ceil(PROJECTION_CORRIDOR / cell)) + 2
        found = []
        best = np.inf
        for r in range(max_ring + 1):
            if best < (r - 2) * cell:
                break
            ring = []
            for dx in range(-r, r + 1):
                for dy in range(-r, r + 1):
                    if max(abs(dx), abs(dy)) != r:
                        continue
                    segs = self._grid.get((cx + dx, cy + dy))
                    if segs is not None:
                        ring.append(segs)
            if not ring:
                continue
            idx = np.concatenate(ring)
            found.append(idx)
            best = min(best, self._segment_distances(point, idx)[1].min())
        if not found:
            raise ProjectionError(
                f"point {point} has no line segment within "
                f"{PROJECTION_CORRIDOR} m"
            )
        return np.concatenate(found)

    def _frame_residual(self, s, point):
        """Tangential component of point - base(s) in the blended frame.

        Zero exactly where the point sits on the frame normal; strictly
        decreasing in s for offsets inside the local turn radius, with
        slope close to -1, so its magnitude estimates the arclength
        distance to the root.
        """
        base = self._base_point(s)
        psi = self.frame_angle(s)
        rel = point - base
        return rel[0] * np.cos(psi) + rel[1] * np.sin(psi)

    def _refine_arclength(self, s0, point):
        """Root of the frame residual nearest the chord foot s0.

        Away from vertices the chord foot already zeroes the residual;
        inside a blend window the root moves by at most the lateral
        offset times the half turn angle, which the expanding bracket
        covers before it could reach any other root.
        """
        f0 = self._frame_residual(s0, point)
        if abs(f0) < 1e-12:
            return s0
        delta = max(4.0 * abs(f0), 1e-6)
        for _ in range(30):
            lo = max(0.0, s0 - delta)
            hi = min(self.length, s0 + delta)
            f_lo = self._frame_residual(lo, point)
            f_hi = self._frame_residual(hi, point)
            if f_lo <= 0.0 and lo == 0.0:
                return 0.0
            if f_hi >= 0.0 and hi == self.length:
                return self.length
            if f_lo >= 0.0 >= f_hi:
                for _ in range(60):
                    mid = 0.5 * (lo + hi)
                    if self._frame_residual(mid, point) > 0.0:
                        lo = mid
                    else:
                        hi = mid
                    if hi - lo < 1e-10:
                        break
                return 0.5 * (lo + hi)
            delta *= 2.0
        return s0

    def to_frenet(self, point):
        """(s, d) of the planar point, left of travel positive.

        Raises ProjectionError if the point is farther than the
        projection corridor from every segment.
        """
        point = np.asarray(point, dtype=float)
        idx = self._candidate_segments(point)
        t, dist = self._segment_distances(point, idx)
        dmin = dist.min()
        if dmin > PROJECTION_CORRIDOR:
            raise ProjectionError(
                f"point {point} is {dmin:.1f} m from the line, beyond the "
                f"{PROJECTION_CORRIDOR} m corridor"
            )
        # exact ties break toward the smaller arclength
        near = dist <= dmin + 1e-12
        s0 = float(np.min(self.cum_arc[idx[near]] + t[near]))
        s = self._refine_arclength(s0, point)
        base = self._base_point(s)
        psi = self.frame_angle(s)
        rel = point - base
        d = -rel[0] * np.sin(psi) + rel[1] * np.cos(psi)
        return float(s), float(d)


def straight_line(length, origin=(0.0, 0.0), heading=0.0, spacing=0.1):
    """Straight reference line sampled every ``spacing`` metres."""
    n = max(2, int(round(length / spacing)) + 1)
    ss = np.linspace(0.0, length, n)
    direction = np.array([np.cos(heading), np.sin(heading)])
    return ReferenceLine(np.asarray(origin) + ss[:, None] * direction)


def arc_line(length, radius, origin=(0.0, 0.0), heading=0.0, spacing=0.1):
    """Constant-curvature reference line, positive radius bends left."""
    if radius == 0.0:
        raise InsufficientDataError("arc radius must be non-zero")
    n = max(2, int(round(length / spacing)) + 1)
    phi = np.linspace(0.0, length / abs(radius), n)
    # circle centre sits one signed radius along the left normal
    centre = np.asarray(origin, dtype=float) + radius * np.array(
        [-np.sin(heading), np.cos(heading)]
    )
    if radius > 0.0:
        angles = heading - np.pi / 2.0 + phi
    else:
        angles = heading + np.pi / 2.0 - phi
    pts = centre + abs(radius) * np.column_stack(
        [np.cos(angles), np.sin(angles)]
    )
    return ReferenceLine(pts)
