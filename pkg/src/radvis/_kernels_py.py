"""NumPy fallback for the raster/shading kernels.

Mirrors the compiled extension operation for operation (same formulas, same
accumulation order) so the two backends agree to within vectorized-libm
rounding. The `threads` argument is accepted for interface parity; this
backend runs single-threaded.
"""

from __future__ import annotations

import math

import numpy as np

BACKEND_NAME = "python"

MODE_BAKE = 0
MODE_COMPOSITE = 1
MODE_OVERLAY = 2

KIND_CONTINUOUS = 0
KIND_BANDED = 1
KIND_TRANSPARENT = 2
KIND_CIRCLE = 3
KIND_HEX = 4
KIND_ARROW = 5

PATTERN_CIRCLE = 0
PATTERN_HEX = 1
PATTERN_ARROW = 2

EPS_DISTANCE = 0.05
BASE_AMBIENT = 0.30
BASE_DIFFUSE = 0.45

_SQRT3_2 = math.sqrt(3.0) / 2.0


def rasterize(
    vertices,
    normals,
    triangles,
    cam_pos,
    right,
    up,
    fwd,
    focal,
    aspect,
    width,
    height,
    near,
    depth,
    pos,
    nrm,
    covered,
    depth_write,
    threads,
    init_buffers=0,
):
    """Project, near-clip, and scan-convert triangles into the G-buffer."""
    if init_buffers:
        depth[:] = np.inf
        covered[:] = 0
    verts = np.asarray(vertices, dtype=np.float64)
    vnorm = np.asarray(normals, dtype=np.float64)
    rel = verts - np.asarray(cam_pos, dtype=np.float64)
    xv = rel @ np.asarray(right, dtype=np.float64)
    yv = rel @ np.asarray(up, dtype=np.float64)
    zv = rel @ np.asarray(fwd, dtype=np.float64)  # positive in front

    sx_scale = focal / aspect

    # Direct triangles first; near-plane crossers are clipped and deferred,
    # mirroring the compiled backend's processing order.
    deferred = []
    for tri in np.asarray(triangles):
        ia, ib, ic = int(tri[0]), int(tri[1]), int(tri[2])
        corners = [
            (zv[ia], verts[ia], vnorm[ia]),
            (zv[ib], verts[ib], vnorm[ib]),
            (zv[ic], verts[ic], vnorm[ic]),
        ]
        if all(c[0] >= near for c in corners):
            poly = _clip_near(corners, near, xv, yv, (ia, ib, ic))
            for k in range(1, len(poly) - 1):
                _raster_triangle(
                    poly[0], poly[k], poly[k + 1], sx_scale, focal, width, height,
                    depth, pos, nrm, covered, depth_write,
                )
        elif any(c[0] >= near for c in corners):
            deferred.append(_clip_near(corners, near, xv, yv, (ia, ib, ic)))
    for poly in deferred:
        for k in range(1, len(poly) - 1):
            _raster_triangle(
                poly[0], poly[k], poly[k + 1], sx_scale, focal, width, height,
                depth, pos, nrm, covered, depth_write,
            )


def _clip_near(corners, near, xv, yv, idx):
    """Clip one camera-space triangle against z = near.

    Each output vertex is (z, world, normal, x_view, y_view)."""
    full = []
    for (z, w, n), i in zip(corners, idx):
        full.append((float(z), w.copy(), n.copy(), float(xv[i]), float(yv[i])))
    if all(v[0] >= near for v in full):
        return full
    if all(v[0] < near for v in full):
        return []
    out = []
    count = len(full)
    for i in range(count):
        cur = full[i]
        nxt = full[(i + 1) % count]
        cur_in = cur[0] >= near
        nxt_in = nxt[0] >= near
        if cur_in:
            out.append(cur)
        if cur_in != nxt_in:
            t = (near - cur[0]) / (nxt[0] - cur[0])
            out.append(
                (
                    near,
                    cur[1] + (nxt[1] - cur[1]) * t,
                    cur[2] + (nxt[2] - cur[2]) * t,
                    cur[3] + (nxt[3] - cur[3]) * t,
                    cur[4] + (nxt[4] - cur[4]) * t,
                )
            )
    return out


def _raster_triangle(
    va, vb, vc, sx_scale, focal, width, height, depth, pos, nrm, covered, depth_write
):
    pts = []
    for z, w, n, x_view, y_view in (va, vb, vc):
        iw = 1.0 / z
        sx = (sx_scale * x_view * iw + 1.0) * 0.5 * width
        sy = (1.0 - focal * y_view * iw) * 0.5 * height
        pts.append((sx, sy, iw, w * iw, n * iw))

    (x0, y0, iw0, p0, n0), (x1, y1, iw1, p1, n1), (x2, y2, iw2, p2, n2) = pts
    area = (x1 - x0) * (y2 - y0) - (y1 - y0) * (x2 - x0)
    if area == 0.0:
        return
    inv_area = 1.0 / area

    min_x = max(int(math.floor(min(x0, x1, x2))), 0)
    max_x = min(int(math.ceil(max(x0, x1, x2))), width - 1)
    min_y = max(int(math.floor(min(y0, y1, y2))), 0)
    max_y = min(int(math.ceil(max(y0, y1, y2))), height - 1)
    if min_x > max_x or min_y > max_y:
        return

    cols = np.arange(min_x, max_x + 1, dtype=np.float64) + 0.5
    rows = np.arange(min_y, max_y + 1, dtype=np.float64) + 0.5
    px, py = np.meshgrid(cols, rows)

    w0 = ((x2 - x1) * (py - y1) - (y2 - y1) * (px - x1)) * inv_area
    w1 = ((x0 - x2) * (py - y2) - (y0 - y2) * (px - x2)) * inv_area
    w2 = ((x1 - x0) * (py - y0) - (y1 - y0) * (px - x0)) * inv_area
    inside = (w0 >= 0.0) & (w1 >= 0.0) & (w2 >= 0.0)
    if not inside.any():
        return

    iw = w0 * iw0 + w1 * iw1 + w2 * iw2
    with np.errstate(divide="ignore", invalid="ignore"):
        z = 1.0 / iw

    sl = (slice(min_y, max_y + 1), slice(min_x, max_x + 1))
    win = inside & (z < depth[sl]) & (iw > 0.0)
    if not win.any():
        return

    pw = (w0[..., None] * p0 + w1[..., None] * p1 + w2[..., None] * p2) * z[..., None]
    nw = (w0[..., None] * n0 + w1[..., None] * n1 + w2[..., None] * n2) * z[..., None]
    ln = np.sqrt(np.sum(nw * nw, axis=-1))
    ln[ln < 1e-20] = 1.0
    nw = nw / ln[..., None]

    if depth_write:
        depth[sl][win] = z[win]
    pos[sl][win] = pw[win]
    nrm[sl][win] = nw[win]
    covered[sl][win] = 1


def _pattern_mask(pattern_id, params, lu, lv):
    if pattern_id == PATTERN_CIRCLE:
        return lu * lu + lv * lv <= params[0]
    if pattern_id == PATTERN_HEX:
        a = params[0]
        return (
            (np.abs(lu) <= a)
            & (np.abs(0.5 * lu + _SQRT3_2 * lv) <= a)
            & (np.abs(0.5 * lu - _SQRT3_2 * lv) <= a)
        )
    if pattern_id == PATTERN_ARROW:
        u0, u1, hw, tip, slope = params[:5]
        shaft = (lu >= u0) & (lu <= u1) & (np.abs(lv) <= hw)
        head = (lu >= u1) & (lu <= tip) & (np.abs(lv) <= (tip - lu) * slope)
        return shaft | head
    raise ValueError(f"unknown pattern id {pattern_id}")


_PLANE_AXES = ((2, 1), (0, 2), (0, 1))  # (U, V) world axes per projection plane


def shade(
    pos,
    nrm,
    covered,
    src_pos,
    src_rate,
    i_min,
    i_max,
    kind_id,
    bands,
    alpha,
    tile_scale,
    pattern_id,
    pattern_params,
    lut_rgb,
    mode,
    bg,
    cam_pos,
    ramp,
    cutoff_min,
    out_rgba,
    threads,
):
    """Run the full fragment chain over a G-buffer and write RGBA."""
    h, w = covered.shape
    mask = covered.astype(bool)
    p = pos[mask]  # (N, 3)
    n = nrm[mask]
    npix = p.shape[0]
    src_pos = np.asarray(src_pos, dtype=np.float64)
    src_rate = np.asarray(src_rate, dtype=np.float64)
    nsrc = src_pos.shape[0]

    if mode == MODE_BAKE:
        out_rgba[...] = 0
    elif mode == MODE_COMPOSITE:
        out_rgba[..., 0] = bg[0]
        out_rgba[..., 1] = bg[1]
        out_rgba[..., 2] = bg[2]
        out_rgba[..., 3] = 255
    if npix == 0:
        return

    # Dose accumulation in fixed source order.
    dose = np.zeros(npix)
    weights_acc = np.zeros(npix)
    centroid_acc = np.zeros((npix, 3))
    need_centroid = kind_id == KIND_ARROW
    for s in range(nsrc):
        d = np.sqrt(np.sum((p - src_pos[s]) ** 2, axis=1))
        np.maximum(d, EPS_DISTANCE, out=d)
        contrib = src_rate[s] / (d * d)
        dose = dose + contrib
        if need_centroid:
            weights_acc = weights_acc + contrib
            centroid_acc = centroid_acc + contrib[:, None] * src_pos[s]

    log_lo = math.log(i_min)
    log_hi = math.log(i_max)
    u = (np.log(dose) - log_lo) / (log_hi - log_lo)
    np.clip(u, 0.0, 1.0, out=u)

    drawn = np.ones(npix, dtype=bool)
    if cutoff_min:
        drawn &= dose > i_min

    if kind_id in (KIND_CIRCLE, KIND_HEX, KIND_ARROW):
        centroid = centroid_acc / weights_acc[:, None] if need_centroid else None
        wts = _triplanar_weights_vec(n)
        coverage = np.zeros(npix)
        for plane in range(3):
            au, av = _PLANE_AXES[plane]
            lu = p[:, au] / tile_scale
            lv = p[:, av] / tile_scale
            lu = (lu - np.floor(lu)) - 0.5
            lv = (lv - np.floor(lv)) - 0.5
            if need_centroid:
                du = p[:, au] - centroid[:, au]
                dv = p[:, av] - centroid[:, av]
                length = np.sqrt(du * du + dv * dv)
                theta = np.where(length < 1e-6, 0.0, np.arctan2(dv, du))
                c = np.cos(theta)
                s = np.sin(theta)
                lu, lv = c * lu + s * lv, -s * lu + c * lv
            m = _pattern_mask(pattern_id, pattern_params, lu, lv)
            coverage = coverage + wts[:, plane] * m
        drawn &= coverage >= 0.5

    if kind_id == KIND_BANDED:
        uq = (np.floor(np.minimum(u, 1.0 - 1e-9) * bands) + 0.5) / bands
    else:
        uq = u

    lut = np.asarray(lut_rgb, dtype=np.float64)
    lpos = uq * 255.0
    i0 = np.floor(lpos).astype(np.int64)
    np.clip(i0, 0, 255, out=i0)
    i1 = np.minimum(i0 + 1, 255)
    t = lpos - i0
    c0 = lut[i0]
    c1 = lut[i1]
    rgb = np.floor(c0 * (1.0 - t[:, None]) + c1 * t[:, None] + 0.5)

    flat = out_rgba.reshape(-1, 4)
    flat_idx = np.flatnonzero(mask.reshape(-1))

    if mode == MODE_BAKE:
        a_byte = math.floor(alpha * 255.0 + 0.5)
        sel = flat_idx[drawn]
        flat[sel, 0] = rgb[drawn, 0]
        flat[sel, 1] = rgb[drawn, 1]
        flat[sel, 2] = rgb[drawn, 2]
        flat[sel, 3] = a_byte
        return

    if mode == MODE_COMPOSITE:
        view = np.asarray(cam_pos, dtype=np.float64) - p
        vl = np.sqrt(np.sum(view * view, axis=1))
        vl[vl < 1e-20] = 1.0
        ndv = np.abs(np.sum(n * view, axis=1) / vl)
        np.minimum(ndv, 1.0, out=ndv)
        gray = np.floor(255.0 * (BASE_AMBIENT + BASE_DIFFUSE * ndv) + 0.5)
        base = np.repeat(gray[:, None], 3, axis=1)
        out = base.copy()
        out[drawn] = np.floor(alpha * rgb[drawn] + (1.0 - alpha) * base[drawn] + 0.5)
        flat[flat_idx, :3] = out
        flat[flat_idx, 3] = 255
        return

    if mode == MODE_OVERLAY:
        a_eff = alpha * ramp
        sel = flat_idx[drawn]
        existing = flat[sel, :3].astype(np.float64)
        blended = np.floor(a_eff * rgb[drawn] + (1.0 - a_eff) * existing + 0.5)
        flat[sel, :3] = blended
        return

    raise ValueError(f"unknown shade mode {mode}")


def _triplanar_weights_vec(n):
    a = np.abs(n)
    p2 = a * a
    p4 = p2 * p2
    total = p4[:, 0] + p4[:, 1] + p4[:, 2]
    return p4 / total[:, None]
