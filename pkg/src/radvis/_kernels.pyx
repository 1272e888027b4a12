# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled raster/shading kernels.

Same formulas and accumulation order as the NumPy fallback; screen rows are
distributed over OpenMP threads (each row is owned by exactly one thread, so
output is bit-identical for any thread count).
"""

import numpy as np

cimport numpy as cnp
from cython.parallel cimport prange
from libc.math cimport INFINITY, atan2, cos, fabs, floor, log, sin, sqrt

BACKEND_NAME = "compiled"

cdef enum:
    C_MODE_BAKE = 0
    C_MODE_COMPOSITE = 1
    C_MODE_OVERLAY = 2
    C_KIND_CONTINUOUS = 0
    C_KIND_BANDED = 1
    C_KIND_TRANSPARENT = 2
    C_KIND_CIRCLE = 3
    C_KIND_HEX = 4
    C_KIND_ARROW = 5
    C_PATTERN_CIRCLE = 0
    C_PATTERN_HEX = 1
    C_PATTERN_ARROW = 2

MODE_BAKE = C_MODE_BAKE
MODE_COMPOSITE = C_MODE_COMPOSITE
MODE_OVERLAY = C_MODE_OVERLAY

KIND_CONTINUOUS = C_KIND_CONTINUOUS
KIND_BANDED = C_KIND_BANDED
KIND_TRANSPARENT = C_KIND_TRANSPARENT
KIND_CIRCLE = C_KIND_CIRCLE
KIND_HEX = C_KIND_HEX
KIND_ARROW = C_KIND_ARROW

PATTERN_CIRCLE = C_PATTERN_CIRCLE
PATTERN_HEX = C_PATTERN_HEX
PATTERN_ARROW = C_PATTERN_ARROW

cdef double EPS_DISTANCE = 0.05
cdef double BASE_AMBIENT = 0.30
cdef double BASE_DIFFUSE = 0.45
cdef double SQRT3_2 = sqrt(3.0) / 2.0


def rasterize(
    double[:, ::1] vertices,
    double[:, ::1] normals,
    int[:, ::1] triangles,
    double[::1] cam_pos,
    double[::1] right,
    double[::1] up,
    double[::1] fwd,
    double focal,
    double aspect,
    int width,
    int height,
    double near,
    double[:, ::1] depth,
    double[:, :, ::1] pos,
    double[:, :, ::1] nrm,
    unsigned char[:, ::1] covered,
    int depth_write,
    int threads,
    int init_buffers=0,
):
    cdef Py_ssize_t nv = vertices.shape[0]
    cdef Py_ssize_t nt = triangles.shape[0]
    if threads < 1:
        threads = 1
    cdef int nthreads = threads

    cdef Py_ssize_t init_row, init_col
    if init_buffers:
        for init_row in prange(height, num_threads=nthreads, schedule="static", nogil=True):
            for init_col in range(width):
                depth[init_row, init_col] = INFINITY
                covered[init_row, init_col] = 0

    # Per-vertex screen position, 1/z, and premultiplied attributes.
    cdef cnp.ndarray[cnp.float64_t, ndim=1] sx_a = np.empty(nv)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] sy_a = np.empty(nv)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] viw_a = np.empty(nv)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] zv_a = np.empty(nv)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] paw_a = np.empty((nv, 3))
    cdef cnp.ndarray[cnp.float64_t, ndim=2] naw_a = np.empty((nv, 3))
    cdef double[::1] sx = sx_a
    cdef double[::1] sy = sy_a
    cdef double[::1] viw = viw_a
    cdef double[::1] zv = zv_a
    cdef double[:, ::1] paw = paw_a
    cdef double[:, ::1] naw = naw_a

    cdef double sx_scale = focal / aspect
    cdef Py_ssize_t i
    for i in prange(nv, num_threads=nthreads, schedule="static", nogil=True):
        _transform_vertex(
            vertices, normals, cam_pos, right, up, fwd,
            sx_scale, focal, width, height, near,
            sx, sy, viw, zv, paw, naw, i,
        )

    # Classify triangles; near-plane crossers are clipped serially (rare).
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] tflag_a = np.empty(nt, dtype=np.uint8)
    cdef unsigned char[::1] tflag = tflag_a
    cdef Py_ssize_t t, n_mixed = 0
    cdef double z0, z1, z2
    for t in range(nt):
        z0 = zv[triangles[t, 0]]
        z1 = zv[triangles[t, 1]]
        z2 = zv[triangles[t, 2]]
        if z0 >= near and z1 >= near and z2 >= near:
            tflag[t] = 1  # direct
        elif z0 < near and z1 < near and z2 < near:
            tflag[t] = 0  # culled
        else:
            tflag[t] = 2  # needs clipping
            n_mixed += 1

    # Overflow store for clipped output triangles (at most 2 per mixed input).
    cdef Py_ssize_t cap = 2 * n_mixed if n_mixed > 0 else 1
    cdef cnp.ndarray[cnp.float64_t, ndim=3] oscr_a = np.empty((cap, 3, 2))
    cdef cnp.ndarray[cnp.float64_t, ndim=2] otiw_a = np.empty((cap, 3))
    cdef cnp.ndarray[cnp.float64_t, ndim=3] opw_a = np.empty((cap, 3, 3))
    cdef cnp.ndarray[cnp.float64_t, ndim=3] onw_a = np.empty((cap, 3, 3))
    cdef double[:, :, ::1] oscr = oscr_a
    cdef double[:, ::1] otiw = otiw_a
    cdef double[:, :, ::1] opw = opw_a
    cdef double[:, :, ::1] onw = onw_a

    cdef double cz[4]
    cdef double cw[12]
    cdef double cn[12]
    cdef double cx[4]
    cdef double cy[4]
    cdef Py_ssize_t k, nout, m = 0
    if n_mixed > 0:
        for t in range(nt):
            if tflag[t] != 2:
                continue
            nout = _clip_one(
                vertices, normals, cam_pos, right, up, zv,
                triangles[t, 0], triangles[t, 1], triangles[t, 2],
                near, cz, cw, cn, cx, cy,
            )
            for k in range(1, nout - 1):
                m = _emit_triangle(
                    oscr, otiw, opw, onw, m, cz, cw, cn, cx, cy,
                    0, k, k + 1, sx_scale, focal, width, height,
                )
    cdef Py_ssize_t n_overflow = m

    cdef Py_ssize_t tid
    for tid in prange(nthreads, num_threads=nthreads, schedule="static", chunksize=1, nogil=True):
        _raster_rows(
            triangles, tflag, sx, sy, viw, paw, naw, nt,
            oscr, otiw, opw, onw, n_overflow,
            depth, pos, nrm, covered,
            width, height, depth_write, tid, nthreads,
        )


cdef void _transform_vertex(
    double[:, ::1] vertices,
    double[:, ::1] normals,
    double[::1] cam_pos,
    double[::1] right,
    double[::1] up,
    double[::1] fwd,
    double sx_scale,
    double focal,
    int width,
    int height,
    double near,
    double[::1] sx,
    double[::1] sy,
    double[::1] viw,
    double[::1] zv,
    double[:, ::1] paw,
    double[:, ::1] naw,
    Py_ssize_t i,
) noexcept nogil:
    cdef double rx = vertices[i, 0] - cam_pos[0]
    cdef double ry = vertices[i, 1] - cam_pos[1]
    cdef double rz = vertices[i, 2] - cam_pos[2]
    cdef double x_view = rx * right[0] + ry * right[1] + rz * right[2]
    cdef double y_view = rx * up[0] + ry * up[1] + rz * up[2]
    cdef double z_view = rx * fwd[0] + ry * fwd[1] + rz * fwd[2]
    cdef double iw
    cdef Py_ssize_t j
    zv[i] = z_view
    if z_view >= near:
        iw = 1.0 / z_view
        sx[i] = (sx_scale * x_view * iw + 1.0) * 0.5 * width
        sy[i] = (1.0 - focal * y_view * iw) * 0.5 * height
        viw[i] = iw
        for j in range(3):
            paw[i, j] = vertices[i, j] * iw
            naw[i, j] = normals[i, j] * iw
    else:
        sx[i] = 0.0
        sy[i] = 0.0
        viw[i] = 0.0
        for j in range(3):
            paw[i, j] = 0.0
            naw[i, j] = 0.0


cdef Py_ssize_t _clip_one(
    double[:, ::1] vertices,
    double[:, ::1] normals,
    double[::1] cam_pos,
    double[::1] right,
    double[::1] up,
    double[::1] zv,
    Py_ssize_t v0,
    Py_ssize_t v1,
    Py_ssize_t v2,
    double near,
    double* cz,
    double* cw,
    double* cn,
    double* cx,
    double* cy,
) noexcept:
    cdef double iz[3]
    cdef double iw_[9]
    cdef double in_[9]
    cdef double ix[3]
    cdef double iy[3]
    cdef Py_ssize_t idx[3]
    idx[0] = v0
    idx[1] = v1
    idx[2] = v2
    cdef Py_ssize_t k, j, jn
    cdef int incur, innxt
    cdef double tt, rx, ry, rz
    cdef Py_ssize_t nout = 0
    for k in range(3):
        iz[k] = zv[idx[k]]
        rx = vertices[idx[k], 0] - cam_pos[0]
        ry = vertices[idx[k], 1] - cam_pos[1]
        rz = vertices[idx[k], 2] - cam_pos[2]
        ix[k] = rx * right[0] + ry * right[1] + rz * right[2]
        iy[k] = rx * up[0] + ry * up[1] + rz * up[2]
        for j in range(3):
            iw_[k * 3 + j] = vertices[idx[k], j]
            in_[k * 3 + j] = normals[idx[k], j]
    for k in range(3):
        jn = (k + 1) % 3
        incur = iz[k] >= near
        innxt = iz[jn] >= near
        if incur:
            cz[nout] = iz[k]
            for j in range(3):
                cw[nout * 3 + j] = iw_[k * 3 + j]
                cn[nout * 3 + j] = in_[k * 3 + j]
            cx[nout] = ix[k]
            cy[nout] = iy[k]
            nout += 1
        if incur != innxt:
            tt = (near - iz[k]) / (iz[jn] - iz[k])
            cz[nout] = near
            for j in range(3):
                cw[nout * 3 + j] = iw_[k * 3 + j] + (iw_[jn * 3 + j] - iw_[k * 3 + j]) * tt
                cn[nout * 3 + j] = in_[k * 3 + j] + (in_[jn * 3 + j] - in_[k * 3 + j]) * tt
            cx[nout] = ix[k] + (ix[jn] - ix[k]) * tt
            cy[nout] = iy[k] + (iy[jn] - iy[k]) * tt
            nout += 1
    return nout


cdef Py_ssize_t _emit_triangle(
    double[:, :, ::1] scr,
    double[:, ::1] tiw,
    double[:, :, ::1] pw,
    double[:, :, ::1] nw,
    Py_ssize_t m,
    double* cz,
    double* cw,
    double* cn,
    double* cx,
    double* cy,
    Py_ssize_t a,
    Py_ssize_t b,
    Py_ssize_t c,
    double sx_scale,
    double focal,
    int width,
    int height,
) noexcept:
    cdef Py_ssize_t corner[3]
    corner[0] = a
    corner[1] = b
    corner[2] = c
    cdef Py_ssize_t k, j, src
    cdef double iw, px, py
    for k in range(3):
        src = corner[k]
        iw = 1.0 / cz[src]
        px = (sx_scale * cx[src] * iw + 1.0) * 0.5 * width
        py = (1.0 - focal * cy[src] * iw) * 0.5 * height
        scr[m, k, 0] = px
        scr[m, k, 1] = py
        tiw[m, k] = iw
        for j in range(3):
            pw[m, k, j] = cw[src * 3 + j] * iw
            nw[m, k, j] = cn[src * 3 + j] * iw
    return m + 1


cdef void _raster_one(
    double ax, double ay, double iwa, double bx, double by, double iwb,
    double ccx, double ccy, double iwc,
    double pa0, double pa1, double pa2,
    double pb0, double pb1, double pb2,
    double pc0, double pc1, double pc2,
    double na0, double na1, double na2,
    double nb0, double nb1, double nb2,
    double nc0, double nc1, double nc2,
    double[:, ::1] depth,
    double[:, :, ::1] pos,
    double[:, :, ::1] nrm,
    unsigned char[:, ::1] covered,
    int width,
    int height,
    int depth_write,
    Py_ssize_t tid,
    int nthreads,
) noexcept nogil:
    cdef double min_x = ax
    cdef double max_x = ax
    cdef double min_y = ay
    cdef double max_y = ay
    if bx < min_x:
        min_x = bx
    if bx > max_x:
        max_x = bx
    if ccx < min_x:
        min_x = ccx
    if ccx > max_x:
        max_x = ccx
    if by < min_y:
        min_y = by
    if by > max_y:
        max_y = by
    if ccy < min_y:
        min_y = ccy
    if ccy > max_y:
        max_y = ccy
    cdef long x0 = <long>floor(min_x)
    cdef long x1 = <long>floor(max_x) + 1
    cdef long y0 = <long>floor(min_y)
    cdef long y1 = <long>floor(max_y) + 1
    if x0 < 0:
        x0 = 0
    if y0 < 0:
        y0 = 0
    if x1 > width - 1:
        x1 = width - 1
    if y1 > height - 1:
        y1 = height - 1
    if x0 > x1 or y0 > y1:
        return
    cdef double area = (bx - ax) * (ccy - ay) - (by - ay) * (ccx - ax)
    if area == 0.0:
        return
    cdef double inv_area = 1.0 / area
    cdef long row = y0 + ((tid - (y0 % nthreads) + nthreads) % nthreads)
    cdef long col
    cdef double px, py, w0, w1, w2, iw, z, ln
    cdef double p3[3]
    cdef double n3[3]
    cdef Py_ssize_t j
    while row <= y1:
        py = row + 0.5
        for col in range(x0, x1 + 1):
            px = col + 0.5
            w0 = ((ccx - bx) * (py - by) - (ccy - by) * (px - bx)) * inv_area
            if w0 < 0.0:
                continue
            w1 = ((ax - ccx) * (py - ccy) - (ay - ccy) * (px - ccx)) * inv_area
            if w1 < 0.0:
                continue
            w2 = ((bx - ax) * (py - ay) - (by - ay) * (px - ax)) * inv_area
            if w2 < 0.0:
                continue
            iw = w0 * iwa + w1 * iwb + w2 * iwc
            if iw <= 0.0:
                continue
            z = 1.0 / iw
            if z >= depth[row, col]:
                continue
            p3[0] = (w0 * pa0 + w1 * pb0 + w2 * pc0) * z
            p3[1] = (w0 * pa1 + w1 * pb1 + w2 * pc1) * z
            p3[2] = (w0 * pa2 + w1 * pb2 + w2 * pc2) * z
            n3[0] = (w0 * na0 + w1 * nb0 + w2 * nc0) * z
            n3[1] = (w0 * na1 + w1 * nb1 + w2 * nc1) * z
            n3[2] = (w0 * na2 + w1 * nb2 + w2 * nc2) * z
            ln = sqrt(n3[0] * n3[0] + n3[1] * n3[1] + n3[2] * n3[2])
            if ln < 1e-20:
                ln = 1.0
            if depth_write:
                depth[row, col] = z
            for j in range(3):
                pos[row, col, j] = p3[j]
                nrm[row, col, j] = n3[j] / ln
            covered[row, col] = 1
        row += nthreads


cdef void _raster_rows(
    int[:, ::1] triangles,
    unsigned char[::1] tflag,
    double[::1] sx,
    double[::1] sy,
    double[::1] viw,
    double[:, ::1] paw,
    double[:, ::1] naw,
    Py_ssize_t nt,
    double[:, :, ::1] oscr,
    double[:, ::1] otiw,
    double[:, :, ::1] opw,
    double[:, :, ::1] onw,
    Py_ssize_t n_overflow,
    double[:, ::1] depth,
    double[:, :, ::1] pos,
    double[:, :, ::1] nrm,
    unsigned char[:, ::1] covered,
    int width,
    int height,
    int depth_write,
    Py_ssize_t tid,
    int nthreads,
) noexcept nogil:
    cdef Py_ssize_t t, va, vb, vc
    for t in range(nt):
        if tflag[t] != 1:
            continue
        va = triangles[t, 0]
        vb = triangles[t, 1]
        vc = triangles[t, 2]
        _raster_one(
            sx[va], sy[va], viw[va], sx[vb], sy[vb], viw[vb], sx[vc], sy[vc], viw[vc],
            paw[va, 0], paw[va, 1], paw[va, 2],
            paw[vb, 0], paw[vb, 1], paw[vb, 2],
            paw[vc, 0], paw[vc, 1], paw[vc, 2],
            naw[va, 0], naw[va, 1], naw[va, 2],
            naw[vb, 0], naw[vb, 1], naw[vb, 2],
            naw[vc, 0], naw[vc, 1], naw[vc, 2],
            depth, pos, nrm, covered, width, height, depth_write, tid, nthreads,
        )
    for t in range(n_overflow):
        _raster_one(
            oscr[t, 0, 0], oscr[t, 0, 1], otiw[t, 0],
            oscr[t, 1, 0], oscr[t, 1, 1], otiw[t, 1],
            oscr[t, 2, 0], oscr[t, 2, 1], otiw[t, 2],
            opw[t, 0, 0], opw[t, 0, 1], opw[t, 0, 2],
            opw[t, 1, 0], opw[t, 1, 1], opw[t, 1, 2],
            opw[t, 2, 0], opw[t, 2, 1], opw[t, 2, 2],
            onw[t, 0, 0], onw[t, 0, 1], onw[t, 0, 2],
            onw[t, 1, 0], onw[t, 1, 1], onw[t, 1, 2],
            onw[t, 2, 0], onw[t, 2, 1], onw[t, 2, 2],
            depth, pos, nrm, covered, width, height, depth_write, tid, nthreads,
        )


cdef inline int _pattern_mask_c(int pattern_id, double* params, double lu, double lv) noexcept nogil:
    cdef double a, slope
    if pattern_id == C_PATTERN_CIRCLE:
        return lu * lu + lv * lv <= params[0]
    if pattern_id == C_PATTERN_HEX:
        a = params[0]
        return (
            fabs(lu) <= a
            and fabs(0.5 * lu + SQRT3_2 * lv) <= a
            and fabs(0.5 * lu - SQRT3_2 * lv) <= a
        )
    if pattern_id == C_PATTERN_ARROW:
        if params[0] <= lu and lu <= params[1] and fabs(lv) <= params[2]:
            return 1
        slope = params[4]
        if params[1] <= lu and lu <= params[3] and fabs(lv) <= (params[3] - lu) * slope:
            return 1
        return 0
    return 0


def shade(
    double[:, :, ::1] pos,
    double[:, :, ::1] nrm,
    unsigned char[:, ::1] covered,
    double[:, ::1] src_pos,
    double[::1] src_rate,
    double i_min,
    double i_max,
    int kind_id,
    int bands,
    double alpha,
    double tile_scale,
    int pattern_id,
    double[::1] pattern_params,
    unsigned char[:, ::1] lut_rgb,
    int mode,
    unsigned char[::1] bg,
    double[::1] cam_pos,
    double ramp,
    int cutoff_min,
    unsigned char[:, :, ::1] out_rgba,
    int threads,
):
    cdef Py_ssize_t h = covered.shape[0]
    cdef Py_ssize_t w = covered.shape[1]
    if threads < 1:
        threads = 1
    cdef double log_lo = log(i_min)
    cdef double log_hi = log(i_max)
    cdef double params[8]
    cdef Py_ssize_t i
    for i in range(8):
        params[i] = 0.0
    for i in range(pattern_params.shape[0]):
        params[i] = pattern_params[i]
    cdef Py_ssize_t row
    for row in prange(h, num_threads=threads, schedule="static", nogil=True):
        _shade_row(
            pos, nrm, covered, src_pos, src_rate, log_lo, log_hi, i_min,
            kind_id, bands, alpha, tile_scale, pattern_id, params, lut_rgb,
            mode, bg, cam_pos, ramp, cutoff_min, out_rgba, row, w,
        )


cdef void _shade_row(
    double[:, :, ::1] pos,
    double[:, :, ::1] nrm,
    unsigned char[:, ::1] covered,
    double[:, ::1] src_pos,
    double[::1] src_rate,
    double log_lo,
    double log_hi,
    double i_min,
    int kind_id,
    int bands,
    double alpha,
    double tile_scale,
    int pattern_id,
    double* params,
    unsigned char[:, ::1] lut_rgb,
    int mode,
    unsigned char[::1] bg,
    double[::1] cam_pos,
    double ramp,
    int cutoff_min,
    unsigned char[:, :, ::1] out_rgba,
    Py_ssize_t row,
    Py_ssize_t w,
) noexcept nogil:
    cdef Py_ssize_t col, s, j, plane
    cdef Py_ssize_t nsrc = src_pos.shape[0]
    cdef double x, y, z, dx, dy, dz, d, contrib, dose, u
    cdef double wsum, cenx, ceny, cenz
    cdef double nx, ny, nz, axx, ayy, azz, p4x, p4y, p4z, wtot
    cdef double wts[3]
    cdef double pu, pv, lu, lv, du, dv, length, theta, cth, sth, ru, rv
    cdef double coverage, uq, lpos, tfrac, chan
    cdef int drawn, i0, i1
    cdef double vx, vy, vz, vl, ndv, gray, a_eff
    cdef double rgb[3]
    for col in range(w):
        if mode == C_MODE_BAKE:
            out_rgba[row, col, 0] = 0
            out_rgba[row, col, 1] = 0
            out_rgba[row, col, 2] = 0
            out_rgba[row, col, 3] = 0
        if not covered[row, col]:
            if mode == C_MODE_COMPOSITE:
                out_rgba[row, col, 0] = bg[0]
                out_rgba[row, col, 1] = bg[1]
                out_rgba[row, col, 2] = bg[2]
                out_rgba[row, col, 3] = 255
            continue
        x = pos[row, col, 0]
        y = pos[row, col, 1]
        z = pos[row, col, 2]
        nx = nrm[row, col, 0]
        ny = nrm[row, col, 1]
        nz = nrm[row, col, 2]

        dose = 0.0
        wsum = 0.0
        cenx = 0.0
        ceny = 0.0
        cenz = 0.0
        for s in range(nsrc):
            dx = x - src_pos[s, 0]
            dy = y - src_pos[s, 1]
            dz = z - src_pos[s, 2]
            d = sqrt(dx * dx + dy * dy + dz * dz)
            if d < EPS_DISTANCE:
                d = EPS_DISTANCE
            contrib = src_rate[s] / (d * d)
            dose = dose + contrib
            if kind_id == C_KIND_ARROW:
                wsum = wsum + contrib
                cenx = cenx + contrib * src_pos[s, 0]
                ceny = ceny + contrib * src_pos[s, 1]
                cenz = cenz + contrib * src_pos[s, 2]

        u = (log(dose) - log_lo) / (log_hi - log_lo)
        if u < 0.0:
            u = 0.0
        elif u > 1.0:
            u = 1.0

        drawn = 1
        if cutoff_min and dose <= i_min:
            drawn = 0

        if drawn and kind_id >= C_KIND_CIRCLE:
            if kind_id == C_KIND_ARROW:
                cenx = cenx / wsum
                ceny = ceny / wsum
                cenz = cenz / wsum
            axx = fabs(nx)
            ayy = fabs(ny)
            azz = fabs(nz)
            p4x = (axx * axx) * (axx * axx)
            p4y = (ayy * ayy) * (ayy * ayy)
            p4z = (azz * azz) * (azz * azz)
            wtot = p4x + p4y + p4z
            wts[0] = p4x / wtot
            wts[1] = p4y / wtot
            wts[2] = p4z / wtot
            coverage = 0.0
            for plane in range(3):
                if wts[plane] == 0.0:
                    continue
                if plane == 0:
                    pu = z
                    pv = y
                elif plane == 1:
                    pu = x
                    pv = z
                else:
                    pu = x
                    pv = y
                lu = pu / tile_scale
                lv = pv / tile_scale
                lu = (lu - floor(lu)) - 0.5
                lv = (lv - floor(lv)) - 0.5
                if kind_id == C_KIND_ARROW:
                    if plane == 0:
                        du = z - cenz
                        dv = y - ceny
                    elif plane == 1:
                        du = x - cenx
                        dv = z - cenz
                    else:
                        du = x - cenx
                        dv = y - ceny
                    length = sqrt(du * du + dv * dv)
                    if length < 1e-6:
                        theta = 0.0
                    else:
                        theta = atan2(dv, du)
                    cth = cos(theta)
                    sth = sin(theta)
                    ru = cth * lu + sth * lv
                    rv = -sth * lu + cth * lv
                    lu = ru
                    lv = rv
                if _pattern_mask_c(pattern_id, params, lu, lv):
                    coverage = coverage + wts[plane]
            if coverage < 0.5:
                drawn = 0

        if kind_id == C_KIND_BANDED:
            uq = u
            if uq > 1.0 - 1e-9:
                uq = 1.0 - 1e-9
            uq = (floor(uq * bands) + 0.5) / bands
        else:
            uq = u

        lpos = uq * 255.0
        i0 = <int>floor(lpos)
        if i0 > 255:
            i0 = 255
        if i0 < 0:
            i0 = 0
        if i0 >= 255:
            rgb[0] = lut_rgb[255, 0]
            rgb[1] = lut_rgb[255, 1]
            rgb[2] = lut_rgb[255, 2]
        else:
            i1 = i0 + 1
            tfrac = lpos - i0
            for j in range(3):
                chan = (<double>lut_rgb[i0, j]) * (1.0 - tfrac) + (<double>lut_rgb[i1, j]) * tfrac
                rgb[j] = floor(chan + 0.5)

        if mode == C_MODE_BAKE:
            if drawn:
                out_rgba[row, col, 0] = <unsigned char>rgb[0]
                out_rgba[row, col, 1] = <unsigned char>rgb[1]
                out_rgba[row, col, 2] = <unsigned char>rgb[2]
                out_rgba[row, col, 3] = <unsigned char>floor(alpha * 255.0 + 0.5)
        elif mode == C_MODE_COMPOSITE:
            vx = cam_pos[0] - x
            vy = cam_pos[1] - y
            vz = cam_pos[2] - z
            vl = sqrt(vx * vx + vy * vy + vz * vz)
            if vl < 1e-20:
                vl = 1.0
            ndv = fabs((nx * vx + ny * vy + nz * vz) / vl)
            if ndv > 1.0:
                ndv = 1.0
            gray = floor(255.0 * (BASE_AMBIENT + BASE_DIFFUSE * ndv) + 0.5)
            if drawn:
                for j in range(3):
                    out_rgba[row, col, j] = <unsigned char>floor(
                        alpha * rgb[j] + (1.0 - alpha) * gray + 0.5
                    )
            else:
                for j in range(3):
                    out_rgba[row, col, j] = <unsigned char>gray
            out_rgba[row, col, 3] = 255
        else:  # MODE_OVERLAY
            if drawn:
                a_eff = alpha * ramp
                for j in range(3):
                    out_rgba[row, col, j] = <unsigned char>floor(
                        a_eff * rgb[j] + (1.0 - a_eff) * (<double>out_rgba[row, col, j]) + 0.5
                    )
