"""
Matrix-free kernels of the symmetric nine-point operator.

The operator is the Hessian of the discrete energy
    sum over cells (h k / 4) sum over corners c
        [a^rr (D_r u)^2 + a^rt D_r u D_t u + a^tt (D_t u)^2
         + 1/2 beta |det DF| u_c^2 - f |det DF| u_c]
where D_r, D_t are one-sided quotients along the cell edges meeting at c
and all coefficients are taken at c. Cell (ci, cj) has corners
(ci + a, cj + b), a, b in {0, 1}. With the across-the-origin closure the
cells ci = -1 join ring 0 with its antipodal copy (width 2 R0, signed radius
reversed on the inner side); cells cj and cj + nt/2 cover the same region
and carry half weight each.

A corner (a, b) with node p, radial partner pr and angular partner pt
contributes, with ca = a^rr k / 2h, ct = a^tt h / 2k, cm = +-a^rt / 4:
    (p, p)   ca + ct + 2 cm + h k beta |det| / 4
    (pr, pr) ca          (pt, pt) ct
    (p, pr)  -ca - cm    (p, pt)  -ct - cm    (pr, pt) cm
Dirichlet nodes get identity rows; their couplings are dropped (moved to
the right-hand side by the lift mode).
"""
import numpy as np
import numba
from polar_multigrid.grid.polar_grid import node_index, node_of
from polar_multigrid.stencil.level_cache import node_coefficients

MODE_APPLY = 0
MODE_LIFT = 1
MODE_OFFLINE = 2
MODE_FSMOOTH = 3

CIRCLE = 0
RADIAL = 1

ROW_BUFFER = 80
MAX_CANDIDATES = 12


@numba.jit(nopython=True, cache=True, inline='always')
def is_dirichlet(data, i):
    return i == data.nr - 1 or (i == 0 and data.dir_interior)


@numba.jit(nopython=True, cache=True, inline='always')
def line_id(data, i, j):
    if i < data.split:
        return i
    return data.nr + j


@numba.jit(nopython=True, cache=True, inline='always')
def in_sweep(data, i, j, stype, scolor):
    if i < data.split:
        return stype == CIRCLE and i % 2 == scolor
    return stype == RADIAL and j % 2 == scolor


@numba.jit(nopython=True, cache=True, inline='always')
def is_fine_only(i, j):
    return i % 2 == 1 or j % 2 == 1


@numba.jit(nopython=True, cache=True, inline='always')
def is_full_fine_line(data, i, j):
    if i < data.split:
        return i % 2 == 1
    return j % 2 == 1


@numba.jit(nopython=True, cache=True, inline='always')
def accept(data, mode, stype, scolor, ri, rj, ci, cj):
    """Whether entry (row, col) takes part in the requested product."""
    if is_dirichlet(data, ri):
        return False
    col_dirichlet = is_dirichlet(data, ci)
    if mode == MODE_APPLY:
        return not col_dirichlet
    if mode == MODE_LIFT:
        return col_dirichlet
    if col_dirichlet or not in_sweep(data, ri, rj, stype, scolor):
        return False
    if mode == MODE_OFFLINE:
        return line_id(data, ri, rj) != line_id(data, ci, cj)
    # fine-only smoothing: full lines as blocks, partial lines pointwise
    if not is_fine_only(ri, rj):
        return False
    if is_full_fine_line(data, ri, rj):
        return line_id(data, ri, rj) != line_id(data, ci, cj)
    return ri != ci or rj != cj


@numba.jit(nopython=True, cache=True, inline='always')
def corner_layout(data, ci, cj, a, b):
    """
    Node, radial partner, angular partner of corner (a, b) of cell (ci, cj),
    followed by h, k, weight scale and the sign applied to a^rt.
    """
    nt = data.nt
    jn = (cj + b) % nt
    jt = (cj + 1 - b) % nt
    kk = data.k[cj]
    if ci >= 0:
        return ci + a, jn, ci + 1 - a, jn, ci + a, jt, data.h[ci], kk, 1.0, 1.0
    half = nt // 2
    width = 2.0 * data.radii[0]
    if a == 1:
        return 0, jn, 0, (jn + half) % nt, 0, jt, width, kk, 0.5, 1.0
    return 0, (jn + half) % nt, 0, jn, 0, (jt + half) % nt, width, kk, 0.5, -1.0


@numba.jit(nopython=True, cache=True, inline='always')
def corner_weights(arr, art, att, det, beta, h, kk, scale, flip, a, b):
    ca = scale * arr * kk / (2.0 * h)
    ct = scale * att * h / (2.0 * kk)
    sigma = 1.0 if a == b else -1.0
    cm = scale * flip * sigma * art / 4.0
    w = scale * h * kk / 4.0
    return ca, ct, cm, w * beta * det, w * det


@numba.jit(nopython=True, cache=True, inline='always')
def cell_of_role(data, i, j, role):
    """
    Cell (ci, cj) having node (i, j) as its corner (a, b).
    Roles 0..3 are regular cells, 4..7 cells across the origin.
    """
    nt = data.nt
    if role < 4:
        a = role & 1
        b = role >> 1
        ci = i - a
        if ci < 0 or ci > data.nr - 2:
            return False, 0, 0, 0, 0
        return True, ci, (j - b + nt) % nt, a, b
    if not (data.across and i == 0):
        return False, 0, 0, 0, 0
    half = nt // 2
    if role == 4:
        return True, -1, j, 1, 0
    elif role == 5:
        return True, -1, (j - 1 + nt) % nt, 1, 1
    elif role == 6:
        return True, -1, (j - half + nt) % nt, 0, 0
    return True, -1, (j - half - 1 + nt) % nt, 0, 1


# ---------------------------------------------------------------- give side

@numba.jit(nopython=True, cache=True, inline='always')
def push(data, ri, rj, row, ci, cj, col, val, u, y, mode, stype, scolor, sgn):
    if accept(data, mode, stype, scolor, ri, rj, ci, cj):
        y[row] += sgn * val * u[col]


@numba.jit(nopython=True, cache=True)
def scatter_node(data, i, j, u, y, mode, stype, scolor, sgn):
    """Push every contribution of the coefficients of node (i, j)."""
    nr, nt, split = data.nr, data.nt, data.split
    arr, art, att, det, beta = node_coefficients(data, i, j)
    for role in range(8):
        valid, ci, cj, a, b = cell_of_role(data, i, j, role)
        if not valid:
            continue
        pi, pj, ri, rj, ti, tj, h, kk, scale, flip = corner_layout(data, ci, cj, a, b)
        ca, ct, cm, dm, _ = corner_weights(
            arr, art, att, det, beta, h, kk, scale, flip, a, b)
        p = node_index(nr, nt, split, pi, pj)
        pr = node_index(nr, nt, split, ri, rj)
        pt = node_index(nr, nt, split, ti, tj)
        push(data, pi, pj, p, pi, pj, p, ca + ct + 2.0 * cm + dm,
            u, y, mode, stype, scolor, sgn)
        push(data, ri, rj, pr, ri, rj, pr, ca, u, y, mode, stype, scolor, sgn)
        push(data, ti, tj, pt, ti, tj, pt, ct, u, y, mode, stype, scolor, sgn)
        push(data, pi, pj, p, ri, rj, pr, -ca - cm, u, y, mode, stype, scolor, sgn)
        push(data, ri, rj, pr, pi, pj, p, -ca - cm, u, y, mode, stype, scolor, sgn)
        push(data, pi, pj, p, ti, tj, pt, -ct - cm, u, y, mode, stype, scolor, sgn)
        push(data, ti, tj, pt, pi, pj, p, -ct - cm, u, y, mode, stype, scolor, sgn)
        push(data, ri, rj, pr, ti, tj, pt, cm, u, y, mode, stype, scolor, sgn)
        push(data, ti, tj, pt, ri, rj, pr, cm, u, y, mode, stype, scolor, sgn)


@numba.jit(nopython=True, cache=True)
def set_dirichlet_identity(data, u, y):
    for j in range(data.nt):
        p = node_index(data.nr, data.nt, data.split, data.nr - 1, j)
        y[p] = u[p]
        if data.dir_interior:
            p = node_index(data.nr, data.nt, data.split, 0, j)
            y[p] = u[p]


@numba.jit(nopython=True, parallel=True, cache=True)
def apply_give(data, u, y, mode):
    """Scatter form; rings i, i+3, i+6, ... run concurrently in each phase."""
    y[:] = 0.0
    for phase in range(3):
        count = (data.nr - phase + 2) // 3
        for ii in numba.prange(count):
            i = phase + 3 * ii
            for j in range(data.nt):
                scatter_node(data, i, j, u, y, mode, 0, 0, 1.0)
    if mode == MODE_APPLY:
        set_dirichlet_identity(data, u, y)


@numba.jit(nopython=True, parallel=True, cache=True)
def scatter_sources(data, u, y, sources, stype, scolor, mode):
    """
    Subtract the couplings pushed by whole source lines (rings for circle
    sweeps, spokes for radial sweeps). Sources passed together must not
    write to the same rows.
    """
    nt = data.nt
    first_ring = max(data.split - 1, 0)
    for s in numba.prange(len(sources)):
        line = sources[s]
        if stype == CIRCLE:
            for j in range(nt):
                scatter_node(data, line, j, u, y, mode, stype, scolor, -1.0)
        else:
            for i in range(first_ring, data.nr):
                scatter_node(data, i, line, u, y, mode, stype, scolor, -1.0)


# ---------------------------------------------------------------- take side

@numba.jit(nopython=True, cache=True, inline='always')
def put(cols_i, cols_j, vals, m, qi, qj, val):
    cols_i[m] = qi
    cols_j[m] = qj
    vals[m] = val
    return m + 1


@numba.jit(nopython=True, cache=True)
def row_cell_entries(data, i, j, ci, cj, cols_i, cols_j, vals, m):
    """Append the contributions of cell (ci, cj) to the row of node (i, j)."""
    for corner in range(4):
        a = corner & 1
        b = corner >> 1
        pi, pj, ri, rj, ti, tj, h, kk, scale, flip = corner_layout(data, ci, cj, a, b)
        if pi == i and pj == j:
            which = 0
        elif ri == i and rj == j:
            which = 1
        elif ti == i and tj == j:
            which = 2
        else:
            continue
        arr, art, att, det, beta = node_coefficients(data, pi, pj)
        ca, ct, cm, dm, _ = corner_weights(
            arr, art, att, det, beta, h, kk, scale, flip, a, b)
        if which == 0:
            m = put(cols_i, cols_j, vals, m, pi, pj, ca + ct + 2.0 * cm + dm)
            m = put(cols_i, cols_j, vals, m, ri, rj, -ca - cm)
            m = put(cols_i, cols_j, vals, m, ti, tj, -ct - cm)
        elif which == 1:
            m = put(cols_i, cols_j, vals, m, ri, rj, ca)
            m = put(cols_i, cols_j, vals, m, pi, pj, -ca - cm)
            m = put(cols_i, cols_j, vals, m, ti, tj, cm)
        else:
            m = put(cols_i, cols_j, vals, m, ti, tj, ct)
            m = put(cols_i, cols_j, vals, m, pi, pj, -ct - cm)
            m = put(cols_i, cols_j, vals, m, ri, rj, cm)
    return m


@numba.jit(nopython=True, cache=True)
def row_entries(data, i, j, cols_i, cols_j, vals):
    m = 0
    for role in range(8):
        valid, ci, cj, _, _ = cell_of_role(data, i, j, role)
        if valid:
            m = row_cell_entries(data, i, j, ci, cj, cols_i, cols_j, vals, m)
    return m


@numba.jit(nopython=True, cache=True)
def gather_row(data, i, j, u, mode, stype, scolor, cols_i, cols_j, vals):
    m = row_entries(data, i, j, cols_i, cols_j, vals)
    total = 0.0
    for e in range(m):
        qi = cols_i[e]
        qj = cols_j[e]
        if accept(data, mode, stype, scolor, i, j, qi, qj):
            total += vals[e] * u[node_index(data.nr, data.nt, data.split, qi, qj)]
    return total


@numba.jit(nopython=True, parallel=True, cache=True)
def apply_take(data, u, y, mode):
    """Gather form; every row is computed independently."""
    for i in numba.prange(data.nr):
        cols_i = np.empty(ROW_BUFFER, dtype=np.int64)
        cols_j = np.empty(ROW_BUFFER, dtype=np.int64)
        vals = np.empty(ROW_BUFFER)
        for j in range(data.nt):
            p = node_index(data.nr, data.nt, data.split, i, j)
            if mode == MODE_APPLY and is_dirichlet(data, i):
                y[p] = u[p]
            else:
                y[p] = gather_row(data, i, j, u, mode, 0, 0, cols_i, cols_j, vals)


@numba.jit(nopython=True, parallel=True, cache=True)
def gather_lines(data, u, f, y, lines, stype, scolor, mode):
    """y = f - (coupled part of A) u on every row of the given lines."""
    nr, nt, split = data.nr, data.nt, data.split
    for ll in numba.prange(len(lines)):
        line = lines[ll]
        cols_i = np.empty(ROW_BUFFER, dtype=np.int64)
        cols_j = np.empty(ROW_BUFFER, dtype=np.int64)
        vals = np.empty(ROW_BUFFER)
        if stype == CIRCLE:
            for j in range(nt):
                p = node_index(nr, nt, split, line, j)
                y[p] = f[p] - gather_row(data, line, j, u, mode, stype, scolor,
                    cols_i, cols_j, vals)
        else:
            for i in range(split, nr):
                p = node_index(nr, nt, split, i, line)
                y[p] = f[p] - gather_row(data, i, line, u, mode, stype, scolor,
                    cols_i, cols_j, vals)


@numba.jit(nopython=True, cache=True)
def copy_lines(data, src, dst, lines, stype):
    nr, nt, split = data.nr, data.nt, data.split
    for ll in range(len(lines)):
        if stype == CIRCLE:
            start = lines[ll] * nt
            length = nt
        else:
            length = nr - split
            start = split * nt + lines[ll] * length
        for m in range(length):
            dst[start + m] = src[start + m]


@numba.jit(nopython=True, cache=True)
def matrix_entry(data, i, j, qi, qj, cols_i, cols_j, vals):
    """A[(i, j), (qi, qj)], summed cell by cell."""
    if is_dirichlet(data, i):
        return 1.0 if (qi == i and qj == j) else 0.0
    if is_dirichlet(data, qi):
        return 0.0
    total = 0.0
    for role in range(8):
        valid, ci, cj, _, _ = cell_of_role(data, i, j, role)
        if not valid:
            continue
        m = row_cell_entries(data, i, j, ci, cj, cols_i, cols_j, vals, 0)
        cell_sum = 0.0
        for e in range(m):
            if cols_i[e] == qi and cols_j[e] == qj:
                cell_sum += vals[e]
        total += cell_sum
    return total


@numba.jit(nopython=True, parallel=True, cache=True)
def line_matrices(data, diag, off):
    """
    Diagonal and forward coupling of every smoother line in smoother order;
    the last entry of a circle line holds the cyclic corner.
    """
    nr, nt, split = data.nr, data.nt, data.split
    for i in numba.prange(split):
        cols_i = np.empty(ROW_BUFFER, dtype=np.int64)
        cols_j = np.empty(ROW_BUFFER, dtype=np.int64)
        vals = np.empty(ROW_BUFFER)
        for j in range(nt):
            p = node_index(nr, nt, split, i, j)
            diag[p] = matrix_entry(data, i, j, i, j, cols_i, cols_j, vals)
            off[p] = matrix_entry(data, i, j, i, (j + 1) % nt, cols_i, cols_j, vals)
    for j in numba.prange(nt if split < nr else 0):
        cols_i = np.empty(ROW_BUFFER, dtype=np.int64)
        cols_j = np.empty(ROW_BUFFER, dtype=np.int64)
        vals = np.empty(ROW_BUFFER)
        for i in range(split, nr):
            p = node_index(nr, nt, split, i, j)
            diag[p] = matrix_entry(data, i, j, i, j, cols_i, cols_j, vals)
            if i < nr - 1:
                off[p] = matrix_entry(data, i, j, i + 1, j, cols_i, cols_j, vals)
            else:
                off[p] = 0.0


@numba.jit(nopython=True, cache=True)
def collect_triplets(data, line, rows, cols, vals):
    """
    Lower-triangle triplets (smoother numbering) of the operator restricted
    to one line, or to the whole grid when line < 0. Returns the count.
    """
    nr, nt, split = data.nr, data.nt, data.split
    half = nt // 2
    cols_i = np.empty(ROW_BUFFER, dtype=np.int64)
    cols_j = np.empty(ROW_BUFFER, dtype=np.int64)
    buf = np.empty(ROW_BUFFER)
    cand_i = np.empty(MAX_CANDIDATES, dtype=np.int64)
    cand_j = np.empty(MAX_CANDIDATES, dtype=np.int64)
    count = 0
    for p in range(nr * nt):
        i, j = node_of(nr, nt, split, p)
        if line >= 0 and line_id(data, i, j) != line:
            continue
        if is_dirichlet(data, i):
            rows[count] = p
            cols[count] = p
            vals[count] = 1.0
            count += 1
            continue
        nc = 0
        for di in range(-1, 2):
            qi = i + di
            if qi < 0 or qi > nr - 1:
                continue
            for dj in range(-1, 2):
                qj = (j + dj + nt) % nt
                duplicate = False
                for c in range(nc):
                    if cand_i[c] == qi and cand_j[c] == qj:
                        duplicate = True
                if not duplicate:
                    cand_i[nc] = qi
                    cand_j[nc] = qj
                    nc += 1
        if data.across and i == 0:
            for dj in range(-1, 2):
                qj = (j + half + dj + nt) % nt
                duplicate = False
                for c in range(nc):
                    if cand_i[c] == 0 and cand_j[c] == qj:
                        duplicate = True
                if not duplicate:
                    cand_i[nc] = 0
                    cand_j[nc] = qj
                    nc += 1
        for c in range(nc):
            qi = cand_i[c]
            qj = cand_j[c]
            q = node_index(nr, nt, split, qi, qj)
            if q > p or is_dirichlet(data, qi):
                continue
            if line >= 0 and line_id(data, qi, qj) != line:
                continue
            rows[count] = p
            cols[count] = q
            vals[count] = matrix_entry(data, i, j, qi, qj, cols_i, cols_j, buf)
            count += 1
    return count


@numba.jit(nopython=True, parallel=True, cache=True)
def rhs_weights(data, out):
    """Lumped mass times |det DF| per node: sum over corners of h k |det| / 4."""
    for i in numba.prange(data.nr):
        for j in range(data.nt):
            arr, art, att, det, beta = node_coefficients(data, i, j)
            total = 0.0
            for role in range(8):
                valid, ci, cj, a, b = cell_of_role(data, i, j, role)
                if not valid:
                    continue
                layout = corner_layout(data, ci, cj, a, b)
                total += corner_weights(arr, art, att, det, beta,
                    layout[6], layout[7], layout[8], layout[9], a, b)[4]
            out[node_index(data.nr, data.nt, data.split, i, j)] = total


@numba.jit(nopython=True, cache=True)
def cell_corner_energies(data, ci, cj, u, f, out):
    """Quadratic energy of each corner of cell (ci, cj), f given per node."""
    nr, nt, split = data.nr, data.nt, data.split
    for corner in range(4):
        a = corner & 1
        b = corner >> 1
        pi, pj, ri, rj, ti, tj, h, kk, scale, flip = corner_layout(data, ci, cj, a, b)
        arr, art, att, det, beta = node_coefficients(data, pi, pj)
        p = node_index(nr, nt, split, pi, pj)
        pr = node_index(nr, nt, split, ri, rj)
        pt = node_index(nr, nt, split, ti, tj)
        d_r = (u[pr] - u[p]) / h
        if a == 1:
            d_r = -d_r
        d_t = (u[pt] - u[p]) / kk
        if b == 1:
            d_t = -d_t
        w = scale * h * kk / 4.0
        out[corner] = w * (arr * d_r * d_r + flip * art * d_r * d_t + att * d_t * d_t) \
            + w * det * (0.5 * beta * u[p] * u[p] - f[p] * u[p])
