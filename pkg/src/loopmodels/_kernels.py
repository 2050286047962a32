"""Numba inner loops for the plaquette Metropolis sampler and the face-cubic sampler."""
from __future__ import annotations

import numpy as np
from numba import njit

# layout of the integer state vector
LEN, NVERT, COMPS, MAG, ACC, STAMP = range(6)


@njit(cache=True)
def _components_touching(starts, n_start, occ, deg_occ, vert_edges, vert_deg, edge_ends,
                         mark, queue, st):
    """Number of distinct occupied components containing the given vertices."""
    base = st[STAMP]
    count = 0
    for k in range(n_start):
        v = starts[k]
        if deg_occ[v] == 0 or mark[v] > base:
            continue
        count += 1
        label = base + count
        mark[v] = label
        head, tail = 0, 1
        queue[0] = v
        while head < tail:
            x = queue[head]
            head += 1
            for q in range(vert_deg[x]):
                e = vert_edges[x, q]
                if occ[e] == 0:
                    continue
                y = edge_ends[e, 0] + edge_ends[e, 1] - x
                if mark[y] <= base:
                    mark[y] = label
                    queue[tail] = y
                    tail += 1
    st[STAMP] = base + count + 1
    return count


@njit(cache=True)
def _face_vertices(f, face_edges, face_nedges, edge_ends, buf):
    n = 0
    for k in range(face_nedges[f]):
        e = face_edges[f, k]
        for s in range(2):
            v = edge_ends[e, s]
            dup = False
            for q in range(n):
                if buf[q] == v:
                    dup = True
                    break
            if not dup:
                buf[n] = v
                n += 1
    return n


@njit(cache=True)
def init_state(sigma, occ, deg_occ, face_edges, face_nedges, edge_ends, vert_edges, vert_deg,
               mark, queue, st):
    occ[:] = 0
    deg_occ[:] = 0
    M = 0
    for f in range(sigma.shape[0]):
        M += 2 * sigma[f] - 1
        if sigma[f]:
            for k in range(face_nedges[f]):
                occ[face_edges[f, k]] ^= 1
    length = 0
    for e in range(occ.shape[0]):
        if occ[e]:
            length += 1
            deg_occ[edge_ends[e, 0]] += 1
            deg_occ[edge_ends[e, 1]] += 1
    nv = 0
    for v in range(deg_occ.shape[0]):
        if deg_occ[v] > 0:
            nv += 1
    allv = np.arange(deg_occ.shape[0])
    st[LEN] = length
    st[NVERT] = nv
    st[MAG] = M
    st[COMPS] = _components_touching(allv, allv.shape[0], occ, deg_occ, vert_edges, vert_deg,
                                     edge_ends, mark, queue, st)


@njit(cache=True)
def _record(n, sigma, st, out_len, out_M, out_C, out_code):
    out_len[n] = st[LEN]
    out_M[n] = st[MAG]
    out_C[n] = st[COMPS]
    if out_code.shape[0] > 0:
        code = 0
        for q in range(sigma.shape[0]):
            code |= sigma[q] << q
        out_code[n] = code


@njit(cache=True)
def metropolis_chunk(sigma, occ, deg_occ, st, face_edges, face_nedges, edge_ends, vert_edges,
                     vert_deg, log_t, log_N, faces, uniforms, per_sweep, stride,
                     out_len, out_M, out_C, out_code, mark, queue, vbuf):
    """Run len(faces) proposals; record observables after every ``stride`` sweeps."""
    use_C = log_N != 0.0
    n_rec = 0
    F = sigma.shape[0]
    for it in range(faces.shape[0]):
        f = faces[it]
        if f >= F:  # null proposal, keeps the chain aperiodic when every ratio is 1
            if (it + 1) % (per_sweep * stride) == 0:
                _record(n_rec, sigma, st, out_len, out_M, out_C, out_code)
                n_rec += 1
            continue
        nfe = face_nedges[f]
        dL = 0
        for k in range(nfe):
            dL += 1 - 2 * occ[face_edges[f, k]]
        dlogw = 0.0
        if dL != 0:
            dlogw = dL * log_t
        nfv = 0
        c_before = 0
        dV = 0
        if use_C:
            nfv = _face_vertices(f, face_edges, face_nedges, edge_ends, vbuf)
            c_before = _components_touching(vbuf, nfv, occ, deg_occ, vert_edges, vert_deg,
                                            edge_ends, mark, queue, st)
            for q in range(nfv):
                if deg_occ[vbuf[q]] > 0:
                    dV -= 1
        # apply tentatively
        for k in range(nfe):
            e = face_edges[f, k]
            d = 1 - 2 * occ[e]
            occ[e] ^= 1
            deg_occ[edge_ends[e, 0]] += d
            deg_occ[edge_ends[e, 1]] += d
        dC = 0
        if use_C:
            c_after = _components_touching(vbuf, nfv, occ, deg_occ, vert_edges, vert_deg,
                                           edge_ends, mark, queue, st)
            for q in range(nfv):
                if deg_occ[vbuf[q]] > 0:
                    dV += 1
            dC = dL - dV + (c_after - c_before)
            dlogw += dC * log_N
        u = uniforms[it]
        accept = dlogw >= 0.0 or (u > 0.0 and np.log(u) < dlogw)
        if accept:
            sigma[f] ^= 1
            st[LEN] += dL
            st[MAG] += 4 * sigma[f] - 2
            st[NVERT] += dV
            st[COMPS] += dC
            st[ACC] += 1
        else:
            for k in range(nfe):
                e = face_edges[f, k]
                d = 1 - 2 * occ[e]
                occ[e] ^= 1
                deg_occ[edge_ends[e, 0]] += d
                deg_occ[edge_ends[e, 1]] += d
        if (it + 1) % (per_sweep * stride) == 0:
            _record(n_rec, sigma, st, out_len, out_M, out_C, out_code)
            n_rec += 1
    return n_rec


@njit(cache=True)
def cubic_chunk(spin, nbrs, eta, tN, sites, new_states, uniforms, per_sweep, stride, N,
                out_m, st):
    """Single-spin Metropolis for face-cubic spins with bond weights 1 + tN eta S.S.

    A spin state s in [0, 2N) is the unit vector sign(s) e_{s // 2}; S.S' is +1
    for equal states, -1 for opposite ones and 0 otherwise.
    """
    n_rec = 0
    V = spin.shape[0]
    for it in range(sites.shape[0]):
        i = sites[it]
        old = spin[i]
        new = new_states[it]
        if new != old:
            ratio = 1.0
            for q in range(nbrs.shape[1]):
                j = nbrs[i, q]
                if j < 0 or j == i:  # padding, or a self-bond whose weight never changes
                    continue
                sj = spin[j]
                so = 0.0
                if old == sj:
                    so = 1.0
                elif old // 2 == sj // 2:
                    so = -1.0
                sn = 0.0
                if new == sj:
                    sn = 1.0
                elif new // 2 == sj // 2:
                    sn = -1.0
                wo = 1.0 + tN * eta[i, q] * so
                wn = 1.0 + tN * eta[i, q] * sn
                if wo == 0.0:
                    ratio = np.inf if wn > 0 else ratio
                else:
                    ratio *= wn / wo
            if ratio >= 1.0 or uniforms[it] < ratio:
                spin[i] = new
                st[0] += 1
        if (it + 1) % (per_sweep * stride) == 0:
            for a in range(N):
                out_m[n_rec, a] = 0.0
            for k in range(V):
                s = spin[k]
                out_m[n_rec, s // 2] += 1.0 - 2.0 * (s % 2)
            n_rec += 1
    return n_rec
