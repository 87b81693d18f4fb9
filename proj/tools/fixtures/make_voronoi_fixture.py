#!/usr/bin/env python3
"""Write a Voronoi mesh of the unit cube in the vem3d-mesh format.

Seeds are mirrored across the six cube faces so that the Voronoi cells of
the original seeds are clipped exactly to [0, 1]^3.
"""
import argparse

import numpy as np
from scipy.spatial import Voronoi


def mirrored(seeds):
    pts = [seeds]
    for d in range(3):
        for plane in (0.0, 1.0):
            m = seeds.copy()
            m[:, d] = 2.0 * plane - m[:, d]
            pts.append(m)
    return np.vstack(pts)


def ordered_cycle(points, ids):
    """Sort the vertices of a planar convex polygon by angle."""
    p = points[ids]
    c = p.mean(axis=0)
    n = np.cross(p[1] - p[0], p[2] - p[0])
    for k in range(3, len(p)):
        if np.linalg.norm(n) > 1e-12:
            break
        n = np.cross(p[1] - p[0], p[k] - p[0])
    n /= np.linalg.norm(n)
    a = p[0] - c
    a /= np.linalg.norm(a)
    b = np.cross(n, a)
    ang = np.arctan2((p - c) @ b, (p - c) @ a)
    return [ids[k] for k in np.argsort(ang)]


def merge_vertices(points, tol):
    keys = np.round(points / tol).astype(np.int64)
    uniq, index = {}, np.empty(len(points), dtype=np.int64)
    for i, k in enumerate(map(tuple, keys)):
        index[i] = uniq.setdefault(k, len(uniq))
    merged = np.zeros((len(uniq), 3))
    merged[index] = points
    return merged, index


def build(n_seeds, seed, tol=1e-10):
    rng = np.random.default_rng(seed)
    seeds = rng.uniform(0.1, 0.9, size=(n_seeds, 3))
    vor = Voronoi(mirrored(seeds))
    verts, remap = merge_vertices(np.clip(vor.vertices, -1.0, 2.0), tol)

    faces, cells = [], [[] for _ in range(n_seeds)]
    for (i, j), ridge in zip(vor.ridge_points, vor.ridge_vertices):
        if i >= n_seeds and j >= n_seeds:
            continue
        if -1 in ridge:
            raise RuntimeError("unbounded ridge next to an interior seed")
        ids = list(dict.fromkeys(int(remap[v]) for v in ridge))
        if len(ids) < 3:
            continue
        cyc = ordered_cycle(verts, ids)
        fid = len(faces)
        faces.append(cyc)
        p = verts[cyc]
        normal = np.cross(p[1] - p[0], p[2] - p[0])
        centroid = p.mean(axis=0)
        for s in (i, j):
            if s < n_seeds:
                outward = normal @ (centroid - seeds[s]) > 0
                cells[s].append((fid + 1) if outward else -(fid + 1))

    used = sorted({v for f in faces for v in f})
    new_id = {v: k for k, v in enumerate(used)}
    verts = np.clip(verts[used], 0.0, 1.0)
    for plane in (0.0, 1.0):
        verts[np.abs(verts - plane) < 1e-12] = plane
    faces = [[new_id[v] for v in f] for f in faces]
    return verts, faces, cells


def write(path, verts, faces, cells):
    with open(path, "w") as out:
        out.write("vem3d-mesh 1\n")
        out.write(f"vertices {len(verts)}\n")
        for x in verts:
            out.write("%.17g %.17g %.17g\n" % tuple(x))
        out.write(f"faces {len(faces)}\n")
        for f in faces:
            out.write(" ".join(map(str, [len(f)] + f)) + "\n")
        out.write(f"cells {len(cells)}\n")
        for c in cells:
            out.write(" ".join(map(str, [len(c)] + c)) + "\n")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", type=int, default=16)
    ap.add_argument("--rng", type=int, default=7)
    ap.add_argument("-o", "--output", required=True)
    args = ap.parse_args()
    write(args.output, *build(args.seeds, args.rng))


if __name__ == "__main__":
    main()
