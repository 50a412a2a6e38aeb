"""Seeded instance generators shared by the CLI and the test-suite."""
from __future__ import annotations

import json
import os

import numpy as np

from .fields import QQ, ZZ, PrimeField
from .forms import (FormCollection, HomogeneousForm, MultilinearForm, diagonal_form, dump_form, lift_to_ring,
                    random_form, random_homogeneous)
from .linalg import random_invertible

PROFILES = ("diagonal-ladder", "random-smallfield", "integer-descent")


def scaling_instance(seed: int):
    """Random integer multilinear system with s <= 4, R <= 4, L <= 3, target Z or F_p."""
    rng = np.random.default_rng(seed)
    d = int(rng.integers(1, 4))
    s_total = int(rng.integers(d, 5))
    dims = [1] * d
    for _ in range(s_total - d):
        dims[int(rng.integers(0, d))] += 1
    n = int(rng.integers(1, 3))
    system = [MultilinearForm(ZZ, ZZ.array(rng.integers(-3, 4, size=dims))) for _ in range(n)]
    R = int(rng.integers(1, 5))
    L = int(rng.integers(1, 4))
    modulus = None if rng.random() < 0.5 else int(rng.choice([2, 3, 5, 7]))
    return system, R, L, modulus


def cramer_instance(seed: int) -> list:
    """Random integer matrix with entries in [-9, 9] and a nontrivial kernel."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 6))
    if n == 1:
        return [[0]]
    m = int(rng.integers(1, n + 2))
    M = rng.integers(-9, 10, size=(m, n))
    if m >= n:
        # force a dependency among the columns
        k = int(rng.integers(0, n))
        j = int(rng.integers(0, n))
        if j == k:
            M[:, k] = 0
        else:
            c = int(rng.choice([-1, 1]))
            M[:, k] = c * M[:, j]
    return M.tolist()


def polarization_instance(seed: int) -> HomogeneousForm:
    rng = np.random.default_rng(seed)
    d = int(rng.integers(1, 5))
    s = int(rng.integers(1, 7))
    return random_homogeneous(QQ, d, s, seed=int(rng.integers(0, 2**31)))


def smallfield_multilinear(seed: int, qs=(2, 3, 5), max_dim: int = 3, max_d: int = 3) -> MultilinearForm:
    """Random or structured multilinear form over a small prime field."""
    rng = np.random.default_rng(seed)
    q = int(rng.choice(qs))
    d = int(rng.integers(2, max_d + 1))
    dims = tuple(int(x) for x in rng.integers(1, max_dim + 1, size=d))
    kind = rng.random()
    F = PrimeField(q)
    if kind < 0.6:
        return random_form(F, d, dims, seed=int(rng.integers(0, 2**31)))
    if kind < 0.8:
        # low partition rank: a sum of one or two products
        P = MultilinearForm.zero(F, dims)
        for _ in range(int(rng.integers(1, 3))):
            i = int(rng.integers(0, d))
            l = F.random(rng, (dims[i],))
            rest = F.random(rng, tuple(dims[j] for j in range(d) if j != i))
            T = F.mul(np.expand_dims(rest, i), l.reshape([dims[i] if j == i else 1 for j in range(d)]))
            P = P + MultilinearForm(F, T)
        return P
    r = int(min(dims))
    r = int(rng.integers(0, r + 1))
    D = diagonal_form(F, r, d, dims) if r else MultilinearForm.zero(F, dims)
    C = D.coeffs
    for i, s in enumerate(dims):
        C = F.matmul_axis(C, random_invertible(F, s, rng), i)
    return MultilinearForm(F, C)


def diagonal_ladder(d: int = 3, rmax: int = 3, p: int = 2):
    F = PrimeField(p)
    out = []
    for r in range(1, rmax + 1):
        out.append((f"diag-d{d}-r{r}-p{p}", diagonal_form(F, r, d), {"d": d, "r": r, "p": p, "prk": r}))
    return out


def random_smallfield(seed: int, count: int = 20):
    out = []
    for i in range(count):
        P = smallfield_multilinear(seed * 100003 + i)
        out.append((f"rand-{seed}-{i}", P, {"q": P.ring.order, "d": P.d, "dims": list(P.dims)}))
    return out


def integer_descent(primes=(5, 7, 11, 13), rmax: int = 3):
    out = []
    for d in (2, 3):
        for r in range(1, rmax + 1):
            P = lift_to_ring(diagonal_form(ZZ, r, d), ZZ)
            out.append((f"intdiag-d{d}-r{r}", P, {"d": d, "r": r, "prk": r}))
    for p in primes[1:2]:
        P = MultilinearForm(ZZ, ZZ.array(np.full((1, 1, 1), p)))
        out.append((f"planted-p{p}", P, {"planted_prime": p, "d": 3}))
    return out


def generate(profile: str, out_dir: str, seed: int = 0, **kw) -> dict:
    """Write a corpus directory with one JSON file per form and a manifest."""
    if profile == "diagonal-ladder":
        items = diagonal_ladder(kw.get("d", 3), kw.get("rmax", 3), kw.get("p", 2))
    elif profile == "random-smallfield":
        items = random_smallfield(seed, kw.get("count", 20))
    elif profile == "integer-descent":
        items = integer_descent(tuple(kw.get("primes", (5, 7, 11, 13))))
    else:
        raise ValueError(f"unknown profile {profile!r}; expected one of {PROFILES}")
    os.makedirs(out_dir, exist_ok=True)
    manifest = {"profile": profile, "seed": seed, "instances": []}
    for ident, form, params in items:
        fname = f"{ident}.json"
        dump_form(form, os.path.join(out_dir, fname))
        manifest["instances"].append({"id": ident, "file": fname, "params": params})
    with open(os.path.join(out_dir, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, sort_keys=True, indent=1)
        fh.write("\n")
    return manifest


def collection_of(forms) -> FormCollection:
    return FormCollection(list(forms))
