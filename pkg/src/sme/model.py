"""Semantic matching energy in linear and bilinear form, with analytic gradients.

Sign convention, stated once: ``energy`` returns the matching value with its
leading minus sign, so lower energy means a more plausible triple, and the
ranking score used everywhere else is ``-energy``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import tensor_core as tc
from .dataset import Triple
from .errors import LookupIdError, NumericalError, ShapeError

LINEAR = "linear"
BILINEAR = "bilinear"
FORMS = (LINEAR, BILINEAR)


@dataclass
class EmbeddingTable:
    """One d-dimensional row per symbol; relation-type ids flagged."""

    vectors: np.ndarray  # (n_symbols, d)
    relation_ids: frozenset[int] = field(default_factory=frozenset)

    @property
    def n(self) -> int:
        return self.vectors.shape[0]

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def row(self, i: int) -> np.ndarray:
        if not 0 <= i < self.n:
            raise LookupIdError(f"embedding id {i} outside [0, {self.n})")
        return self.vectors[i]

    def normalize_rows(self) -> None:
        """Project every row to unit Euclidean norm, in place."""
        norms = np.linalg.norm(self.vectors, axis=1, keepdims=True)
        np.divide(self.vectors, norms, out=self.vectors, where=norms > 0)

    def copy(self) -> "EmbeddingTable":
        return EmbeddingTable(self.vectors.copy(), self.relation_ids)


@dataclass
class LinearParams:
    w_l1: np.ndarray  # (p, d)
    w_l2: np.ndarray  # (p, d)
    w_r1: np.ndarray  # (p, d)
    w_r2: np.ndarray  # (p, d)
    b_l: np.ndarray   # (p,)
    b_r: np.ndarray   # (p,)

    @property
    def form(self) -> str:
        return LINEAR

    @property
    def p(self) -> int:
        return self.w_l1.shape[0]

    @property
    def d(self) -> int:
        return self.w_l1.shape[1]

    def copy(self) -> "LinearParams":
        return LinearParams(*(a.copy() for a in self.arrays()))

    def arrays(self) -> tuple[np.ndarray, ...]:
        return (self.w_l1, self.w_l2, self.w_r1, self.w_r2, self.b_l, self.b_r)


@dataclass
class BilinearParams:
    w_l: np.ndarray  # (p, d, d); modes: output, entity, relation
    w_r: np.ndarray  # (p, d, d)
    b_l: np.ndarray  # (p,)
    b_r: np.ndarray  # (p,)

    @property
    def form(self) -> str:
        return BILINEAR

    @property
    def p(self) -> int:
        return self.w_l.shape[0]

    @property
    def d(self) -> int:
        return self.w_l.shape[1]

    def copy(self) -> "BilinearParams":
        return BilinearParams(*(a.copy() for a in self.arrays()))

    def arrays(self) -> tuple[np.ndarray, ...]:
        return (self.w_l, self.w_r, self.b_l, self.b_r)


Params = LinearParams | BilinearParams


def init_embeddings(n: int, d: int, rng: np.random.Generator,
                    relation_ids=frozenset()) -> EmbeddingTable:
    scale = 1.0 / np.sqrt(d)
    return EmbeddingTable(rng.uniform(-scale, scale, size=(n, d)),
                          frozenset(relation_ids))


def init_params(form: str, d: int, p: int, rng: np.random.Generator) -> Params:
    scale = 1.0 / np.sqrt(d)

    def u(*shape):
        return rng.uniform(-scale, scale, size=shape)

    if form == LINEAR:
        return LinearParams(u(p, d), u(p, d), u(p, d), u(p, d),
                            np.zeros(p), np.zeros(p))
    if form == BILINEAR:
        return BilinearParams(u(p, d, d), u(p, d, d), np.zeros(p), np.zeros(p))
    raise ShapeError(f"unknown form {form!r}")


def g_left_linear(e_lhs, e_rel, params: LinearParams) -> np.ndarray:
    return tc.matvec(params.w_l1, e_lhs) + tc.matvec(params.w_l2, e_rel) + params.b_l


def g_right_linear(e_rhs, e_rel, params: LinearParams) -> np.ndarray:
    return tc.matvec(params.w_r1, e_rhs) + tc.matvec(params.w_r2, e_rel) + params.b_r


def g_left_bilinear(e_lhs, e_rel, params: BilinearParams) -> np.ndarray:
    return tc.matvec(tc.mode3_contract(params.w_l, e_rel), e_lhs) + params.b_l


def g_right_bilinear(e_rhs, e_rel, params: BilinearParams) -> np.ndarray:
    return tc.matvec(tc.mode3_contract(params.w_r, e_rel), e_rhs) + params.b_r


def g_pair(e_lhs, e_rel, e_rhs, params: Params) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(params, LinearParams):
        return g_left_linear(e_lhs, e_rel, params), g_right_linear(e_rhs, e_rel, params)
    return g_left_bilinear(e_lhs, e_rel, params), g_right_bilinear(e_rhs, e_rel, params)


def energy(t: Triple, emb: EmbeddingTable, params: Params) -> float:
    """Energy of a triple: -dot(g_left, g_right). Lower means more plausible."""
    e_lhs = emb.row(t.lhs)
    e_rel = emb.row(t.rel)
    e_rhs = emb.row(t.rhs)
    u, v = g_pair(e_lhs, e_rel, e_rhs, params)
    return -tc.dot(u, v)


@dataclass
class Gradients:
    """d(energy)/d(everything); mirrors the parameter structure plus the
    three embedding rows involved (keyed by slot, not by id)."""

    params: Params
    d_lhs: np.ndarray
    d_rel: np.ndarray
    d_rhs: np.ndarray


def energy_gradients(t: Triple, emb: EmbeddingTable, params: Params) -> Gradients:
    e_lhs = emb.row(t.lhs)
    e_rel = emb.row(t.rel)
    e_rhs = emb.row(t.rhs)
    if isinstance(params, LinearParams):
        u = g_left_linear(e_lhs, e_rel, params)
        v = g_right_linear(e_rhs, e_rel, params)
        g = LinearParams(
            w_l1=-np.outer(v, e_lhs),
            w_l2=-np.outer(v, e_rel),
            w_r1=-np.outer(u, e_rhs),
            w_r2=-np.outer(u, e_rel),
            b_l=-v,
            b_r=-u,
        )
        d_lhs = -(params.w_l1.T @ v)
        d_rhs = -(params.w_r1.T @ u)
        d_rel = -(params.w_l2.T @ v + params.w_r2.T @ u)
        return Gradients(g, d_lhs, d_rel, d_rhs)

    m_l = tc.mode3_contract(params.w_l, e_rel)
    m_r = tc.mode3_contract(params.w_r, e_rel)
    u = m_l @ e_lhs + params.b_l
    v = m_r @ e_rhs + params.b_r
    g = BilinearParams(
        w_l=-np.einsum("i,j,k->ijk", v, e_lhs, e_rel),
        w_r=-np.einsum("i,j,k->ijk", u, e_rhs, e_rel),
        b_l=-v,
        b_r=-u,
    )
    d_lhs = -(m_l.T @ v)
    d_rhs = -(m_r.T @ u)
    d_rel = -(np.einsum("ijk,i,j->k", params.w_l, v, e_lhs)
              + np.einsum("ijk,i,j->k", params.w_r, u, e_rhs))
    return Gradients(g, d_lhs, d_rel, d_rhs)


@dataclass
class Model:
    """Trained artifact: symbol table, embeddings, and g-function weights."""

    form: str
    symbols: list[str]
    relation_ids: frozenset[int]
    emb: EmbeddingTable
    params: Params

    @property
    def d(self) -> int:
        return self.emb.dim

    @property
    def p(self) -> int:
        return self.params.p

    def copy(self) -> "Model":
        return replace(self, emb=self.emb.copy(), params=self.params.copy())

    def energy_of(self, t: Triple) -> float:
        return energy(t, self.emb, self.params)


def energies_batch(emb: EmbeddingTable, params: Params,
                   lhs: np.ndarray, rel: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Vectorized energies for parallel id arrays.

    Bilinear work is grouped by relation id so each mode-3 contraction is
    done once per distinct relation in the batch.
    """
    ids = np.concatenate([lhs, rel, rhs])
    if ids.size and (ids.min() < 0 or ids.max() >= emb.n):
        raise LookupIdError("triple id outside embedding table")
    el = emb.vectors[lhs]
    er = emb.vectors[rel]
    eh = emb.vectors[rhs]
    if isinstance(params, LinearParams):
        u = el @ params.w_l1.T + er @ params.w_l2.T + params.b_l
        v = eh @ params.w_r1.T + er @ params.w_r2.T + params.b_r
        return -np.einsum("np,np->n", u, v)
    out = np.empty(len(lhs), dtype=np.float64)
    for r in np.unique(rel):
        sel = rel == r
        e_rel = emb.vectors[r]
        m_l = params.w_l @ e_rel
        m_r = params.w_r @ e_rel
        u = el[sel] @ m_l.T + params.b_l
        v = eh[sel] @ m_r.T + params.b_r
        out[sel] = -np.einsum("np,np->n", u, v)
    return out


def check_finite(*arrays, context: str = "") -> None:
    for a in arrays:
        if not np.all(np.isfinite(a)):
            raise NumericalError(f"non-finite values encountered {context}".strip())
