"""Margin-ranking SGD over corrupted triples with early stopping on
validation AUC-PR.

Each epoch pairs every training positive with one corruption, runs
shuffled mini-batches, then projects every embedding row back to unit
norm. The best-validation snapshot is what training returns.
"""

from __future__ import annotations

import os
import time
from dataclasses import dataclass, field

import numpy as np

from . import evaluator
from .dataset import Dictionary, Triple, TripleSet, positives_of
from .errors import ConfigError, NumericalError
from .model import (BilinearParams, EmbeddingTable, LinearParams, Model,
                    Params, energies_batch, init_embeddings, init_params)

CORRUPTION_MODES = ("lhs", "rhs", "both")


@dataclass
class TrainConfig:
    learning_rate: float = 0.01
    margin: float = 1.0
    epochs_max: int = 500
    batch_size: int = 32
    corruption_mode: str = "both"
    patience: int = 10
    seed: int = 0

    def validate(self) -> None:
        if not self.learning_rate > 0:
            raise ConfigError(f"learning_rate must be > 0, got {self.learning_rate}")
        if not self.margin > 0:
            raise ConfigError(f"margin must be > 0, got {self.margin}")
        if self.epochs_max < 1:
            raise ConfigError(f"epochs_max must be >= 1, got {self.epochs_max}")
        if self.batch_size < 1:
            raise ConfigError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.corruption_mode not in CORRUPTION_MODES:
            raise ConfigError(f"corruption_mode must be one of {CORRUPTION_MODES}")
        if self.patience < 1:
            raise ConfigError(f"patience must be >= 1, got {self.patience}")


@dataclass
class EpochRecord:
    loss: float
    val_auc: float
    secs: float


@dataclass
class TrainTrace:
    epochs: list[EpochRecord] = field(default_factory=list)


def ranking_loss(e_pos: float, e_neg: float, margin: float) -> float:
    """Hinge on energies: positives must sit at least `margin` below corruptions."""
    return max(0.0, margin + e_pos - e_neg)


def corrupt(t: Triple, mode: str, rng: np.random.Generator,
            entity_ids: np.ndarray) -> Triple:
    """Replace one entity slot of t with a different, uniformly drawn entity."""
    if len(entity_ids) < 2:
        raise ConfigError("corruption needs at least 2 entities")
    if mode not in CORRUPTION_MODES:
        raise ConfigError(f"corruption_mode must be one of {CORRUPTION_MODES}")
    slot = mode
    if mode == "both":
        slot = "lhs" if rng.integers(2) == 0 else "rhs"
    original = t.lhs if slot == "lhs" else t.rhs
    while True:
        pick = int(entity_ids[rng.integers(len(entity_ids))])
        if pick != original:
            break
    if slot == "lhs":
        return Triple(pick, t.rel, t.rhs)
    return Triple(t.lhs, t.rel, pick)


def _corrupt_batch(lhs, rel, rhs, mode, rng, entity_ids):
    """Vectorized corruption: one corrupted copy per input triple."""
    m = len(lhs)
    if len(entity_ids) < 2:
        raise ConfigError("corruption needs at least 2 entities")
    if mode == "lhs":
        take_lhs = np.ones(m, dtype=bool)
    elif mode == "rhs":
        take_lhs = np.zeros(m, dtype=bool)
    else:
        take_lhs = rng.integers(2, size=m) == 0
    original = np.where(take_lhs, lhs, rhs)
    draws = entity_ids[rng.integers(len(entity_ids), size=m)]
    clash = draws == original
    while clash.any():
        draws[clash] = entity_ids[rng.integers(len(entity_ids), size=int(clash.sum()))]
        clash = draws == original
    c_lhs = np.where(take_lhs, draws, lhs)
    c_rhs = np.where(take_lhs, rhs, draws)
    return c_lhs, rel.copy(), c_rhs


def _accumulate_gradients(emb: EmbeddingTable, params: Params,
                          lhs, rel, rhs, sign: float,
                          g_params: Params, g_emb: np.ndarray) -> None:
    """Add sign * d(sum of energies)/d(theta) for a batch of triples."""
    el = emb.vectors[lhs]
    er = emb.vectors[rel]
    eh = emb.vectors[rhs]
    if isinstance(params, LinearParams):
        u = el @ params.w_l1.T + er @ params.w_l2.T + params.b_l
        v = eh @ params.w_r1.T + er @ params.w_r2.T + params.b_r
        g_params.w_l1 -= sign * (v.T @ el)
        g_params.w_l2 -= sign * (v.T @ er)
        g_params.w_r1 -= sign * (u.T @ eh)
        g_params.w_r2 -= sign * (u.T @ er)
        g_params.b_l -= sign * v.sum(axis=0)
        g_params.b_r -= sign * u.sum(axis=0)
        np.add.at(g_emb, lhs, -sign * (v @ params.w_l1))
        np.add.at(g_emb, rhs, -sign * (u @ params.w_r1))
        np.add.at(g_emb, rel, -sign * (v @ params.w_l2 + u @ params.w_r2))
        return
    assert isinstance(params, BilinearParams)
    m_l = np.einsum("pjk,mk->mpj", params.w_l, er)
    m_r = np.einsum("pjk,mk->mpj", params.w_r, er)
    u = np.einsum("mpj,mj->mp", m_l, el) + params.b_l
    v = np.einsum("mpj,mj->mp", m_r, eh) + params.b_r
    g_params.w_l -= sign * np.einsum("mp,mj,mk->pjk", v, el, er)
    g_params.w_r -= sign * np.einsum("mp,mj,mk->pjk", u, eh, er)
    g_params.b_l -= sign * v.sum(axis=0)
    g_params.b_r -= sign * u.sum(axis=0)
    np.add.at(g_emb, lhs, -sign * np.einsum("mpj,mp->mj", m_l, v))
    np.add.at(g_emb, rhs, -sign * np.einsum("mpj,mp->mj", m_r, u))
    d_rel = (np.einsum("pjk,mp,mj->mk", params.w_l, v, el)
             + np.einsum("pjk,mp,mj->mk", params.w_r, u, eh))
    np.add.at(g_emb, rel, -sign * d_rel)


def sgd_step(batch: list[tuple[Triple, Triple]], emb: EmbeddingTable,
             params: Params, config: TrainConfig) -> float:
    """One mini-batch update. Returns the mean ranking loss before the update."""
    pos = np.array([[p.lhs, p.rel, p.rhs] for p, _ in batch], dtype=np.int64)
    neg = np.array([[n.lhs, n.rel, n.rhs] for _, n in batch], dtype=np.int64)
    return _sgd_step_arrays(pos[:, 0], pos[:, 1], pos[:, 2],
                            neg[:, 0], neg[:, 1], neg[:, 2],
                            emb, params, config)


def _sgd_step_arrays(p_lhs, p_rel, p_rhs, n_lhs, n_rel, n_rhs,
                     emb: EmbeddingTable, params: Params,
                     config: TrainConfig) -> float:
    e_pos = energies_batch(emb, params, p_lhs, p_rel, p_rhs)
    e_neg = energies_batch(emb, params, n_lhs, n_rel, n_rhs)
    losses = np.maximum(0.0, config.margin + e_pos - e_neg)
    if not np.all(np.isfinite(losses)):
        raise NumericalError("non-finite ranking loss; training aborted")
    mean_loss = float(losses.mean())
    active = losses > 0
    if not active.any():
        return mean_loss

    g_params = _zeros_like_params(params)
    g_emb = np.zeros_like(emb.vectors)
    _accumulate_gradients(emb, params, p_lhs[active], p_rel[active], p_rhs[active],
                          +1.0, g_params, g_emb)
    _accumulate_gradients(emb, params, n_lhs[active], n_rel[active], n_rhs[active],
                          -1.0, g_params, g_emb)
    for target, grad in zip(params.arrays(), g_params.arrays()):
        if not np.all(np.isfinite(grad)):
            raise NumericalError("non-finite parameter gradient; training aborted")
        target -= config.learning_rate * grad
    touched = np.unique(np.concatenate([
        p_lhs[active], p_rel[active], p_rhs[active],
        n_lhs[active], n_rel[active], n_rhs[active]]))
    if not np.all(np.isfinite(g_emb[touched])):
        raise NumericalError("non-finite embedding gradient; training aborted")
    emb.vectors[touched] -= config.learning_rate * g_emb[touched]
    return mean_loss


def _zeros_like_params(params: Params) -> Params:
    if isinstance(params, LinearParams):
        return LinearParams(*(np.zeros_like(a) for a in params.arrays()))
    return BilinearParams(*(np.zeros_like(a) for a in params.arrays()))


def _log_enabled() -> bool:
    return os.environ.get("SME_LOG", "info") != "quiet"


def train(train_ts: TripleSet, valid_ts: TripleSet, d: Dictionary,
          form: str, dim_d: int, dim_p: int,
          config: TrainConfig) -> tuple[Model, TrainTrace]:
    """Run SGD epochs with early stopping; returns the best-validation model."""
    config.validate()
    if len(train_ts) == 0:
        raise ConfigError("training set is empty")
    if len(valid_ts) == 0:
        raise ConfigError("validation set is empty")
    pos = positives_of(train_ts)
    if len(pos) == 0:
        raise ConfigError("training set has no positive triples")
    entity_ids = d.entity_id_array()
    if len(entity_ids) < 2:
        raise ConfigError("corruption needs at least 2 entities")

    rng = np.random.Generator(np.random.PCG64(config.seed))
    emb = init_embeddings(len(d), dim_d, rng, frozenset(d.relation_ids))
    emb.normalize_rows()
    params = init_params(form, dim_d, dim_p, rng)

    trace = TrainTrace()
    best: Model | None = None
    best_auc = -np.inf
    stale = 0
    for epoch in range(config.epochs_max):
        t0 = time.perf_counter()
        perm = rng.permutation(len(pos))
        lhs, rel, rhs = pos.lhs[perm], pos.rel[perm], pos.rhs[perm]
        c_lhs, c_rel, c_rhs = _corrupt_batch(lhs, rel, rhs, config.corruption_mode,
                                             rng, entity_ids)
        total = 0.0
        for start in range(0, len(lhs), config.batch_size):
            sl = slice(start, start + config.batch_size)
            batch_loss = _sgd_step_arrays(lhs[sl], rel[sl], rhs[sl],
                                          c_lhs[sl], c_rel[sl], c_rhs[sl],
                                          emb, params, config)
            total += batch_loss * (len(lhs[sl]))
        emb.normalize_rows()
        mean_loss = total / len(lhs)

        val_scores = -energies_batch(emb, params, valid_ts.lhs, valid_ts.rel,
                                     valid_ts.rhs)
        val_auc = evaluator.auc_pr(evaluator.ScoredSet(val_scores, valid_ts.label))
        secs = time.perf_counter() - t0
        trace.epochs.append(EpochRecord(mean_loss, val_auc, secs))
        if _log_enabled():
            print(f"epoch={epoch} loss={mean_loss:.6f} val_auc={val_auc:.6f} "
                  f"secs={secs:.3f}")

        if val_auc > best_auc:
            best_auc = val_auc
            best = Model(form, list(d.symbols), frozenset(d.relation_ids),
                         emb.copy(), params.copy())
            stale = 0
        else:
            stale += 1
            if stale >= config.patience:
                break
    assert best is not None
    return best, trace
