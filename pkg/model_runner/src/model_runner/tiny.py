"""Built-in trainer backend: a small torch span classifier.

This is the default stand-in for a full pre-trained encoder so that a run
completes in seconds on CPU. Tokens hash into a fixed embedding table; a span
is the mean of its token embeddings plus a width embedding; one linear head
scores the twelve entity labels plus "none", and a pair head scores the two
relation labels plus "none" over ordered pairs of same-sentence spans.

Emitted predictions follow the exchange convention: per-sentence lists, global
inclusive token indices, and two trailing floats (raw logit, then softmax
probability) per entry. Relation arguments only ever reference spans that were
themselves predicted, so every output file is ingestible by construction.
"""

from __future__ import annotations

import logging
import zlib
from pathlib import Path

import torch

from .exchange import (
    ENTITY_INDEX,
    ENTITY_LABELS,
    NONE_ENTITY,
    NONE_RELATION,
    RELATION_INDEX,
    RELATION_LABELS,
    Segment,
    read_segments,
    write_predictions,
)
from .manifest import RunManifest

logger = logging.getLogger(__name__)

_N_BUCKETS = 512
_DIM = 32


def _bucket(token: str) -> int:
    # zlib.crc32 is stable across runs and platforms, unlike hash().
    return zlib.crc32(token.lower().encode("utf-8")) % _N_BUCKETS


class _SpanModel(torch.nn.Module):
    def __init__(self, max_width: int):
        super().__init__()
        self.max_width = max_width
        self.token_emb = torch.nn.Embedding(_N_BUCKETS, _DIM)
        self.width_emb = torch.nn.Embedding(max_width, _DIM)
        self.span_head = torch.nn.Linear(_DIM, len(ENTITY_LABELS) + 1)
        self.pair_head = torch.nn.Linear(2 * _DIM, len(RELATION_LABELS) + 1)

    def span_vectors(self, tokens: list[str], spans: list[tuple[int, int]]) -> torch.Tensor:
        """Vectors for (start, end) spans with sentence-local indices."""
        emb = self.token_emb(torch.tensor([_bucket(t) for t in tokens], dtype=torch.long))
        vecs = [
            emb[start : end + 1].mean(dim=0) + self.width_emb.weight[end - start]
            for start, end in spans
        ]
        return torch.stack(vecs)

    def span_logits(self, tokens: list[str], spans: list[tuple[int, int]]) -> torch.Tensor:
        return self.span_head(self.span_vectors(tokens, spans))

    def pair_logits(self, span_vecs: torch.Tensor, pairs: list[tuple[int, int]]) -> torch.Tensor:
        left = span_vecs[torch.tensor([a for a, _ in pairs], dtype=torch.long)]
        right = span_vecs[torch.tensor([b for _, b in pairs], dtype=torch.long)]
        return self.pair_head(torch.cat([left, right], dim=1))


def _candidate_spans(n_tokens: int, max_width: int) -> list[tuple[int, int]]:
    return [
        (start, end)
        for start in range(n_tokens)
        for end in range(start, min(start + max_width, n_tokens))
    ]


def _sentence_views(segment: Segment):
    """Per-sentence (tokens, gold span labels, gold pair labels) with
    sentence-local indices."""
    starts = segment.sentence_starts()
    for i, tokens in enumerate(segment.sentences):
        offset = starts[i]
        span_labels = {
            (s - offset, e - offset): ENTITY_INDEX[label] for s, e, label in segment.ner[i]
        }
        pair_labels = {
            ((s1 - offset, e1 - offset), (s2 - offset, e2 - offset)): RELATION_INDEX[label]
            for s1, e1, s2, e2, label in segment.relations[i]
        }
        yield list(tokens), span_labels, pair_labels


class TinyBackend:
    """Default backend: trains and predicts in-process on CPU or CUDA."""

    name = "tiny"

    def train(self, manifest: RunManifest) -> Path:
        torch.manual_seed(manifest.seed)
        device = torch.device(manifest.device)
        model = _SpanModel(manifest.max_span_width).to(device)
        optimizer = torch.optim.Adam(model.parameters(), lr=manifest.learning_rate)
        train_segments = read_segments(manifest.train)
        dev_segments = read_segments(manifest.dev)

        for epoch in range(1, manifest.epochs + 1):
            model.train()
            total_loss = 0.0
            for segment in train_segments:
                for tokens, span_labels, pair_labels in _sentence_views(segment):
                    loss = self._sentence_loss(model, tokens, span_labels, pair_labels, manifest.max_span_width)
                    if loss is None:
                        continue
                    optimizer.zero_grad()
                    loss.backward()
                    optimizer.step()
                    total_loss += loss.detach().item()
            dev_f1 = self._dev_f1(model, dev_segments)
            logger.info("epoch %d/%d: train loss %.4f, dev NER F1 %.4f", epoch, manifest.epochs, total_loss, dev_f1)

        manifest.out_model.parent.mkdir(parents=True, exist_ok=True)
        torch.save(
            {"state_dict": model.state_dict(), "max_span_width": manifest.max_span_width},
            manifest.out_model,
        )
        return manifest.out_model

    def predict(self, manifest: RunManifest, model_path: Path) -> Path:
        artifact = torch.load(model_path, map_location=manifest.device, weights_only=True)
        model = _SpanModel(int(artifact["max_span_width"]))
        model.load_state_dict(artifact["state_dict"])
        model.eval()

        entries = []
        for segment in read_segments(manifest.test):
            obj = dict(segment.raw)
            obj["predicted_ner"], obj["predicted_relations"] = self._predict_segment(model, segment)
            entries.append(obj)
        return write_predictions(manifest.out_predictions, entries)

    # ------------------------------------------------------------- internals

    def _sentence_loss(self, model, tokens, span_labels, pair_labels, max_width):
        spans = _candidate_spans(len(tokens), max_width)
        if not spans:
            return None
        targets = torch.tensor([span_labels.get(span, NONE_ENTITY) for span in spans], dtype=torch.long)
        loss = torch.nn.functional.cross_entropy(model.span_logits(tokens, spans), targets)

        gold_spans = sorted(span_labels)
        if len(gold_spans) >= 2:
            pairs = [(i, j) for i in range(len(gold_spans)) for j in range(len(gold_spans)) if i != j]
            pair_targets = torch.tensor(
                [pair_labels.get((gold_spans[i], gold_spans[j]), NONE_RELATION) for i, j in pairs],
                dtype=torch.long,
            )
            vecs = model.span_vectors(tokens, gold_spans)
            loss = loss + torch.nn.functional.cross_entropy(model.pair_logits(vecs, pairs), pair_targets)
        return loss

    @torch.no_grad()
    def _predict_segment(self, model, segment: Segment) -> tuple[list, list]:
        starts = segment.sentence_starts()
        pred_ner: list[list] = []
        pred_rel: list[list] = []
        for i, tokens_t in enumerate(segment.sentences):
            tokens = list(tokens_t)
            offset = starts[i]
            spans = _candidate_spans(len(tokens), model.max_width)
            ner_row: list[list] = []
            rel_row: list[list] = []
            kept: list[tuple[int, int]] = []
            if spans:
                logits = model.span_logits(tokens, spans)
                probs = torch.softmax(logits, dim=1)
                best = logits.argmax(dim=1)
                for k, span in enumerate(spans):
                    label_idx = int(best[k])
                    if label_idx == NONE_ENTITY:
                        continue
                    kept.append(span)
                    ner_row.append(
                        [
                            span[0] + offset,
                            span[1] + offset,
                            ENTITY_LABELS[label_idx],
                            float(logits[k, label_idx]),
                            float(probs[k, label_idx]),
                        ]
                    )
            if len(kept) >= 2:
                pairs = [(a, b) for a in range(len(kept)) for b in range(len(kept)) if a != b]
                vecs = model.span_vectors(tokens, kept)
                pair_logits = model.pair_logits(vecs, pairs)
                pair_probs = torch.softmax(pair_logits, dim=1)
                pair_best = pair_logits.argmax(dim=1)
                for k, (a, b) in enumerate(pairs):
                    label_idx = int(pair_best[k])
                    if label_idx == NONE_RELATION:
                        continue
                    rel_row.append(
                        [
                            kept[a][0] + offset,
                            kept[a][1] + offset,
                            kept[b][0] + offset,
                            kept[b][1] + offset,
                            RELATION_LABELS[label_idx],
                            float(pair_logits[k, label_idx]),
                            float(pair_probs[k, label_idx]),
                        ]
                    )
            pred_ner.append(ner_row)
            pred_rel.append(rel_row)
        return pred_ner, pred_rel

    def _dev_f1(self, model, segments: list[Segment]) -> float:
        gold = set()
        pred = set()
        for segment in segments:
            for i, sent in enumerate(segment.ner):
                gold |= {(segment.doc_key, i, s, e, label) for s, e, label in sent}
            ner_rows, _ = self._predict_segment(model, segment)
            for i, row in enumerate(ner_rows):
                pred |= {(segment.doc_key, i, s, e, label) for s, e, label, _lg, _pr in row}
        tp = len(pred & gold)
        p = tp / len(pred) if pred else 0.0
        r = tp / len(gold) if gold else 0.0
        return 2 * p * r / (p + r) if p + r else 0.0
