"""Audio-conditioned text VAE.

LSTM encoder to a Gaussian posterior over z_text; LSTM decoder whose input
at every step is [token embedding | z_text | z_audio], so the audio
embedding conditions each generation step. Sampling a fresh z_text from the
prior and fixing z_audio to a clip's embedding yields novel lines for that
clip.

KL annealing plus word dropout keep the decoder from ignoring the latent
(the usual text-VAE posterior collapse).
"""

from __future__ import annotations

import copy
import logging
from dataclasses import dataclass

import numpy as np
import torch
from sklearn.base import BaseEstimator
from torch import nn

from ..corpus.vocab import BOS, EOS, PAD, UNK, DEFAULT_MAX_LINE_LEN, Vocabulary, detokenize
from ..validation import check_array, check_fitted
from .common import GaussianParams, TrainingDiverged, beta_at_epoch

logger = logging.getLogger(__name__)

COLLAPSE_KL_FLOOR = 0.1  # nats; below this after warm-up we flag collapse


@dataclass
class GenerationRequest:
    """A batch of lines to generate for one clip embedding."""

    embedding: np.ndarray
    n_lines: int = 100
    temperature: float = 0.8
    max_len: int = DEFAULT_MAX_LINE_LEN
    seed: int = 0

    def __post_init__(self) -> None:
        self.embedding = np.asarray(self.embedding, dtype=np.float32).reshape(-1)
        if self.n_lines < 1:
            raise ValueError("n_lines must be >= 1")
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if self.max_len < 3:
            raise ValueError("max_len must be >= 3")


class _TextVaeNet(nn.Module):
    def __init__(self, vocab_size: int, embed_dim: int, hidden_size: int, latent_dim: int, cond_dim: int):
        super().__init__()
        self.embedding = nn.Embedding(vocab_size, embed_dim, padding_idx=PAD)
        self.encoder = nn.LSTM(embed_dim, hidden_size, batch_first=True)
        self.enc_head = nn.Linear(hidden_size, 2 * latent_dim)
        self.decoder = nn.LSTM(embed_dim + latent_dim + cond_dim, hidden_size, batch_first=True)
        self.out = nn.Linear(hidden_size, vocab_size)

    def encode(self, tokens: torch.Tensor, lengths: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        """tokens: (B, L) PAD-padded; the hidden state at each sequence's last
        real token feeds the Gaussian head."""
        emb = self.embedding(tokens)
        outputs, _ = self.encoder(emb)
        last = outputs[torch.arange(tokens.shape[0]), lengths - 1]
        mu, logvar = self.enc_head(last).chunk(2, dim=1)
        return mu, logvar

    def step_inputs(self, tokens: torch.Tensor, z_t: torch.Tensor, z_s: torch.Tensor) -> torch.Tensor:
        """Concatenate [embed(token) | z_t | z_s] for every step."""
        emb = self.embedding(tokens)
        cond = torch.cat([z_t, z_s], dim=-1).unsqueeze(1).expand(-1, emb.shape[1], -1)
        return torch.cat([emb, cond], dim=-1)

    def decode_logits(self, tokens_in: torch.Tensor, z_t: torch.Tensor, z_s: torch.Tensor) -> torch.Tensor:
        out, _ = self.decoder(self.step_inputs(tokens_in, z_t, z_s))
        return self.out(out)

    def losses(
        self,
        tokens: torch.Tensor,
        lengths: torch.Tensor,
        cond: torch.Tensor,
        eps: torch.Tensor,
        beta: float,
        inputs: torch.Tensor | None = None,
    ) -> tuple[torch.Tensor, torch.Tensor, torch.Tensor]:
        """Batch-mean (total, recon, kl). ``inputs`` overrides the teacher-forced
        decoder inputs (used for word dropout); defaults to tokens[:, :-1]."""
        mu, logvar = self.encode(tokens, lengths)
        sigma = torch.exp(0.5 * logvar)
        z_t = mu + sigma * eps
        if inputs is None:
            inputs = tokens[:, :-1]
        logits = self.decode_logits(inputs, z_t, cond)
        logp = torch.log_softmax(logits, dim=-1)
        targets = tokens[:, 1:]
        nll = -logp.gather(-1, targets.unsqueeze(-1)).squeeze(-1)
        mask = (targets != PAD).to(nll.dtype)
        recon = (nll * mask).sum(dim=1)
        kl = 0.5 * (mu**2 + sigma**2 - 1.0 - logvar).sum(dim=1)
        total = recon + beta * kl
        return total.mean(), recon.mean(), kl.mean()


class ConditionedTextVAE(BaseEstimator):
    """Text VAE whose decoder is conditioned on a spectrogram embedding.

    ``fit(X, y)`` takes tokenized lines X (lists of vocabulary indices,
    BOS...EOS) and their frozen clip embeddings y of shape (N, cond_dim).

    Parameters
    ----------
    vocab : the Vocabulary used to tokenize X; needed to detokenize samples.
    latent_dim / cond_dim : sizes of z_text and the audio embedding.
    embed_dim, hidden_size : decoder/encoder LSTM dimensions.
    word_dropout : probability of replacing a decoder input token by UNK
        during training.
    validation_fraction : tail fraction of the data held out for the
        per-epoch validation reconstruction loss.
    """

    def __init__(
        self,
        vocab: Vocabulary | None = None,
        latent_dim: int = 64,
        cond_dim: int = 64,
        embed_dim: int = 128,
        hidden_size: int = 256,
        epochs: int = 30,
        batch_size: int = 32,
        learning_rate: float = 1e-3,
        beta: float = 1.0,
        beta_warmup_epochs: int = 10,
        word_dropout: float = 0.4,
        max_line_len: int = DEFAULT_MAX_LINE_LEN,
        validation_fraction: float = 0.0,
        seed: int = 0,
    ):
        self.vocab = vocab
        self.latent_dim = latent_dim
        self.cond_dim = cond_dim
        self.embed_dim = embed_dim
        self.hidden_size = hidden_size
        self.epochs = epochs
        self.batch_size = batch_size
        self.learning_rate = learning_rate
        self.beta = beta
        self.beta_warmup_epochs = beta_warmup_epochs
        self.word_dropout = word_dropout
        self.max_line_len = max_line_len
        self.validation_fraction = validation_fraction
        self.seed = seed

    # ------------------------------------------------------------------
    def _build(self) -> None:
        if self.vocab is None:
            raise ValueError("a Vocabulary is required")
        torch.manual_seed(self.seed)
        self.module_ = _TextVaeNet(
            len(self.vocab), self.embed_dim, self.hidden_size, self.latent_dim, self.cond_dim
        )
        self.module_.eval()
        self.history_: list[dict] = []
        self.kl_collapsed_ = False

    def _pad_batch(self, sequences: list[list[int]]) -> tuple[torch.Tensor, torch.Tensor]:
        lengths = [len(s) for s in sequences]
        for s in sequences:
            if len(s) < 2 or s[0] != BOS or s[-1] != EOS:
                raise ValueError("sequences must start with BOS and end with EOS")
            if len(s) > self.max_line_len:
                raise ValueError(f"sequence length {len(s)} exceeds max_line_len {self.max_line_len}")
        out = torch.full((len(sequences), max(lengths)), PAD, dtype=torch.long)
        for i, s in enumerate(sequences):
            out[i, : len(s)] = torch.as_tensor(s, dtype=torch.long)
        return out, torch.as_tensor(lengths, dtype=torch.long)

    def _check_cond(self, y, n: int) -> torch.Tensor:
        arr = check_array(np.atleast_2d(np.asarray(y, dtype=np.float32)), 2, "conditioning")
        if arr.shape != (n, self.cond_dim):
            raise ValueError(f"conditioning must be ({n}, {self.cond_dim}), got {arr.shape}")
        return torch.from_numpy(arr)

    def fit(self, X: list[list[int]], y) -> "ConditionedTextVAE":
        """Train on paired (token sequence, clip embedding) examples."""
        if len(X) == 0:
            raise ValueError("empty dataset")
        cond = self._check_cond(y, len(X))
        self._build()
        net = self.module_

        n_val = int(len(X) * self.validation_fraction)
        if n_val:
            X_val, cond_val = X[-n_val:], cond[-n_val:]
            X, cond = X[:-n_val], cond[:-n_val]
            val_tokens, val_lengths = self._pad_batch(X_val)

        opt = torch.optim.Adam(net.parameters(), lr=self.learning_rate)
        shuffle_rng = np.random.default_rng(self.seed)
        gen = torch.Generator().manual_seed(self.seed + 1)
        last_good = copy.deepcopy(net.state_dict())

        net.train()
        for epoch in range(self.epochs):
            beta = beta_at_epoch(epoch, self.beta, self.beta_warmup_epochs)
            order = shuffle_rng.permutation(len(X))
            recon_sum = kl_sum = 0.0
            n_batches = 0
            for start in range(0, len(X), self.batch_size):
                idx = order[start : start + self.batch_size]
                tokens, lengths = self._pad_batch([X[i] for i in idx])
                eps = torch.randn(len(idx), self.latent_dim, generator=gen)
                inputs = self._apply_word_dropout(tokens[:, :-1], gen)
                total, recon, kl = net.losses(tokens, lengths, cond[idx], eps, beta, inputs=inputs)
                if not torch.isfinite(total):
                    net.load_state_dict(last_good)
                    net.eval()
                    raise TrainingDiverged(
                        f"non-finite loss at epoch {epoch}, batch {start // self.batch_size}"
                    )
                opt.zero_grad()
                total.backward()
                opt.step()
                recon_sum += recon.item()
                kl_sum += kl.item()
                n_batches += 1
            last_good = copy.deepcopy(net.state_dict())
            entry = {
                "epoch": epoch,
                "recon": recon_sum / n_batches,
                "kl": kl_sum / n_batches,
                "beta": beta,
            }
            if n_val:
                net.eval()
                with torch.no_grad():
                    _, val_recon, _ = net.losses(
                        val_tokens, val_lengths, cond_val, torch.zeros(n_val, self.latent_dim), beta
                    )
                entry["val_recon"] = float(val_recon)
                net.train()
            self.history_.append(entry)

        net.eval()
        if self.history_ and self.epochs > self.beta_warmup_epochs:
            final_kl = self.history_[-1]["kl"]
            if final_kl < COLLAPSE_KL_FLOOR:
                self.kl_collapsed_ = True
                logger.warning(
                    "posterior KL %.4f nats after warm-up; decoder may be ignoring z", final_kl
                )
        return self

    def _apply_word_dropout(
        self, inputs: torch.Tensor, gen: torch.Generator, rate: float | None = None
    ) -> torch.Tensor:
        rate = self.word_dropout if rate is None else rate
        if rate <= 0:
            return inputs
        drop = torch.rand(inputs.shape, generator=gen) < rate
        return torch.where(drop & (inputs != PAD), torch.full_like(inputs, UNK), inputs)

    # ------------------------------------------------------------------
    def encode(self, X: list[list[int]]) -> GaussianParams:
        """Posterior (mu, sigma) over z_text for each sequence."""
        check_fitted(self, "module_")
        tokens, lengths = self._pad_batch(X)
        with torch.no_grad():
            mu, logvar = self.module_.encode(tokens, lengths)
        return GaussianParams(mu.numpy(), np.exp(0.5 * logvar.numpy()))

    def log_probs(self, x: list[int], z_t: np.ndarray, z_s: np.ndarray) -> np.ndarray:
        """Teacher-forced per-step log-probabilities, shape (len(x) - 1, vocab).

        Row i is the distribution over x_{i+1} given x_0..x_i, z_t and z_s.
        """
        check_fitted(self, "module_")
        tokens, _ = self._pad_batch([x])
        z_t_t = torch.as_tensor(np.asarray(z_t, dtype=np.float32)).reshape(1, self.latent_dim)
        z_s_t = torch.as_tensor(np.asarray(z_s, dtype=np.float32)).reshape(1, self.cond_dim)
        with torch.no_grad():
            logits = self.module_.decode_logits(tokens[:, :-1], z_t_t, z_s_t)
        return torch.log_softmax(logits, dim=-1)[0].numpy()

    def loss(
        self,
        X: list[list[int]],
        y,
        eps=None,
        beta: float = 1.0,
        word_dropout: float = 0.0,
        seed: int = 0,
    ) -> tuple[float, float, float]:
        """(total, recon, kl) on a batch; word_dropout > 0 emulates a training step."""
        check_fitted(self, "module_")
        tokens, lengths = self._pad_batch(X)
        cond = self._check_cond(y, len(X))
        if eps is None:
            eps_t = torch.zeros(len(X), self.latent_dim)
        else:
            eps_t = torch.as_tensor(np.asarray(eps, dtype=np.float32)).reshape(len(X), self.latent_dim)
        inputs = tokens[:, :-1]
        if word_dropout > 0:
            gen = torch.Generator().manual_seed(seed)
            inputs = self._apply_word_dropout(inputs, gen, rate=word_dropout)
        with torch.no_grad():
            total, recon, kl = self.module_.losses(tokens, lengths, cond, eps_t, beta, inputs=inputs)
        if not torch.isfinite(total):
            raise TrainingDiverged("non-finite loss")
        return float(total), float(recon), float(kl)

    # ------------------------------------------------------------------
    def decode_tokens(
        self,
        z_t: np.ndarray,
        z_s: np.ndarray,
        temperature: float = 0.8,
        max_len: int | None = None,
        seed: int = 0,
    ) -> list[list[int]]:
        """Autoregressive decoding for a batch of (z_t, z_s) rows.

        Temperature 0 is greedy argmax. PAD and BOS are masked out, so
        sequences terminate at EOS or after max_len - 2 content tokens.
        """
        check_fitted(self, "module_")
        max_len = self.max_line_len if max_len is None else max_len
        if max_len > self.max_line_len:
            raise ValueError(f"max_len {max_len} exceeds configured max_line_len {self.max_line_len}")
        net = self.module_
        z_t_t = torch.as_tensor(np.asarray(z_t, dtype=np.float32)).reshape(-1, self.latent_dim)
        z_s_t = torch.as_tensor(np.asarray(z_s, dtype=np.float32)).reshape(-1, self.cond_dim)
        n = z_t_t.shape[0]
        gen = torch.Generator().manual_seed(seed)

        prev = torch.full((n, 1), BOS, dtype=torch.long)
        state = None
        finished = torch.zeros(n, dtype=torch.bool)
        rows: list[list[int]] = [[BOS] for _ in range(n)]
        with torch.no_grad():
            for _ in range(max_len - 2):
                step_in = net.step_inputs(prev, z_t_t, z_s_t)
                out, state = net.decoder(step_in, state)
                logits = net.out(out[:, 0, :])
                logits[:, PAD] = float("-inf")
                logits[:, BOS] = float("-inf")
                if temperature == 0:
                    nxt = logits.argmax(dim=-1)
                else:
                    probs = torch.softmax(logits / temperature, dim=-1)
                    nxt = torch.multinomial(probs, 1, generator=gen).squeeze(1)
                for i in range(n):
                    if not finished[i]:
                        rows[i].append(int(nxt[i]))
                finished |= nxt == EOS
                if bool(finished.all()):
                    break
                prev = nxt.unsqueeze(1)
        for row in rows:
            if row[-1] != EOS:
                row.append(EOS)
        return rows

    def generate_lines(self, req: GenerationRequest) -> list[str]:
        """Sample z_text from the prior per line and decode under the clip embedding."""
        check_fitted(self, "module_")
        if req.embedding.shape != (self.cond_dim,):
            raise ValueError(f"embedding must have dimension {self.cond_dim}")
        rng = np.random.default_rng(req.seed)
        z_t = rng.standard_normal((req.n_lines, self.latent_dim)).astype(np.float32)
        z_s = np.tile(req.embedding, (req.n_lines, 1))
        token_seed = int(rng.integers(0, 2**63 - 1))
        rows = self.decode_tokens(z_t, z_s, req.temperature, req.max_len, seed=token_seed)
        return [detokenize(row, self.vocab) for row in rows]

    def generate(self, embedding, n_lines: int = 100, temperature: float = 0.8,
                 max_len: int | None = None, seed: int = 0) -> list[str]:
        """Convenience wrapper around :meth:`generate_lines`."""
        return self.generate_lines(
            GenerationRequest(
                embedding=embedding,
                n_lines=n_lines,
                temperature=temperature,
                max_len=self.max_line_len if max_len is None else max_len,
                seed=seed,
            )
        )
