"""Spectrogram VAE.

Convolutional encoder (stride-2 stages, then a fully connected head that
produces mu and log sigma^2) mirrored by a fully connected layer plus
transposed-convolution decoder with a sigmoid output, so reconstructions
live in the same [0, 1] range as the normalized dB inputs. Reconstruction
likelihood is a fixed-variance Gaussian, i.e. summed squared error.
"""

from __future__ import annotations

import copy

import numpy as np
import torch
from sklearn.base import BaseEstimator
from torch import nn

from ..validation import check_array, check_fitted, check_unit_range
from .common import GaussianParams, TrainingDiverged, beta_at_epoch


class _ConvVaeNet(nn.Module):
    """Mirror-image conv/deconv stack around a Gaussian bottleneck."""

    def __init__(self, input_shape: tuple[int, int], latent_dim: int, channels: tuple[int, ...]):
        super().__init__()
        if len(channels) < 1:
            raise ValueError("need at least one conv stage")
        self.input_shape = tuple(input_shape)
        self.latent_dim = latent_dim
        self.channels = tuple(channels)

        # Stride-2 convs halve each spatial dim (rounded up); remember the
        # shape chain so the decoder can invert it exactly.
        shapes = [self.input_shape]
        h, w = self.input_shape
        enc_layers: list[nn.Module] = []
        in_ch = 1
        for ch in channels:
            enc_layers += [nn.Conv2d(in_ch, ch, kernel_size=3, stride=2, padding=1), nn.ReLU()]
            h, w = (h + 1) // 2, (w + 1) // 2
            shapes.append((h, w))
            in_ch = ch
        self.encoder = nn.Sequential(*enc_layers)
        self._shapes = shapes
        self._flat = channels[-1] * h * w
        self.enc_head = nn.Linear(self._flat, 2 * latent_dim)

        self.dec_head = nn.Linear(latent_dim, self._flat)
        dec_layers: list[nn.Module] = []
        for i in reversed(range(len(channels))):
            out_ch = channels[i - 1] if i > 0 else 1
            th, tw = shapes[i]
            ch_, cw = shapes[i + 1]
            out_pad = (th - (2 * ch_ - 1), tw - (2 * cw - 1))  # exact shape inversion
            dec_layers.append(
                nn.ConvTranspose2d(
                    channels[i], out_ch, kernel_size=3, stride=2, padding=1, output_padding=out_pad
                )
            )
            if i > 0:
                dec_layers.append(nn.ReLU())
        self.decoder = nn.Sequential(*dec_layers)

    def encode(self, x: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        """x: (B, H, W) -> (mu, logvar), each (B, latent_dim)."""
        hidden = self.encoder(x.unsqueeze(1)).flatten(1)
        mu, logvar = self.enc_head(hidden).chunk(2, dim=1)
        return mu, logvar

    def decode(self, z: torch.Tensor) -> torch.Tensor:
        hidden = torch.relu(self.dec_head(z))
        hidden = hidden.view(-1, self.channels[-1], *self._shapes[-1])
        return torch.sigmoid(self.decoder(hidden)).squeeze(1)

    def losses(
        self, x: torch.Tensor, eps: torch.Tensor, beta: float
    ) -> tuple[torch.Tensor, torch.Tensor, torch.Tensor]:
        """Batch-mean (total, recon, kl); recon is summed squared error per example."""
        mu, logvar = self.encode(x)
        sigma = torch.exp(0.5 * logvar)
        z = mu + sigma * eps
        recon_x = self.decode(z)
        recon = ((recon_x - x) ** 2).flatten(1).sum(dim=1)
        kl = 0.5 * (mu**2 + sigma**2 - 1.0 - logvar).sum(dim=1)
        total = recon + beta * kl
        return total.mean(), recon.mean(), kl.mean()


class SpectrogramVAE(BaseEstimator):
    """VAE over normalized MEL spectrograms, sklearn style.

    ``fit`` trains on an array of spectrograms scaled to [0, 1];
    ``transform`` samples one latent embedding per spectrogram from the
    learned posterior (the conditioning signal for the text model).

    Parameters
    ----------
    latent_dim : size of the latent vector.
    channels : conv channel widths; one stride-2 stage per entry.
    epochs, batch_size, learning_rate : Adam training schedule.
    beta : final KL weight.
    beta_warmup_epochs : linear warm-up length for the KL weight.
    seed : controls init, shuffling and posterior sampling.
    """

    def __init__(
        self,
        latent_dim: int = 64,
        channels: tuple[int, ...] = (32, 64, 128, 256),
        epochs: int = 100,
        batch_size: int = 32,
        learning_rate: float = 1e-3,
        beta: float = 1.0,
        beta_warmup_epochs: int = 10,
        seed: int = 0,
    ):
        self.latent_dim = latent_dim
        self.channels = channels
        self.epochs = epochs
        self.batch_size = batch_size
        self.learning_rate = learning_rate
        self.beta = beta
        self.beta_warmup_epochs = beta_warmup_epochs
        self.seed = seed

    # ------------------------------------------------------------------
    def _build(self, input_shape: tuple[int, int]) -> None:
        torch.manual_seed(self.seed)
        self.input_shape_ = tuple(input_shape)
        self.module_ = _ConvVaeNet(self.input_shape_, self.latent_dim, tuple(self.channels))
        self.module_.eval()
        self.history_: list[dict] = []

    def _check_X(self, X, single_ok: bool = False) -> np.ndarray:
        arr = np.asarray(X, dtype=np.float32)
        if single_ok and arr.ndim == 2:
            arr = arr[None]
        arr = check_array(arr, 3, "spectrograms")
        check_unit_range(arr, "spectrograms")
        if hasattr(self, "input_shape_") and arr.shape[1:] != self.input_shape_:
            raise ValueError(f"spectrogram shape {arr.shape[1:]} != model input {self.input_shape_}")
        return arr

    def fit(self, X, y=None) -> "SpectrogramVAE":
        """Train on spectrograms X of shape (N, n_mels, n_frames), values in [0, 1]."""
        X = self._check_X(X)
        if X.shape[0] == 0:
            raise ValueError("empty dataset")
        self._build(X.shape[1:])
        net = self.module_
        opt = torch.optim.Adam(net.parameters(), lr=self.learning_rate)
        shuffle_rng = np.random.default_rng(self.seed)
        eps_gen = torch.Generator().manual_seed(self.seed + 1)
        data = torch.from_numpy(X)
        last_good = copy.deepcopy(net.state_dict())

        net.train()
        for epoch in range(self.epochs):
            beta = beta_at_epoch(epoch, self.beta, self.beta_warmup_epochs)
            order = shuffle_rng.permutation(len(data))
            recon_sum = kl_sum = 0.0
            n_batches = 0
            for start in range(0, len(data), self.batch_size):
                batch = data[order[start : start + self.batch_size]]
                eps = torch.randn(batch.shape[0], self.latent_dim, generator=eps_gen)
                total, recon, kl = net.losses(batch, eps, beta)
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
            self.history_.append(
                {
                    "epoch": epoch,
                    "recon": recon_sum / n_batches,
                    "kl": kl_sum / n_batches,
                    "beta": beta,
                }
            )
        net.eval()
        return self

    # ------------------------------------------------------------------
    def encode(self, X) -> GaussianParams:
        """Posterior (mu, sigma) for each spectrogram; deterministic."""
        check_fitted(self, "module_")
        arr = self._check_X(X, single_ok=True)
        with torch.no_grad():
            mu, logvar = self.module_.encode(torch.from_numpy(arr))
        return GaussianParams(mu.numpy(), np.exp(0.5 * logvar.numpy()))

    def decode(self, Z) -> np.ndarray:
        """Reconstruct spectrograms (in [0, 1]) from latent vectors (N, latent_dim)."""
        check_fitted(self, "module_")
        Z = np.asarray(Z, dtype=np.float32)
        if Z.ndim == 1:
            Z = Z[None]
        if Z.ndim != 2 or Z.shape[1] != self.latent_dim:
            raise ValueError(f"latents must be (N, {self.latent_dim}), got {Z.shape}")
        with torch.no_grad():
            out = self.module_.decode(torch.from_numpy(Z))
        return out.numpy()

    def transform(self, X, seed: int | None = None) -> np.ndarray:
        """One sampled embedding per spectrogram, z = mu + sigma * eps.

        The eps stream is seeded (default: the estimator's seed), so the
        embedding set is frozen and reproducible.
        """
        g = self.encode(X)
        rng = np.random.default_rng(self.seed if seed is None else seed)
        eps = rng.standard_normal(g.mu.shape)
        return (g.mu + g.sigma * eps).astype(np.float32)

    def loss(self, X, eps=None, beta: float = 1.0) -> tuple[float, float, float]:
        """(total, recon, kl) for one spectrogram or a batch, with explicit eps."""
        check_fitted(self, "module_")
        arr = self._check_X(X, single_ok=True)
        if eps is None:
            eps_t = torch.zeros(arr.shape[0], self.latent_dim)
        else:
            eps_t = torch.as_tensor(np.asarray(eps, dtype=np.float32)).reshape(arr.shape[0], -1)
            if eps_t.shape[1] != self.latent_dim:
                raise ValueError(f"eps must have dimension {self.latent_dim}")
        with torch.no_grad():
            total, recon, kl = self.module_.losses(torch.from_numpy(arr), eps_t, beta)
        if not torch.isfinite(total):
            raise TrainingDiverged("non-finite loss")
        return float(total), float(recon), float(kl)
