"""Network definitions for the two embedding trainers.

Both trainers exist to produce a deterministic encoder that the streaming
scorer can replay from a plain affine-layer file: only the encoder is
exported, the decoder / classifier heads are training-time scaffolding.
"""

from __future__ import annotations

import torch
from torch import nn

IB_ENCODER_HIDDEN = 32
IB_CLASSIFIER_HIDDEN = 32


class Autoencoder(nn.Module):
    """Single-layer rectified encoder with a linear decoder.

    Encoder: Linear(d -> out_dim) + ReLU. Decoder: Linear(out_dim -> d).
    """

    def __init__(self, in_dim: int, out_dim: int):
        super().__init__()
        self.encoder = nn.Sequential(nn.Linear(in_dim, out_dim), nn.ReLU())
        self.decoder = nn.Linear(out_dim, in_dim)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.decoder(self.encoder(x))

    def encoder_layers(self) -> list[tuple[torch.Tensor, torch.Tensor, str]]:
        linear = self.encoder[0]
        return [(linear.weight, linear.bias, "relu")]


class BottleneckEncoder(nn.Module):
    """Stochastic-encoder mean map plus a small binary classifier head.

    The compressed representation during training is the mean map plus
    unit-variance Gaussian noise; the exported transform is the mean map
    alone (a two-layer affine chain).
    """

    def __init__(self, in_dim: int, out_dim: int, noise_std: float = 1.0):
        super().__init__()
        self.hidden = nn.Linear(in_dim, IB_ENCODER_HIDDEN)
        self.mean_out = nn.Linear(IB_ENCODER_HIDDEN, out_dim)
        self.classifier = nn.Sequential(
            nn.Linear(out_dim, IB_CLASSIFIER_HIDDEN),
            nn.ReLU(),
            nn.Linear(IB_CLASSIFIER_HIDDEN, 2),
        )
        self.noise_std = noise_std

    def mean_map(self, x: torch.Tensor) -> torch.Tensor:
        return self.mean_out(torch.relu(self.hidden(x)))

    def forward(self, x: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        h = self.mean_map(x)
        t = h + torch.randn_like(h) * self.noise_std
        return h, self.classifier(t)

    def encoder_layers(self) -> list[tuple[torch.Tensor, torch.Tensor, str]]:
        return [
            (self.hidden.weight, self.hidden.bias, "relu"),
            (self.mean_out.weight, self.mean_out.bias, "none"),
        ]


def compression_bound(means: torch.Tensor, noise_std: float) -> torch.Tensor:
    """Pairwise-distance estimate of the encoder's compression term.

    For a Gaussian channel t = h(x) + N(0, s^2 I), the mutual information
    between input and representation is bounded by

        mean_i [ -log (1/N) sum_j exp(-||h_i - h_j||^2 / (2 s^2)) ]

    which shrinks as the embedded points crowd together.
    """
    n = means.shape[0]
    d2 = torch.cdist(means, means).pow(2)
    inner = torch.logsumexp(-d2 / (2.0 * noise_std * noise_std), dim=1)
    return (-inner).mean() + torch.log(torch.tensor(float(n)))
