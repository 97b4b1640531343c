"""Small-scale channels, MMSE estimates and beamformers for the Monte Carlo oracle."""

from typing import Optional

import numpy as np

from app.models.models import Beamformers, ChannelRealization, NetworkRealization


def complex_normal(rng: np.random.Generator, shape, variance=1.0) -> np.ndarray:
    """CN(0, variance) entries: two independent real normals scaled by 1/sqrt(2)"""
    scale = np.sqrt(np.asarray(variance, dtype=float) / 2.0)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def array_response(azimuth, elevation, N: int, spacing_ratio: float = 0.5) -> np.ndarray:
    """
    ULA response towards (azimuth, elevation), unit norm

    Entry q (0-based) is exp(j 2 pi (d/lambda) q sin(elevation) sin(azimuth)) / sqrt(N).
    Vector inputs of length M return an (M, N) array.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    azimuth = np.asarray(azimuth, dtype=float)
    elevation = np.asarray(elevation, dtype=float)
    q = np.arange(N)
    phase = 2.0 * np.pi * spacing_ratio * np.multiply.outer(np.sin(elevation) * np.sin(azimuth), q)
    return np.exp(1j * phase) / np.sqrt(N)


def draw_channels(net: NetworkRealization, rng: np.random.Generator, batch: Optional[int] = None) -> ChannelRealization:
    """
    Draw channels from the MMSE posterior: g_hat ~ CN(0, gamma I), g_tilde ~ CN(0, (beta - gamma) I)

    With ``batch`` the arrays carry a leading trial axis, shape (batch, M, K, N).
    """
    shape = (net.M, net.K, net.antennas)
    gamma = net.gamma[..., None]
    error_variance = np.clip(net.beta - net.gamma, 0.0, None)[..., None]
    if batch is not None:
        shape = (batch,) + shape

    g_hat = complex_normal(rng, shape, gamma)
    g_tilde = complex_normal(rng, shape, error_variance)
    return ChannelRealization(g=g_hat + g_tilde, g_hat=g_hat, g_tilde=g_tilde)


def build_beamformers(ch: ChannelRealization, net: NetworkRealization) -> Beamformers:
    """Conjugate precoders for communication and target-steered vectors for sensing"""
    t_sen = array_response(
        net.target_angles[:, 0],
        net.target_angles[:, 1],
        net.antennas,
        net.spacing_over_lambda,
    )
    return Beamformers(t_com=np.conj(ch.g_hat), t_sen=np.atleast_2d(t_sen))
