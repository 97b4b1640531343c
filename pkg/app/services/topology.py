"""
Network geometry and large-scale fading for one random drop

APs and users are dropped uniformly in a D x D square whose edges wrap around,
so every distance is the shortest of the nine periodic images.
"""

import logging
from typing import Optional

import numpy as np

from app.models.config import SystemConfig
from app.models.models import NetworkRealization

logger = logging.getLogger(__name__)

_IMAGES = np.array([(dx, dy) for dx in (-1, 0, 1) for dy in (-1, 0, 1)], dtype=float)


def torus_distance(p, q, D: float) -> np.ndarray:
    """
    Pairwise wrap-around distances

    Args:
        p: (A, 2) points
        q: (B, 2) points
        D: side of the square

    Returns:
        (A, B) matrix, minimum over the 9 wrap-around images of q
    """
    p = np.atleast_2d(np.asarray(p, dtype=float))
    q = np.atleast_2d(np.asarray(q, dtype=float))
    # (A, 1, 1, 2) - (1, B, 9, 2)
    images = q[:, None, :] + D * _IMAGES[None, :, :]
    diff = p[:, None, None, :] - images[None, :, :, :]
    return np.sqrt(np.min(np.sum(diff**2, axis=-1), axis=-1))


def wrapped_displacement(origin, point, D: float) -> np.ndarray:
    """Shortest displacement vector origin -> point on the torus, each coordinate in [-D/2, D/2]"""
    delta = np.asarray(point, dtype=float) - np.asarray(origin, dtype=float)
    return (delta + D / 2.0) % D - D / 2.0


def path_loss_dB(d_km, config: SystemConfig):
    """Three-slope path loss in dB (negative), scalar or array input"""
    d = np.asarray(d_km, dtype=float)
    if np.any(d < 0):
        raise ValueError("distance must be non-negative")
    L, d0, d1 = config.L_dB, config.d0_km, config.d1_km

    # log10 arguments are clipped only to keep unused branches finite
    far = -L - 35.0 * np.log10(np.maximum(d, d1))
    mid = -L - 15.0 * np.log10(d1) - 20.0 * np.log10(np.maximum(d, d0))
    near = -L - 15.0 * np.log10(d1) - 20.0 * np.log10(d0)

    pl = np.where(d > d1, far, np.where(d > d0, mid, near))
    return float(pl) if pl.ndim == 0 else pl


def large_scale(pl_dB, shadow_z, config: SystemConfig, distance_km=None):
    """
    Large-scale coefficient beta = 10^((PL + sigma_sh * z) / 10)

    When ``distance_km`` is given, shadowing is applied only to links longer than d1.
    """
    pl = np.asarray(pl_dB, dtype=float)
    z = np.asarray(shadow_z, dtype=float)
    if distance_km is not None:
        z = np.where(np.asarray(distance_km) > config.d1_km, z, 0.0)
    beta = 10.0 ** ((pl + config.sigma_sh_dB * z) / 10.0)
    return float(beta) if beta.ndim == 0 else beta


def estimation_variance(beta, config: SystemConfig):
    """MMSE estimate variance gamma = tau_t rho_t beta^2 / (tau_t rho_t beta + 1)"""
    b = np.asarray(beta, dtype=float)
    if np.any(b < 0):
        raise ValueError("beta must be non-negative")
    s = config.tau_t * config.rho_t * b
    # Written as beta * s/(s+1) so that gamma <= beta survives rounding
    gamma = b * (s / (s + 1.0))
    return float(gamma) if gamma.ndim == 0 else gamma


def _correlated_component(positions: np.ndarray, config: SystemConfig, rng: np.random.Generator) -> np.ndarray:
    # Covariance 2^(-d / d_decorr) between sites, matrix square root by eigendecomposition
    distances = torus_distance(positions, positions, config.D_km)
    covariance = 2.0 ** (-distances / config.shadow_decorrelation_km)
    eigenvalues, eigenvectors = np.linalg.eigh(covariance)
    root = eigenvectors * np.sqrt(np.clip(eigenvalues, 0.0, None))
    return root @ rng.standard_normal(len(positions))


def correlated_shadowing(ap_positions, user_positions, config: SystemConfig, rng: np.random.Generator) -> np.ndarray:
    """
    Standard-normal shadowing draws z (M, K)

    Correlated mode mixes an AP-site component and a user-site component,
    z_mk = sqrt(delta) a_m + sqrt(1 - delta) b_k, each spatially correlated.
    Uncorrelated mode draws i.i.d. normals.
    """
    ap_positions = np.atleast_2d(ap_positions)
    user_positions = np.atleast_2d(user_positions)
    M, K = len(ap_positions), len(user_positions)
    if not config.correlated_shadowing:
        return rng.standard_normal((M, K))

    a = _correlated_component(ap_positions, config, rng)
    b = _correlated_component(user_positions, config, rng)
    delta = config.shadow_delta
    return np.sqrt(delta) * a[:, None] + np.sqrt(1.0 - delta) * b[None, :]


def target_angles(ap_positions, config: SystemConfig) -> np.ndarray:
    """
    Azimuth and elevation (radians) from each AP towards the sensing target

    Azimuth is measured in the horizontal plane from the wrapped displacement;
    elevation is the angle from the AP's downward vertical.
    """
    ap_positions = np.atleast_2d(np.asarray(ap_positions, dtype=float))
    tx, ty, target_height_m = config.target_position
    displacement = wrapped_displacement(ap_positions, np.array([tx, ty]), config.D_km)
    azimuth = np.arctan2(displacement[:, 1], displacement[:, 0])
    horizontal_m = 1000.0 * np.hypot(displacement[:, 0], displacement[:, 1])
    elevation = np.arctan2(horizontal_m, config.ap_height_m - target_height_m)
    return np.column_stack([azimuth, elevation])


def place_network(
    config: SystemConfig,
    rng: np.random.Generator,
    shadow_rng: Optional[np.random.Generator] = None,
) -> NetworkRealization:
    """
    Draw one drop: positions, torus distances, beta, gamma and target angles

    Shadowing uses ``shadow_rng`` when given, otherwise continues on ``rng``.
    """
    ap_positions = rng.uniform(0.0, config.D_km, size=(config.M, 2))
    user_positions = rng.uniform(0.0, config.D_km, size=(config.K_d, 2))

    distances = torus_distance(ap_positions, user_positions, config.D_km)
    z = correlated_shadowing(ap_positions, user_positions, config, shadow_rng if shadow_rng is not None else rng)
    beta = large_scale(path_loss_dB(distances, config), z, config, distance_km=distances)
    beta = np.atleast_2d(beta)
    gamma = np.atleast_2d(estimation_variance(beta, config))

    logger.debug(
        "Placed network",
        extra={"operation": "place_network", "status": f"M={config.M} K={config.K_d}"},
    )
    return NetworkRealization(
        ap_positions=ap_positions,
        user_positions=user_positions,
        distances_km=distances,
        beta=beta,
        gamma=gamma,
        target_angles=target_angles(ap_positions, config),
        antennas=config.N,
        spacing_over_lambda=config.antenna_spacing_over_lambda,
    )
