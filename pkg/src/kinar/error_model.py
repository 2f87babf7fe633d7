"""Registration error budget of the rail + turntable camera chain.

The chain maps a camera-frame point into the world through the hand-eye
transform ``m_cr`` (camera -> turntable) and the turntable pose: a pitch
``beta`` about Y and a roll ``alpha`` about X (the yaw term is absent), plus
the rail translation ``t``::

    p_w = Ry(beta) @ Rx(alpha) @ (m_cr applied to p_c) + t

First-order propagation of independent input sigmas through the analytic
Jacobian gives the closed-form budget; :func:`monte_carlo_sigma` is the
sampling cross-check.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyGrid
from .geometry import CAMERA, TURNTABLE, WORLD, EulerAngles, FramedPoint, RigidTransform, transform_point

INPUT_NAMES = ("alpha", "beta", "t_x", "t_y", "t_z")
OUTPUT_NAMES = ("X_w", "Y_w", "Z_w")
MIN_MC_SAMPLES = 10_000


def _identity_mcr():
    return RigidTransform.identity(CAMERA, TURNTABLE)


@dataclass(frozen=True)
class ChainParameters:
    alpha: float
    beta: float
    t: np.ndarray = field(default_factory=lambda: np.zeros(3))
    m_cr: RigidTransform = field(default_factory=_identity_mcr)

    def __post_init__(self):
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "beta", float(self.beta))
        t = np.array(self.t, dtype=float).reshape(3)
        if not (np.isfinite(self.alpha) and np.isfinite(self.beta) and np.all(np.isfinite(t))):
            raise ValueError("chain parameters must be finite")
        object.__setattr__(self, "t", t)
        if (self.m_cr.from_frame, self.m_cr.to_frame) != (CAMERA, TURNTABLE):
            raise ValueError("m_cr must map camera -> turntable")

    @property
    def turntable(self) -> EulerAngles:
        return EulerAngles(self.alpha, self.beta, 0.0)


@dataclass(frozen=True)
class UncertaintyInputs:
    sigma_alpha: float = 0.0
    sigma_beta: float = 0.0
    sigma_tx: float = 0.0
    sigma_ty: float = 0.0
    sigma_tz: float = 0.0

    def __post_init__(self):
        for name in ("sigma_alpha", "sigma_beta", "sigma_tx", "sigma_ty", "sigma_tz"):
            value = float(getattr(self, name))
            if not (np.isfinite(value) and value >= 0):
                raise ValueError(f"{name} >= 0 violated")
            object.__setattr__(self, name, value)

    def as_array(self) -> np.ndarray:
        return np.array([self.sigma_alpha, self.sigma_beta, self.sigma_tx, self.sigma_ty, self.sigma_tz])


@dataclass(frozen=True)
class UncertaintyBudget:
    sigma_xw0: float
    sigma_yw0: float
    sigma_zw0: float

    def as_array(self) -> np.ndarray:
        return np.array([self.sigma_xw0, self.sigma_yw0, self.sigma_zw0])


def world_from_camera_simplified(alpha, beta, t, pc) -> np.ndarray:
    """Scalar chain formulas with ``m_cr`` = identity.

    Broadcasts: ``alpha``/``beta`` may be arrays of shape (N,), ``t`` and
    ``pc`` of shape (..., 3).
    """
    alpha = np.asarray(alpha, dtype=float)
    beta = np.asarray(beta, dtype=float)
    t = np.asarray(t, dtype=float)
    pc = np.asarray(pc, dtype=float)
    x, y, z = pc[..., 0], pc[..., 1], pc[..., 2]
    ca, sa = np.cos(alpha), np.sin(alpha)
    cb, sb = np.cos(beta), np.sin(beta)
    xw = cb * x + sa * sb * y + ca * sb * z + t[..., 0]
    yw = ca * y - sa * z + t[..., 1]
    zw = -sb * x + sa * cb * y + ca * cb * z + t[..., 2]
    return np.stack([xw, yw, zw], axis=-1)


def turntable_point(p: ChainParameters, pc) -> np.ndarray:
    """Camera-frame point expressed in the turntable frame (through ``m_cr``)."""
    return p.m_cr.apply(np.asarray(pc, dtype=float))


def world_from_camera(p: ChainParameters, pc) -> np.ndarray:
    return world_from_camera_simplified(p.alpha, p.beta, p.t, turntable_point(p, pc))


def world_from_camera_general(p: ChainParameters, pc) -> np.ndarray:
    """Same chain evaluated by composing RigidTransforms point by point."""
    world_from_turntable = RigidTransform.from_euler(p.turntable, p.t, TURNTABLE, WORLD)
    pr = transform_point(p.m_cr, FramedPoint(CAMERA, pc))
    return transform_point(world_from_turntable, pr).coords


def error_transfer_coefficients(p: ChainParameters, pc) -> np.ndarray:
    """3x5 Jacobian of (X_w, Y_w, Z_w) w.r.t. (alpha, beta, t_x, t_y, t_z)."""
    x, y, z = turntable_point(p, pc)
    ca, sa = np.cos(p.alpha), np.sin(p.alpha)
    cb, sb = np.cos(p.beta), np.sin(p.beta)
    return np.array(
        [
            [ca * sb * y - sa * sb * z, -sb * x + sa * cb * y + ca * cb * z, 1.0, 0.0, 0.0],
            [-sa * y - ca * z, 0.0, 0.0, 1.0, 0.0],
            [ca * cb * y - sa * cb * z, -cb * x - sa * sb * y - ca * sb * z, 0.0, 0.0, 1.0],
        ]
    )


def propagate_jacobian(jacobian, u: UncertaintyInputs) -> UncertaintyBudget:
    sig = np.sqrt((np.asarray(jacobian) ** 2) @ (u.as_array() ** 2))
    return UncertaintyBudget(*map(float, sig))


def propagate_sigma(p: ChainParameters, pc, u: UncertaintyInputs) -> UncertaintyBudget:
    """Root-sum-square first-order budget for independent inputs."""
    return propagate_jacobian(error_transfer_coefficients(p, pc), u)


def _mc_partition(p: ChainParameters, pr, u: UncertaintyInputs, n: int, seed_seq):
    rng = np.random.default_rng(seed_seq)
    draws = rng.standard_normal((n, 5)) * u.as_array()
    alpha = p.alpha + draws[:, 0]
    beta = p.beta + draws[:, 1]
    t = p.t + draws[:, 2:]
    return world_from_camera_simplified(alpha, beta, t, pr)


def monte_carlo_sigma(
    p: ChainParameters,
    pc,
    u: UncertaintyInputs,
    n_samples: int = 1_000_000,
    seed: int = 0,
    partitions: int = 1,
) -> UncertaintyBudget:
    """Sampling estimate of the output sigmas.

    Inputs are perturbed by independent Gaussians and pushed through the
    exact chain. Partition ``k`` draws from the ``k``-th child of
    ``SeedSequence(seed)``, so the result depends on ``(seed, partitions)``
    only, never on how partitions are scheduled.
    """
    if n_samples < MIN_MC_SAMPLES:
        raise ValueError(f"n_samples >= {MIN_MC_SAMPLES} violated")
    if partitions < 1:
        raise ValueError("partitions must be >= 1")
    pr = turntable_point(p, pc)
    children = np.random.SeedSequence(seed).spawn(partitions)
    sizes = [n_samples // partitions + (1 if k < n_samples % partitions else 0) for k in range(partitions)]
    outs = [_mc_partition(p, pr, u, n, ss) for n, ss in zip(sizes, children)]
    # deviations from the nominal point: same std, no cancellation at large offsets
    nominal = world_from_camera_simplified(p.alpha, p.beta, p.t, pr)
    samples = np.concatenate(outs, axis=0) - nominal
    sig = samples.std(axis=0, ddof=1)
    return UncertaintyBudget(*map(float, sig))


@dataclass(frozen=True)
class SweepRow:
    beta_deg: float
    s_mm: float
    sigma_x: float
    sigma_y: float
    sigma_z: float


def sensitivity_sweep(
    betas,
    positions,
    pc,
    u: UncertaintyInputs,
    alpha: float = 0.0,
    m_cr: RigidTransform | None = None,
    t0=(0.0, 0.0, 0.0),
) -> list[SweepRow]:
    """Budget over a grid of turntable pitch (rad) and rail positions (mm).

    Rail position ``s`` enters as a translation along world X from ``t0``.
    """
    betas = np.atleast_1d(np.asarray(betas, dtype=float))
    positions = np.atleast_1d(np.asarray(positions, dtype=float))
    if betas.size == 0 or positions.size == 0:
        raise EmptyGrid("sweep grid is empty")
    for name, arr in (("beta", betas), ("position", positions)):
        d = np.diff(arr)
        if not (np.all(d >= 0) or np.all(d <= 0)):
            raise ValueError(f"{name} grid must be monotone")
    m_cr = m_cr if m_cr is not None else _identity_mcr()
    rows = []
    for beta in betas:
        for s in positions:
            p = ChainParameters(alpha, beta, np.asarray(t0, dtype=float) + [s, 0.0, 0.0], m_cr)
            b = propagate_sigma(p, pc, u)
            rows.append(SweepRow(float(np.degrees(beta)), float(s), b.sigma_xw0, b.sigma_yw0, b.sigma_zw0))
    return rows
