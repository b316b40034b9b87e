"""Deterministic Monte Carlo transport of entangled photon pairs.

Randomness is counter-based: trial i of a run draws a fixed row of five
uniforms that is a pure function of (master_seed, i), generated in
fixed-size Philox chunks. Because the row layout never depends on outcomes
or on the slit-B setting, arm-A results are bit-identical whether slit B is
present or absent, and scan histograms are bit-identical for any worker
count. Each trial consumes, in order:

    0  emission point across the source
    1  arm-1 launch angle (arm 2 is anticorrelated)
    2  anticorrelation jitter (zero unless configured)
    3  slit-A diffraction kick
    4  slit-B diffraction kick

Draws 3 and 4 are consumed even when unused (blocked photon, absent slit)
so the layout stays fixed.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

from .apparatus import ApparatusConfig, SlitElement, ThinLens, apply_thin_lens
from .diffraction import DiffractionGeometry, DiffractionSampler, build_sampler

__all__ = [
    "CHUNK_TRIALS",
    "DRAWS_PER_TRIAL",
    "PhotonState",
    "PairEvent",
    "TrialRng",
    "TrialBatch",
    "ScanHistogram",
    "sample_pair",
    "propagate",
    "transit_slit",
    "detect_d2",
    "run_trial",
    "run_trials",
    "run_scan",
    "scan_position_seed",
]

#: Trials per random-stream chunk. Fixed: changing it changes every stream.
CHUNK_TRIALS = 1 << 16
DRAWS_PER_TRIAL = 5

_PARAXIAL_LIMIT = 0.1


@dataclass(frozen=True)
class PhotonState:
    """One photon at an axial plane: transverse position/angle, alive flag."""

    y: float
    theta: float
    axial: float = 0.0
    alive: bool = True

    def __post_init__(self):
        if abs(self.theta) >= _PARAXIAL_LIMIT:
            raise ValueError(f"|theta| = {abs(self.theta):g} outside the paraxial regime")


@dataclass(frozen=True)
class PairEvent:
    """One emission: shared origin, both photon states, per-arm outcomes."""

    origin_y: float
    theta_1: float
    theta_2: float
    arm_a: PhotonState
    arm_b: PhotonState
    passed_slit_a: bool = False
    d1_click: bool = False
    d2_hit_y: Optional[float] = None


@lru_cache(maxsize=8)
def _chunk_cache(master_seed: int, chunk_index: int) -> np.ndarray:
    return _chunk_uniforms(master_seed, chunk_index, CHUNK_TRIALS)


def _chunk_uniforms(master_seed: int, chunk_index: int, n_rows: int) -> np.ndarray:
    """Uniform draws for trials [chunk*CHUNK, chunk*CHUNK + n_rows), row-major.

    A fresh Philox generator per (seed, chunk) makes row r independent of how
    many rows are generated: shorter requests are exact prefixes.
    """
    ss = np.random.SeedSequence(master_seed, spawn_key=(chunk_index,))
    gen = np.random.Generator(np.random.Philox(ss))
    return gen.random((n_rows, DRAWS_PER_TRIAL))


class TrialRng:
    """Random source for one trial: a pure function of (master_seed, trial_index)."""

    def __init__(self, master_seed: int, trial_index: int):
        if trial_index < 0:
            raise ValueError("trial_index must be non-negative")
        self.master_seed = int(master_seed)
        self.trial_index = int(trial_index)

    def uniforms(self) -> np.ndarray:
        """The trial's five uniform draws (idempotent)."""
        chunk, row = divmod(self.trial_index, CHUNK_TRIALS)
        return _chunk_cache(self.master_seed, chunk)[row]


def scan_position_seed(master_seed: int, position_index: int) -> int:
    """Derived seed for one scan position's independent trial stream."""
    ss = np.random.SeedSequence(master_seed, spawn_key=(position_index,))
    return int(ss.generate_state(1, np.uint64)[0])


@lru_cache(maxsize=16)
def _sampler_for(geom: DiffractionGeometry) -> DiffractionSampler:
    return build_sampler(geom)


def _slit_a(cfg: ApparatusConfig) -> SlitElement:
    return SlitElement(axial_position=cfg.dist_source_slit_a, width=cfg.slit_a_width)


def _slit_b(cfg: ApparatusConfig) -> SlitElement:
    return SlitElement(
        axial_position=cfg.dist_source_slit_b,
        width=cfg.slit_b_width,
        present=cfg.slit_b_present,
    )


def _lens(cfg: ApparatusConfig) -> ThinLens:
    return ThinLens(
        axial_position=cfg.dist_source_slit_a - cfg.lens_to_slit_a,
        focal_length=cfg.lens_focal,
    )


def _kick_geometry(cfg: ApparatusConfig, slit_width: float) -> DiffractionGeometry:
    # The angular kick distribution is independent of the tabulation
    # distance (theta = y/D cancels), so both arms share the D2 distance.
    return DiffractionGeometry(
        slit_width=slit_width,
        wavelength=cfg.photon_wavelength,
        screen_distance=cfg.dist_slit_b_d2,
    )


def sample_pair(rng: TrialRng, cfg: ApparatusConfig) -> PairEvent:
    """Draw one emission: shared origin, anticorrelated launch angles."""
    u = rng.uniforms()
    origin_y = (2.0 * u[0] - 1.0) * (cfg.source_diameter / 2.0)
    theta_1 = (2.0 * u[1] - 1.0) * cfg.beam_half_divergence
    jitter = (2.0 * u[2] - 1.0) * cfg.momentum_jitter
    theta_2 = -theta_1 + jitter
    return PairEvent(
        origin_y=origin_y,
        theta_1=theta_1,
        theta_2=theta_2,
        arm_a=PhotonState(y=origin_y, theta=theta_1),
        arm_b=PhotonState(y=origin_y, theta=theta_2),
    )


def propagate(photon: PhotonState, distance: float) -> PhotonState:
    """Paraxial free flight: y advances by theta * distance."""
    if not photon.alive:
        raise RuntimeError("cannot propagate a dead photon")
    if distance < 0:
        raise ValueError("propagation distance must be non-negative")
    return replace(photon, y=photon.y + photon.theta * distance, axial=photon.axial + distance)


def transit_slit(
    photon: PhotonState,
    slit: SlitElement,
    sampler: DiffractionSampler,
    u: float,
) -> PhotonState:
    """Pass a slit plane: select on position, then redraw the angle.

    An absent slit is a no-op. A photon outside the opening is absorbed by
    the screen. A transmitted photon keeps its position and leaves with an
    angle drawn from the sampler at ``u``: localization in the slit erases
    the incident transverse momentum and the outgoing direction follows the
    far-field statistics alone. The photon's entanglement with its partner
    is physically over at this point, though no state here encodes that.
    """
    if not photon.alive:
        raise RuntimeError("cannot transit a dead photon")
    if not slit.present:
        return photon
    if abs(photon.y) > slit.width / 2.0:
        return replace(photon, alive=False)
    return replace(photon, theta=sampler.sample_angle(u))


def detect_d2(photon: PhotonState, detector_center_y: float, cfg: ApparatusConfig) -> bool:
    """True iff the photon is alive and lands within the detector aperture."""
    return photon.alive and abs(photon.y - detector_center_y) <= cfg.detector_diameter / 2.0


def run_trial(rng: TrialRng, cfg: ApparatusConfig, detector_center_y: float) -> PairEvent:
    """Transport one pair through both arms and resolve the detections.

    Arm A: free flight to the lens (when enabled), thin-lens refraction,
    flight to slit A, slit transit; every transmitted photon counts as a D1
    click (the collection lens behind slit A is ideal). Arm B: flight to the
    slit-B plane, slit transit (no-op when absent), 500 mm to the D2 plane,
    aperture test against ``detector_center_y``.
    """
    u = rng.uniforms()
    pair = sample_pair(rng, cfg)

    a = pair.arm_a
    if cfg.lens_enabled:
        lens = _lens(cfg)
        a = propagate(a, lens.axial_position)
        a = replace(a, theta=apply_thin_lens(lens, a.y, a.theta))
        a = propagate(a, cfg.lens_to_slit_a)
    else:
        a = propagate(a, cfg.dist_source_slit_a)
    a = transit_slit(a, _slit_a(cfg), _sampler_for(_kick_geometry(cfg, cfg.slit_a_width)), u[3])
    passed_a = a.alive

    b = pair.arm_b
    b = propagate(b, cfg.dist_source_slit_b)
    b = transit_slit(b, _slit_b(cfg), _sampler_for(_kick_geometry(cfg, cfg.slit_b_width)), u[4])
    if b.alive:
        b = propagate(b, cfg.dist_slit_b_d2)
    hit = detect_d2(b, detector_center_y, cfg)

    return replace(
        pair,
        arm_a=a,
        arm_b=b,
        passed_slit_a=passed_a,
        d1_click=passed_a,
        d2_hit_y=b.y if hit else None,
    )


@dataclass(frozen=True, eq=False)
class TrialBatch:
    """Per-trial outcome arrays for a contiguous block of trials."""

    origin_y: np.ndarray
    theta_1: np.ndarray
    theta_2: np.ndarray
    slit_a_y: np.ndarray  # arm-A position at the slit-A plane
    passed_slit_a: np.ndarray
    theta_a_exit: np.ndarray  # post-slit-A angle (incident angle if blocked)
    slit_b_y: np.ndarray  # arm-B position at the slit-B plane
    passed_slit_b: np.ndarray  # all True when slit B is absent
    theta_b_exit: np.ndarray
    d2_y: np.ndarray  # arm-B final position (slit plane if absorbed)
    d2_hit: np.ndarray

    def __len__(self) -> int:
        return self.origin_y.size

    @property
    def d1_click(self) -> np.ndarray:
        return self.passed_slit_a

    @property
    def coincidence(self) -> np.ndarray:
        return self.passed_slit_a & self.d2_hit


def _simulate_block(
    cfg: ApparatusConfig,
    detector_center_y: float,
    uniforms: np.ndarray,
    sampler_a: DiffractionSampler,
    sampler_b: DiffractionSampler,
) -> TrialBatch:
    """Vectorized twin of :func:`run_trial` over a block of uniform rows.

    Expression order deliberately mirrors the scalar path so both produce
    bit-identical floats; tests enforce the equivalence.
    """
    u0, u1, u2, u3, u4 = (uniforms[:, k] for k in range(DRAWS_PER_TRIAL))
    origin_y = (2.0 * u0 - 1.0) * (cfg.source_diameter / 2.0)
    theta_1 = (2.0 * u1 - 1.0) * cfg.beam_half_divergence
    jitter = (2.0 * u2 - 1.0) * cfg.momentum_jitter
    theta_2 = -theta_1 + jitter

    if cfg.lens_enabled:
        d_lens = cfg.dist_source_slit_a - cfg.lens_to_slit_a
        y_lens = origin_y + theta_1 * d_lens
        theta_a = theta_1 - y_lens / cfg.lens_focal
        slit_a_y = y_lens + theta_a * cfg.lens_to_slit_a
    else:
        theta_a = theta_1
        slit_a_y = origin_y + theta_1 * cfg.dist_source_slit_a
    passed_a = np.abs(slit_a_y) <= cfg.slit_a_width / 2.0
    theta_a_exit = np.where(passed_a, sampler_a.sample_angle(u3), theta_a)

    slit_b_y = origin_y + theta_2 * cfg.dist_source_slit_b
    if cfg.slit_b_present:
        passed_b = np.abs(slit_b_y) <= cfg.slit_b_width / 2.0
        theta_b_exit = np.where(passed_b, sampler_b.sample_angle(u4), theta_2)
    else:
        passed_b = np.ones(slit_b_y.shape, dtype=bool)
        theta_b_exit = theta_2
    d2_y = np.where(passed_b, slit_b_y + theta_b_exit * cfg.dist_slit_b_d2, slit_b_y)
    d2_hit = passed_b & (np.abs(d2_y - detector_center_y) <= cfg.detector_diameter / 2.0)

    return TrialBatch(
        origin_y=origin_y,
        theta_1=theta_1,
        theta_2=theta_2,
        slit_a_y=slit_a_y,
        passed_slit_a=passed_a,
        theta_a_exit=theta_a_exit,
        slit_b_y=slit_b_y,
        passed_slit_b=passed_b,
        theta_b_exit=theta_b_exit,
        d2_y=d2_y,
        d2_hit=d2_hit,
    )


def _batch_for_range(
    cfg: ApparatusConfig,
    detector_center_y: float,
    master_seed: int,
    start: int,
    n_trials: int,
    sampler_a: DiffractionSampler,
    sampler_b: DiffractionSampler,
) -> TrialBatch:
    """Simulate trials [start, start + n_trials), chunk by chunk."""
    blocks = []
    index = start
    remaining = n_trials
    while remaining > 0:
        chunk, row = divmod(index, CHUNK_TRIALS)
        take = min(remaining, CHUNK_TRIALS - row)
        uniforms = _chunk_uniforms(master_seed, chunk, row + take)[row:]
        blocks.append(_simulate_block(cfg, detector_center_y, uniforms, sampler_a, sampler_b))
        index += take
        remaining -= take
    if len(blocks) == 1:
        return blocks[0]
    merged = {
        name: np.concatenate([getattr(b, name) for b in blocks])
        for name in TrialBatch.__dataclass_fields__
    }
    return TrialBatch(**merged)


def run_trials(
    cfg: ApparatusConfig,
    detector_center_y: float,
    master_seed: int,
    n_trials: int,
    start: int = 0,
) -> TrialBatch:
    """Vectorized transport of ``n_trials`` trials at one detector position.

    Trial i's outcome equals ``run_trial(TrialRng(master_seed, i), ...)``
    exactly, float for float.
    """
    if n_trials < 0:
        raise ValueError("n_trials must be non-negative")
    sampler_a = _sampler_for(_kick_geometry(cfg, cfg.slit_a_width))
    sampler_b = _sampler_for(_kick_geometry(cfg, cfg.slit_b_width))
    return _batch_for_range(
        cfg, detector_center_y, master_seed, start, n_trials, sampler_a, sampler_b
    )


@dataclass(frozen=True, eq=False)
class ScanHistogram:
    """Coincidence and singles counts versus D2 position."""

    positions: np.ndarray  # metres, strictly increasing
    coincidence: np.ndarray
    singles: np.ndarray
    trials_per_position: int
    seed: Optional[int] = None

    def __post_init__(self):
        if not (len(self.positions) == len(self.coincidence) == len(self.singles)):
            raise ValueError("positions and count arrays must have equal length")
        if np.any(np.diff(self.positions) <= 0):
            raise ValueError("positions must be strictly increasing")
        if np.any(self.coincidence > self.trials_per_position) or np.any(
            self.singles > self.trials_per_position
        ):
            raise ValueError("counts cannot exceed trials_per_position")
        if np.any(self.coincidence > self.singles):
            raise ValueError("coincidence counts cannot exceed singles counts")


def run_scan(
    cfg: ApparatusConfig,
    positions: Sequence[float],
    trials_per_position: int,
    master_seed: int,
    workers: int = 1,
) -> ScanHistogram:
    """Scan D2 across ``positions`` (metres), tallying counts per position.

    Each position gets an independent derived trial stream (the physical
    scan observes disjoint photon sets). Work is sharded over fixed-size
    chunks; the histogram is a pure function of (cfg, positions,
    trials_per_position, master_seed) for any ``workers`` value.
    """
    pos = np.asarray(positions, dtype=float)
    if pos.ndim != 1 or pos.size == 0:
        raise ValueError("positions must be a non-empty 1-D sequence")
    if np.any(np.diff(pos) <= 0):
        raise ValueError("positions must be strictly increasing")
    if trials_per_position < 0:
        raise ValueError("trials_per_position must be non-negative")
    if workers < 1:
        raise ValueError("workers must be >= 1")

    sampler_a = _sampler_for(_kick_geometry(cfg, cfg.slit_a_width))
    sampler_b = _sampler_for(_kick_geometry(cfg, cfg.slit_b_width))
    seeds = [scan_position_seed(master_seed, ip) for ip in range(pos.size)]
    tasks = [
        (ip, start, min(CHUNK_TRIALS, trials_per_position - start))
        for ip in range(pos.size)
        for start in range(0, trials_per_position, CHUNK_TRIALS)
    ]

    coincidence = np.zeros(pos.size, dtype=np.int64)
    singles = np.zeros(pos.size, dtype=np.int64)

    def tally(task):
        ip, start, n = task
        batch = _batch_for_range(cfg, pos[ip], seeds[ip], start, n, sampler_a, sampler_b)
        return ip, int(np.count_nonzero(batch.coincidence)), int(np.count_nonzero(batch.d2_hit))

    if workers == 1:
        results = map(tally, tasks)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(tally, tasks))
    for ip, n_coinc, n_single in results:
        coincidence[ip] += n_coinc
        singles[ip] += n_single

    return ScanHistogram(
        positions=pos,
        coincidence=coincidence,
        singles=singles,
        trials_per_position=trials_per_position,
        seed=int(master_seed),
    )
