"""Experiment drivers: displacement error curves and capacity sweeps.

Both experiments fit path parameters once at a reference TX/RX pair and then
score how well each extrapolation model predicts the channel elsewhere,
against ground truth obtained by re-tracing the scene. All randomness is
drawn from a single seeded generator, so runs are reproducible bit for bit.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .capacity import (
    LinkBudget,
    RateModel,
    band_rate,
    optimal_streams,
    singular_values,
    spectral_efficiency,
)
from .channel import channel_evaluator, upa
from .fit_dp import PairObservation, fit_rm_dp
from .fit_rt import fit_rm_rt
from .paths import (
    C_LIGHT,
    ReferencePair,
    RmPath,
    angles_to_image,
    pwa_distance,
    rm_distance_image,
)
from .tracer import Scene, to_pwa, trace_paths

__all__ = [
    "DisplacementSpec",
    "ErrorRecord",
    "ESTIMATORS",
    "SweepCell",
    "capacity_sweep",
    "displacement_experiment",
]

log = logging.getLogger(__name__)

ESTIMATORS = ("constant", "pwa", "rm_rt", "rm_dp")

_SWEEP_MODELS = ("exhaustive",) + ESTIMATORS


@dataclass(frozen=True)
class DisplacementSpec:
    """Displacement grid of the error experiment.

    For each distance, directions_per_distance random displacement direction
    pairs are drawn (TX and RX move independently). The two smallest
    distances double as the displaced pairs that feed the roll/parity fit.
    """

    distances: tuple[float, ...] = (0.01, 0.02, 0.05, 0.10, 0.50, 1.00)
    directions_per_distance: int = 10
    rng_seed: int = 0

    def __post_init__(self) -> None:
        d = tuple(float(x) for x in self.distances)
        if len(d) < 2 or any(x <= 0.0 for x in d) or list(d) != sorted(d):
            raise ValueError("distances must be >= 2 positive values, ascending")
        if self.directions_per_distance < 1:
            raise ValueError("need at least one direction per distance")
        object.__setattr__(self, "distances", d)


@dataclass(frozen=True)
class ErrorRecord:
    """Normalized squared channel error of one model at one sample point."""

    model: str
    distance: float
    frequency: float
    epsilon: float


def _random_unit(rng: np.random.Generator) -> np.ndarray:
    while True:
        v = rng.standard_normal(3)
        n = float(np.linalg.norm(v))
        if n > 1e-6:
            return v / n


def _truth_channel(gains: np.ndarray, delays: np.ndarray, f: float, f0: float) -> complex:
    if gains.size == 0:
        return 0j
    return complex(np.sum(gains * np.exp(-2j * math.pi * (f - f0) * delays)))


def _fit_dp_paths(
    scene: Scene,
    ref: ReferencePair,
    reference_obs: PairObservation,
    dp_distances: Sequence[float],
    rng: np.random.Generator,
    max_bounces: int,
) -> list[RmPath]:
    displaced = []
    for dist in dp_distances:
        tx_m = ref.tx_ref + dist * _random_unit(rng)
        rx_m = ref.rx_ref + dist * _random_unit(rng)
        pair_ref = ReferencePair(tx_ref=tx_m, rx_ref=rx_m)
        traced = trace_paths(scene, tx_m, rx_m, max_bounces)
        displaced.append(
            PairObservation(
                tx=tx_m, rx=rx_m, paths=tuple(to_pwa(p, pair_ref) for p in traced)
            )
        )
    return fit_rm_dp(reference_obs, displaced, ref)


def displacement_experiment(
    scene: Scene,
    ref: ReferencePair,
    spec: DisplacementSpec = DisplacementSpec(),
    bandwidth: float = 2e9,
    f0: float | None = None,
    n_freq: int = 10,
    models: Sequence[str] = ESTIMATORS,
    max_bounces: int = 2,
) -> list[ErrorRecord]:
    """Channel prediction error of each model over a displacement grid.

    Fits every requested model at the reference pair, then displaces TX and RX
    by each grid distance along random directions, re-traces the true channel
    there and scores |H_model - H_true|^2 / E0 at n_freq random in-band
    frequencies, with E0 the total path energy at the reference.
    """
    if f0 is None:
        f0 = scene.carrier_freq
    elif abs(f0 - scene.carrier_freq) > 1e-3:
        raise ValueError("phase reference frequency must match the scene carrier")
    unknown = set(models) - set(ESTIMATORS)
    if unknown:
        raise ValueError(f"unknown estimator(s) {sorted(unknown)}")

    rng = np.random.default_rng(spec.rng_seed)
    traced0 = trace_paths(scene, ref.tx_ref, ref.rx_ref, max_bounces)
    if not traced0:
        raise ValueError("no propagation paths at the reference pair")
    energy0 = sum(abs(p.gain) ** 2 for p in traced0)
    pwa0 = [to_pwa(p, ref) for p in traced0]
    reference_obs = PairObservation(tx=ref.tx_ref, rx=ref.rx_ref, paths=tuple(pwa0))

    fitted: dict[str, list] = {}
    if "constant" in models:
        fitted["constant"] = pwa0
    if "pwa" in models:
        fitted["pwa"] = pwa0
    if "rm_rt" in models:
        fitted["rm_rt"] = [fit_rm_rt(p, ref) for p in traced0]
    if "rm_dp" in models:
        fitted["rm_dp"] = _fit_dp_paths(
            scene, ref, reference_obs, spec.distances[:2], rng, max_bounces
        )
    rm_images = {
        name: [(p, angles_to_image(p, ref)) for p in fitted[name]]
        for name in ("rm_rt", "rm_dp")
        if name in fitted
    }

    freqs = rng.uniform(f0 - bandwidth / 2.0, f0 + bandwidth / 2.0, size=n_freq)
    samples = [
        (dist, _random_unit(rng), _random_unit(rng))
        for dist in spec.distances
        for _ in range(spec.directions_per_distance)
    ]

    records = []
    for dist, dir_tx, dir_rx in samples:
        tx_m = ref.tx_ref + dist * dir_tx
        rx_m = ref.rx_ref + dist * dir_rx
        truth = trace_paths(scene, tx_m, rx_m, max_bounces)
        true_gains = np.array([p.gain for p in truth], dtype=complex)
        true_delays = np.array([p.delay for p in truth])

        model_terms: dict[str, list[tuple[complex, float, float]]] = {}
        for name in models:
            if name == "constant":
                terms = [(p.gain, p.delay, p.delay * C_LIGHT) for p in pwa0]
            elif name == "pwa":
                terms = [
                    (p.gain, p.delay, pwa_distance(rx_m, tx_m, ref, p)) for p in pwa0
                ]
            else:
                terms = [
                    (p.gain, p.delay, rm_distance_image(rx_m, tx_m, img))
                    for p, img in rm_images[name]
                ]
            model_terms[name] = terms

        for f in freqs:
            h_true = _truth_channel(true_gains, true_delays, f, f0)
            for name in models:
                h_est = sum(
                    g * np.exp(2j * math.pi * (tau * f0 - f * d / C_LIGHT))
                    for g, tau, d in model_terms[name]
                )
                eps = abs(h_est - h_true) ** 2 / energy0
                records.append(
                    ErrorRecord(
                        model=name, distance=dist, frequency=float(f), epsilon=float(eps)
                    )
                )
    return records


@dataclass(frozen=True)
class SweepCell:
    """Spectral efficiency of one model at one transmitter rotation."""

    rotation: float
    model: str
    se_center: float
    se_avg: float
    rank_used: int


def capacity_sweep(
    scene: Scene,
    ref: ReferencePair,
    rotations: Sequence[float],
    budget: LinkBudget,
    rate_model: RateModel = RateModel(),
    rows: int = 8,
    cols: int = 8,
    spacing: float = 0.14,
    models: Sequence[str] = _SWEEP_MODELS,
    n_freq: int = 10,
    max_bounces: int = 2,
    rng_seed: int = 0,
    dp_distances: tuple[float, float] = (0.01, 0.02),
    rm_form: str = "image",
) -> tuple[list[SweepCell], dict[str, int]]:
    """Spectral efficiency versus transmitter array rotation, per model.

    Both arrays are uniform planar arrays; the receiver boresight stays on
    the transmitter while the transmitter is rotated about the vertical by
    each angle (radians) relative to boresight alignment. Returns the sweep
    table and the number of path traces each model consumed, the cost metric
    that separates exhaustive re-tracing from the one-off fits.
    """
    if rm_form not in ("image", "angles"):
        raise ValueError("rm_form must be 'image' or 'angles'")
    unknown = set(models) - set(_SWEEP_MODELS)
    if unknown:
        raise ValueError(f"unknown model(s) {sorted(unknown)}")
    f0 = scene.carrier_freq
    rng = np.random.default_rng(rng_seed)

    sep = ref.tx_ref - ref.rx_ref
    rx_boresight = math.atan2(sep[1], sep[0])
    tx_boresight = math.atan2(-sep[1], -sep[0])
    rx_array = upa(rows, cols, spacing, ref.rx_ref, azimuth_rotation=rx_boresight)

    counts: dict[str, int] = {name: 0 for name in models}
    fitted: dict[str, list] = {}
    needs_fit = [m for m in models if m != "exhaustive"]
    if needs_fit:
        traced0 = trace_paths(scene, ref.tx_ref, ref.rx_ref, max_bounces)
        if not traced0:
            raise ValueError("no propagation paths at the reference pair")
        pwa0 = [to_pwa(p, ref) for p in traced0]
        for name in ("constant", "pwa"):
            if name in models:
                fitted[name] = pwa0
                counts[name] = 1
        if "rm_rt" in models:
            fitted["rm_rt"] = [fit_rm_rt(p, ref) for p in traced0]
            counts["rm_rt"] = 1
        if "rm_dp" in models:
            reference_obs = PairObservation(
                tx=ref.tx_ref, rx=ref.rx_ref, paths=tuple(pwa0)
            )
            fitted["rm_dp"] = _fit_dp_paths(
                scene, ref, reference_obs, dp_distances, rng, max_bounces
            )
            counts["rm_dp"] = 3

    channel_model = {
        "constant": "constant",
        "pwa": "pwa",
        "rm_rt": f"rm_{rm_form}",
        "rm_dp": f"rm_{rm_form}",
        "exhaustive": "exhaustive",
    }

    cells = []
    for rot in rotations:
        tx_array = upa(
            rows, cols, spacing, ref.tx_ref, azimuth_rotation=tx_boresight + rot
        )
        for name in models:
            evaluator = channel_evaluator(
                tx_array,
                rx_array,
                channel_model[name],
                f0,
                paths=fitted.get(name, ()),
                ref=ref,
                scene=scene,
                max_bounces=max_bounces,
            )
            if name == "exhaustive":
                counts[name] += rx_array.n_elements * tx_array.n_elements
            _, se_avg = band_rate(
                evaluator, f0, budget.bandwidth_hz, budget, rate_model, n_freq
            )
            center = singular_values(evaluator(f0))
            cells.append(
                SweepCell(
                    rotation=float(rot),
                    model=name,
                    se_center=spectral_efficiency(center, budget, rate_model),
                    se_avg=se_avg,
                    rank_used=optimal_streams(center, budget, rate_model),
                )
            )
    log.info("capacity sweep trace counts: %s", counts)
    return cells, counts
