"""End-to-end reproduction of the measured quantities.

Provides the three polarisation/delay preparation recipes, ideal-model delay
and collective-phase scans, threshold-detector cascades with pseudo-number
resolution, and the full noisy simulation that folds in higher-order pair
emission, noise photons, impurity and detection efficiency.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product

import numpy as np

from .errors import DomainError
from .interference import (
    Network,
    balanced_tritter,
    event_distribution,
    two_photon_marginals_tritter,
)
from .mixedstate import (
    _mixing_weight,
    build_densities,
    gram_schmidt_temporal,
    mixed_event_distribution,
)
from .modes import (
    GaussianTemporalMode,
    InternalState,
    PolarizationState,
    temporal_overlap,
    gram_matrix,
)
from .oracle import evolve_and_measure, expand_from_vectors
from .source import (
    SourceParams,
    enumerate_terms,
    heralded_ensemble,
    truncation_deficit,
)

RECIPES = ("all_H", "static_pi", "dynamic", "custom")

# Column order for ideal-scan outputs: coincidence, two-photon marginals,
# then the bunched three-photon events.
IDEAL_EVENT_ORDER = (
    "P111",
    "P011",
    "P101",
    "P110",
    "P300",
    "P030",
    "P003",
    "P210",
    "P201",
    "P120",
    "P021",
    "P102",
    "P012",
)

SQRT3 = math.sqrt(3.0)


@dataclass(frozen=True)
class Preparation:
    """A three-photon input setting: recipe, delays and mode parameters."""

    recipe: str
    delays: tuple[float, float, float] = (0.0, 0.0, 0.0)
    sigma: float = 1.0
    central_frequency: float = 0.0
    theta: float | None = None
    polarizations: tuple[tuple[complex, complex], ...] | None = None

    def __post_init__(self) -> None:
        if self.recipe not in RECIPES:
            raise DomainError(f"unknown recipe {self.recipe!r}")
        if self.recipe == "dynamic" and self.theta is None:
            raise DomainError("the dynamic recipe needs a rotation angle theta")
        if self.recipe == "custom":
            if self.polarizations is None or len(self.polarizations) != 3:
                raise DomainError("the custom recipe needs three polarisation amplitude pairs")


def prepare(prep: Preparation) -> list[InternalState]:
    """The three input internal states for a preparation.

    all_H: every photon horizontal (collective phase 0).
    static_pi: photon 1 horizontal, photons 2 and 3 at (|H> +- sqrt(3)|V>)/2
    (collective phase pi).
    dynamic: photon 1 at cos(2 theta)|H> + i sin(2 theta)|V>, photons 2 and 3
    at (sqrt(3)|H> +- |V>)/2; the collective phase follows
    2*Arg(sqrt(3) cos 2theta + i sin 2theta).
    """
    if prep.recipe == "all_H":
        pols = [PolarizationState.horizontal()] * 3
    elif prep.recipe == "static_pi":
        pols = [
            PolarizationState.horizontal(),
            PolarizationState(0.5, 0.5 * SQRT3),
            PolarizationState(0.5, -0.5 * SQRT3),
        ]
    elif prep.recipe == "dynamic":
        two_theta = 2.0 * float(prep.theta)
        pols = [
            PolarizationState(math.cos(two_theta), 1j * math.sin(two_theta)),
            PolarizationState(0.5 * SQRT3, 0.5),
            PolarizationState(0.5 * SQRT3, -0.5),
        ]
    else:
        pols = [PolarizationState(complex(h), complex(v)) for h, v in prep.polarizations]
    return [
        InternalState(
            temporal=GaussianTemporalMode(t, prep.sigma, prep.central_frequency),
            polarization=pol,
        )
        for t, pol in zip(prep.delays, pols)
    ]


def delay_condition(theta: float, sigma: float) -> float:
    """Delay magnitude keeping all three overlap moduli at 1/2 in the dynamic recipe.

    |t1 - t2| = |t1 - t3| = sigma * sqrt(2 * ln(2 + cos(4 theta))) with t2 = t3.
    """
    return sigma * math.sqrt(2.0 * math.log(2.0 + math.cos(4.0 * theta)))


def phase_for_theta(theta: float) -> float:
    """Collective phase realised by the dynamic recipe at rotation angle theta."""
    two_theta = 2.0 * theta
    return (2.0 * math.atan2(math.sin(two_theta), SQRT3 * math.cos(two_theta))) % (2.0 * math.pi)


def theta_for_phase(phi: float) -> float:
    """Rotation angle of the dynamic recipe realising collective phase phi."""
    half = 0.5 * phi
    return 0.5 * math.atan2(SQRT3 * math.sin(half), math.cos(half))


def delay_scan_preparations(
    recipe: str, tau_values, sigma: float, central_frequency: float = 0.0
) -> list[Preparation]:
    """Symmetric delay scan: t1 = -tau/2, t2 = 0, t3 = +tau/2."""
    if recipe not in ("all_H", "static_pi"):
        raise DomainError("delay scans are defined for the all_H and static_pi recipes")
    return [
        Preparation(
            recipe,
            delays=(-0.5 * float(tau), 0.0, 0.5 * float(tau)),
            sigma=sigma,
            central_frequency=central_frequency,
        )
        for tau in tau_values
    ]


def triad_scan_preparations(
    theta_values, sigma: float, central_frequency: float = 0.0
) -> list[Preparation]:
    """Dynamic-recipe scan with the delay condition applied at every angle."""
    preps = []
    for theta in theta_values:
        delta = delay_condition(float(theta), sigma)
        preps.append(
            Preparation(
                "dynamic",
                delays=(delta, 0.0, 0.0),
                sigma=sigma,
                central_frequency=central_frequency,
                theta=float(theta),
            )
        )
    return preps


def default_delay_grid(sigma: float, points: int = 61) -> np.ndarray:
    return np.linspace(-12.0 * sigma, 12.0 * sigma, points)


def default_phase_grid(points: int = 33) -> np.ndarray:
    return np.linspace(0.0, 2.0 * math.pi, points)


@dataclass
class ScanResult:
    """A scan: x-axis values, one series per event, and run metadata."""

    x_name: str
    x_values: np.ndarray
    series: dict[str, np.ndarray]
    metadata: dict = field(default_factory=dict)


def _ideal_point(states: list[InternalState]) -> dict[str, float]:
    g = gram_matrix(states)
    net = balanced_tritter()
    values = {}
    dist = event_distribution(net, (0, 1, 2), g)
    for occ, p in dist.items():
        values["P" + "".join(str(s) for s in occ)] = p
    values.update(two_photon_marginals_tritter(g))
    return values


def _ideal_scan(preps: list[Preparation], x_name: str, x_values, metadata: dict) -> ScanResult:
    xs = np.asarray(list(x_values), dtype=float)
    series = {name: np.empty(len(preps)) for name in IDEAL_EVENT_ORDER}
    for i, prep in enumerate(preps):
        values = _ideal_point(prepare(prep))
        for name in IDEAL_EVENT_ORDER:
            series[name][i] = values[name]
    return ScanResult(x_name=x_name, x_values=xs, series=series, metadata=metadata)


def scan_delays(
    recipe: str, tau_values, sigma: float, central_frequency: float = 0.0
) -> ScanResult:
    """Ideal-model event probabilities along a symmetric delay scan."""
    preps = delay_scan_preparations(recipe, tau_values, sigma, central_frequency)
    return _ideal_scan(
        preps, "tau", tau_values, {"recipe": recipe, "sigma": sigma, "model": "ideal"}
    )


def scan_triad(theta_values, sigma: float, central_frequency: float = 0.0) -> ScanResult:
    """Ideal-model event probabilities while scanning the collective phase.

    The x axis carries the collective phase; the delay condition keeps all
    three overlap moduli at 1/2, so the coincidence follows
    (5/4 + cos(phi)/2)/9 while the two-photon marginals stay at 7/36.
    """
    preps = triad_scan_preparations(theta_values, sigma)
    phis = [phase_for_theta(float(t)) for t in theta_values]
    result = _ideal_scan(
        preps, "phi", phis, {"recipe": "dynamic", "sigma": sigma, "model": "ideal"}
    )
    result.metadata["theta_values"] = [float(t) for t in theta_values]
    return result


SPLITTER_LEAVES = {"none": 1, "beamsplitter_2way": 2, "tritter_3way": 3}


@dataclass(frozen=True)
class DetectionCascade:
    """Per-output splitting into threshold detectors for pseudo-number resolution."""

    splitters: tuple[str, str, str] = ("none", "none", "none")
    detector_efficiency: float = 0.5

    def __post_init__(self) -> None:
        if len(self.splitters) != 3 or any(s not in SPLITTER_LEAVES for s in self.splitters):
            raise DomainError(f"splitters must be three of {sorted(SPLITTER_LEAVES)}")
        if not 0.0 < self.detector_efficiency <= 1.0:
            raise DomainError("detector efficiency must lie in (0, 1]")

    @property
    def leaves(self) -> tuple[int, int, int]:
        return tuple(SPLITTER_LEAVES[s] for s in self.splitters)

    def patterns(self) -> list[tuple[int, int, int]]:
        return [tuple(c) for c in product(*(range(l + 1) for l in self.leaves))]

    def click_distribution(self, occupation: tuple[int, ...]) -> dict[tuple[int, ...], float]:
        """Joint click-count probabilities given the output-mode occupation."""
        per_mode = [
            _mode_click_probs(n, leaves, self.detector_efficiency)
            for n, leaves in zip(occupation, self.leaves)
        ]
        out = {}
        for pattern in product(*(range(len(p)) for p in per_mode)):
            prob = 1.0
            for c, probs in zip(pattern, per_mode):
                prob *= probs[c]
            if prob > 0.0:
                out[pattern] = prob
        return out


def cascade_none(efficiency: float = 0.5) -> DetectionCascade:
    return DetectionCascade(("none", "none", "none"), efficiency)


def cascade_beamsplitters_1_3(efficiency: float = 0.5) -> DetectionCascade:
    """Two-way splitters on the first and third outputs."""
    return DetectionCascade(("beamsplitter_2way", "none", "beamsplitter_2way"), efficiency)


def cascade_tritter_1(efficiency: float = 0.5) -> DetectionCascade:
    """Three-way splitter on the first output."""
    return DetectionCascade(("tritter_3way", "none", "none"), efficiency)


@lru_cache(maxsize=4096)
def _mode_click_probs(n: int, leaves: int, eta: float) -> tuple[float, ...]:
    """P(c detectors click | n photons into ``leaves`` uniform threshold detectors)."""
    probs = []
    for c in range(leaves + 1):
        total = 0.0
        for j in range(c + 1):
            base = (c - j) * eta / leaves + (1.0 - eta)
            total += (-1.0) ** j * math.comb(c, j) * base**n
        probs.append(math.comb(leaves, c) * total)
    return tuple(probs)


def _single_photon_distribution(
    mode: int, pol: PolarizationState, net_h: Network, net_v: Network
) -> dict[tuple[int, ...], float]:
    wh = abs(pol.amplitude_h) ** 2
    wv = abs(pol.amplitude_v) ** 2
    probs = wh * np.abs(net_h.matrix[:, mode]) ** 2 + wv * np.abs(net_v.matrix[:, mode]) ** 2
    out = {}
    for k, p in enumerate(probs):
        occ = [0, 0, 0]
        occ[k] = 1
        out[tuple(occ)] = float(p)
    return out


def _convolve_noise(
    dist: dict[tuple[int, ...], float],
    noise_idlers: tuple[int, int, int],
    net_h: Network,
    net_v: Network,
) -> dict[tuple[int, ...], float]:
    """Fold in noise photons, which scatter independently of everything else."""
    for mode, count in enumerate(noise_idlers):
        if count == 0:
            continue
        # Unpolarised noise: average of the two polarisation blocks.
        q = 0.5 * (np.abs(net_h.matrix[:, mode]) ** 2 + np.abs(net_v.matrix[:, mode]) ** 2)
        for _ in range(count):
            new: dict[tuple[int, ...], float] = {}
            for occ, p in dist.items():
                for k in range(3):
                    lifted = list(occ)
                    lifted[k] += 1
                    key = tuple(lifted)
                    new[key] = new.get(key, 0.0) + p * float(q[k])
            dist = new
    return dist


class _PointModel:
    """Per-scan-point machinery shared by all source terms."""

    def __init__(
        self,
        states: list[InternalState],
        purity: float,
        purity_model: str,
        net_h: Network,
        net_v: Network,
        pol_dependent: bool,
    ):
        self.states = states
        self.net_h = net_h
        self.net_v = net_v
        self.pol_dependent = pol_dependent
        self.p_common = _mixing_weight(purity, purity_model)
        self.densities = build_densities(states, purity, model=purity_model)
        t_gram = np.eye(3, dtype=complex)
        for i in range(3):
            for j in range(i + 1, 3):
                v = temporal_overlap(states[i].temporal, states[j].temporal)
                t_gram[i, j] = v
                t_gram[j, i] = np.conj(v)
        self.temporal_rows = gram_schmidt_temporal(t_gram).coefficients
        self._cache: dict = {}

    def _pure_vector(self, source: int, slot: int, polarized: bool) -> np.ndarray:
        """Amplitude vector of one pair idler of ``source`` in mixedness ``slot``."""
        slot_vec = np.zeros(4, dtype=complex)
        slot_vec[slot] = 1.0
        temp = self.temporal_rows[source]
        pol = np.array(
            [
                self.states[source].polarization.amplitude_h,
                self.states[source].polarization.amplitude_v,
            ],
            dtype=complex,
        )
        if polarized:
            return np.kron(pol, np.kron(temp, slot_vec))
        return np.kron(temp, np.kron(pol, slot_vec))

    def _oracle_distribution(self, pairs: tuple[int, int, int]) -> dict:
        """Network distribution of the pair idlers via the Fock oracle.

        Mixedness is realised jointly per source: all idlers of one source
        share one mixedness slot per convex branch.
        """
        participating = [i for i in range(3) if pairs[i] > 0]
        branches = []
        for i in participating:
            if self.p_common >= 1.0:
                branches.append([(1.0, 0)])
            else:
                branches.append([(self.p_common, 0), (1.0 - self.p_common, 1 + i)])
        rdim = self.temporal_rows.shape[1]
        width = rdim * 4
        tags = ("H",) * width + ("V",) * width if self.pol_dependent else None
        net = {"H": self.net_h, "V": self.net_v} if self.pol_dependent else self.net_h
        total: dict[tuple[int, ...], float] = {}
        for combo in product(*branches):
            weight = 1.0
            vectors = []
            modes = []
            for (w, slot), i in zip(combo, participating):
                weight *= w
                vec = self._pure_vector(i, slot, self.pol_dependent)
                for _ in range(pairs[i]):
                    vectors.append(vec)
                    modes.append(i)
            fock = expand_from_vectors(np.array(vectors), modes, 3, internal_pol=tags)
            for occ, p in evolve_and_measure(fock, net).items():
                total[occ] = total.get(occ, 0.0) + weight * p
        return total

    def pair_distribution(self, pairs: tuple[int, int, int]) -> dict:
        key = pairs
        if key in self._cache:
            return self._cache[key]
        n = sum(pairs)
        if n == 0:
            dist = {(0, 0, 0): 1.0}
        elif n == 1:
            mode = pairs.index(1)
            dist = _single_photon_distribution(
                mode, self.states[mode].polarization, self.net_h, self.net_v
            )
        elif max(pairs) == 1 and not self.pol_dependent:
            inputs = tuple(i for i in range(3) if pairs[i] == 1)
            dens = [self.densities[i] for i in inputs]
            dist = mixed_event_distribution(self.net_h, inputs, dens)
        else:
            dist = self._oracle_distribution(pairs)
        self._cache[key] = dist
        return dist


def two_photon_marginals_model(
    prep: Preparation,
    network: Network | None = None,
    network_v: Network | None = None,
    *,
    purity: float = 1.0,
    purity_model: str = "trace",
) -> dict[str, float]:
    """Two-photon coincidence marginals, supporting a polarisation-dependent network.

    For identical H/V networks this reproduces the tritter closed form
    (2 - r_ij^2)/9; with distinct blocks the marginals generally pick up a
    dependence on the preparation's collective phase.
    """
    net_h = network if network is not None else balanced_tritter()
    net_v = network_v if network_v is not None else net_h
    pol_dependent = not np.allclose(net_h.matrix, net_v.matrix, atol=1e-14)
    model = _PointModel(prepare(prep), purity, purity_model, net_h, net_v, pol_dependent)
    out = {}
    for name, pairs in (("P011", (0, 1, 1)), ("P101", (1, 0, 1)), ("P110", (1, 1, 0))):
        dist = model.pair_distribution(pairs)
        out[name] = dist.get(pairs, 0.0)
    return out


def simulate_counts(
    preparations: Preparation | list[Preparation],
    source: SourceParams,
    cascade: DetectionCascade | None = None,
    network: Network | None = None,
    network_v: Network | None = None,
    *,
    x_values=None,
    x_name: str = "index",
    purity_model: str = "trace",
    threads: int = 1,
) -> ScanResult:
    """Heralded click-pattern probabilities of the full experiment model.

    For every scan point the heralded source ensemble is pushed through the
    network: single-pair terms use the exact mixed-state trace formulas,
    multi-pair terms go through the Fock oracle, noise photons are folded in
    by exact convolution, and the occupation distribution is converted to
    threshold-detector click patterns through the cascade.  Series are
    probabilities per triple-heralded trial.
    """
    if isinstance(preparations, Preparation):
        preparations = [preparations]
    if cascade is None:
        cascade = cascade_none()
    net_h = network if network is not None else balanced_tritter()
    net_v = network_v if network_v is not None else net_h
    pol_dependent = not np.allclose(net_h.matrix, net_v.matrix, atol=1e-14)

    terms = enumerate_terms(source)
    deficit = truncation_deficit(terms)
    heralded = heralded_ensemble(terms, source.herald_efficiency)
    herald_norm = math.fsum(t.weight for t in heralded)
    if herald_norm <= 0.0:
        raise DomainError("no source term ever heralds; increase squeezing or noise")

    patterns = cascade.patterns()
    n_points = len(preparations)
    series = {
        "N" + "".join(str(c) for c in pattern): np.zeros(n_points) for pattern in patterns
    }

    def run_point(index: int) -> dict[tuple[int, int, int], float]:
        model = _PointModel(
            prepare(preparations[index]),
            source.purity,
            purity_model,
            net_h,
            net_v,
            pol_dependent,
        )
        acc: dict[tuple[int, int, int], float] = {}
        noise_cache: dict = {}
        for term in heralded:
            key = (term.pair_idlers, term.noise_idlers)
            if key not in noise_cache:
                dist = model.pair_distribution(term.pair_idlers)
                noise_cache[key] = _convolve_noise(dist, term.noise_idlers, net_h, net_v)
            for occ, p in noise_cache[key].items():
                for pattern, q in cascade.click_distribution(occ).items():
                    acc[pattern] = acc.get(pattern, 0.0) + term.weight * p * q
        return acc

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run_point, range(n_points)))
    else:
        results = [run_point(i) for i in range(n_points)]
    for i, acc in enumerate(results):
        for pattern, value in acc.items():
            series["N" + "".join(str(c) for c in pattern)][i] = value / herald_norm

    xs = (
        np.asarray(list(x_values), dtype=float)
        if x_values is not None
        else np.arange(n_points, dtype=float)
    )
    metadata = {
        "model": "experiment",
        "truncation_deficit": deficit,
        "truncation_warning": deficit > 1e-2,
        "herald_probability": herald_norm,
        "polarization_dependent": pol_dependent,
        "purity_model": purity_model,
        "trial_rate_hz": 80e6,
        "source": {
            "squeezing": source.squeezing,
            "purity": source.purity,
            "p_noise_idler": source.p_noise_idler,
            "p_noise_signal": source.p_noise_signal,
            "truncation_total_photons": source.truncation_total_photons,
            "truncation_noise_photons": source.truncation_noise_photons,
            "herald_efficiency": source.herald_efficiency,
        },
        "cascade": {
            "splitters": list(cascade.splitters),
            "detector_efficiency": cascade.detector_efficiency,
        },
    }
    return ScanResult(x_name=x_name, x_values=xs, series=series, metadata=metadata)
