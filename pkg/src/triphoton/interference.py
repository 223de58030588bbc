"""Exact output-event probabilities for partially distinguishable photons.

The general engine evaluates the double permutation sum

    P(s) = (prod_j s_j!)^-1 * sum_{sigma, rho in S_n}
           prod_k M[k, sigma(k)] * conj(M[k, rho(k)]) * S[sigma(k), rho(k)]

where M repeats the row of the scattering matrix for output j exactly s_j
times (columns indexed by photons) and S is the Gram matrix of internal
states.  Closed forms for the balanced beamsplitter and tritter are provided
and must agree with the general engine to near machine precision.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NumericalInconsistency, SizeLimit
from .modes import GramMatrix

DEFAULT_MAX_PHOTONS = 6


@dataclass(frozen=True)
class Network:
    """An m-mode linear-optical network described by a unitary matrix.

    ``matrix[k, j]`` is the amplitude for a photon entering input mode j to
    leave through output mode k.
    """

    matrix: np.ndarray

    def __post_init__(self) -> None:
        u = np.asarray(self.matrix, dtype=complex)
        if u.ndim != 2 or u.shape[0] != u.shape[1]:
            raise DomainError("network matrix must be square")
        if np.max(np.abs(u @ u.conj().T - np.eye(u.shape[0]))) > 1e-10:
            raise DomainError("network matrix must be unitary within 1e-10")
        u = u.copy()
        u.flags.writeable = False
        object.__setattr__(self, "matrix", u)

    @property
    def m(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class EventSpec:
    """One photon per listed input mode and a requested output occupation."""

    input_modes: tuple[int, ...]
    output_occupation: tuple[int, ...]

    def __post_init__(self) -> None:
        inputs = tuple(int(i) for i in self.input_modes)
        occ = tuple(int(s) for s in self.output_occupation)
        if len(inputs) < 1:
            raise DomainError("need at least one input photon")
        if len(set(inputs)) != len(inputs):
            raise DomainError("input modes must be distinct (one photon per input)")
        if any(s < 0 for s in occ):
            raise DomainError("output occupations must be nonnegative")
        if sum(occ) != len(inputs):
            raise DomainError("output occupation must sum to the photon number")
        if any(i < 0 or i >= len(occ) for i in inputs):
            raise DomainError("input mode index out of range")
        object.__setattr__(self, "input_modes", inputs)
        object.__setattr__(self, "output_occupation", occ)

    @property
    def n(self) -> int:
        return len(self.input_modes)


def balanced_tritter() -> Network:
    """The symmetric three-port splitter: the 3x3 Fourier unitary."""
    zeta = np.exp(2j * np.pi / 3.0)
    u = np.array(
        [[1, 1, 1], [1, zeta**2, zeta], [1, zeta, zeta**2]], dtype=complex
    ) / np.sqrt(3.0)
    return Network(u)


def balanced_beamsplitter() -> Network:
    """A 50:50 beamsplitter."""
    return Network(np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2.0))


def permanent_naive(matrix: np.ndarray) -> complex:
    """Permanent by direct enumeration of permutations (fine for n <= 5)."""
    a = np.asarray(matrix, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DomainError("permanent requires a square matrix")
    n = a.shape[0]
    if n == 0:
        return 1.0 + 0.0j
    total = 0.0 + 0.0j
    for perm in itertools.permutations(range(n)):
        p = 1.0 + 0.0j
        for i, j in enumerate(perm):
            p *= a[i, j]
        total += p
    return total


def permanent_ryser(matrix: np.ndarray) -> complex:
    """Permanent via Ryser's inclusion-exclusion with Gray-code column updates."""
    a = np.asarray(matrix, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DomainError("permanent requires a square matrix")
    n = a.shape[0]
    if n == 0:
        return 1.0 + 0.0j
    row_sums = np.zeros(n, dtype=complex)
    total = 0.0 + 0.0j
    gray = 0
    for k in range(1, 1 << n):
        new_gray = k ^ (k >> 1)
        j = (new_gray ^ gray).bit_length() - 1
        if new_gray & (1 << j):
            row_sums += a[:, j]
        else:
            row_sums -= a[:, j]
        gray = new_gray
        sign = -1.0 if (gray.bit_count() & 1) else 1.0
        total += sign * np.prod(row_sums)
    return total if n % 2 == 0 else -total


def permanent(matrix: np.ndarray) -> complex:
    """Permanent of a square complex matrix (naive for n <= 4, Ryser beyond)."""
    a = np.asarray(matrix, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DomainError("permanent requires a square matrix")
    return permanent_naive(a) if a.shape[0] <= 4 else permanent_ryser(a)


def output_occupations(n: int, m: int) -> list[tuple[int, ...]]:
    """All occupations of n photons over m output modes, lexicographic."""
    if m == 1:
        return [(n,)]
    out = []
    for first in range(n, -1, -1):
        for rest in output_occupations(n - first, m - 1):
            out.append((first,) + rest)
    return sorted(out)


def _gram_entries(g) -> np.ndarray:
    if isinstance(g, GramMatrix):
        return g.entries
    return GramMatrix(np.asarray(g, dtype=complex)).entries


def _expanded_matrix(net: Network, spec: EventSpec) -> np.ndarray:
    if len(spec.output_occupation) != net.m:
        raise DomainError("output occupation length must equal the network dimension")
    rows = [j for j, sj in enumerate(spec.output_occupation) for _ in range(sj)]
    return net.matrix[np.ix_(rows, list(spec.input_modes))]


def _occupation_factor(occupation: tuple[int, ...]) -> float:
    f = 1.0
    for s in occupation:
        f *= math.factorial(s)
    return f


def _finalize_probability(raw: complex) -> float:
    if abs(raw.imag) >= 1e-8:
        raise NumericalInconsistency(f"imaginary residue {raw.imag:.3e} in a probability")
    p = raw.real
    if p < -1e-10 or p > 1.0 + 1e-10:
        raise NumericalInconsistency(f"probability {p!r} outside [0, 1] tolerance band")
    return p


def event_probability(
    net: Network,
    spec: EventSpec,
    g,
    *,
    max_photons: int = DEFAULT_MAX_PHOTONS,
) -> float:
    """Probability of the output occupation in ``spec`` for photons with Gram ``g``.

    Exact double sum over permutation pairs; photon number is capped at
    ``max_photons`` (the cost grows as (n!)^2).
    """
    n = spec.n
    if n > max_photons:
        raise SizeLimit(f"{n} photons exceeds the exact-evaluation cap of {max_photons}")
    s = _gram_entries(g)
    if s.shape[0] != n:
        raise DomainError("Gram matrix size must match the photon number")
    m = _expanded_matrix(net, spec)
    perms = np.array(list(itertools.permutations(range(n))), dtype=np.intp)
    cols = np.arange(n)
    amps = m[cols[None, :], perms].prod(axis=1)  # amps[i] = prod_k M[k, perm_i(k)]
    conj_amps = np.conj(amps)
    total = 0.0 + 0.0j
    for i in range(perms.shape[0]):
        sigma = perms[i]
        # prod_k S[sigma(k), rho(k)] for every rho at once
        sprod = s[sigma[None, :], perms].prod(axis=1)
        total += amps[i] * np.sum(conj_amps * sprod)
    total /= _occupation_factor(spec.output_occupation)
    return _finalize_probability(total)


def event_probability_expansion(net: Network, spec: EventSpec, g) -> float:
    """Three-photon probability via the permutation expansion in Hadamard-product permanents.

    Independent of :func:`event_probability`'s double sum; the two paths are
    cross-checked in the test suite.  Only defined for n = 3.
    """
    if spec.n != 3:
        raise DomainError("the expansion path is written for exactly three photons")
    s = _gram_entries(g)
    m = _expanded_matrix(net, spec)
    total = 0.0 + 0.0j
    for pi in itertools.permutations(range(3)):
        weight = s[0, pi[0]] * s[1, pi[1]] * s[2, pi[2]]
        hadamard = m[:, list(pi)] * np.conj(m)
        total += np.conj(weight) * permanent_naive(hadamard)
    total /= _occupation_factor(spec.output_occupation)
    return _finalize_probability(total)


def event_distribution(
    net: Network,
    input_modes: tuple[int, ...],
    g,
    *,
    max_photons: int = DEFAULT_MAX_PHOTONS,
) -> dict[tuple[int, ...], float]:
    """Probabilities of every output occupation for the given input photons."""
    n = len(input_modes)
    return {
        occ: event_probability(
            net, EventSpec(tuple(input_modes), occ), g, max_photons=max_photons
        )
        for occ in output_occupations(n, net.m)
    }


def _check_moduli(r12: float, r23: float, r31: float) -> None:
    for name, r in (("r12", r12), ("r23", r23), ("r31", r31)):
        if not 0.0 <= r <= 1.0:
            raise DomainError(f"{name} must lie in [0, 1], got {r}")


def tritter_p111(r12: float, r23: float, r31: float, phi: float) -> float:
    """Coincidence probability of one photon per tritter output.

    Closed form (2 + 4*r12*r23*r31*cos(phi) - r12^2 - r23^2 - r31^2) / 9.
    """
    _check_moduli(r12, r23, r31)
    return (
        2.0
        + 4.0 * r12 * r23 * r31 * math.cos(phi)
        - r12 * r12
        - r23 * r23
        - r31 * r31
    ) / 9.0


def tritter_bunched(r12: float, r23: float, r31: float, phi: float) -> dict[str, float]:
    """Closed forms for the bunched tritter events.

    Returns the three event classes: fully bunched ``P300`` (also P030, P003),
    ``P120_class`` (= P120 = P012 = P201) and ``P021_class`` (= P021 = P210 =
    P102).
    """
    _check_moduli(r12, r23, r31)
    triple = r12 * r23 * r31
    p300 = (1.0 + r12 * r12 + r23 * r23 + r31 * r31 + 2.0 * triple * math.cos(phi)) / 27.0
    p120 = (1.0 - 2.0 * triple * math.cos(phi + math.pi / 3.0)) / 9.0
    p021 = (1.0 - 2.0 * triple * math.cos(phi - math.pi / 3.0)) / 9.0
    return {"P300": p300, "P120_class": p120, "P021_class": p021}


# Occupations belonging to each bunched class, for a photon entering input j
# of the tritter: class members are related by cyclic relabelling.
P120_CLASS = ((1, 2, 0), (0, 1, 2), (2, 0, 1))
P021_CLASS = ((0, 2, 1), (2, 1, 0), (1, 0, 2))
P300_CLASS = ((3, 0, 0), (0, 3, 0), (0, 0, 3))


def two_photon_marginals_tritter(g) -> dict[str, float]:
    """Two-photon coincidences for each input pair of the balanced tritter.

    Each marginal is computed through the general engine with the photon pair
    injected into the corresponding inputs and detected at the matching output
    pair; all equal (2 - r_ij^2)/9.
    """
    s = _gram_entries(g)
    if s.shape != (3, 3):
        raise DomainError("expected the 3x3 Gram matrix of the photon triple")
    net = balanced_tritter()
    out = {}
    for name, (i, j) in (("P011", (1, 2)), ("P101", (0, 2)), ("P110", (0, 1))):
        sub = GramMatrix(s[np.ix_([i, j], [i, j])])
        occ = [0, 0, 0]
        occ[i] = 1
        occ[j] = 1
        out[name] = event_probability(net, EventSpec((i, j), tuple(occ)), sub)
    return out
