"""Two-state description of pre- and post-selected systems.

A system prepared in a ket and later found in a given outcome is described
between the two selections by an ordered pair: the postselection functional
evolved backward to the cut and the preparation ket evolved forward to it.
The pair is never collapsed to a scalar product.

The conditional probability that an intermediate projective measurement
with outcomes {P_i} yields outcome n is

    prob(n) = |<post| P_n |pre>|^2 / sum_i |<post| P_i |pre>|^2,

evaluated with both states at the measurement cut.  Outcomes with
probability 1 are "certain": their value can be inferred from the two
selections alone, and :func:`certainty_report` lists them cut by cut.

Spin-1/2 systems are handled as the degenerate case of a single identity
stage over the labels ``down``/``up`` (free Hamiltonian zero).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .hilbert import (
    DEFAULT_TOL,
    Bra,
    Ket,
    LinearOp,
    Projector,
    apply,
    compose,
    identity,
    make_projector,
    op_close,
)
from .network import Network, build_network, evolve

CERTAINTY_THRESHOLD = 1.0 - 1e-12
PAIRING_TOL = 1e-12
DENOMINATOR_TOL = 1e-24

SPIN_LABELS = ("down", "up")


class InconsistentSelectionError(ValueError):
    """The postselection never follows the preselection (vanishing overlap)."""


class UndefinedConditionalError(ValueError):
    """Every outcome weight vanishes; the conditional distribution is undefined."""


class IncompleteProjectorSetError(ValueError):
    """The projector set does not resolve the identity on the live space."""


@dataclass(frozen=True)
class TwoStateVector:
    """The (post functional, pre ket) pair at a cut, plus the live basis there."""

    post: Bra
    pre: Ket
    cut: int
    basis: tuple[str, ...]

    def __post_init__(self):
        if abs(self.pairing()) <= PAIRING_TOL:
            raise InconsistentSelectionError(
                "postselection is orthogonal to the evolved preselection"
            )

    def pairing(self) -> complex:
        return self.post.pair(self.pre)

    def display_pair(self) -> tuple[Bra, Ket]:
        """Presentation form: the bra normalized to unit leading coefficient.

        The postselected state's leading amplitude (the conjugate of the
        corresponding functional entry) is factored into the ket, so the
        printed product keeps its value.
        """
        lead = min(self.post.entries)
        factor = self.post.entries[lead].conjugate()
        shown_bra = Bra(
            {m: (a.conjugate() / factor).conjugate() for m, a in self.post.entries.items()}
        )
        return shown_bra, self.pre.scaled(factor)

    def __str__(self) -> str:
        bra, ket = self.display_pair()
        return f"{bra} ({ket})"


@dataclass(frozen=True)
class ProjectorSet:
    """Ordered measurement outcomes: (label, projector) pairs.

    Projectors may cover multi-dimensional subspaces (degenerate outcomes).
    They must be mutually orthogonal and sum to the identity on the space
    they are used in; :meth:`validate` checks both.
    """

    outcomes: tuple[tuple[str, Projector], ...]

    def labels(self) -> tuple[str, ...]:
        return tuple(label for label, _ in self.outcomes)

    def validate(self, basis: tuple[str, ...], tol: float = DEFAULT_TOL) -> None:
        total = None
        ops = [p for _, p in self.outcomes]
        for i, p in enumerate(ops):
            if set(p.in_basis) - set(basis):
                raise IncompleteProjectorSetError(
                    f"projector {self.outcomes[i][0]!r} uses labels outside the live space"
                )
        embedded = [_embed(p, basis) for p in ops]
        for i in range(len(embedded)):
            for j in range(i + 1, len(embedded)):
                prod = compose(embedded[i], embedded[j])
                if any(abs(a) > tol for a in prod.entries.values()):
                    raise IncompleteProjectorSetError(
                        f"projectors {self.outcomes[i][0]!r} and {self.outcomes[j][0]!r} overlap"
                    )
        for p in embedded:
            total = p if total is None else _op_sum(total, p)
        if total is None or not op_close(total, identity(basis), tol):
            raise IncompleteProjectorSetError(
                "projector set does not sum to the identity on the live space"
            )


def _embed(p: Projector, basis: tuple[str, ...]) -> Projector:
    if set(p.in_basis) == set(basis):
        return p
    return Projector(tuple(basis), tuple(basis), dict(p.entries))


def _op_sum(a: LinearOp, b: LinearOp) -> LinearOp:
    entries = dict(a.entries)
    for k, v in b.entries.items():
        entries[k] = entries.get(k, 0j) + v
    return LinearOp(a.in_basis, a.out_basis, entries)


def which_path_set(modes: tuple[str, ...]) -> ProjectorSet:
    """One rank-1 projector per mode, labeled by the mode."""
    basis = tuple(sorted(modes))
    return ProjectorSet(
        tuple((m, make_projector({m}, basis=basis)) for m in basis)
    )


def two_state_at_cut(net: Network, pre: Ket, post: Bra, cut: int) -> TwoStateVector:
    """Evolve pre forward and post backward to the cut and package them.

    Raises InconsistentSelectionError when the postselection cannot follow
    the preselection (their pairing vanishes at every cut).
    """
    if not pre.is_normalized():
        raise ValueError(f"preselection not normalized (norm={pre.norm()!r})")
    if not post.is_normalized():
        raise ValueError(f"postselection not normalized (norm={post.norm()!r})")
    net.check_cut(cut)
    fwd = evolve(net, pre, 0, cut)
    bwd = evolve(net, post, net.n_stages, cut)
    return TwoStateVector(post=bwd, pre=fwd, cut=cut, basis=net.live[cut])


def abl_distribution(tsv: TwoStateVector, outcomes: ProjectorSet) -> dict[str, float]:
    """Conditional probabilities for every outcome of an intermediate measurement."""
    outcomes.validate(tsv.basis)
    weights = {}
    for label, proj in outcomes.outcomes:
        amp = tsv.post.pair(apply(_embed(proj, tsv.basis), tsv.pre))
        weights[label] = abs(amp) ** 2
    denom = sum(weights.values())
    if denom <= DENOMINATOR_TOL:
        raise UndefinedConditionalError(
            "all outcome weights vanish; conditional probabilities undefined"
        )
    return {label: w / denom for label, w in weights.items()}


def abl_probability(tsv: TwoStateVector, outcomes: ProjectorSet, which: str) -> float:
    """Conditional probability of one labeled outcome (see module docstring)."""
    dist = abl_distribution(tsv, outcomes)
    if which not in dist:
        raise KeyError(f"no outcome labeled {which!r}")
    return dist[which]


@dataclass(frozen=True)
class CertaintyEntry:
    cut: int
    mode: str
    probability: float

    def to_json(self) -> dict:
        return {"cut": self.cut, "mode": self.mode, "probability": float(f"{self.probability:.12g}")}


def certainty_report(net: Network, pre: Ket, post: Bra) -> list[CertaintyEntry]:
    """Which-path outcomes that are certain (probability 1) at every cut.

    For each cut the which-path projector set over the live modes is
    evaluated; outcomes at or above the certainty threshold are reported.
    """
    entries = []
    for cut in range(net.n_cuts):
        tsv = two_state_at_cut(net, pre, post, cut)
        dist = abl_distribution(tsv, which_path_set(net.live[cut]))
        for mode, p in sorted(dist.items()):
            if p >= CERTAINTY_THRESHOLD:
                entries.append(CertaintyEntry(cut=cut, mode=mode, probability=p))
    return entries


# ---------------------------------------------------------------------------
# Spin-1/2 support

def spin_network() -> Network:
    """A single identity stage over the spin labels (free Hamiltonian zero)."""
    return build_network(
        {"modes": list(SPIN_LABELS), "stages": [{"elements": []}], "detectors": {}}
    )


def spin_state(n: tuple[float, float, float], sign: int = +1) -> Ket:
    """Eigenket of the spin component along unit vector n with eigenvalue sign/2."""
    _check_unit(n)
    nx, ny, nz = n
    if sign not in (+1, -1):
        raise ValueError("sign must be +1 or -1")
    if sign < 0:
        nx, ny, nz = -nx, -ny, -nz
    # Eigenvector of n.sigma with eigenvalue +1, built without trig on angles.
    if nz > -1.0 + 1e-15:
        up = complex(1.0 + nz, 0.0)
        down = complex(nx, ny)
    else:
        up, down = 0j, 1 + 0j
    ket = Ket({"up": up, "down": down})
    return ket.normalized()


def spin_observable(n: tuple[float, float, float]) -> ProjectorSet:
    """Projector pair for the +1/2 and -1/2 outcomes of the spin along n."""
    _check_unit(n)
    plus = make_projector(spin_state(n, +1), basis=SPIN_LABELS)
    minus = make_projector(spin_state(n, -1), basis=SPIN_LABELS)
    return ProjectorSet((("+1/2", plus), ("-1/2", minus)))


def _check_unit(n, tol: float = DEFAULT_TOL) -> None:
    if len(n) != 3:
        raise ValueError("spin direction must be a 3-vector")
    if abs(math.sqrt(n[0] ** 2 + n[1] ** 2 + n[2] ** 2) - 1.0) > tol:
        raise ValueError(f"spin direction must be a unit vector, got {n!r}")


def spin_two_state(pre: Ket, post: Bra) -> TwoStateVector:
    """Two-state pair for a static spin system (identity evolution)."""
    net = spin_network()
    return two_state_at_cut(net, pre, post, cut=0)
