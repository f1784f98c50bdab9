"""Rule-based pilot-wave trajectories through beamsplitter networks.

A particle is a (mode, quantile) pair: the quantile q in [0, 1) is its
cumulative-probability position inside the wave packet occupying its mode,
measured from the leading edge.  Transport is deterministic, cut by cut:

* mirror: the packet is reflected, so particle order reverses: q -> 1 - q.
* beamsplitter, one occupied input (a split): the leading half transmits,
  the trailing half reflects; q = 1/2 goes with the trailing half.
  Transmitted: q -> 2q.  Reflected: q -> 2(1 - q) (reflection reverses
  order; measure-preserving rescaling onto the reflected packet).
* beamsplitter, two coherent equal-weight occupied inputs interfering into
  a single occupied output (a merge): the reflected input fills the leading
  half with its order reversed, q -> (1 - q)/2; the transmitted input fills
  the trailing half preserving order, q -> (1 + q)/2.

Trajectories never cross: distinct quantiles stay distinct, and a uniform
quantile ensemble reproduces |amplitude|^2 statistics at the detectors.

Whether reflection at a *beamsplitter* reverses packet order cannot be
settled by detector statistics; both conventions give the same terminal
assignment.  The default reverses (as at mirrors); a RuleTable switch
selects the alternative for robustness checks.

Time-reversed runs traverse the stages backward, guided by the backward
evolution of a supplied terminal functional.  That functional must include
every branch of the final wave, empty or not; if the wave it induces at the
entry cut leaks onto non-source ports, the run is flagged with the
diagnostic "empty-wave component absent".
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

from .hilbert import Bra, Ket
from .network import BS_REFLECT, BS_TRANSMIT, Element, Network, backward_chain, forward_chain
from .rng import derive_stream

OCCUPANCY_TOL = 1e-12
EQUAL_WEIGHT_TOL = 1e-9
EMPTY_WAVE_DIAGNOSTIC = "empty-wave component absent"


class UnsupportedMergeError(ValueError):
    """Two-input amplitude pattern outside the supported rule table."""


class TrajectoryError(ValueError):
    """A trajectory cannot be started or continued as requested."""


@dataclass(frozen=True)
class RuleTable:
    """Transport conventions.  ``reverse_on_bs_reflection`` toggles packet
    order reversal at beamsplitter reflections (mirrors always reverse)."""

    reverse_on_bs_reflection: bool = True

    def mirror(self, q: float) -> float:
        return _clamp01(1.0 - q)

    def split(self, q: float) -> tuple[str, float]:
        if q < 0.5:
            return "transmit", _clamp01(2.0 * q)
        if self.reverse_on_bs_reflection:
            return "reflect", _clamp01(2.0 * (1.0 - q))
        return "reflect", _clamp01(2.0 * q - 1.0)

    def merge(self, q: float, route: str) -> float:
        if route == "reflect":
            if self.reverse_on_bs_reflection:
                return _clamp01((1.0 - q) / 2.0)
            return _clamp01(q / 2.0)
        return _clamp01((1.0 + q) / 2.0)


DEFAULT_RULES = RuleTable()


def _clamp01(q: float) -> float:
    # Boundary images (a set of measure zero) fold back into [0, 1).
    if q >= 1.0:
        return math.nextafter(1.0, 0.0)
    if q < 0.0:
        return 0.0
    return q


@dataclass(frozen=True)
class ParticleState:
    mode: str
    quantile: float
    cut: int


@dataclass(frozen=True)
class TrajectoryRecord:
    """A full trajectory: one ParticleState per cut, in traversal order."""

    direction: str  # "forward" | "reversed"
    quantile0: float
    states: tuple[ParticleState, ...]
    terminal: str
    diagnostics: tuple[str, ...] = ()

    @property
    def path(self) -> tuple[str, ...]:
        """Mode sequence with consecutive repeats removed and the terminal
        arm dropped (it is reported via ``terminal``)."""
        modes: list[str] = []
        for s in self.states:
            if not modes or modes[-1] != s.mode:
                modes.append(s.mode)
        return tuple(modes[:-1]) if len(modes) > 1 else tuple(modes)

    def to_json(self) -> dict:
        return {
            "detector": self.terminal,
            "diagnostics": list(self.diagnostics),
            "direction": self.direction,
            "path": list(self.path),
            "quantile0": self.quantile0,
            "quantiles": [s.quantile for s in self.states],
        }


@dataclass(frozen=True)
class EnsembleStats:
    samples: int
    seed: int
    direction: str
    detector_counts: dict[str, int]
    conditional_paths: dict[str, dict[tuple[str, ...], int]]
    diagnostics: tuple[str, ...] = ()

    def frequency(self, terminal: str) -> float:
        return self.detector_counts.get(terminal, 0) / self.samples

    def to_json(self) -> dict:
        return {
            "detector_counts": dict(sorted(self.detector_counts.items())),
            "diagnostics": list(self.diagnostics),
            "direction": self.direction,
            "conditional_paths": {
                term: {">".join(path): n for path, n in sorted(paths.items())}
                for term, paths in sorted(self.conditional_paths.items())
            },
            "samples": self.samples,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class TransferContext:
    """Wave information an element rule needs: complex amplitudes on the
    element's input ports for the traversal direction."""

    amplitudes: dict[str, complex]
    direction: str = "forward"
    rules: RuleTable = DEFAULT_RULES

    def occupied(self, port: str) -> bool:
        return abs(self.amplitudes.get(port, 0j)) > OCCUPANCY_TOL


def element_transfer(
    element: Element,
    mode: str,
    quantile: float,
    context: TransferContext,
) -> tuple[str, float]:
    """Transport one particle through one element (see module docstring)."""
    _check_quantile(quantile)
    rules = context.rules
    if element.kind == "mirror":
        ports = _oriented_ports(element, context.direction)
        if mode != ports["ins"][0]:
            raise TrajectoryError(f"particle on {mode!r} is not at this mirror")
        return ports["outs"][0], rules.mirror(quantile)
    if element.kind == "detector":
        if mode != element.ins[0]:
            raise TrajectoryError(f"particle on {mode!r} is not at this detector")
        return mode, quantile
    if element.kind != "beamsplitter":
        raise TrajectoryError(f"no transfer rule for element kind {element.kind!r}")

    ports = _oriented_ports(element, context.direction)
    (p_in0, p_in1), (p_out0, p_out1) = ports["ins"], ports["outs"]
    if mode not in (p_in0, p_in1):
        raise TrajectoryError(f"particle on {mode!r} is not an input of this beamsplitter")
    amp0, amp1 = context.amplitudes.get(p_in0, 0j), context.amplitudes.get(p_in1, 0j)
    occ0, occ1 = abs(amp0) > OCCUPANCY_TOL, abs(amp1) > OCCUPANCY_TOL
    if not context.occupied(mode):
        raise TrajectoryError(f"particle on {mode!r} but that port carries no amplitude")

    # Transmission keeps the port pairing (in0<->out0, in1<->out1).
    transmit_to = p_out0 if mode == p_in0 else p_out1
    reflect_to = p_out1 if mode == p_in0 else p_out0

    if occ0 and occ1:
        scale = max(abs(amp0), abs(amp1))
        if abs(abs(amp0) - abs(amp1)) > EQUAL_WEIGHT_TOL * scale:
            raise UnsupportedMergeError(
                f"two occupied inputs with unequal weights ({abs(amp0):.6g} vs {abs(amp1):.6g})"
            )
        out0 = BS_TRANSMIT * amp0 + BS_REFLECT * amp1
        out1 = BS_REFLECT * amp0 + BS_TRANSMIT * amp1
        occupied_outs = [p for p, a in ((p_out0, out0), (p_out1, out1)) if abs(a) > OCCUPANCY_TOL * scale]
        if len(occupied_outs) != 1:
            raise UnsupportedMergeError(
                "two occupied inputs do not interfere into a single output"
            )
        target = occupied_outs[0]
        route = "transmit" if target == transmit_to else "reflect"
        return target, rules.merge(quantile, route)

    route, q_new = rules.split(quantile)
    return (transmit_to, q_new) if route == "transmit" else (reflect_to, q_new)


def _oriented_ports(element: Element, direction: str) -> dict[str, tuple[str, ...]]:
    if direction == "forward":
        return {"ins": element.ins, "outs": element.outs}
    return {"ins": element.outs, "outs": element.ins}


def _check_quantile(q: float) -> None:
    if not (isinstance(q, (int, float)) and 0.0 <= q < 1.0):
        raise ValueError(f"quantile must lie in [0, 1), got {q!r}")


@dataclass(frozen=True)
class _Plan:
    """Precomputed per-run data shared by every sample of an ensemble."""

    direction: str
    cuts: tuple[int, ...]          # cut sequence in traversal order
    stage_order: tuple[int, ...]   # stage indices in traversal order
    contexts: tuple[TransferContext, ...]
    elements: tuple[tuple[Element, ...], ...]
    start_mode: str
    terminal_names: dict[str, str]
    diagnostics: tuple[str, ...]


def _build_plan(
    net: Network,
    direction: str,
    terminal_state: Union[Ket, Bra],
    start_mode: str | None,
    rules: RuleTable,
) -> _Plan:
    if direction not in ("forward", "reversed"):
        raise ValueError(f"direction must be 'forward' or 'reversed', got {direction!r}")
    if not terminal_state.entries:
        raise TrajectoryError("terminal state carries no amplitude")
    if direction == "forward":
        if not isinstance(terminal_state, Ket):
            raise TrajectoryError("forward runs start from a ket at the entry cut")
        chain = forward_chain(net, terminal_state)
        stage_order = tuple(range(net.n_stages))
        cuts = tuple(range(net.n_cuts))
        terminal_names = dict(net.detectors)
        diagnostics: tuple[str, ...] = ()
        entry_amps = chain[0].entries
    else:
        if not isinstance(terminal_state, Bra):
            raise TrajectoryError("reversed runs start from a functional at the final cut")
        chain = backward_chain(net, terminal_state)
        stage_order = tuple(range(net.n_stages - 1, -1, -1))
        cuts = tuple(range(net.n_stages, -1, -1))
        terminal_names = {}
        entry_amps = chain[net.n_stages].entries
        scale = max(abs(a) for a in terminal_state.entries.values())
        leaked = [
            m
            for m, a in sorted(chain[0].entries.items())
            if m not in net.sources and abs(a) > OCCUPANCY_TOL * scale
        ]
        diagnostics = (
            (f"{EMPTY_WAVE_DIAGNOSTIC} (terminal state reaches non-source ports "
             f"{leaked} at cut 0)",)
            if leaked
            else ()
        )

    occupied_entry = [m for m, a in sorted(entry_amps.items()) if abs(a) > OCCUPANCY_TOL]
    if start_mode is None:
        if len(occupied_entry) != 1:
            raise TrajectoryError(
                f"terminal state occupies {occupied_entry}; start_mode is required"
            )
        start_mode = occupied_entry[0]
    elif start_mode not in occupied_entry:
        raise TrajectoryError(
            f"start mode {start_mode!r} carries no amplitude in the terminal state"
        )

    contexts = []
    elements = []
    for pos, stage_idx in enumerate(stage_order):
        entering_cut = cuts[pos]
        amps = chain[entering_cut].entries
        contexts.append(TransferContext(dict(amps), direction=direction, rules=rules))
        elements.append(net.stages[stage_idx])
    return _Plan(
        direction=direction,
        cuts=cuts,
        stage_order=stage_order,
        contexts=tuple(contexts),
        elements=tuple(elements),
        start_mode=start_mode,
        terminal_names=terminal_names,
        diagnostics=diagnostics,
    )


def _run(plan: _Plan, q0: float) -> TrajectoryRecord:
    _check_quantile(q0)
    mode, q = plan.start_mode, q0
    states = [ParticleState(mode=mode, quantile=q, cut=plan.cuts[0])]
    for pos in range(len(plan.stage_order)):
        context = plan.contexts[pos]
        element = None
        for el in plan.elements[pos]:
            ports = _oriented_ports(el, plan.direction)
            if mode in ports["ins"]:
                element = el
                break
        if element is not None:
            mode, q = element_transfer(element, mode, q, context)
        states.append(ParticleState(mode=mode, quantile=q, cut=plan.cuts[pos + 1]))
    terminal = plan.terminal_names.get(mode, mode)
    return TrajectoryRecord(
        direction=plan.direction,
        quantile0=q0,
        states=tuple(states),
        terminal=terminal,
        diagnostics=plan.diagnostics,
    )


def run_trajectory(
    net: Network,
    q0: float,
    direction: str = "forward",
    terminal_state: Union[Ket, Bra, None] = None,
    start_mode: str | None = None,
    rules: RuleTable = DEFAULT_RULES,
) -> TrajectoryRecord:
    """Transport one particle through the network.

    Forward runs take the entry ket (default: the network's single source
    mode); reversed runs take the final-cut functional, including any
    empty-wave branches.  ``start_mode`` selects the particle's port when
    the terminal state occupies several.
    """
    if terminal_state is None:
        if direction != "forward":
            raise TrajectoryError("reversed runs require an explicit terminal state")
        if len(net.sources) != 1:
            raise TrajectoryError("no default entry state: network has multiple sources")
        terminal_state = Ket({net.sources[0]: 1.0 + 0j})
    plan = _build_plan(net, direction, terminal_state, start_mode, rules)
    return _run(plan, q0)


def run_ensemble(
    net: Network,
    samples: int,
    seed: int,
    direction: str = "forward",
    terminal_state: Union[Ket, Bra, None] = None,
    start_mode: str | None = None,
    rules: RuleTable = DEFAULT_RULES,
) -> EnsembleStats:
    """Run many trajectories with quantiles drawn uniformly from derived
    per-sample streams, and aggregate terminal and path statistics."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    if terminal_state is None:
        if direction != "forward":
            raise TrajectoryError("reversed runs require an explicit terminal state")
        if len(net.sources) != 1:
            raise TrajectoryError("no default entry state: network has multiple sources")
        terminal_state = Ket({net.sources[0]: 1.0 + 0j})
    plan = _build_plan(net, direction, terminal_state, start_mode, rules)
    detector_counts: dict[str, int] = {}
    conditional: dict[str, dict[tuple[str, ...], int]] = {}
    for i in range(samples):
        q0 = derive_stream(seed, i).random()
        rec = _run(plan, q0)
        detector_counts[rec.terminal] = detector_counts.get(rec.terminal, 0) + 1
        paths = conditional.setdefault(rec.terminal, {})
        paths[rec.path] = paths.get(rec.path, 0) + 1
    return EnsembleStats(
        samples=samples,
        seed=seed,
        direction=direction,
        detector_counts=detector_counts,
        conditional_paths=conditional,
        diagnostics=plan.diagnostics,
    )
