"""Closed-loop layer-thickness control simulation.

A discrete plant deposits one layer per step with a multiplicative gain, an
additive bias and process noise; the build height is then measured with
noise. Three compensation strategies act on the measured z-error (measured
height minus planned height, positive when over-deposited):

* proportional - command nominal minus kp times the z-error,
* add/skip     - duplicate the last layer or skip the next one as soon as
  the z-error reaches half a layer thickness,
* reslice      - re-plan the remaining build into uniform layers whose
  thickness is closest to nominal.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np


class NoPreviousLayer(Exception):
    """An add-copy decision requires at least one deposited layer."""


class TargetReached(Exception):
    """Re-slicing is meaningless once the measured height meets the target."""


class LayerBudgetExhausted(Exception):
    """The controller failed to finish within 3x the planned layer count."""

    def __init__(self, message: str, result: "SimulationResult"):
        super().__init__(message)
        self.result = result


DEPOSIT = "deposit"
ADD_COPY = "add_copy"
SKIP = "skip"
RESLICE = "reslice"

STRATEGIES = ("none", "proportional", "addskip", "reslice")


@dataclass
class ProcessModel:
    """Plant disturbances: actual = commanded * gain + bias + process noise."""

    thickness_gain: float = 1.0
    thickness_bias_um: float = 0.0
    process_noise_sigma_um: float = 0.0
    measurement_noise_sigma_um: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if not self.thickness_gain > 0:
            raise ValueError("thickness_gain must be positive")
        if self.process_noise_sigma_um < 0 or self.measurement_noise_sigma_um < 0:
            raise ValueError("noise sigmas must be non-negative")


def standard_disturbance_model(seed: int = 0) -> ProcessModel:
    """The stock disturbance preset used by the control benchmarks."""
    return ProcessModel(
        thickness_gain=0.95,
        thickness_bias_um=5.0,
        process_noise_sigma_um=5.0,
        measurement_noise_sigma_um=5.0,
        seed=seed,
    )


@dataclass
class LayerState:
    """Build state after some number of plan steps.

    layer_index is the position in the active plan; target_z_um is the
    planned height at that position (layer_index * nominal until a reslice
    replaces the plan). z_error_um is always recomputed from the fields.
    last_actual_um records the material laid by the most recent transition.
    """

    layer_index: int = 0
    true_z_um: float = 0.0
    measured_z_um: float = 0.0
    target_z_um: float = 0.0
    last_actual_um: float = 0.0

    @property
    def z_error_um(self) -> float:
        return self.measured_z_um - self.target_z_um


@dataclass
class ControlDecision:
    """One controller action; payload fields depend on the action."""

    action: str
    commanded_thickness_um: float = 0.0
    remaining_layers: int = 0

    @classmethod
    def deposit(cls, thickness_um: float) -> "ControlDecision":
        return cls(action=DEPOSIT, commanded_thickness_um=float(thickness_um))

    @classmethod
    def add_copy(cls, thickness_um: float) -> "ControlDecision":
        return cls(action=ADD_COPY, commanded_thickness_um=float(thickness_um))

    @classmethod
    def skip(cls) -> "ControlDecision":
        return cls(action=SKIP)

    @classmethod
    def reslice(cls, thickness_um: float, remaining: int) -> "ControlDecision":
        if remaining < 1:
            raise ValueError("reslice must plan at least one layer")
        return cls(
            action=RESLICE,
            commanded_thickness_um=float(thickness_um),
            remaining_layers=int(remaining),
        )


@dataclass
class TraceRow:
    layer: int
    commanded_um: float
    actual_um: float
    measured_z_um: float
    z_error_um: float
    action: str


@dataclass
class SimulationResult:
    """Per-event trace plus summary of one closed-loop run."""

    strategy: str
    nominal_um: float
    n_layers: int
    plan_height_um: float
    trace: list[TraceRow] = field(default_factory=list)
    final_abs_error_um: float = 0.0
    max_abs_error_um: float = 0.0
    total_layers_deposited: int = 0


def control_proportional(state: LayerState, nominal_um: float, kp: float = 1.0) -> ControlDecision:
    """Deposit nominal minus kp times the z-error, clamped to [0, 2*nominal]."""
    if not nominal_um > 0:
        raise ValueError("nominal_um must be positive")
    if not 0 < kp <= 2:
        raise ValueError("kp must lie in (0, 2]")
    commanded = float(np.clip(nominal_um - kp * state.z_error_um, 0.0, 2.0 * nominal_um))
    return ControlDecision.deposit(commanded)


def control_add_skip(state: LayerState, nominal_um: float) -> ControlDecision:
    """Duplicate or skip a layer once |z-error| reaches half a thickness.

    The comparison is closed: exactly half a layer already triggers.
    """
    if not nominal_um > 0:
        raise ValueError("nominal_um must be positive")
    half = nominal_um / 2.0
    if state.z_error_um <= -half:
        if state.layer_index < 1:
            raise NoPreviousLayer("no layer deposited yet to copy")
        return ControlDecision.add_copy(nominal_um)
    if state.z_error_um >= half:
        return ControlDecision.skip()
    return ControlDecision.deposit(nominal_um)


def control_reslice(state: LayerState, target_height_um: float, nominal_um: float) -> ControlDecision:
    """Re-plan the remaining height into uniform near-nominal layers.

    The layer count is the integer nearest remaining/nominal (at least 1;
    ties round up), which minimizes |remaining - n * nominal|.
    """
    if not nominal_um > 0:
        raise ValueError("nominal_um must be positive")
    remaining = target_height_um - state.measured_z_um
    if remaining <= 0:
        raise TargetReached(
            f"measured height {state.measured_z_um} um already meets target {target_height_um} um"
        )
    n = max(1, int(np.floor(remaining / nominal_um + 0.5)))
    return ControlDecision.reslice(remaining / n, n)


def deposit_layer(
    state: LayerState,
    decision: ControlDecision,
    model: ProcessModel,
    nominal_um: float,
    rng: np.random.Generator | None = None,
) -> LayerState:
    """Apply one decision to the plant and return the next state.

    Deposit/add-copy/reslice lay material: actual thickness is commanded
    (clamped to [0, 2*nominal]) times the gain, plus bias and process
    noise, and the new height is measured with noise. A deposit advances
    the planned height by nominal and an add-copy not at all; a reslice
    replaces the plan, re-anchoring the next boundary at the measured
    height plus the re-planned thickness. A skip advances the plan by
    nominal without material.
    """
    if rng is None:
        rng = np.random.default_rng(model.seed)
    if decision.action == SKIP:
        return replace(
            state,
            layer_index=state.layer_index + 1,
            target_z_um=state.target_z_um + nominal_um,
            last_actual_um=0.0,
        )
    if decision.action not in (DEPOSIT, ADD_COPY, RESLICE):
        raise ValueError(f"unknown decision action {decision.action!r}")

    commanded = float(np.clip(decision.commanded_thickness_um, 0.0, 2.0 * nominal_um))
    actual = (
        commanded * model.thickness_gain
        + model.thickness_bias_um
        + rng.normal(0.0, model.process_noise_sigma_um)
    )
    true_z = state.true_z_um + actual
    measured = true_z + rng.normal(0.0, model.measurement_noise_sigma_um)
    if decision.action == DEPOSIT:
        target = state.target_z_um + nominal_um
    elif decision.action == RESLICE:
        target = state.measured_z_um + decision.commanded_thickness_um
    else:  # add-copy repairs the previous plan step
        target = state.target_z_um
    return LayerState(
        layer_index=state.layer_index + (0 if decision.action == ADD_COPY else 1),
        true_z_um=true_z,
        measured_z_um=measured,
        target_z_um=target,
        last_actual_um=actual,
    )


def run_simulation(
    n_layers: int,
    nominal_um: float,
    strategy: str,
    model: ProcessModel | None = None,
    seed: int | None = None,
    kp: float = 1.0,
) -> SimulationResult:
    """Closed loop measure-decide-deposit until the plan height is built.

    The loop ends when the plan has been fully issued (for reslice, when
    the measured height reaches the plan height) and raises
    LayerBudgetExhausted, carrying the partial result, after 3 * n_layers
    events.
    """
    if n_layers < 1:
        raise ValueError("n_layers must be >= 1")
    if strategy not in STRATEGIES:
        raise ValueError(f"strategy must be one of {STRATEGIES}")
    if model is None:
        model = ProcessModel()
    rng = np.random.default_rng(model.seed if seed is None else seed)
    plan_height = n_layers * nominal_um
    state = LayerState()
    result = SimulationResult(
        strategy=strategy, nominal_um=nominal_um, n_layers=n_layers, plan_height_um=plan_height
    )
    budget = 3 * n_layers
    eps = 1e-9 * nominal_um

    for step in range(budget + 1):
        if strategy == "reslice":
            done = state.measured_z_um >= plan_height - eps
        else:
            done = state.target_z_um >= plan_height - eps
        if done:
            break
        if step == budget:
            _finalize(result, state, plan_height)
            raise LayerBudgetExhausted(
                f"controller did not finish within {budget} events", result
            )

        if strategy == "none":
            decision = ControlDecision.deposit(nominal_um)
        elif strategy == "proportional":
            decision = control_proportional(state, nominal_um, kp)
        elif strategy == "addskip":
            decision = control_add_skip(state, nominal_um)
        else:
            decision = control_reslice(state, plan_height, nominal_um)

        state = deposit_layer(state, decision, model, nominal_um, rng)
        if decision.action != SKIP:
            result.total_layers_deposited += 1
        result.trace.append(
            TraceRow(
                layer=state.layer_index,
                commanded_um=decision.commanded_thickness_um if decision.action != SKIP else 0.0,
                actual_um=state.last_actual_um,
                measured_z_um=state.measured_z_um,
                z_error_um=state.z_error_um,
                action=decision.action,
            )
        )

    _finalize(result, state, plan_height)
    return result


def _finalize(result: SimulationResult, state: LayerState, plan_height: float) -> None:
    result.final_abs_error_um = abs(state.measured_z_um - plan_height)
    result.max_abs_error_um = max((abs(r.z_error_um) for r in result.trace), default=0.0)
