"""Preset models: coupled three-level thermal machines and spin-1 systems.

Energies are in units of machine A's 1<->2 gap and times in its inverse.
Three-level machine levels are labelled 1, 2, 3 in the public API (as in
the usual maser notation) and stored zero-based.  The two-machine basis is
``|a>_A (x) |b>_B`` with global index ``3*(a-1) + b`` (one-based), so
``|1> = |1,1>``, ``|2> = |1,2>``, ..., ``|9> = |3,3>``.

Bath wiring
-----------
Which transitions the hot and cold baths drive is selectable because the
available descriptions of this machine disagree.  ``"hot13_cold12"`` (the
default) puts the hot bath on 1<->3 and the cold bath on 1<->2; it is the
wiring whose heat-current energy prefactors are 1+Omega (hot), 1 (cold, A)
and Omega+Delta (cold, B), and it reproduces the reported power sign
structure.  ``"hot13_cold23"`` keeps the cold bath on 2<->3, and
``"printed"`` puts both baths on 2<->3.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields, replace
from typing import Callable, Sequence

import numpy as np

from .liouvillian import DissipationChannel, LindbladModel
from .operators import basis_op

WIRINGS = {
    "hot13_cold12": ((1, 3), (1, 2)),
    "hot13_cold23": ((1, 3), (2, 3)),
    "printed": ((2, 3), (2, 3)),
}
DEFAULT_WIRING = "hot13_cold12"


def sigma(i: int, j: int, dim: int = 3) -> np.ndarray:
    """One-based matrix unit ``|i><j|``."""
    return basis_op(i - 1, j - 1, dim)


def embed(op: np.ndarray, site: int, dims: Sequence[int]) -> np.ndarray:
    out = np.eye(1, dtype=complex)
    for k, d in enumerate(dims):
        out = np.kron(out, op if k == site else np.eye(d))
    return out


def thermal_pair(lower: np.ndarray, gamma: float, nbar: float, label: str) -> list[DissipationChannel]:
    """Absorption ``gamma*nbar*D[lower^+]`` and emission ``gamma*(1+nbar)*D[lower]``."""
    return [
        DissipationChannel(gamma * nbar, lower.conj().T.copy(), f"{label}_up"),
        DissipationChannel(gamma * (1.0 + nbar), lower, f"{label}_down"),
    ]


@dataclass(frozen=True)
class ThermalMachineParams:
    """Parameters of two coupled three-level machines (defaults: the reference sweep values)."""

    omega: float = 0.4
    delta: float = 0.0
    epsilon: float = 0.0
    gamma_h_a: float = 0.01
    gamma_h_b: float = 0.01
    gamma_c_a: float = 0.1
    gamma_c_b: float = 0.1
    nbar_h_a: float = 1.0
    nbar_h_b: float = 1.0
    nbar_c_a: float = 1e-3
    nbar_c_b: float = 1e-3
    wiring: str = DEFAULT_WIRING

    def __post_init__(self):
        for f in fields(self):
            if f.name.startswith(("gamma", "nbar")) and getattr(self, f.name) < 0:
                raise ValueError(f"{f.name} must be non-negative")
        if self.wiring not in WIRINGS:
            raise ValueError(f"unknown wiring {self.wiring!r}; choose from {sorted(WIRINGS)}")

    @property
    def gamma_h(self) -> float:
        return self.gamma_h_a

    def with_(self, **changes) -> "ThermalMachineParams":
        return replace(self, **changes)


@dataclass(frozen=True)
class ModelPreset:
    name: str
    model: LindbladModel
    basis_labels: tuple[str, ...]
    subsystem_dims: tuple[int, ...]
    params: object = None
    notes: tuple[str, ...] = field(default_factory=tuple)

    def channels_in(self, group: str) -> list[DissipationChannel]:
        return [ch for ch in self.model.channels if ch.label.startswith(group)]


def machine_hamiltonians(p: ThermalMachineParams) -> tuple[np.ndarray, np.ndarray]:
    dims = (3, 3)
    a = lambda op: embed(op, 0, dims)  # noqa: E731
    b = lambda op: embed(op, 1, dims)  # noqa: E731
    h0 = (
        a(sigma(2, 2))
        + (1 + p.omega) * a(sigma(3, 3))
        + (p.omega + p.delta) * b(sigma(2, 2))
        + (1 + p.omega) * b(sigma(3, 3))
    )
    v = a(sigma(2, 3)) @ b(sigma(2, 1)) + a(sigma(1, 2)) @ b(sigma(3, 2))
    v = v + v.conj().T
    return h0, v


def machine_channels(p: ThermalMachineParams) -> list[DissipationChannel]:
    (hl, hu), (cl, cu) = WIRINGS[p.wiring]
    dims = (3, 3)
    chans = []
    for site, tag in ((0, "A"), (1, "B")):
        gh, nh = (p.gamma_h_a, p.nbar_h_a) if site == 0 else (p.gamma_h_b, p.nbar_h_b)
        gc, nc = (p.gamma_c_a, p.nbar_c_a) if site == 0 else (p.gamma_c_b, p.nbar_c_b)
        chans += thermal_pair(embed(sigma(hl, hu), site, dims), gh, nh, f"hot_{tag}")
        chans += thermal_pair(embed(sigma(cl, cu), site, dims), gc, nc, f"cold_{tag}")
    return chans


def build_coupled_machines(p: ThermalMachineParams | None = None, **overrides) -> ModelPreset:
    """Two three-level machines coupled by a (for Delta = 0) energy-conserving exchange."""
    p = ThermalMachineParams() if p is None else p
    if overrides:
        p = replace(p, **overrides)
    h0, v = machine_hamiltonians(p)
    labels = tuple(f"|{a},{b}>" for a in (1, 2, 3) for b in (1, 2, 3))
    model = LindbladModel(h0, v, p.epsilon, machine_channels(p), labels)
    return ModelPreset("coupled_machines", model, labels, (3, 3), p)


def spin1_ops() -> dict[str, np.ndarray]:
    """Spin-1 operators in the ``m = +1, 0, -1`` basis."""
    sz = np.diag([1.0, 0.0, -1.0]).astype(complex)
    sp = np.sqrt(2.0) * (basis_op(0, 1, 3) + basis_op(1, 2, 3))
    sm = sp.conj().T
    return {
        "sz": sz,
        "sp": sp,
        "sm": sm,
        "sx": 0.5 * (sp + sm),
        "sy": -0.5j * (sp - sm),
    }


def spin1_thermal_channels(site: int, dims: Sequence[int], gamma: float, nbar: float,
                           tag: str) -> list[DissipationChannel]:
    """Thermal pairs on both ladder transitions of one spin-1."""
    chans = []
    for upper, lower, name in ((0, 1, "p0"), (1, 2, "0m")):
        chans += thermal_pair(embed(basis_op(lower, upper, 3), site, dims), gamma, nbar, f"{tag}_{name}")
    return chans


def build_spin1_entrainment(omega_d: float = 1.1, omega_0: float = 1.0, eps: float = 0.01,
                            channels: Sequence[DissipationChannel] | None = None) -> ModelPreset:
    """Driven spin-1 in the drive frame: ``H0 = (omega_d - omega_0) Sz``, ``V = Sy``."""
    s = spin1_ops()
    if channels is None:
        channels = spin1_thermal_channels(0, (3,), 0.1, 0.5, "bath")
    labels = ("|+1>", "|0>", "|-1>")
    model = LindbladModel((omega_d - omega_0) * s["sz"], s["sy"], eps, channels, labels)
    return ModelPreset("spin1_entrainment", model, labels, (3,),
                       {"omega_d": omega_d, "omega_0": omega_0, "eps": eps})


def build_coupled_spin1(omega_a: float = 1.0, omega_b: float = 1.0, eps: float = 0.01,
                        channels: Sequence[DissipationChannel] | None = None) -> ModelPreset:
    """Two spin-1 atoms with ``V = (i/2)(S+^A S-^B - S+^B S-^A)``."""
    s = spin1_ops()
    dims = (3, 3)
    a = lambda op: embed(op, 0, dims)  # noqa: E731
    b = lambda op: embed(op, 1, dims)  # noqa: E731
    h0 = omega_a * a(s["sz"]) + omega_b * b(s["sz"])
    v = 0.5j * (a(s["sp"]) @ b(s["sm"]) - b(s["sp"]) @ a(s["sm"]))
    if channels is None:
        channels = (spin1_thermal_channels(0, dims, 0.1, 0.3, "bath_A")
                    + spin1_thermal_channels(1, dims, 0.1, 0.8, "bath_B"))
    labels = tuple(f"|{ma},{mb}>" for ma in ("+1", "0", "-1") for mb in ("+1", "0", "-1"))
    model = LindbladModel(h0, v, eps, channels, labels)
    return ModelPreset("coupled_spin1", model, labels, dims,
                       {"omega_a": omega_a, "omega_b": omega_b, "eps": eps})


def build_entanglement_machine(eps_detuning: float = 0.3, g1: float = 0.01, g2: float = 0.01,
                               g3: float = 0.01,
                               channels: Sequence[DissipationChannel] | None = None) -> ModelPreset:
    """Two qutrits (levels 0, 1, 2) with an energy-conserving three-term exchange.

    ``eps_detuning`` is a level-spacing parameter; the coupling strengths are
    carried by ``g1, g2, g3`` so the model's ``epsilon`` is fixed to 1.
    """
    e = eps_detuning
    dims = (3, 3)
    u = lambda i, j: basis_op(i, j, 3)  # noqa: E731
    h_a = u(1, 1) + (1 + e) * u(2, 2)
    h_b = e * u(1, 1) + (1 + e) * u(2, 2)
    h0 = np.kron(h_a, np.eye(3)) + np.kron(np.eye(3), h_b)
    v = (g1 * np.kron(u(0, 2), u(2, 0)) + g2 * np.kron(u(1, 2), u(1, 0))
         + g3 * np.kron(u(1, 0), u(1, 2)))
    v = v + v.conj().T
    if channels is None:
        channels = []
        for site, tag in ((0, "A"), (1, "B")):
            channels += thermal_pair(embed(u(0, 2), site, dims), 0.01, 1.0, f"hot_{tag}")
            channels += thermal_pair(embed(u(0, 1), site, dims), 0.1, 1e-3, f"cold_{tag}")
    labels = tuple(f"|{a},{b}>" for a in range(3) for b in range(3))
    model = LindbladModel(h0, v, 1.0, channels, labels)
    return ModelPreset("entanglement_machine", model, labels, dims,
                       {"eps_detuning": e, "g1": g1, "g2": g2, "g3": g3})


PRESETS: dict[str, Callable[..., ModelPreset]] = {
    "coupled_machines": build_coupled_machines,
    "spin1_entrainment": build_spin1_entrainment,
    "coupled_spin1": build_coupled_spin1,
    "entanglement_machine": build_entanglement_machine,
}


def build_preset(name: str, **params) -> ModelPreset:
    try:
        builder = PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
    return builder(**params)


def sweep_preset(name: str, epsilon: float, delta: float, params: dict | None = None) -> ModelPreset:
    """Preset at coupling ``epsilon`` and detuning ``delta``.

    Detuning means Delta for the machines, ``omega_d - omega_0`` for the
    driven spin and ``omega_b - omega_a`` for the spin pair.
    """
    params = dict(params or {})
    if name == "coupled_machines":
        return build_coupled_machines(ThermalMachineParams(**{**params, "epsilon": epsilon, "delta": delta}))
    if name == "spin1_entrainment":
        omega_0 = params.pop("omega_0", 1.0)
        return build_spin1_entrainment(omega_0 + delta, omega_0, epsilon, **params)
    if name == "coupled_spin1":
        omega_a = params.pop("omega_a", 1.0)
        return build_coupled_spin1(omega_a, omega_a + delta, epsilon, **params)
    raise ValueError(f"preset {name!r} has no detuning axis to sweep")
