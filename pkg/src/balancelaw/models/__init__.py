"""Catalog of example balance-law systems and a name-based registry."""

from ..errors import ValidationError
from .euler import EulerDamping, PressureLaw, euler_damping
from .kinetic import CollisionTable, DiscreteVelocityModel, broadwell, dvm
from .mutations import TARGETS, MutatedModel, RankDropModel, mutate
from .optics import NonlinearOptics, nonlinear_optics
from .radiation import RadiationHydro, radiation_hydro
from .reactive import ReactionNetwork, ReactiveEuler, reactive_euler
from .vibrational import VibrationalGas, vibrational_gas
from .viscoelastic import StressLaw, Viscoelastic, viscoelastic


def _euler(d=1, law=None):
    if isinstance(law, dict):
        law = PressureLaw(**law)
    return euler_damping(d=d, law=law)


def _viscoelastic(E=1.0, g=None):
    if g is None:
        return viscoelastic(E=E)
    g = {"kind": g} if isinstance(g, str) else dict(g)
    kind = g.pop("kind", "linear")
    if kind == "linear":
        return viscoelastic(E=E, law=StressLaw.linear(g.pop("slope", 0.5 * E), **g))
    if kind == "tanh":
        return viscoelastic(E=E, law=StressLaw.tanh(E, **g))
    raise ValidationError(f"model.params.g.kind: unknown stress law {kind!r}")


def _reactive(**net):
    return reactive_euler(ReactionNetwork(**net) if net else None)


def _dvm(velocities, collisions):
    return dvm(CollisionTable.from_collisions(velocities, collisions))


FAMILIES = {
    "euler_damping": _euler,
    "nonlinear_optics": nonlinear_optics,
    "vibrational_gas": vibrational_gas,
    "viscoelastic": _viscoelastic,
    "radiation_hydro": radiation_hydro,
    "reactive_euler": _reactive,
    "broadwell": broadwell,
    "dvm": _dvm,
}

# the seven default fixtures
CATALOG = ("euler_damping", "nonlinear_optics", "vibrational_gas", "viscoelastic",
           "radiation_hydro", "reactive_euler", "broadwell")


def build_model(family, params=None):
    """Construct a model from its family name and a JSON-style parameter map."""
    if family not in FAMILIES:
        raise ValidationError(f"model.family: unknown family {family!r}")
    try:
        return FAMILIES[family](**(params or {}))
    except TypeError as exc:
        raise ValidationError(f"model.params: {exc}") from exc


__all__ = [
    "CATALOG", "FAMILIES", "TARGETS", "CollisionTable", "DiscreteVelocityModel", "EulerDamping",
    "MutatedModel", "NonlinearOptics", "PressureLaw", "RadiationHydro", "RankDropModel",
    "ReactionNetwork", "ReactiveEuler", "StressLaw", "VibrationalGas", "Viscoelastic",
    "broadwell", "build_model", "dvm", "euler_damping", "mutate", "nonlinear_optics",
    "radiation_hydro", "reactive_euler", "vibrational_gas", "viscoelastic",
]
