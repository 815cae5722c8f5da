import math

from django.conf import settings
from rest_framework import serializers


def default_eps_tail():
    return settings.SIMULATION["EPS_TAIL"]


# ============================================================================
# FIELDS
# ============================================================================
class ComplexField(serializers.Field):
    """Python complex literal such as ``0.1j`` or ``1+0.5j``."""

    default_error_messages = {
        "invalid": "A valid complex number is required.",
        "not_finite": "Complex values must be finite.",
    }

    def to_internal_value(self, data):
        if isinstance(data, (int, float, complex)):
            value = complex(data)
        else:
            try:
                value = complex(str(data).replace(" ", ""))
            except ValueError:
                self.fail("invalid")
        if not (math.isfinite(value.real) and math.isfinite(value.imag)):
            self.fail("not_finite")
        return value

    def to_representation(self, value):
        return str(value)


class FloatListField(serializers.ListField):
    """Comma separated floats: ``means = 10, 30, 100``."""

    child = serializers.FloatField()

    def to_internal_value(self, data):
        if isinstance(data, str):
            data = [item.strip() for item in data.split(",") if item.strip()]
        return super().to_internal_value(data)


def _ascending(value, name):
    if any(b <= a for a, b in zip(value, value[1:])):
        raise serializers.ValidationError(f"{name} must be strictly ascending.")
    return value


def _eps_tail(value):
    if not 0 < value <= 1e-4:
        raise serializers.ValidationError("eps_tail must lie in (0, 1e-4].")
    return value


def _positive(value, name):
    if not value > 0:
        raise serializers.ValidationError(f"{name} must be positive.")
    return value


# ============================================================================
# SCENARIOS
# ============================================================================
class ScenarioSerializer(serializers.Serializer):
    """Keys every scenario accepts."""

    output = serializers.CharField(required=False)
    workers = serializers.IntegerField(min_value=1, required=False)


class FieldAmplitudesMixin(serializers.Serializer):
    omega1 = ComplexField(default=1 + 0j)
    omega2 = ComplexField(default=1 + 0j)
    e1 = ComplexField(default=0.1 + 0j)
    e2 = ComplexField(default=0.1 + 0j)


class Lambda0CheckSerializer(FieldAmplitudesMixin, ScenarioSerializer):
    kappa = serializers.FloatField(default=1.0)
    delta = serializers.FloatField(default=100.0)
    gamma1 = serializers.FloatField(min_value=0.0, default=0.0)
    gamma2 = serializers.FloatField(min_value=0.0, default=0.0)
    scales = FloatListField(default=[0.025, 0.05, 0.1], min_length=2)

    def validate_kappa(self, value):
        return _positive(value, "kappa")

    def validate_delta(self, value):
        if value == 0:
            raise serializers.ValidationError("delta must be nonzero.")
        return value

    def validate_scales(self, value):
        if any(s <= 0 for s in value):
            raise serializers.ValidationError("scales must be positive.")
        return _ascending(value, "scales")


class ClassicalSerializer(ScenarioSerializer):
    omega1 = ComplexField(default=1 + 0j)
    omega2 = ComplexField(default=1 + 0j)
    e1 = ComplexField(default=0.1j)
    e2 = ComplexField(default=0.1j)
    xi_max = serializers.FloatField(required=False)
    zeta_max = serializers.FloatField(required=False)
    kappa = serializers.FloatField(default=1.0)
    delta = serializers.FloatField(default=1.0)
    xi_steps = serializers.IntegerField(min_value=1, default=400)
    tol = serializers.FloatField(default=1e-10)

    def validate_xi_max(self, value):
        return _positive(value, "xi_max")

    def validate_zeta_max(self, value):
        return _positive(value, "zeta_max")

    def validate_kappa(self, value):
        return _positive(value, "kappa")

    def validate_tol(self, value):
        if not 0 < value <= 1e-3:
            raise serializers.ValidationError("tol must lie in (0, 1e-3].")
        return value

    def validate(self, data):
        if "xi_max" in data and "zeta_max" in data:
            raise serializers.ValidationError("give xi_max or zeta_max, not both.")
        if "zeta_max" in data and data["kappa"] / data["delta"] <= 0:
            raise serializers.ValidationError("zeta_max needs kappa/delta > 0.")
        if "zeta_max" not in data:
            data.setdefault("xi_max", 20.0)
        return data


class TauGridMixin(serializers.Serializer):
    tau_max = serializers.FloatField(default=20.0)
    tau_steps = serializers.IntegerField(min_value=1, default=400)
    tau_grid = FloatListField(required=False, min_length=1)

    def validate_tau_max(self, value):
        return _positive(value, "tau_max")

    def validate_tau_grid(self, value):
        if value[0] < 0:
            raise serializers.ValidationError("tau_grid must be nonnegative.")
        return _ascending(value, "tau_grid")


class FockSerializer(TauGridMixin, ScenarioSerializer):
    n = serializers.IntegerField(min_value=0, required=False)
    n1 = serializers.IntegerField(min_value=0, required=False)
    n2 = serializers.IntegerField(min_value=0, required=False)
    n3 = serializers.IntegerField(min_value=0, default=0)
    n4 = serializers.IntegerField(min_value=0, default=0)

    def validate(self, data):
        if "n" in data:
            if "n1" in data or "n2" in data:
                raise serializers.ValidationError("give n or n1, n2, not both.")
            data["n1"] = data["n2"] = data.pop("n")
        elif "n1" not in data or "n2" not in data:
            raise serializers.ValidationError("photon numbers missing: give n or n1 and n2.")
        if data["n1"] + data["n3"] == 0 and min(data["n1"], data["n2"]) + min(data["n3"], data["n4"]) > 0:
            raise serializers.ValidationError("n1 + n3 must be positive for an evolving sector.")
        return data


class CoherentSerializer(TauGridMixin, ScenarioSerializer):
    mean = serializers.FloatField(required=False)
    mean1 = serializers.FloatField(required=False)
    mean2 = serializers.FloatField(required=False)
    eps_tail = serializers.FloatField(default=default_eps_tail)
    denominator = serializers.ChoiceField(choices=["resonant", "constant"], default="resonant")
    reference_mean = serializers.FloatField(required=False)

    def validate_eps_tail(self, value):
        return _eps_tail(value)

    def validate_mean(self, value):
        return _positive(value, "mean")

    def validate_mean1(self, value):
        return _positive(value, "mean1")

    def validate_mean2(self, value):
        return _positive(value, "mean2")

    def validate_reference_mean(self, value):
        return _positive(value, "reference_mean")

    def validate(self, data):
        if "mean" in data:
            if "mean1" in data or "mean2" in data:
                raise serializers.ValidationError("give mean or mean1, mean2, not both.")
            data["mean1"] = data["mean2"] = data.pop("mean")
        elif "mean1" not in data or "mean2" not in data:
            raise serializers.ValidationError("pump means missing: give mean or mean1 and mean2.")
        return data


class ScanSerializer(ScenarioSerializer):
    means = FloatListField(default=[10.0, 30.0, 100.0], min_length=1)
    mode = serializers.ChoiceField(choices=["resonant", "constant", "both"], default="both")
    reference_mean = serializers.FloatField(required=False)
    eps_tail = serializers.FloatField(default=default_eps_tail)
    tau_steps = serializers.IntegerField(min_value=10, default=400)

    def validate_means(self, value):
        if any(m <= 0 for m in value):
            raise serializers.ValidationError("means must be positive.")
        return _ascending(value, "means")

    def validate_reference_mean(self, value):
        return _positive(value, "reference_mean")

    def validate_eps_tail(self, value):
        return _eps_tail(value)


class MeanfieldSerializer(ScenarioSerializer):
    b0 = serializers.FloatField(min_value=1.0, default=100.0)
    xi_max = serializers.FloatField(default=20.0)
    xi_steps = serializers.IntegerField(min_value=1, default=1000)

    def validate_xi_max(self, value):
        return _positive(value, "xi_max")


class MfScanSerializer(ScenarioSerializer):
    b0_values = FloatListField(default=[10.0, 30.0, 100.0, 300.0, 1000.0], min_length=1)

    def validate_b0_values(self, value):
        if any(b <= 0 for b in value):
            raise serializers.ValidationError("b0_values must be positive.")
        return _ascending(value, "b0_values")


class PhaseGateSerializer(ScenarioSerializer):
    tau = serializers.FloatField(min_value=0.0, default=math.pi)


class CompareSerializer(ScenarioSerializer):
    mean = serializers.FloatField(default=100.0)
    eps_tail = serializers.FloatField(default=default_eps_tail)
    tau_max = serializers.FloatField(required=False)
    tau_steps = serializers.IntegerField(min_value=10, default=400)

    def validate_mean(self, value):
        if not value >= 1:
            raise serializers.ValidationError("mean must be at least 1.")
        return value

    def validate_tau_max(self, value):
        return _positive(value, "tau_max")

    def validate_eps_tail(self, value):
        return _eps_tail(value)


SCENARIO_SERIALIZERS = {
    "lambda0-check": Lambda0CheckSerializer,
    "classical": ClassicalSerializer,
    "fock": FockSerializer,
    "coherent": CoherentSerializer,
    "scan": ScanSerializer,
    "meanfield": MeanfieldSerializer,
    "mf-scan": MfScanSerializer,
    "phase-gate": PhaseGateSerializer,
    "compare": CompareSerializer,
}
