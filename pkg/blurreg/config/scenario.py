"""
Scenario configuration for end-to-end runs.

A scenario names one signal, one blur, two sampling grids, the noise applied
to both sequences and how the DP threshold v is chosen. Files are JSON or
YAML; amplitudes are integer numerators over 256 and every other rational is
written as an int or a "num/den" string.
"""
import json
from fractions import Fraction
from pathlib import Path
from typing import List, Optional, Tuple, Union

import yaml
from pydantic import BaseModel, Field, field_validator, model_validator

from ..core.noise_baseline import NoiseSpec
from ..core.rationals import from_numerators, to_fraction
from ..core.signal_model import BlurModel, PiecewiseConstantSignal, SamplingGrid

RationalField = Union[int, str]


def _rational(value: RationalField) -> Fraction:
    try:
        return to_fraction(value)
    except (TypeError, ValueError) as e:
        raise ValueError(f"not a rational: {value!r}") from e


class SignalConfig(BaseModel):
    """Piecewise-constant signal."""
    amplitudes: List[int] = Field(..., min_length=1, description="g_1..g_m as numerators over 256")
    discontinuities: List[float] = Field(..., min_length=2, description="D_0 = 0 < D_1 < ... < D_m in units of T")

    def to_signal(self) -> PiecewiseConstantSignal:
        return PiecewiseConstantSignal(from_numerators(self.amplitudes), tuple(self.discontinuities))


class BlurComponentConfig(BaseModel):
    w: RationalField = 1
    sigma: float = Field(..., gt=0)

    @field_validator("w")
    @classmethod
    def validate_weight(cls, v: RationalField) -> RationalField:
        if not _rational(v) > 0:
            raise ValueError("mixture weights must be positive")
        return v


class GridConfig(BaseModel):
    t0: float = Field(..., lt=0)
    N: int = Field(..., ge=2)
    T: float = Field(1.0, gt=0)

    def to_grid(self) -> SamplingGrid:
        return SamplingGrid(self.t0, self.N, self.T)


class NoiseConfig(BaseModel):
    """±x noise; explicit sign patterns win over the seed."""
    x: RationalField = 0
    signs: Optional[Tuple[str, str]] = None
    seed: int = 0

    @field_validator("x")
    @classmethod
    def validate_x(cls, v: RationalField) -> RationalField:
        x = _rational(v)
        if not 0 <= x <= Fraction(1, 2):
            raise ValueError(f"x must lie in [0, 1/2], got {x}")
        if (x * 256).denominator != 1:
            raise ValueError(f"x must be a multiple of 1/256, got {x}")
        return v

    @field_validator("signs")
    @classmethod
    def validate_signs(cls, v: Optional[Tuple[str, str]]) -> Optional[Tuple[str, str]]:
        if v is not None:
            for pattern in v:
                if set(pattern) - set("+-, "):
                    raise ValueError(f"sign patterns use '+' and '-', got '{pattern}'")
        return v

    def spec(self, k: int) -> NoiseSpec:
        """Noise for sequence k (0 or 1)."""
        x = _rational(self.x)
        if self.signs is not None:
            return NoiseSpec.from_pattern(x, self.signs[k])
        return NoiseSpec(x, seed=self.seed + k)


class ScenarioConfig(BaseModel):
    name: str = "scenario"
    signal: SignalConfig
    blur: List[BlurComponentConfig] = Field(..., min_length=1)
    grids: List[GridConfig] = Field(..., min_length=2, max_length=2)
    noise: NoiseConfig = Field(default_factory=NoiseConfig)
    v: Optional[RationalField] = None
    v_scan: bool = False
    v_denominator: Optional[int] = Field(default=None, ge=2)
    infer: bool = False
    expected_pairs: Optional[List[Tuple[int, int]]] = None
    output_dir: Optional[Path] = None

    @field_validator("v")
    @classmethod
    def validate_v(cls, v: Optional[RationalField]) -> Optional[RationalField]:
        if v is not None and not _rational(v) > 0:
            raise ValueError("v must be positive")
        return v

    @model_validator(mode="after")
    def default_to_scan(self) -> "ScenarioConfig":
        if self.v is None:
            self.v_scan = True
        return self

    def to_signal(self) -> PiecewiseConstantSignal:
        return self.signal.to_signal()

    def to_blur(self) -> BlurModel:
        return BlurModel(tuple((_rational(c.w), c.sigma) for c in self.blur))

    def to_grids(self) -> Tuple[SamplingGrid, SamplingGrid]:
        return self.grids[0].to_grid(), self.grids[1].to_grid()

    @property
    def v_value(self) -> Optional[Fraction]:
        return _rational(self.v) if self.v is not None else None


def load_scenario(path: Union[str, Path]) -> ScenarioConfig:
    """Read a scenario from a .json, .yaml or .yml file.

    Raises:
        FileNotFoundError: if the file does not exist.
        ValueError: for an unknown extension.
        pydantic.ValidationError: if the content is invalid.
    """
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    suffix = path.suffix.lower()
    if suffix == ".json":
        data = json.loads(text)
    elif suffix in (".yaml", ".yml"):
        data = yaml.safe_load(text)
    else:
        raise ValueError(f"unsupported scenario format '{suffix}' (use .json or .yaml)")
    return ScenarioConfig.model_validate(data)


EXAMPLE_SIGNS = ("++--+++----++", "---+----++---")


def worked_example_config(x: RationalField = 0, v: Optional[RationalField] = None) -> ScenarioConfig:
    """The four-region, two-grid reproduction scenario."""
    return ScenarioConfig(
        name="worked-example",
        signal=SignalConfig(amplitudes=[256, -256, 256, -256], discontinuities=[0.0, 2.44, 5.01, 7.42, 9.43]),
        blur=[BlurComponentConfig(w=1, sigma=0.125)],
        grids=[GridConfig(t0=-0.98, N=13), GridConfig(t0=-0.4, N=13)],
        noise=NoiseConfig(x=x, signs=EXAMPLE_SIGNS),
        v=v,
        infer=True,
        expected_pairs=[(1, 1), (4, 3), (6, 6), (9, 8), (11, 10)],
    )
