from fractions import Fraction
from typing import Any, Dict, List, Mapping, Optional, TypedDict, Union

from marshmallow import (
    EXCLUDE,
    Schema,
    ValidationError,
    fields,
    validate,
    validates_schema,
)

from screen_bie.geometry.prefractals import Family, exact_ratio


class Ratio(fields.Field):
    """An exact rational given as a number or a string such as "1/3"."""

    def _serialize(self, value: Any, attr: Optional[str], obj: Any, **kwargs: Any) -> Any:
        return None if value is None else str(value)

    def _deserialize(
        self,
        value: Any,
        attr: Optional[str],
        data: Optional[Mapping[str, Any]],
        **kwargs: Any,
    ) -> Fraction:
        try:
            return exact_ratio(value)
        except (TypeError, ValueError, ZeroDivisionError) as error:
            raise ValidationError(f"Not a ratio: {value!r}") from error


class WavenumberSchema(Schema):
    class Meta:
        title = "Complex wavenumber"
        unknown = EXCLUDE
        ordered = True

        class Dict(TypedDict, total=False):
            re: float
            im: float

    re = fields.Float(
        load_default=0.0,
        validate=validate.Range(min=0.0),
        metadata={"description": "Real part of k", "example": 0.0},
    )
    im = fields.Float(
        load_default=1.0,
        validate=validate.Range(min=0.0, min_inclusive=False),
        metadata={"description": "Imaginary part of k, must be positive", "example": 1.0},
    )


class BoundaryDataSchema(Schema):
    class Meta:
        title = "Boundary data on the plane of the screen"
        unknown = EXCLUDE
        ordered = True

        class Dict(TypedDict, total=False):
            kind: str
            value: Union[float, List[float]]
            direction: List[float]
            coefficients: List[List[float]]

    kind = fields.String(
        load_default="const",
        validate=validate.OneOf(["const", "planewave", "poly"]),
        metadata={"example": "const"},
    )
    value = fields.Raw(
        load_default=1.0,
        metadata={
            "description": "Real value or [re, im] pair",
            "example": 1.0,
        },
    )
    direction = fields.List(
        fields.Float(),
        load_default=lambda: [1.0, 0.0],
        validate=validate.Length(equal=2),
        metadata={"description": "Plane-wave direction, |d| <= 1", "example": [1.0, 0.0]},
    )
    coefficients = fields.List(
        fields.List(fields.Float()),
        load_default=list,
        metadata={
            "description": "Polynomial coefficients c[i][j] of x^i y^j",
            "example": [[0.0, 1.0], [1.0]],
        },
    )

    @validates_schema
    def validate_value(self, data: Dict[str, Any], **kwargs: Any) -> None:
        value = data.get("value")
        if isinstance(value, list):
            if len(value) != 2 or not all(isinstance(v, (int, float)) for v in value):
                raise ValidationError("value must be a number or [re, im]", "value")
        elif not isinstance(value, (int, float)) or isinstance(value, bool):
            raise ValidationError("value must be a number or [re, im]", "value")
        if data.get("kind") == "poly" and not data.get("coefficients"):
            raise ValidationError("poly data needs coefficients", "coefficients")
        direction = data.get("direction", [1.0, 0.0])
        if data.get("kind") == "planewave" and sum(d * d for d in direction) > 1 + 1e-12:
            raise ValidationError("plane-wave direction must have |d| <= 1", "direction")


class QuadratureSchema(Schema):
    class Meta:
        title = "Quadrature orders"
        unknown = EXCLUDE
        ordered = True

        class Dict(TypedDict, total=False):
            far_order: int
            near_order: int
            singular_order: int
            near_ratio: float
            tolerance: float

    far_order = fields.Integer(load_default=5, validate=validate.Range(min=1))
    near_order = fields.Integer(load_default=8, validate=validate.Range(min=1))
    singular_order = fields.Integer(load_default=8, validate=validate.Range(min=1))
    near_ratio = fields.Float(
        load_default=2.0, validate=validate.Range(min=0.0, min_inclusive=False)
    )
    tolerance = fields.Float(
        load_default=1e-6, validate=validate.Range(min=0.0, min_inclusive=False)
    )


class HsNormSchema(Schema):
    class Meta:
        title = "Fourier Sobolev norm settings"
        unknown = EXCLUDE
        ordered = True

        class Dict(TypedDict, total=False):
            s: float
            radius: float
            n_radial: int
            n_angular: int

    s = fields.Float(
        load_default=-0.5,
        validate=validate.Range(min=-1.0, max=1.0),
        metadata={"description": "Sobolev order", "example": -0.5},
    )
    radius = fields.Float(
        load_default=200.0,
        validate=validate.Range(min=10.0),
        metadata={"description": "Truncation radius in frequency", "example": 200.0},
    )
    n_radial = fields.Integer(load_default=256, validate=validate.Range(min=1))
    n_angular = fields.Integer(load_default=64, validate=validate.Range(min=4))


class VerdictRuleSchema(Schema):
    class Meta:
        title = "Trend decision thresholds"
        unknown = EXCLUDE
        ordered = True

        class Dict(TypedDict, total=False):
            zero_ratio_max: float
            zero_last_ratio_max: float
            nonzero_spread_max: float
            nonzero_tail_factor: float

    zero_ratio_max = fields.Float(load_default=0.9, validate=validate.Range(min=0.0))
    zero_last_ratio_max = fields.Float(
        load_default=0.95, validate=validate.Range(min=0.0)
    )
    nonzero_spread_max = fields.Float(load_default=0.1, validate=validate.Range(min=0.0))
    nonzero_tail_factor = fields.Float(
        load_default=10.0, validate=validate.Range(min=0.0)
    )


class ExperimentConfig(Schema):
    class Meta:
        title = "Experiment configuration"
        unknown = EXCLUDE
        ordered = True

        class Dict(TypedDict, total=False):
            name: str
            command: str
            family: str
            alpha: Optional[Fraction]
            levels: List[int]
            refine: int
            refines: List[int]
            wavenumber: WavenumberSchema.Meta.Dict
            bc: str
            data: BoundaryDataSchema.Meta.Dict
            quadrature: QuadratureSchema.Meta.Dict
            hs_norm: HsNormSchema.Meta.Dict
            hs_diffs: bool
            verdict: VerdictRuleSchema.Meta.Dict
            full_screen: bool
            output_dir: str
            dof_cap: int
            element_cap: int
            dump_matrices: bool
            panels: List[Dict[str, Any]]

    name = fields.String(
        load_default="experiment",
        validate=validate.Regexp(r"^[A-Za-z0-9_.-]+$"),
        metadata={"description": "Stem of every output file", "example": "dust-third"},
    )
    command = fields.String(
        required=False,
        allow_none=True,
        validate=validate.OneOf(
            ["generate", "solve-sequence", "capacity", "predict", "norms"]
        ),
        metadata={"example": "solve-sequence"},
    )
    family = fields.String(
        load_default=Family.CANTOR_DUST.value,
        validate=validate.OneOf([f.value for f in Family]),
        metadata={"example": "cantor_dust"},
    )
    alpha = Ratio(
        required=False,
        allow_none=True,
        load_default=None,
        metadata={"description": "Cantor dust ratio in (0, 1/2)", "example": "1/3"},
    )
    levels = fields.List(
        fields.Integer(validate=validate.Range(min=0)),
        load_default=lambda: [1, 2, 3, 4],
        validate=validate.Length(min=1),
        metadata={"description": "Prefractal levels, increasing", "example": [1, 2, 3]},
    )
    refine = fields.Integer(
        load_default=0,
        validate=validate.Range(min=0),
        metadata={"description": "Uniform refinements per panel", "example": 1},
    )
    refines = fields.List(
        fields.Integer(validate=validate.Range(min=0)),
        load_default=list,
        metadata={"description": "Refine sweep for the capacity command", "example": [1, 2, 3]},
    )
    wavenumber = fields.Nested(WavenumberSchema, load_default=lambda: {"re": 0.0, "im": 1.0})
    bc = fields.String(
        load_default="dirichlet",
        validate=validate.OneOf(["dirichlet", "neumann"]),
        metadata={"example": "dirichlet"},
    )
    data = fields.Nested(
        BoundaryDataSchema,
        load_default=lambda: {"kind": "const", "value": 1.0, "direction": [1.0, 0.0], "coefficients": []},
    )
    quadrature = fields.Nested(QuadratureSchema, load_default=lambda: QuadratureSchema().load({}))
    hs_norm = fields.Nested(HsNormSchema, load_default=lambda: HsNormSchema().load({}))
    hs_diffs = fields.Boolean(
        load_default=False,
        metadata={"description": "Also measure level differences in the Fourier norm"},
    )
    verdict = fields.Nested(
        VerdictRuleSchema, load_default=lambda: VerdictRuleSchema().load({})
    )
    full_screen = fields.Boolean(
        load_default=True,
        metadata={"description": "Neumann runs: compare against the full triangle"},
    )
    output_dir = fields.String(load_default="output", metadata={"example": "output"})
    dof_cap = fields.Integer(load_default=2000, validate=validate.Range(min=1))
    element_cap = fields.Integer(load_default=20000, validate=validate.Range(min=1))
    dump_matrices = fields.Boolean(load_default=False)
    panels = fields.List(
        fields.Dict(),
        required=False,
        allow_none=True,
        load_default=None,
        metadata={"description": "Panels of a custom screen, as in the geometry JSON"},
    )

    @validates_schema
    def validate_family(self, data: Dict[str, Any], **kwargs: Any) -> None:
        family = Family(data.get("family", Family.CANTOR_DUST.value))
        alpha = data.get("alpha")
        if family is Family.CANTOR_DUST:
            if alpha is None:
                raise ValidationError("alpha is required for cantor_dust", "alpha")
            if not 0 < alpha < Fraction(1, 2):
                raise ValidationError("alpha must lie in (0, 1/2)", "alpha")
        if family is Family.CUSTOM and not data.get("panels"):
            raise ValidationError("a custom screen needs panels", "panels")
        levels = data.get("levels", [])
        if list(levels) != sorted(set(levels)):
            raise ValidationError("levels must be strictly increasing", "levels")
        if family is Family.SIERPINSKI_COMPLEMENT and levels and levels[0] < 1:
            raise ValidationError("the complement screen starts at level 1", "levels")

    def dump_config(self, config: Dict[str, Any]) -> Dict[str, Any]:
        """Deterministic JSON-ready form of a loaded config."""
        return self.dump(config)
