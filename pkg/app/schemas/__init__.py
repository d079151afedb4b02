"""
Marshmallow Schemas Package
"""
from marshmallow import RAISE, Schema, ValidationError, fields, post_load, validate

from app.models.allocation import GKind, Method, SolverParams
from app.models.detection import DetectorKind
from app.models.experiment import ExperimentSpec
from app.models.network_config import NetworkConfig
from app.utils.errors import ConfigurationError

DETECTOR_CHOICES = [d.value for d in DetectorKind]
METHOD_CHOICES = [m.value for m in Method]
G_CHOICES = [g.value for g in GKind]


class ComplexNumber(fields.Field):
    """A real number, or a complex one written as a string such as '(0.4+0.1j)'"""

    default_error_messages = {'invalid': 'Not a valid complex number.'}

    def _serialize(self, value, attr, obj, **kwargs):
        if value is None:
            return None
        value = complex(value)
        return value.real if value.imag == 0 else str(value)

    def _deserialize(self, value, attr, data, **kwargs):
        if isinstance(value, bool):
            raise self.make_error('invalid')
        try:
            number = complex(value.replace(' ', '')) if isinstance(value, str) else complex(value)
        except (TypeError, ValueError):
            raise self.make_error('invalid')
        return number.real if number.imag == 0 else number


class StrictSchema(Schema):
    """Rejects unknown keys; turns model invariant errors into validation errors"""

    class Meta:
        unknown = RAISE

    model = None

    @post_load
    def make_object(self, data, **kwargs):
        try:
            return self.model(**data)
        except ConfigurationError as e:
            raise ValidationError(e.message)


class NetworkConfigSchema(StrictSchema):
    model = NetworkConfig

    n_cores = fields.Integer(validate=validate.Range(min=1))
    n_tags = fields.Integer(validate=validate.Range(min=1))
    n_channels = fields.Integer(validate=validate.Range(min=1))
    n_training = fields.Integer(validate=validate.Range(min=1))

    core_radius = fields.Float()
    core_height = fields.Float()
    tag_height_range = fields.List(fields.Float(), validate=validate.Length(equal=2))

    wavelength = fields.Float()
    path_loss_exponent = fields.Float(validate=validate.Range(min=0, min_inclusive=False))
    path_loss_exponent_cross = fields.Float(allow_none=True, validate=validate.Range(min=0, min_inclusive=False))
    reference_distance = fields.Float()
    kappa_dl_dB = fields.Float(allow_nan=True)
    kappa_ul_dB = fields.Float(allow_nan=True)

    power_dBm = fields.Float()
    noise_figure_dB = fields.Float()
    noise_var = fields.Float(allow_none=True)
    n_tx = fields.Integer(validate=validate.Range(min=1))
    n_rx = fields.Integer(validate=validate.Range(min=1))
    symbol_period = fields.Float()
    subcarrier_step = fields.Integer(validate=validate.Range(min=1))

    gamma0 = ComplexNumber()
    gamma1 = ComplexNumber()
    eta = fields.Float()

    seed = fields.Integer(validate=validate.Range(min=0))
    fixed_phase = fields.Float(allow_none=True)

    @post_load
    def make_object(self, data, **kwargs):
        if 'tag_height_range' in data:
            data['tag_height_range'] = tuple(data['tag_height_range'])
        return super().make_object(data, **kwargs)


class SolverParamsSchema(StrictSchema):
    model = SolverParams

    n_max = fields.Integer(validate=validate.Range(min=1))
    alpha = fields.Float(validate=validate.Range(min=0, max=1, max_inclusive=False))
    epsilon = fields.Float(validate=validate.Range(min=0, min_inclusive=False))
    jitter = fields.Float(validate=validate.Range(min=0))
    jitter_seed = fields.Integer(validate=validate.Range(min=0))


class ExperimentSectionSchema(Schema):
    """The `experiment:` section; returned as a dict and folded into ExperimentSpec"""

    class Meta:
        unknown = RAISE

    power_sweep_dBm = fields.List(fields.Float(), validate=validate.Length(min=1))
    detectors = fields.List(fields.String(validate=validate.OneOf(DETECTOR_CHOICES)), validate=validate.Length(min=1))
    methods = fields.List(fields.String(validate=validate.OneOf(METHOD_CHOICES)), validate=validate.Length(min=1))
    frames = fields.Integer(validate=validate.Range(min=1))
    trials = fields.Integer(validate=validate.Range(min=1))
    seed = fields.Integer(validate=validate.Range(min=0))
    output_dir = fields.String()
    g_kind = fields.String(validate=validate.OneOf(G_CHOICES))
    random_draws = fields.Integer(validate=validate.Range(min=1))
    workers = fields.Integer(validate=validate.Range(min=1))
    dump_tables = fields.Boolean()


class ExperimentSpecSchema(Schema):
    """Top-level experiment file: network, solver and experiment sections"""

    class Meta:
        unknown = RAISE

    network = fields.Nested(NetworkConfigSchema)
    solver = fields.Nested(SolverParamsSchema)
    experiment = fields.Nested(ExperimentSectionSchema)

    @post_load
    def make_spec(self, data, **kwargs):
        section = dict(data.get('experiment') or {})
        if 'power_sweep_dBm' in section:
            section['power_sweep_dBm'] = tuple(section['power_sweep_dBm'])
        if 'detectors' in section:
            section['detectors'] = tuple(DetectorKind(d) for d in section['detectors'])
        if 'methods' in section:
            section['methods'] = tuple(Method(m) for m in section['methods'])
        if 'g_kind' in section:
            section['g_kind'] = GKind(section['g_kind'])
        try:
            return ExperimentSpec(
                network=data.get('network') or NetworkConfig(),
                solver=data.get('solver') or SolverParams(),
                **section,
            )
        except ConfigurationError as e:
            raise ValidationError(e.message)


class SolveRequestSchema(Schema):
    """POST /allocator/solve payload"""

    class Meta:
        unknown = RAISE

    weights = fields.List(fields.List(fields.Float()), required=True, validate=validate.Length(min=1))
    group_of = fields.List(fields.Integer(validate=validate.Range(min=0)), load_default=None)
    method = fields.String(load_default=Method.MAX_SUM.value, validate=validate.OneOf(METHOD_CHOICES))
    solver = fields.Nested(SolverParamsSchema, load_default=None)
    seed = fields.Integer(load_default=0, validate=validate.Range(min=0))
