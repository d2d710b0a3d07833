from wtforms import FloatField, IntegerField, form, validators

from segprompt.forms.fields import FloatListField
from segprompt.forms.meta import SettingsFormMeta


class SettingsForm(form.Form):
    """
    Every tunable of the point generator, the refinement loop, the energy and
    the metrics. Field names are the lower-case form of the settings keys.
    """
    Meta = SettingsFormMeta

    # point generator
    cfpg_seed = IntegerField(default=0, validators=[validators.NumberRange(min=0)])
    cfpg_tau = FloatField(default=0.5)
    cfpg_area_threshold = IntegerField(default=16, validators=[validators.NumberRange(min=0)])
    cfpg_area_fraction = FloatField(default=0.005, validators=[validators.NumberRange(min=0.0, max=0.5)])
    cfpg_morph_radius = IntegerField(default=1, validators=[validators.NumberRange(min=1)])
    cfpg_kmeans_max_iter = IntegerField(default=50, validators=[validators.NumberRange(min=1)])
    cfpg_kmeans_tol = FloatField(default=1e-4, validators=[validators.NumberRange(min=0.0)])

    # refinement
    mbo_erosion_fraction = FloatField(default=0.02, validators=[validators.NumberRange(min=1e-6, max=0.5)])
    mbo_band_factor = IntegerField(default=3, validators=[validators.NumberRange(min=1)])
    mbo_components = IntegerField(default=5, validators=[validators.NumberRange(min=1, max=20)])
    mbo_max_outer_iters = IntegerField(default=5, validators=[validators.NumberRange(min=1)])
    mbo_epsilon = FloatField(default=0.001)
    mbo_em_max_iter = IntegerField(default=20, validators=[validators.NumberRange(min=1)])
    mbo_em_tol = FloatField(default=1e-5, validators=[validators.NumberRange(min=0.0)])
    mbo_reg_eps = FloatField(default=1e-4, validators=[validators.NumberRange(min=1e-12)])
    mbo_seed = IntegerField(default=0, validators=[validators.NumberRange(min=0)])
    mbo_fit_samples = IntegerField(default=20000, validators=[validators.NumberRange(min=0)])

    # energy
    energy_gamma = FloatField(default=50.0, validators=[validators.NumberRange(min=1e-12)])
    energy_lambda = FloatField(default=1.0, validators=[validators.NumberRange(min=1e-12)])

    # metrics
    metrics_thresholds = FloatListField(default=(0.5, 0.6, 0.7, 0.8, 0.9))

    def validate_cfpg_tau(self, field):
        if field.data is not None and not 0.0 < field.data < 1.0:
            raise validators.ValidationError('Must lie strictly between 0 and 1.')

    def validate_mbo_epsilon(self, field):
        if field.data is not None and not 0.0 <= field.data < 1.0:
            raise validators.ValidationError('Must lie in [0, 1).')

    def validate_metrics_thresholds(self, field):
        if not field.data:
            raise validators.ValidationError('At least one threshold is required.')
        if any(not 0.0 <= value <= 1.0 for value in field.data):
            raise validators.ValidationError('Thresholds must lie in [0, 1].')
