"""
Settings: a flat ``KEY = value`` file validated by :class:`SettingsForm`.
"""
import hashlib
import json
import logging
import typing as t
from pathlib import Path

from segprompt.cfpg.generator import CfpgConfig
from segprompt.core.exceptions import ConfigurationError
from segprompt.forms.settings import SettingsForm
from segprompt.mbo.graphcut import EnergyParams
from segprompt.mbo.refine import MboConfig

logger = logging.getLogger(__name__)

Overrides = t.Union[t.Mapping[str, t.Any], t.Sequence[str], None]


def parse_settings_text(text: str, source: str = '<string>') -> t.Dict[str, str]:
    """
    Read ``KEY = value`` lines. ``#`` starts a comment, blank lines are
    skipped, keys are case-insensitive and a repeated key keeps its last value.
    """
    values: t.Dict[str, str] = {}
    for number, line in enumerate(text.splitlines(), start=1):
        line = line.split('#', 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition('=')
        key = key.strip().upper()
        if not sep or not key:
            raise ConfigurationError(f'{source}:{number}: expected KEY = value, got {line!r}', path=source)
        values[key] = value.strip()
    return values


def parse_overrides(overrides: Overrides) -> t.Dict[str, str]:
    if not overrides:
        return {}
    if isinstance(overrides, t.Mapping):
        return {str(key).upper(): _as_text(value) for key, value in overrides.items()}

    values = {}
    for item in overrides:
        key, sep, value = str(item).partition('=')
        if not sep or not key.strip():
            raise ConfigurationError(f'Override must look like KEY=VALUE, got {item!r}')
        values[key.strip().upper()] = value.strip()
    return values


def _as_text(value: t.Any) -> str:
    if isinstance(value, (list, tuple)):
        return ','.join(str(item) for item in value)
    return str(value)


class Settings:
    """
    Resolved, validated settings. Values are reachable by their upper-case key
    (``settings['CFPG_TAU']``) and grouped into the per-stage configs.
    """

    def __init__(self, values: t.Optional[t.Mapping[str, t.Any]] = None, source: t.Optional[str] = None) -> None:
        raw = {str(key).upper(): _as_text(value) for key, value in (values or {}).items()}
        known = {name.upper() for name in SettingsForm()._fields}
        unknown = sorted(set(raw) - known)
        if unknown:
            raise ConfigurationError(f'Unknown settings: {", ".join(unknown)}', path=source)

        form = SettingsForm(formdata=raw)
        if not form.validate():
            problems = '; '.join(f'{name.upper()}: {" ".join(errors)}' for name, errors in sorted(form.errors.items()))
            raise ConfigurationError(f'Invalid settings: {problems}', path=source)

        self.source = source
        self._values: t.Dict[str, t.Any] = {name.upper(): value for name, value in form.data.items()}
        logger.debug('Resolved %d settings from %s', len(self._values), source or 'defaults')

    @classmethod
    def load(cls, path: t.Optional[t.Union[str, Path]] = None, overrides: Overrides = None) -> 'Settings':
        """Defaults, then the file at ``path``, then ``overrides``."""
        values: t.Dict[str, str] = {}
        source = None
        if path is not None:
            source = str(path)
            try:
                text = Path(path).read_text(encoding='utf-8')
            except OSError as exc:
                raise ConfigurationError(f'Cannot read settings file: {exc.strerror}', path=source)
            values.update(parse_settings_text(text, source))
        values.update(parse_overrides(overrides))
        return cls(values, source)

    def __getitem__(self, key: str) -> t.Any:
        return self._values[key.upper()]

    def __repr__(self) -> str:
        return f'Settings({self.config_hash()[:12]})'

    def as_dict(self) -> t.Dict[str, t.Any]:
        return {key: list(value) if isinstance(value, tuple) else value for key, value in sorted(self._values.items())}

    def config_hash(self) -> str:
        canonical = json.dumps(self.as_dict(), sort_keys=True, separators=(',', ':'))
        return hashlib.sha256(canonical.encode('utf-8')).hexdigest()

    @property
    def thresholds(self) -> t.Tuple[float, ...]:
        return tuple(self._values['METRICS_THRESHOLDS'])

    def cfpg_config(self) -> CfpgConfig:
        return CfpgConfig(seed=self['CFPG_SEED'], tau=self['CFPG_TAU'], area_threshold=self['CFPG_AREA_THRESHOLD'],
                          area_fraction=self['CFPG_AREA_FRACTION'], morph_radius=self['CFPG_MORPH_RADIUS'],
                          max_iter=self['CFPG_KMEANS_MAX_ITER'], tol=self['CFPG_KMEANS_TOL'])

    def energy_params(self) -> EnergyParams:
        return EnergyParams(gamma=self['ENERGY_GAMMA'], lam=self['ENERGY_LAMBDA'])

    def mbo_config(self) -> MboConfig:
        return MboConfig(erosion_fraction=self['MBO_EROSION_FRACTION'], band_factor=self['MBO_BAND_FACTOR'],
                         components=self['MBO_COMPONENTS'], max_outer_iters=self['MBO_MAX_OUTER_ITERS'],
                         epsilon=self['MBO_EPSILON'], em_max_iter=self['MBO_EM_MAX_ITER'], em_tol=self['MBO_EM_TOL'],
                         reg_eps=self['MBO_REG_EPS'], seed=self['MBO_SEED'], fit_samples=self['MBO_FIT_SAMPLES'],
                         energy=self.energy_params())
