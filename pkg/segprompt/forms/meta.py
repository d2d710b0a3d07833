import typing as t

from werkzeug.datastructures import MultiDict
from wtforms.meta import DefaultMeta


class SettingsFormMeta(DefaultMeta):
    """Settings are read from files, never from a request: no CSRF token and plain mappings are accepted."""
    csrf = False

    def wrap_formdata(self, form, formdata):
        if isinstance(formdata, t.Mapping) and not hasattr(formdata, 'getlist'):
            formdata = MultiDict({str(key).lower(): value for key, value in formdata.items()})
        return super().wrap_formdata(form, formdata)
