import typing as t

from wtforms import Field


class FloatListField(Field):
    """Comma separated floats, e.g. ``0.5,0.6,0.7``."""

    def __init__(self, label=None, validators=None, **kwargs):
        super().__init__(label, validators, **kwargs)

    def _value(self) -> str:
        if self.raw_data:
            return self.raw_data[0]
        return ','.join(f'{value:g}' for value in self.data or ())

    def process_data(self, value: t.Optional[t.Sequence[float]]):
        self.data = tuple(float(item) for item in value) if value is not None else None

    def process_formdata(self, valuelist):
        if not valuelist:
            return
        parts = [part.strip() for part in str(valuelist[0]).split(',') if part.strip()]
        try:
            self.data = tuple(float(part) for part in parts)
        except ValueError:
            self.data = None
            raise ValueError(self.gettext('Not a valid list of numbers.'))
