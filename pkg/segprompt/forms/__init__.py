from segprompt.forms.fields import FloatListField
from segprompt.forms.meta import SettingsFormMeta
from segprompt.forms.settings import SettingsForm

__all__ = (
    "FloatListField",
    "SettingsFormMeta",
    "SettingsForm",
)
