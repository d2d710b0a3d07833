from segprompt.utils.version import __version__

TITLE = 'SegPrompt'
DESCRIPTION = 'Training-free point prompts and mask boundary refinement for referring remote sensing segmentation'
VERSION = __version__
AUTHOR = 'Juan Vazquez'
AUTHOR_EMAIL = 'juanmapr913@gmail.com'
PY_VERSION = "3.10.0"
