from .text_utils import text_matches, read_sexps, format_sexp
from .memory import Memory
from .file_utils import append_events
