"""Allow ``python -m gl_conditional_density``."""

import sys

from .cli import main

sys.exit(main())
