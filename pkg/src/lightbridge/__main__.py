"""Allow ``python -m lightbridge`` as an alias for the bridge CLI."""

import sys

from .cli import main

sys.exit(main())
