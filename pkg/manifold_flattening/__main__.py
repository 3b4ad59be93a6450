"""Allow `python -m manifold_flattening`."""
import sys

from .cli import main

sys.exit(main())
