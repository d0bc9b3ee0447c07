import sys

from ancestral.cli import main

sys.exit(main())
