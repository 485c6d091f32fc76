import sys

from earedge.cli import main

sys.exit(main())
