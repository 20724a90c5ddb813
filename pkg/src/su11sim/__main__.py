import sys

from su11sim.cli import main

sys.exit(main())
