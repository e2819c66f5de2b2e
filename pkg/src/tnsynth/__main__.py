import sys

from tnsynth.cli import main

sys.exit(main())
