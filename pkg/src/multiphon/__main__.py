import sys

from multiphon.cli import main

sys.exit(main())
