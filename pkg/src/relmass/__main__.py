import sys

from relmass.cli import main

sys.exit(main())
