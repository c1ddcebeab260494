import sys

from kap.cli import main

sys.exit(main())
