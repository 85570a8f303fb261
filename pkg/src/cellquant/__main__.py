import sys

from cellquant.cli import main

sys.exit(main())
