import sys

from mqpc.cli import main

sys.exit(main())
