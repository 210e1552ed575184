import sys

from kimgold.cli import main

sys.exit(main())
